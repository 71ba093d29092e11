#include "mixdeconv/comparators.hpp"

#include "mixdeconv/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace mixdeconv {

double quantile_type7(std::span<const double> sorted, double prob)
{
  if (sorted.empty())
    throw Error(ErrorCode::empty_dataset, "quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double nrd0_bandwidth(std::span<const double> data)
{
  const std::size_t n = data.size();
  if (n < 2)
    throw Error(ErrorCode::empty_dataset, "bandwidth selection needs n >= 2");

  const double mean = std::accumulate(data.begin(), data.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double y : data)
    ss += (y - mean) * (y - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));

  std::vector<double> sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile_type7(sorted, 0.75) - quantile_type7(sorted, 0.25);

  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0))
    spread = sd;
  if (!(spread > 0.0))
    throw Error(ErrorCode::degenerate_sample,
                "bandwidth selection failed: sample has zero spread");
  return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

KdeEstimate kde_external_loglik(const Dataset& data, bool discrete)
{
  if (discrete)
    throw Error(ErrorCode::discrete_data,
                "kernel density anchor is undefined for count data");
  const double h = nrd0_bandwidth(data.values);
  const std::size_t n = data.size();
  const double norm = 1.0 / (static_cast<double>(n) * h * std::sqrt(2.0 * std::numbers::pi));

  // Pairwise sums in sorted order so the result does not depend on the input
  // order of the sample.
  std::vector<double> y(data.values);
  std::sort(y.begin(), y.end());
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double z = (y[i] - y[k]) / h;
      sum += std::exp(-0.5 * z * z);
    }
    total += std::log(norm * sum);
  }
  return { h, total };
}

double npmle_external_loglik(const MixingDensity& p0,
                             const KernelMatrix& k,
                             std::size_t max_iter,
                             double fp_tol)
{
  StoppingConfig stop;
  stop.max_iter = max_iter;
  stop.fp_tol = fp_tol;
  return run(p0, k, stop).loglik_trajectory.back();
}

void PrConfig::validate() const
{
  if (!(weight_exponent > 0.5 && weight_exponent <= 1.0))
    throw Error(ErrorCode::invalid_config,
                "predictive recursion weight exponent must lie in (0.5, 1], got " +
                  std::to_string(weight_exponent));
  if (passes < 1)
    throw Error(ErrorCode::invalid_config, "predictive recursion needs passes >= 1");
}

double PrConfig::weight(std::size_t i) const
{
  if (zero_weights)
    return 0.0;
  return std::pow(static_cast<double>(i) + 1.0, -weight_exponent);
}

MixingDensity predictive_recursion(const MixingDensity& p0,
                                   const KernelMatrix& k,
                                   const PrConfig& cfg)
{
  cfg.validate();
  if (p0.size() != k.columns())
    throw Error(ErrorCode::dimension_mismatch,
                "density and kernel matrix disagree on the grid size");
  if (!p0.strictly_positive())
    throw Error(ErrorCode::invalid_parameter,
                "predictive recursion needs a strictly positive initial density");

  const std::size_t n = k.observations();
  const std::size_t m = k.columns();
  const auto weights = p0.grid().weights();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{ 0 });
  if (cfg.permutation_seed) {
    std::mt19937_64 rng(*cfg.permutation_seed);
    std::shuffle(order.begin(), order.end(), rng);
  }

  std::vector<double> p(p0.values().begin(), p0.values().end());
  std::size_t index = 0;
  for (std::size_t pass = 0; pass < cfg.passes; ++pass) {
    for (std::size_t obs : order) {
      const double w = cfg.weight(++index);
      if (w == 0.0)
        continue;
      const auto row = k.scaled_row(k.row_of(obs));
      double f = 0.0;
      for (std::size_t j = 0; j < m; ++j)
        f += row[j] * p[j] * weights[j];
      if (!(f > 0.0))
        throw Error(ErrorCode::zero_likelihood,
                    "predictive recursion: mixture is zero at observation " +
                      std::to_string(obs));
      for (std::size_t j = 0; j < m; ++j)
        p[j] = (1.0 - w) * p[j] + w * row[j] * p[j] / f;
    }
  }
  return MixingDensity::normalized(p0.grid_ptr(), std::move(p));
}

} // namespace mixdeconv
