#include "mixdeconv/fixed_point.hpp"

#include "mixdeconv/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mixdeconv {

// ---------------------------------------------------------------------------
// MixingDensity

MixingDensity::MixingDensity(std::shared_ptr<const Grid> grid, std::vector<double> values)
  : grid_(std::move(grid))
  , values_(std::move(values))
{
  if (!grid_)
    throw Error(ErrorCode::invalid_config, "mixing density needs a grid");
  if (values_.size() != grid_->size())
    throw Error(ErrorCode::length_mismatch,
                "mixing density has " + std::to_string(values_.size()) +
                  " values for a grid of " + std::to_string(grid_->size()));
  for (double v : values_)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw Error(ErrorCode::invalid_parameter,
                  "mixing density values must be finite and nonnegative");
  const double total = grid_->integrate(values_);
  if (std::abs(total - 1.0) > 1e-8)
    throw Error(ErrorCode::invalid_parameter,
                "mixing density integrates to " + std::to_string(total) +
                  ", expected 1");
}

MixingDensity MixingDensity::normalized(std::shared_ptr<const Grid> grid,
                                        std::vector<double> values)
{
  if (!grid)
    throw Error(ErrorCode::invalid_config, "mixing density needs a grid");
  const double total = grid->integrate(values);
  if (!(total > 0.0) || !std::isfinite(total))
    throw Error(ErrorCode::invalid_parameter,
                "cannot normalize values with total mass " + std::to_string(total));
  for (double& v : values)
    v /= total;
  return { std::move(grid), std::move(values) };
}

MixingDensity MixingDensity::uniform(std::shared_ptr<const Grid> grid)
{
  if (!grid)
    throw Error(ErrorCode::invalid_config, "mixing density needs a grid");
  const double height = 1.0 / (grid->hi() - grid->lo());
  const std::size_t m = grid->size();
  return normalized(std::move(grid), std::vector<double>(m, height));
}

bool MixingDensity::strictly_positive() const
{
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v > 0.0; });
}

// ---------------------------------------------------------------------------
// Row-level kernels. All sums run over distinct rows in the matrix's fixed
// (value-sorted) order and over grid nodes in index order.

namespace {

void check_dimensions(std::span<const double> p, const KernelMatrix& k)
{
  if (p.size() != k.columns())
    throw Error(ErrorCode::dimension_mismatch,
                "density has " + std::to_string(p.size()) +
                  " grid values but the kernel matrix has " +
                  std::to_string(k.columns()) + " columns");
}

//! Scaled mixture value per distinct row: f_r / exp(row_log_scale(r)).
void row_mixture(const KernelMatrix& k,
                 std::span<const double> p,
                 std::span<const double> weights,
                 std::vector<double>& mass,
                 std::vector<double>& f)
{
  const std::size_t m = k.columns();
  mass.resize(m);
  for (std::size_t j = 0; j < m; ++j)
    mass[j] = p[j] * weights[j];
  f.resize(k.distinct_rows());
  for (std::size_t r = 0; r < k.distinct_rows(); ++r) {
    const auto row = k.scaled_row(r);
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j)
      sum += row[j] * mass[j];
    if (!(sum > 0.0))
      throw Error(ErrorCode::zero_likelihood,
                  "mixture density is zero at a data point (distinct row " +
                    std::to_string(r) + ")");
    f[r] = sum;
  }
}

double loglik_from_rows(const KernelMatrix& k, const std::vector<double>& f)
{
  double total = 0.0;
  for (std::size_t r = 0; r < f.size(); ++r)
    total += k.row_count(r) * (k.row_log_scale(r) + std::log(f[r]));
  return total;
}

void gradient_from_rows(const KernelMatrix& k,
                        const std::vector<double>& f,
                        std::vector<double>& d)
{
  const std::size_t m = k.columns();
  const double n = static_cast<double>(k.observations());
  d.assign(m, 0.0);
  for (std::size_t r = 0; r < f.size(); ++r) {
    const double coef = k.row_count(r) / (n * f[r]);
    const auto row = k.scaled_row(r);
    for (std::size_t j = 0; j < m; ++j)
      d[j] += coef * row[j];
  }
}

//! p <- p * d, renormalized; returns the sup-norm change.
double apply_update(std::vector<double>& p,
                    const std::vector<double>& d,
                    std::span<const double> weights)
{
  const std::size_t m = p.size();
  std::vector<double> next(m);
  double total = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    next[j] = p[j] * d[j];
    total += next[j] * weights[j];
  }
  double change = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    next[j] /= total;
    change = std::max(change, std::abs(next[j] - p[j]));
  }
  p.swap(next);
  return change;
}

} // namespace

std::vector<double> mixture_at_data(const MixingDensity& p, const KernelMatrix& k)
{
  check_dimensions(p.values(), k);
  std::vector<double> mass, f;
  row_mixture(k, p.values(), p.grid().weights(), mass, f);
  std::vector<double> out(k.observations());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::size_t r = k.row_of(i);
    out[i] = std::exp(k.row_log_scale(r)) * f[r];
  }
  return out;
}

double log_likelihood(const MixingDensity& p, const KernelMatrix& k)
{
  check_dimensions(p.values(), k);
  std::vector<double> mass, f;
  row_mixture(k, p.values(), p.grid().weights(), mass, f);
  return loglik_from_rows(k, f);
}

std::vector<double> stationarity_gradient(const MixingDensity& p,
                                          const KernelMatrix& k)
{
  check_dimensions(p.values(), k);
  std::vector<double> mass, f, d;
  row_mixture(k, p.values(), p.grid().weights(), mass, f);
  gradient_from_rows(k, f, d);
  return d;
}

MixingDensity update_step(const MixingDensity& p, const KernelMatrix& k)
{
  check_dimensions(p.values(), k);
  std::vector<double> mass, f, d;
  row_mixture(k, p.values(), p.grid().weights(), mass, f);
  gradient_from_rows(k, f, d);
  std::vector<double> next(p.values().begin(), p.values().end());
  apply_update(next, d, p.grid().weights());
  return { p.grid_ptr(), std::move(next) };
}

// ---------------------------------------------------------------------------

std::string_view to_string(StopReason reason)
{
  switch (reason) {
    case StopReason::rule_satisfied: return "rule-satisfied";
    case StopReason::max_iter: return "max-iter";
    case StopReason::converged: return "converged";
  }
  return "unknown";
}

StopReason stop_reason_from_string(std::string_view text)
{
  if (text == "rule-satisfied")
    return StopReason::rule_satisfied;
  if (text == "max-iter")
    return StopReason::max_iter;
  if (text == "converged")
    return StopReason::converged;
  throw Error(ErrorCode::parse_error, "unknown stop reason '" + std::string(text) + "'");
}

bool stopping_rule_satisfied(double loglik, double external_loglik, double delta)
{
  return external_loglik - loglik < delta * std::abs(external_loglik);
}

FitResult run(const MixingDensity& p0,
              const KernelMatrix& k,
              const StoppingConfig& stop,
              const IterateObserver& observer)
{
  check_dimensions(p0.values(), k);
  if (stop.external_loglik) {
    if (!(stop.delta > 0.0) || !std::isfinite(stop.delta))
      throw Error(ErrorCode::invalid_config, "stopping rule needs delta > 0");
    if (!std::isfinite(*stop.external_loglik))
      throw Error(ErrorCode::invalid_config, "external log-likelihood is not finite");
  }
  if (!(stop.fp_tol >= 0.0))
    throw Error(ErrorCode::invalid_config, "fp_tol must be nonnegative");
  if (!p0.strictly_positive())
    throw Error(ErrorCode::invalid_parameter,
                "initial density must be strictly positive on the grid");

  const auto weights = p0.grid().weights();
  std::vector<double> p(p0.values().begin(), p0.values().end());
  std::vector<double> mass, f, d;
  std::vector<double> trajectory;
  StopReason reason = StopReason::max_iter;
  bool converged = false;

  for (std::size_t t = 0;; ++t) {
    row_mixture(k, p, weights, mass, f);
    const double ll = loglik_from_rows(k, f);
    trajectory.push_back(ll);
    if (observer)
      observer(t, MixingDensity(p0.grid_ptr(), p));

    if (stop.external_loglik &&
        stopping_rule_satisfied(ll, *stop.external_loglik, stop.delta)) {
      reason = StopReason::rule_satisfied;
      break;
    }
    if (converged) {
      reason = StopReason::converged;
      break;
    }
    if (t >= stop.max_iter) {
      reason = StopReason::max_iter;
      break;
    }
    gradient_from_rows(k, f, d);
    converged = apply_update(p, d, weights) < stop.fp_tol;
  }

  FitResult result{ MixingDensity(p0.grid_ptr(), std::move(p)),
                    std::move(trajectory),
                    0,
                    reason,
                    stop.external_loglik,
                    stop.delta };
  result.stop_iteration = result.loglik_trajectory.size() - 1;
  return result;
}

} // namespace mixdeconv
