#include "mixdeconv/kernels.hpp"

#include "mixdeconv/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace mixdeconv {

std::string_view to_string(KernelFamily family)
{
  switch (family) {
    case KernelFamily::normal: return "normal";
    case KernelFamily::student_t: return "student_t";
    case KernelFamily::gamma: return "gamma";
    case KernelFamily::poisson: return "poisson";
  }
  return "unknown";
}

namespace {

void require_positive(double value, const char* what)
{
  if (!(value > 0.0) || !std::isfinite(value))
    throw Error(ErrorCode::invalid_parameter,
                std::string(what) + " must be positive and finite, got " +
                  std::to_string(value));
}

bool is_nonnegative_integer(double y)
{
  return y >= 0.0 && std::isfinite(y) && std::floor(y) == y;
}

} // namespace

KernelModel KernelModel::normal(double variance)
{
  require_positive(variance, "normal variance");
  return { KernelFamily::normal, variance, 0.0 };
}

KernelModel KernelModel::normal_sd(double sd)
{
  require_positive(sd, "normal standard deviation");
  return normal(sd * sd);
}

KernelModel KernelModel::student_t(double scale, double df)
{
  require_positive(scale, "student_t scale");
  require_positive(df, "student_t degrees of freedom");
  return { KernelFamily::student_t, scale, df };
}

KernelModel KernelModel::gamma(double shape_mult, double rate)
{
  require_positive(shape_mult, "gamma shape multiplier");
  require_positive(rate, "gamma rate");
  return { KernelFamily::gamma, shape_mult, rate };
}

KernelModel KernelModel::poisson()
{
  return { KernelFamily::poisson, 0.0, 0.0 };
}

namespace {

[[noreturn]] void wrong_family(KernelFamily family, const char* what)
{
  throw Error(ErrorCode::invalid_parameter,
              std::string(to_string(family)) + " kernel has no " + what);
}

} // namespace

double KernelModel::variance() const
{
  if (family_ != KernelFamily::normal)
    wrong_family(family_, "variance");
  return a_;
}

double KernelModel::scale() const
{
  if (family_ != KernelFamily::student_t)
    wrong_family(family_, "scale");
  return a_;
}

double KernelModel::df() const
{
  if (family_ != KernelFamily::student_t)
    wrong_family(family_, "degrees of freedom");
  return b_;
}

double KernelModel::shape_mult() const
{
  if (family_ != KernelFamily::gamma)
    wrong_family(family_, "shape multiplier");
  return a_;
}

double KernelModel::rate() const
{
  if (family_ != KernelFamily::gamma)
    wrong_family(family_, "rate");
  return b_;
}

void KernelModel::check_parameter(double x) const
{
  if (!std::isfinite(x))
    throw Error(ErrorCode::invalid_parameter, "mixing parameter is not finite");
  if ((family_ == KernelFamily::gamma || family_ == KernelFamily::poisson) &&
      !(x > 0.0))
    throw Error(ErrorCode::invalid_parameter,
                std::string(to_string(family_)) +
                  " kernel needs a positive mixing parameter, got " +
                  std::to_string(x));
}

void KernelModel::check_observation(double y) const
{
  if (!std::isfinite(y))
    throw Error(ErrorCode::domain_violation, "observation is not finite");
  if (family_ == KernelFamily::poisson && !is_nonnegative_integer(y))
    throw Error(ErrorCode::domain_violation,
                "poisson kernel needs nonnegative integer observations, got " +
                  std::to_string(y));
  if (family_ == KernelFamily::gamma && !(y > 0.0))
    throw Error(ErrorCode::domain_violation,
                "gamma kernel needs positive observations, got " +
                  std::to_string(y));
}

double KernelModel::log_density(double y, double x) const
{
  check_parameter(x);
  check_observation(y);
  switch (family_) {
    case KernelFamily::normal: {
      const double z = y - x;
      return -0.5 * (std::log(2.0 * std::numbers::pi * a_) + z * z / a_);
    }
    case KernelFamily::student_t: {
      const double z = (y - x) / a_;
      const double nu = b_;
      return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
             0.5 * std::log(nu * std::numbers::pi) -
             0.5 * (nu + 1.0) * std::log1p(z * z / nu) - std::log(a_);
    }
    case KernelFamily::gamma: {
      const double shape = a_ * x;
      return shape * std::log(b_) + (shape - 1.0) * std::log(y) - b_ * y -
             std::lgamma(shape);
    }
    case KernelFamily::poisson:
      return y * std::log(x) - x - std::lgamma(y + 1.0);
  }
  return 0.0;
}

double KernelModel::density(double y, double x) const
{
  return std::exp(log_density(y, x));
}

double KernelModel::sample(double x, std::mt19937_64& rng) const
{
  check_parameter(x);
  switch (family_) {
    case KernelFamily::normal:
      return std::normal_distribution<double>(x, std::sqrt(a_))(rng);
    case KernelFamily::student_t:
      return x + a_ * std::student_t_distribution<double>(b_)(rng);
    case KernelFamily::gamma:
      return std::gamma_distribution<double>(a_ * x, 1.0 / b_)(rng);
    case KernelFamily::poisson:
      return static_cast<double>(std::poisson_distribution<long long>(x)(rng));
  }
  return x;
}

namespace presets {

KernelModel kernel1()
{
  return KernelModel::normal(0.5);
}

KernelModel kernel2()
{
  return KernelModel::student_t(0.3, 5.0);
}

KernelModel kernel3()
{
  return KernelModel::gamma(20.0, 20.0);
}

} // namespace presets

KernelModel kernel_from_name(std::string_view name)
{
  if (name == "kernel1" || name == "normal")
    return presets::kernel1();
  if (name == "kernel2" || name == "student_t")
    return presets::kernel2();
  if (name == "kernel3" || name == "gamma")
    return presets::kernel3();
  if (name == "poisson")
    return KernelModel::poisson();
  throw Error(ErrorCode::invalid_config,
              "unknown kernel '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// KernelMatrix

void KernelMatrix::append_row(std::span<const double> log_values,
                              std::size_t row_index)
{
  const double top = *std::max_element(log_values.begin(), log_values.end());
  if (!std::isfinite(top))
    throw Error(ErrorCode::domain_violation,
                "observation row " + std::to_string(row_index) +
                  " has zero kernel value at every grid node");
  log_scale_.push_back(top);
  for (double lv : log_values)
    scaled_.push_back(std::exp(lv - top));
}

KernelMatrix::KernelMatrix(const KernelModel& model,
                           const Dataset& data,
                           const Grid& grid)
{
  if (data.size() == 0)
    throw Error(ErrorCode::empty_dataset, "kernel matrix needs observations");
  columns_ = grid.size();
  for (double x : grid.nodes())
    model.check_parameter(x);
  for (std::size_t i = 0; i < data.size(); ++i) {
    try {
      model.check_observation(data.values[i]);
    } catch (const Error& e) {
      throw Error(e.code(), "row " + std::to_string(i) + ": " + e.what());
    }
  }

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{ 0 });
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    return data.values[l] < data.values[r];
  });

  row_of_.assign(data.size(), 0);
  std::vector<double> log_row(columns_);
  for (std::size_t k = 0; k < order.size();) {
    const double y = data.values[order[k]];
    std::size_t end = k;
    while (end < order.size() && data.values[order[end]] == y) {
      row_of_[order[end]] = counts_.size();
      ++end;
    }
    for (std::size_t j = 0; j < columns_; ++j)
      log_row[j] = model.log_density(y, grid.node(j));
    append_row(log_row, order[k]);
    counts_.push_back(static_cast<double>(end - k));
    k = end;
  }
}

KernelMatrix KernelMatrix::from_values(std::size_t n,
                                       std::size_t m,
                                       std::span<const double> entries)
{
  if (n == 0)
    throw Error(ErrorCode::empty_dataset, "kernel matrix needs observations");
  if (entries.size() != n * m || m == 0)
    throw Error(ErrorCode::dimension_mismatch,
                "kernel matrix entries do not match " + std::to_string(n) + " x " +
                  std::to_string(m));
  KernelMatrix km;
  km.columns_ = m;
  std::vector<double> log_row(m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double v = entries[i * m + j];
      if (!(v >= 0.0) || !std::isfinite(v))
        throw Error(ErrorCode::domain_violation,
                    "kernel entry (" + std::to_string(i) + ", " +
                      std::to_string(j) + ") is negative or not finite");
      log_row[j] = std::log(v);
    }
    km.append_row(log_row, i);
    km.counts_.push_back(1.0);
    km.row_of_.push_back(i);
  }
  return km;
}

double KernelMatrix::operator()(std::size_t i, std::size_t j) const
{
  const std::size_t r = row_of_[i];
  return std::exp(log_scale_[r]) * scaled_[r * columns_ + j];
}

} // namespace mixdeconv
