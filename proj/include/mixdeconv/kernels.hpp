#pragma once

#include "mixdeconv/dataset.hpp"
#include "mixdeconv/grid.hpp"

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mixdeconv {

enum class KernelFamily
{
  normal,
  student_t,
  gamma,
  poisson
};

std::string_view to_string(KernelFamily family);

//! Known conditional density k(y | x) of an observation given the latent
//! mixing parameter x.
//!
//! - normal:    N(y | x, variance)
//! - student_t: (1/scale) t_df((y - x) / scale)
//! - gamma:     Gamma(y | shape = shape_mult * x, rate)
//! - poisson:   Poisson(y | mean = x)
//!
//! All evaluation goes through log_density; density() exponentiates at the
//! end so large shapes and counts do not overflow.
class KernelModel
{
public:
  static KernelModel normal(double variance);
  static KernelModel normal_sd(double sd);
  static KernelModel student_t(double scale, double df);
  static KernelModel gamma(double shape_mult, double rate);
  static KernelModel poisson();

  KernelFamily family() const { return family_; }

  double variance() const;
  double scale() const;
  double df() const;
  double shape_mult() const;
  double rate() const;

  bool is_location_family() const
  {
    return family_ == KernelFamily::normal || family_ == KernelFamily::student_t;
  }
  bool is_discrete() const { return family_ == KernelFamily::poisson; }

  //! @throws Error(invalid_parameter) for x outside the family's parameter
  //!   range, Error(domain_violation) for y outside the observation space.
  double log_density(double y, double x) const;
  double density(double y, double x) const;

  void check_parameter(double x) const;
  void check_observation(double y) const;

  //! Draws Y ~ k(. | x).
  double sample(double x, std::mt19937_64& rng) const;

  bool operator==(const KernelModel&) const = default;

private:
  KernelModel(KernelFamily family, double a, double b)
    : family_(family)
    , a_(a)
    , b_(b)
  {}

  KernelFamily family_;
  double a_;
  double b_;
};

//! The three simulation kernels: N(y|x, 1/2) read as variance 1/2,
//! t_5 with scale 0.3, and Gamma(shape 20x, rate 20).
namespace presets {
KernelModel kernel1();
KernelModel kernel2();
KernelModel kernel3();
} // namespace presets

//! Resolves "kernel1".."kernel3" or a bare family name with its
//! conventional default parameters.
KernelModel kernel_from_name(std::string_view name);

//! Kernel values k(Y_i | x_j) for a dataset against a grid.
//!
//! Identical observations share one stored row with a multiplicity, and rows
//! are ordered by observation value; this makes every reduction over
//! observations independent of input order. Each stored row is scaled so its
//! largest entry is 1 and the log of the scale is kept separately, so the
//! likelihood stays finite even when raw kernel values underflow.
class KernelMatrix
{
public:
  KernelMatrix(const KernelModel& model, const Dataset& data, const Grid& grid);

  //! Builds a matrix from raw row-major n x m entries (one stored row per
  //! observation). Entries must be finite, nonnegative, and every row needs
  //! a positive entry.
  static KernelMatrix from_values(std::size_t n,
                                  std::size_t m,
                                  std::span<const double> entries);

  std::size_t observations() const { return row_of_.size(); }
  std::size_t columns() const { return columns_; }

  //! k(Y_i | x_j) for observation i in input order.
  double operator()(std::size_t i, std::size_t j) const;

  std::size_t distinct_rows() const { return counts_.size(); }
  std::span<const double> scaled_row(std::size_t r) const
  {
    return { scaled_.data() + r * columns_, columns_ };
  }
  double row_log_scale(std::size_t r) const { return log_scale_[r]; }
  double row_count(std::size_t r) const { return counts_[r]; }
  std::size_t row_of(std::size_t i) const { return row_of_[i]; }

  bool operator==(const KernelMatrix&) const = default;

private:
  KernelMatrix() = default;
  void append_row(std::span<const double> log_values, std::size_t row_index);

  std::size_t columns_ = 0;
  std::vector<double> scaled_;
  std::vector<double> log_scale_;
  std::vector<double> counts_;
  std::vector<std::size_t> row_of_;
};

inline KernelMatrix build_kernel_matrix(const KernelModel& model,
                                        const Dataset& data,
                                        const Grid& grid)
{
  return KernelMatrix(model, data, grid);
}

inline double kernel_density(const KernelModel& model, double y, double x)
{
  return model.density(y, x);
}

} // namespace mixdeconv
