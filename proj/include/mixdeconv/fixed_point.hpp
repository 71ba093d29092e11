#pragma once

#include "mixdeconv/grid.hpp"
#include "mixdeconv/kernels.hpp"

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace mixdeconv {

//! Nonnegative density on a grid that integrates to one (within 1e-8).
class MixingDensity
{
public:
  //! Takes values as given; throws if they are negative, non-finite, or do
  //! not integrate to 1 within 1e-8.
  MixingDensity(std::shared_ptr<const Grid> grid, std::vector<double> values);

  //! Rescales nonnegative values so they integrate to 1.
  static MixingDensity normalized(std::shared_ptr<const Grid> grid,
                                  std::vector<double> values);

  //! Unif(lo, hi) on the grid's support.
  static MixingDensity uniform(std::shared_ptr<const Grid> grid);

  const Grid& grid() const { return *grid_; }
  const std::shared_ptr<const Grid>& grid_ptr() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t j) const { return values_[j]; }

  double mass() const { return grid_->integrate(values_); }
  bool strictly_positive() const;

private:
  std::shared_ptr<const Grid> grid_;
  std::vector<double> values_;
};

//! f_t(Y_i) = sum_j k(Y_i | x_j) p(x_j) w_j for every observation, in input
//! order.
std::vector<double> mixture_at_data(const MixingDensity& p, const KernelMatrix& k);

//! sum_i log f(Y_i). Throws Error(zero_likelihood) if any f(Y_i) is zero.
double log_likelihood(const MixingDensity& p, const KernelMatrix& k);

//! One averaged Bayes update:
//!   p'(x) = p(x) (1/n) sum_i k(Y_i | x) / f(Y_i),
//! followed by renormalization on the grid.
MixingDensity update_step(const MixingDensity& p, const KernelMatrix& k);

//! Gradient function D(x_j) = (1/n) sum_i k(Y_i | x_j) / f(Y_i).
//!
//! D is the multiplicative factor of the update. On the grid, p is the
//! maximum-likelihood mixing density iff D <= 1 everywhere, with equality on
//! the cells carrying mass.
std::vector<double> stationarity_gradient(const MixingDensity& p,
                                          const KernelMatrix& k);

enum class StopReason
{
  rule_satisfied,
  max_iter,
  converged
};

std::string_view to_string(StopReason reason);
StopReason stop_reason_from_string(std::string_view text);

struct StoppingConfig
{
  //! Reference log-likelihood for the relative-gap rule; the rule is
  //! disabled when absent.
  std::optional<double> external_loglik;
  double delta = 0.05;
  std::size_t max_iter = 10000;
  //! Sup-norm change between successive iterates that counts as converged.
  double fp_tol = 1e-8;
};

struct FitResult
{
  MixingDensity final_density;
  std::vector<double> loglik_trajectory;
  std::size_t stop_iteration = 0;
  StopReason stop_reason = StopReason::max_iter;
  std::optional<double> external_loglik;
  double delta = 0.0;
};

//! true iff ext - loglik < delta |ext|.
bool stopping_rule_satisfied(double loglik, double external_loglik, double delta);

//! Called with (t, p_t) for every iterate, p_0 included.
using IterateObserver = std::function<void(std::size_t, const MixingDensity&)>;

//! Iterates update_step from p0 and records l(p_t) at every t.
//!
//! Stops at the first t (t = 0 included) where the relative-gap rule holds,
//! otherwise when the last update moved p by less than fp_tol in sup-norm,
//! otherwise at max_iter. A rule hit on the same t as convergence is
//! reported as rule_satisfied.
FitResult run(const MixingDensity& p0,
              const KernelMatrix& k,
              const StoppingConfig& stop,
              const IterateObserver& observer = {});

} // namespace mixdeconv
