#pragma once

#include "mixdeconv/dataset.hpp"
#include "mixdeconv/fixed_point.hpp"
#include "mixdeconv/kernels.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

namespace mixdeconv {

struct KdeEstimate
{
  double bandwidth = 0.0;
  //! sum_i log fhat(Y_i), evaluated with the sample itself included.
  double loglik_at_data = 0.0;
};

//! Sample quantile with linear interpolation between order statistics
//! (R's default, type 7). `sorted` must be ascending and nonempty.
double quantile_type7(std::span<const double> sorted, double prob);

//! Silverman's rule of thumb as in R's bw.nrd0:
//!   h = 0.9 min(sd, IQR / 1.34) n^(-1/5),
//! falling back to sd when the IQR is zero.
//!
//! @throws Error(empty_dataset) for n < 2, Error(degenerate_sample) when
//!   sd and IQR are both zero.
double nrd0_bandwidth(std::span<const double> data);

//! Log-likelihood of the data under a Gaussian kernel density estimate with
//! the nrd0 bandwidth, evaluated directly at the data points. O(n^2).
//!
//! @throws Error(discrete_data) when `discrete` is set; count data anchors
//!   the stopping rule with npmle_external_loglik instead.
KdeEstimate kde_external_loglik(const Dataset& data, bool discrete);

inline KdeEstimate kde_external_loglik(const Dataset& data)
{
  return kde_external_loglik(data, data.kind == DataKind::count);
}

//! Log-likelihood of a long unrestricted fixed-point run from p0, used as a
//! proxy for the maximum likelihood value.
double npmle_external_loglik(const MixingDensity& p0,
                             const KernelMatrix& k,
                             std::size_t max_iter = 100000,
                             double fp_tol = 1e-8);

//! Predictive recursion settings. The weight sequence is
//! w_i = (i + 1)^(-weight_exponent), with i counting observations from 1
//! and continuing across passes.
struct PrConfig
{
  double weight_exponent = 0.67;
  std::size_t passes = 1;
  //! Observations are processed in input order when absent.
  std::optional<std::uint64_t> permutation_seed;
  //! Diagnostic mode: every weight is zero, so the recursion is the identity.
  bool zero_weights = false;

  void validate() const;
  double weight(std::size_t i) const;
};

//! Sequential recursion over observations:
//!   p_i(x) = (1 - w_i) p_{i-1}(x) + w_i k(Y_i | x) p_{i-1}(x) / f_{i-1}(Y_i).
//! The result depends on the processing order.
MixingDensity predictive_recursion(const MixingDensity& p0,
                                   const KernelMatrix& k,
                                   const PrConfig& cfg = {});

} // namespace mixdeconv
