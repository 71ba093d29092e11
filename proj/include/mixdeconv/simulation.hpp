#pragma once

#include "mixdeconv/comparators.hpp"
#include "mixdeconv/dataset.hpp"
#include "mixdeconv/fixed_point.hpp"
#include "mixdeconv/grid.hpp"
#include "mixdeconv/kernels.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mixdeconv {

enum class MixingShape
{
  beta,           // (1/10) Beta(x/10 | 5, 5)
  bimodal_normal, // 3/4 N(3, 0.8^2) + 1/4 N(7, 0.8^2)
  gamma,          // Gamma(shape 2, rate 1)
};

//! Closed-form mixing density used to generate simulated data.
class TrueMixing
{
public:
  explicit TrueMixing(MixingShape shape)
    : shape_(shape)
  {}

  //! Accepts "beta", "bimodal_normal", "gamma" or "mixing1".."mixing3".
  static TrueMixing from_name(std::string_view name);

  MixingShape shape() const { return shape_; }
  std::string_view name() const;

  double density(double x) const;
  double sample(std::mt19937_64& rng) const;

  bool operator==(const TrueMixing&) const = default;

private:
  MixingShape shape_;
};

//! Draws X_r from the mixing density and Y_r ~ k(. | X_r), r = 1..n.
//!
//! Latent draws outside the kernel's parameter range (e.g. a negative normal
//! draw under the gamma kernel) and observations outside its support are
//! redrawn; the affected mass is below 1e-4 for every built-in pair.
Dataset sample_dataset(const TrueMixing& mixing,
                       const KernelModel& kernel,
                       std::size_t n,
                       std::uint64_t seed);

//! sum_j |p_j - q_j| w_j.
double l1_distance(const Grid& grid, std::span<const double> p, std::span<const double> q);

//! Per-replication seed: a SplitMix64 step over master_seed + index.
std::uint64_t replication_seed(std::uint64_t master_seed, std::size_t index);

struct StudyConfig
{
  std::string kernel_label = "kernel1";
  KernelModel kernel = presets::kernel1();
  TrueMixing mixing{ MixingShape::bimodal_normal };
  std::size_t n = 500;
  std::size_t replications = 100;
  std::uint64_t master_seed = 1;
  double lo = 0.0;
  double hi = 10.0;
  std::size_t m = 1000;
  double delta = 0.05;
  std::size_t max_iter = 10000;
  double fp_tol = 1e-8;
  PrConfig pr;

  void validate() const;
  std::string directory_name() const;
};

struct ReplicationRecord
{
  std::size_t index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string failure;
  std::size_t stop_iteration = 0;
  StopReason stop_reason = StopReason::max_iter;
  std::vector<double> loglik_trajectory;
  double external_loglik = 0.0;
  double l1_nmle = 0.0;
  double l1_pr = 0.0;
  double ratio = 0.0;
  std::vector<double> estimate;
};

struct SimReport
{
  StudyConfig config;
  std::vector<double> nodes;
  std::vector<double> truth;
  std::vector<ReplicationRecord> records;
  //! Pointwise mean and sd (n - 1 denominator) of the near-MLE estimates
  //! over successful replications.
  std::vector<double> mean;
  std::vector<double> sd;

  std::size_t successes() const;
};

//! Runs one replication of the study: simulate, fit the near-MLE with the
//! KDE-anchored rule (long-run anchor for discrete kernels), fit predictive
//! recursion from the same start, and score both against the truth.
ReplicationRecord run_replication(const StudyConfig& config,
                                  const std::shared_ptr<const Grid>& grid,
                                  std::size_t index);

//! Replications run on up to `jobs` threads; results are assembled by
//! replication index, so the report does not depend on `jobs`.
SimReport run_study(const StudyConfig& config, std::size_t jobs = 1);

//! Writes records.csv, mean_sd.csv, config.json and summary.json into dir.
void write_report(const SimReport& report, const std::filesystem::path& dir);

double median(std::vector<double> values);

} // namespace mixdeconv
