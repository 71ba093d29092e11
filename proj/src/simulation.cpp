#include "mixdeconv/simulation.hpp"

#include "mixdeconv/data_io.hpp"
#include "mixdeconv/error.hpp"
#include "mixdeconv/serialization.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <thread>

namespace mixdeconv {

// ---------------------------------------------------------------------------
// TrueMixing

TrueMixing TrueMixing::from_name(std::string_view name)
{
  if (name == "beta" || name == "mixing1")
    return TrueMixing(MixingShape::beta);
  if (name == "bimodal_normal" || name == "mixing2")
    return TrueMixing(MixingShape::bimodal_normal);
  if (name == "gamma" || name == "mixing3")
    return TrueMixing(MixingShape::gamma);
  throw Error(ErrorCode::invalid_config, "unknown mixing density '" + std::string(name) + "'");
}

std::string_view TrueMixing::name() const
{
  switch (shape_) {
    case MixingShape::beta: return "beta";
    case MixingShape::bimodal_normal: return "bimodal_normal";
    case MixingShape::gamma: return "gamma";
  }
  return "unknown";
}

namespace {

double normal_pdf(double x, double mean, double sd)
{
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

} // namespace

double TrueMixing::density(double x) const
{
  switch (shape_) {
    case MixingShape::beta: {
      if (x <= 0.0 || x >= 10.0)
        return 0.0;
      const double u = x / 10.0;
      // 1 / B(5, 5) = 630
      return 630.0 * std::pow(u, 4) * std::pow(1.0 - u, 4) / 10.0;
    }
    case MixingShape::bimodal_normal:
      return 0.75 * normal_pdf(x, 3.0, 0.8) + 0.25 * normal_pdf(x, 7.0, 0.8);
    case MixingShape::gamma:
      return x > 0.0 ? x * std::exp(-x) : 0.0;
  }
  return 0.0;
}

double TrueMixing::sample(std::mt19937_64& rng) const
{
  switch (shape_) {
    case MixingShape::beta: {
      std::gamma_distribution<double> g(5.0, 1.0);
      const double a = g(rng);
      const double b = g(rng);
      return 10.0 * a / (a + b);
    }
    case MixingShape::bimodal_normal: {
      const bool first = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < 0.75;
      return std::normal_distribution<double>(first ? 3.0 : 7.0, 0.8)(rng);
    }
    case MixingShape::gamma:
      return std::gamma_distribution<double>(2.0, 1.0)(rng);
  }
  return 0.0;
}

Dataset sample_dataset(const TrueMixing& mixing,
                       const KernelModel& kernel,
                       std::size_t n,
                       std::uint64_t seed)
{
  if (n == 0)
    throw Error(ErrorCode::empty_dataset, "sample size must be at least 1");
  constexpr int max_redraws = 1000;
  std::mt19937_64 rng(seed);
  std::vector<double> values;
  values.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    int attempts = 0;
    for (;;) {
      if (++attempts > max_redraws)
        throw Error(ErrorCode::sampler_domain,
                    "could not draw a kernel-valid observation for " +
                      std::string(mixing.name()) + " x " +
                      std::string(to_string(kernel.family())));
      const double x = mixing.sample(rng);
      if (kernel.is_discrete() || kernel.family() == KernelFamily::gamma) {
        if (!(x > 0.0))
          continue;
      }
      const double y = kernel.sample(x, rng);
      if (kernel.family() == KernelFamily::gamma && !(y > 0.0))
        continue;
      values.push_back(y);
      break;
    }
  }
  return make_dataset(std::move(values),
                      kernel.is_discrete() ? DataKind::count : DataKind::continuous,
                      "simulated:" + std::string(mixing.name()) + ":" +
                        std::string(to_string(kernel.family())) + ":seed=" +
                        std::to_string(seed));
}

double l1_distance(const Grid& grid, std::span<const double> p, std::span<const double> q)
{
  if (p.size() != q.size() || p.size() != grid.size())
    throw Error(ErrorCode::length_mismatch,
                "l1_distance: lengths " + std::to_string(p.size()) + " and " +
                  std::to_string(q.size()) + " on a grid of " +
                  std::to_string(grid.size()));
  double sum = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j)
    sum += std::abs(p[j] - q[j]) * grid.weight(j);
  return sum;
}

std::uint64_t replication_seed(std::uint64_t master_seed, std::size_t index)
{
  std::uint64_t z = master_seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(index) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double median(std::vector<double> values)
{
  if (values.empty())
    return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

// ---------------------------------------------------------------------------
// Study

void StudyConfig::validate() const
{
  if (n < 1)
    throw Error(ErrorCode::invalid_config, "study needs n >= 1");
  if (replications < 1)
    throw Error(ErrorCode::invalid_config, "study needs at least one replication");
  if (!(delta > 0.0))
    throw Error(ErrorCode::invalid_config, "study needs delta > 0");
  const Grid grid = Grid::uniform(lo, hi, m);
  kernel.check_parameter(grid.node(0));
  pr.validate();
}

std::string StudyConfig::directory_name() const
{
  return std::string(mixing.name()) + "__" + kernel_label;
}

std::size_t SimReport::successes() const
{
  return static_cast<std::size_t>(
    std::count_if(records.begin(), records.end(), [](const auto& r) { return r.ok; }));
}

ReplicationRecord run_replication(const StudyConfig& config,
                                  const std::shared_ptr<const Grid>& grid,
                                  std::size_t index)
{
  ReplicationRecord rec;
  rec.index = index;
  rec.seed = replication_seed(config.master_seed, index);
  try {
    const Dataset data = sample_dataset(config.mixing, config.kernel, config.n, rec.seed);
    const KernelMatrix k(config.kernel, data, *grid);
    const MixingDensity p0 = MixingDensity::uniform(grid);

    StoppingConfig stop;
    stop.delta = config.delta;
    stop.max_iter = config.max_iter;
    stop.fp_tol = config.fp_tol;
    stop.external_loglik = config.kernel.is_discrete()
                             ? npmle_external_loglik(p0, k)
                             : kde_external_loglik(data, false).loglik_at_data;
    const FitResult fit = run(p0, k, stop);

    PrConfig pr = config.pr;
    if (pr.permutation_seed)
      pr.permutation_seed = replication_seed(*pr.permutation_seed ^ rec.seed, 0);
    const MixingDensity pr_fit = predictive_recursion(p0, k, pr);

    std::vector<double> truth(grid->size());
    for (std::size_t j = 0; j < grid->size(); ++j)
      truth[j] = config.mixing.density(grid->node(j));

    rec.stop_iteration = fit.stop_iteration;
    rec.stop_reason = fit.stop_reason;
    rec.loglik_trajectory = fit.loglik_trajectory;
    rec.external_loglik = *stop.external_loglik;
    rec.l1_nmle = l1_distance(*grid, fit.final_density.values(), truth);
    rec.l1_pr = l1_distance(*grid, pr_fit.values(), truth);
    rec.ratio = rec.l1_pr / rec.l1_nmle;
    rec.estimate.assign(fit.final_density.values().begin(), fit.final_density.values().end());
    rec.ok = true;
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.failure = e.what();
  }
  return rec;
}

SimReport run_study(const StudyConfig& config, std::size_t jobs)
{
  config.validate();
  const auto grid = std::make_shared<const Grid>(Grid::uniform(config.lo, config.hi, config.m));

  SimReport report;
  report.config = config;
  report.nodes.assign(grid->nodes().begin(), grid->nodes().end());
  report.truth.resize(grid->size());
  for (std::size_t j = 0; j < grid->size(); ++j)
    report.truth[j] = config.mixing.density(grid->node(j));
  report.records.resize(config.replications);

  std::atomic<std::size_t> next{ 0 };
  auto worker = [&] {
    for (std::size_t r = next++; r < config.replications; r = next++)
      report.records[r] = run_replication(config, grid, r);
  };
  const std::size_t workers = std::clamp<std::size_t>(jobs, 1, config.replications);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back(worker);
  }

  const std::size_t m = grid->size();
  report.mean.assign(m, 0.0);
  report.sd.assign(m, 0.0);
  const std::size_t ok = report.successes();
  if (ok > 0) {
    for (const auto& rec : report.records)
      if (rec.ok)
        for (std::size_t j = 0; j < m; ++j)
          report.mean[j] += rec.estimate[j];
    for (double& v : report.mean)
      v /= static_cast<double>(ok);
  }
  if (ok > 1) {
    for (const auto& rec : report.records)
      if (rec.ok)
        for (std::size_t j = 0; j < m; ++j) {
          const double d = rec.estimate[j] - report.mean[j];
          report.sd[j] += d * d;
        }
    for (double& v : report.sd)
      v = std::sqrt(v / static_cast<double>(ok - 1));
  }
  return report;
}

namespace {

std::string csv_safe(std::string text)
{
  for (char& c : text)
    if (c == ',' || c == '\n' || c == '\r')
      c = ';';
  return text;
}

} // namespace

void write_report(const SimReport& report, const std::filesystem::path& dir)
{
  std::filesystem::create_directories(dir);

  std::string records =
    "replication,seed,status,T,stop_reason,loglik_T,external_loglik,l1_nmle,l1_pr,ratio,"
    "loglik_trajectory,message\n";
  for (const auto& rec : report.records) {
    records += std::to_string(rec.index) + ',' + std::to_string(rec.seed) + ',';
    if (!rec.ok) {
      records += "failed,,,,,,,,," + csv_safe(rec.failure) + '\n';
      continue;
    }
    std::string trajectory;
    for (double ll : rec.loglik_trajectory) {
      if (!trajectory.empty())
        trajectory += ';';
      trajectory += format_real(ll);
    }
    records += "ok," + std::to_string(rec.stop_iteration) + ',' +
               std::string(to_string(rec.stop_reason)) + ',' +
               format_real(rec.loglik_trajectory.back()) + ',' +
               format_real(rec.external_loglik) + ',' + format_real(rec.l1_nmle) + ',' +
               format_real(rec.l1_pr) + ',' + format_real(rec.ratio) + ',' + trajectory +
               ",\n";
  }
  write_text_file(dir / "records.csv", records);

  std::string curves = "x,truth,mean,sd\n";
  for (std::size_t j = 0; j < report.nodes.size(); ++j)
    curves += format_real(report.nodes[j]) + ',' + format_real(report.truth[j]) + ',' +
              format_real(report.mean[j]) + ',' + format_real(report.sd[j]) + '\n';
  write_text_file(dir / "mean_sd.csv", curves);

  write_text_file(dir / "config.json", dump_json(study_config_to_json(report.config)));
  write_text_file(dir / "summary.json", dump_json(report_summary_to_json(report)));
}

} // namespace mixdeconv
