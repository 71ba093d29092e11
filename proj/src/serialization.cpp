#include "mixdeconv/serialization.hpp"

#include "mixdeconv/error.hpp"

#include <set>
#include <string>

namespace mixdeconv {

namespace {

[[noreturn]] void config_error(const std::string& what)
{
  throw Error(ErrorCode::invalid_config, what);
}

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed, const char* what)
{
  if (!j.is_object())
    config_error(std::string(what) + " must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key))
      config_error(std::string(what) + ": unknown key '" + key + "'");
}

double number_at(const json& j, const char* key, const char* what)
{
  if (!j.contains(key) || !j.at(key).is_number())
    config_error(std::string(what) + ": '" + key + "' must be a number");
  return j.at(key).get<double>();
}

std::size_t count_at(const json& j, const char* key, const char* what)
{
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    config_error(std::string(what) + ": '" + key + "' must be a nonnegative integer");
  return v.get<std::size_t>();
}

} // namespace

std::string dump_json(const json& j)
{
  return j.dump(2) + '\n';
}

json grid_to_json(const Grid& grid)
{
  return { { "lo", grid.lo() }, { "hi", grid.hi() }, { "m", grid.size() } };
}

Grid grid_from_json(const json& j)
{
  if (j.is_string())
    return Grid::parse(j.get<std::string>());
  reject_unknown_keys(j, { "lo", "hi", "m" }, "grid");
  if (!j.contains("m"))
    config_error("grid: missing 'm'");
  return Grid::uniform(number_at(j, "lo", "grid"), number_at(j, "hi", "grid"),
                       count_at(j, "m", "grid"));
}

json kernel_to_json(const KernelModel& kernel)
{
  json j = { { "family", std::string(to_string(kernel.family())) } };
  switch (kernel.family()) {
    case KernelFamily::normal: j["variance"] = kernel.variance(); break;
    case KernelFamily::student_t:
      j["scale"] = kernel.scale();
      j["df"] = kernel.df();
      break;
    case KernelFamily::gamma:
      j["shape_mult"] = kernel.shape_mult();
      j["rate"] = kernel.rate();
      break;
    case KernelFamily::poisson: break;
  }
  return j;
}

KernelModel kernel_from_json(const json& j)
{
  if (j.is_string())
    return kernel_from_name(j.get<std::string>());
  if (!j.is_object() || !j.contains("family") || !j.at("family").is_string())
    config_error("kernel: expected an object with a 'family' string");
  const auto family = j.at("family").get<std::string>();
  if (family == "normal") {
    reject_unknown_keys(j, { "family", "variance", "sd" }, "normal kernel");
    if (j.contains("variance") == j.contains("sd"))
      config_error("normal kernel: give exactly one of 'variance' or 'sd'");
    return j.contains("sd") ? KernelModel::normal_sd(number_at(j, "sd", "normal kernel"))
                            : KernelModel::normal(number_at(j, "variance", "normal kernel"));
  }
  if (family == "student_t") {
    reject_unknown_keys(j, { "family", "scale", "df" }, "student_t kernel");
    return KernelModel::student_t(number_at(j, "scale", "student_t kernel"),
                                  number_at(j, "df", "student_t kernel"));
  }
  if (family == "gamma") {
    reject_unknown_keys(j, { "family", "shape_mult", "rate" }, "gamma kernel");
    return KernelModel::gamma(number_at(j, "shape_mult", "gamma kernel"),
                              number_at(j, "rate", "gamma kernel"));
  }
  if (family == "poisson") {
    reject_unknown_keys(j, { "family" }, "poisson kernel");
    return KernelModel::poisson();
  }
  config_error("unknown kernel family '" + family + "'");
}

json pr_config_to_json(const PrConfig& cfg)
{
  json j = { { "weight_exponent", cfg.weight_exponent }, { "passes", cfg.passes } };
  j["permutation_seed"] = cfg.permutation_seed ? json(*cfg.permutation_seed) : json(nullptr);
  j["note"] = "weights (i+1)^-weight_exponent, pass count and ordering are tunable defaults "
              "of this tool";
  return j;
}

PrConfig pr_config_from_json(const json& j)
{
  reject_unknown_keys(j, { "weight_exponent", "passes", "permutation_seed", "note" }, "pr");
  PrConfig cfg;
  if (j.contains("weight_exponent"))
    cfg.weight_exponent = number_at(j, "weight_exponent", "pr");
  if (j.contains("passes"))
    cfg.passes = count_at(j, "passes", "pr");
  if (j.contains("permutation_seed") && !j.at("permutation_seed").is_null())
    cfg.permutation_seed = j.at("permutation_seed").get<std::uint64_t>();
  cfg.validate();
  return cfg;
}

json kde_to_json(const KdeEstimate& kde)
{
  return { { "bandwidth", kde.bandwidth },
           { "loglik_at_data", kde.loglik_at_data },
           { "bandwidth_rule", "nrd0" } };
}

json fit_result_to_json(const FitResult& fit)
{
  json j;
  j["stop_iteration"] = fit.stop_iteration;
  j["stop_reason"] = std::string(to_string(fit.stop_reason));
  j["loglik_final"] = fit.loglik_trajectory.back();
  j["external_loglik"] = fit.external_loglik ? json(*fit.external_loglik) : json(nullptr);
  j["delta"] = fit.delta;
  j["grid"] = grid_to_json(fit.final_density.grid());
  j["loglik_trajectory"] = fit.loglik_trajectory;
  j["density"] = std::vector<double>(fit.final_density.values().begin(),
                                     fit.final_density.values().end());
  return j;
}

json study_config_to_json(const StudyConfig& cfg)
{
  json j;
  j["kernel_label"] = cfg.kernel_label;
  j["kernel"] = kernel_to_json(cfg.kernel);
  j["mixing"] = std::string(cfg.mixing.name());
  j["n"] = cfg.n;
  j["replications"] = cfg.replications;
  j["seed"] = cfg.master_seed;
  j["grid"] = { { "lo", cfg.lo }, { "hi", cfg.hi }, { "m", cfg.m } };
  j["delta"] = cfg.delta;
  j["max_iter"] = cfg.max_iter;
  j["fp_tol"] = cfg.fp_tol;
  j["pr"] = pr_config_to_json(cfg.pr);
  return j;
}

StudyConfig study_config_from_json(const json& j)
{
  reject_unknown_keys(j,
                      { "kernel_label", "kernel", "mixing", "n", "replications", "seed",
                        "grid", "delta", "max_iter", "fp_tol", "pr" },
                      "study config");
  StudyConfig cfg;
  if (j.contains("kernel")) {
    cfg.kernel = kernel_from_json(j.at("kernel"));
    cfg.kernel_label = j.at("kernel").is_string() ? j.at("kernel").get<std::string>()
                                                  : std::string(to_string(cfg.kernel.family()));
  }
  if (j.contains("kernel_label"))
    cfg.kernel_label = j.at("kernel_label").get<std::string>();
  if (j.contains("mixing")) {
    if (!j.at("mixing").is_string())
      config_error("study config: 'mixing' must be a name");
    cfg.mixing = TrueMixing::from_name(j.at("mixing").get<std::string>());
  }
  if (j.contains("n"))
    cfg.n = count_at(j, "n", "study config");
  if (j.contains("replications"))
    cfg.replications = count_at(j, "replications", "study config");
  if (j.contains("seed"))
    cfg.master_seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("grid")) {
    const Grid g = grid_from_json(j.at("grid"));
    cfg.lo = g.lo();
    cfg.hi = g.hi();
    cfg.m = g.size();
  }
  if (j.contains("delta"))
    cfg.delta = number_at(j, "delta", "study config");
  if (j.contains("max_iter"))
    cfg.max_iter = count_at(j, "max_iter", "study config");
  if (j.contains("fp_tol"))
    cfg.fp_tol = number_at(j, "fp_tol", "study config");
  if (j.contains("pr"))
    cfg.pr = pr_config_from_json(j.at("pr"));
  cfg.validate();
  return cfg;
}

json report_summary_to_json(const SimReport& report)
{
  std::vector<double> ratios;
  std::size_t small_t = 0;
  for (const auto& rec : report.records)
    if (rec.ok) {
      ratios.push_back(rec.ratio);
      if (rec.stop_iteration < 5)
        ++small_t;
    }
  json j;
  j["replications"] = report.records.size();
  j["succeeded"] = report.successes();
  j["failed"] = report.records.size() - report.successes();
  j["median_ratio_l1_pr_over_l1_nmle"] = ratios.empty() ? json(nullptr) : json(median(ratios));
  j["fraction_T_below_5"] =
    ratios.empty() ? json(nullptr) : json(static_cast<double>(small_t) / ratios.size());
  return j;
}

} // namespace mixdeconv
