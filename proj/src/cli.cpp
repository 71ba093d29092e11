#include "mixdeconv/cli.hpp"

#include "mixdeconv/comparators.hpp"
#include "mixdeconv/data_io.hpp"
#include "mixdeconv/error.hpp"
#include "mixdeconv/fixed_point.hpp"
#include "mixdeconv/serialization.hpp"
#include "mixdeconv/simulation.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace mixdeconv {

namespace {

//! Options shared by fit and npmle.
struct ModelOptions
{
  std::string data_path;
  std::string kernel_name;
  std::string kernel_config;
  std::optional<double> variance;
  std::optional<double> sd;
  std::optional<double> scale;
  std::optional<double> df;
  std::optional<double> shape_mult;
  std::optional<double> rate;
  std::string grid = "0:10:1000";
  std::string out_dir;
};

struct FitOptions
{
  ModelOptions model;
  double delta = 0.05;
  std::size_t max_iter = 10000;
  double fp_tol = 1e-8;
  bool no_rule = false;
  std::size_t anchor_max_iter = 100000;
  bool with_pr = false;
  double pr_gamma = 0.67;
  std::size_t pr_passes = 1;
  std::optional<std::uint64_t> pr_seed;
};

struct NpmleOptions
{
  ModelOptions model;
  std::size_t max_iter = 100000;
  double fp_tol = 1e-8;
  double support_threshold = 1e-4;
  std::vector<std::size_t> checkpoints{ 5, 10, 100, 500, 5000 };
};

struct SimulateOptions
{
  std::string config_path;
  std::string out_dir = "simulation";
  std::size_t jobs = 1;
  std::optional<std::uint64_t> seed;
};

void add_model_options(CLI::App* cmd, ModelOptions& o, const char* default_out)
{
  o.out_dir = default_out;
  cmd->add_option("--data", o.data_path, "CSV with header 'y' or 'count,frequency'")->required();
  cmd->add_option("--kernel", o.kernel_name,
                  "kernel1|kernel2|kernel3|normal|student_t|gamma|poisson");
  cmd->add_option("--kernel-config", o.kernel_config,
                  "JSON kernel description; takes precedence over inline flags");
  cmd->add_option("--variance", o.variance, "normal kernel variance");
  cmd->add_option("--sd", o.sd, "normal kernel standard deviation");
  cmd->add_option("--scale", o.scale, "student_t kernel scale");
  cmd->add_option("--df", o.df, "student_t kernel degrees of freedom");
  cmd->add_option("--shape-mult", o.shape_mult, "gamma kernel shape multiplier");
  cmd->add_option("--rate", o.rate, "gamma kernel rate");
  cmd->add_option("--grid", o.grid, "mixing support grid lo:hi:m")->capture_default_str();
  cmd->add_option("--out", o.out_dir, "output directory")->capture_default_str();
}

KernelModel resolve_kernel(const ModelOptions& o)
{
  if (!o.kernel_config.empty())
    return kernel_from_json(json::parse(read_text_file(o.kernel_config)));
  if (o.kernel_name.empty())
    throw Error(ErrorCode::invalid_config, "one of --kernel or --kernel-config is required");

  const KernelModel base = kernel_from_name(o.kernel_name);
  switch (base.family()) {
    case KernelFamily::normal:
      if (o.variance && o.sd)
        throw Error(ErrorCode::invalid_config, "give only one of --variance and --sd");
      if (o.sd)
        return KernelModel::normal_sd(*o.sd);
      return KernelModel::normal(o.variance.value_or(base.variance()));
    case KernelFamily::student_t:
      return KernelModel::student_t(o.scale.value_or(base.scale()), o.df.value_or(base.df()));
    case KernelFamily::gamma:
      return KernelModel::gamma(o.shape_mult.value_or(base.shape_mult()),
                                o.rate.value_or(base.rate()));
    case KernelFamily::poisson: return base;
  }
  return base;
}

struct Problem
{
  Dataset data;
  KernelModel kernel;
  std::shared_ptr<const Grid> grid;
  KernelMatrix matrix;
};

Problem load_problem(const ModelOptions& o)
{
  Dataset data = load_dataset_csv(o.data_path);
  data.source = o.data_path;
  KernelModel kernel = resolve_kernel(o);
  if (kernel.is_discrete() && data.kind != DataKind::count) {
    auto notes = std::move(data.notes);
    data = make_dataset(std::move(data.values), DataKind::count, o.data_path);
    data.notes = std::move(notes);
  }
  auto grid = std::make_shared<const Grid>(Grid::parse(o.grid));
  KernelMatrix matrix(kernel, data, *grid);
  return { std::move(data), kernel, std::move(grid), std::move(matrix) };
}

json manifest_base(std::string_view command, const ModelOptions& o, const Problem& problem)
{
  json m;
  m["tool"] = std::string(tool_name);
  m["version"] = std::string(tool_version);
  m["command"] = std::string(command);
  m["data"] = { { "path", o.data_path },
                { "kind", problem.data.kind == DataKind::count ? "count" : "continuous" },
                { "n", problem.data.size() } };
  m["grid"] = grid_to_json(*problem.grid);
  m["kernel"] = kernel_to_json(problem.kernel);
  return m;
}

void prepare_out_dir(const fs::path& dir)
{
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw Error(ErrorCode::io_error, "cannot create '" + dir.string() + "': " + ec.message());
}

int cmd_fit(const FitOptions& o, std::ostream& out)
{
  const Problem problem = load_problem(o.model);
  const MixingDensity p0 = MixingDensity::uniform(problem.grid);

  StoppingConfig stop;
  stop.delta = o.delta;
  stop.max_iter = o.max_iter;
  stop.fp_tol = o.fp_tol;

  json anchor = nullptr;
  if (!o.no_rule) {
    if (problem.kernel.is_discrete()) {
      const double ext = npmle_external_loglik(p0, problem.matrix, o.anchor_max_iter, o.fp_tol);
      stop.external_loglik = ext;
      anchor = { { "type", "long_run_fixed_point" },
                 { "max_iter", o.anchor_max_iter },
                 { "fp_tol", o.fp_tol },
                 { "loglik", ext } };
    } else {
      const KdeEstimate kde = kde_external_loglik(problem.data, false);
      stop.external_loglik = kde.loglik_at_data;
      anchor = kde_to_json(kde);
      anchor["type"] = "kde";
    }
  }
  const FitResult fit = run(p0, problem.matrix, stop);

  const fs::path dir = o.model.out_dir;
  prepare_out_dir(dir);
  write_density_csv(fit.final_density, dir / "density.csv");
  json result = fit_result_to_json(fit);
  result["anchor"] = anchor;

  json manifest = manifest_base("fit", o.model, problem);
  manifest["stopping"] = { { "rule", !o.no_rule },
                           { "delta", o.delta },
                           { "max_iter", o.max_iter },
                           { "fp_tol", o.fp_tol } };
  manifest["anchor"] = anchor;

  if (o.with_pr) {
    PrConfig pr;
    pr.weight_exponent = o.pr_gamma;
    pr.passes = o.pr_passes;
    pr.permutation_seed = o.pr_seed;
    const MixingDensity pr_fit = predictive_recursion(p0, problem.matrix, pr);
    write_density_csv(pr_fit, dir / "pr_density.csv");
    result["pr_loglik"] = log_likelihood(pr_fit, problem.matrix);
    manifest["pr"] = pr_config_to_json(pr);
  }
  write_text_file(dir / "fit.json", dump_json(result));
  write_text_file(dir / "manifest.json", dump_json(manifest));

  const double ll = fit.loglik_trajectory.back();
  out << "T=" << fit.stop_iteration << " reason=" << to_string(fit.stop_reason)
      << " loglik=" << format_real(ll);
  if (stop.external_loglik)
    out << " external_loglik=" << format_real(*stop.external_loglik)
        << " gap=" << format_real(*stop.external_loglik - ll);
  out << '\n';
  return 0;
}

int cmd_npmle(const NpmleOptions& o, std::ostream& out, std::ostream& err)
{
  const Problem problem = load_problem(o.model);
  const MixingDensity p0 = MixingDensity::uniform(problem.grid);
  const fs::path dir = o.model.out_dir;
  prepare_out_dir(dir);

  StoppingConfig stop;
  stop.max_iter = o.max_iter;
  stop.fp_tol = o.fp_tol;
  std::vector<std::size_t> checkpoints = o.checkpoints;
  std::sort(checkpoints.begin(), checkpoints.end());
  const FitResult fit = run(p0, problem.matrix, stop, [&](std::size_t t, const MixingDensity& p) {
    if (std::binary_search(checkpoints.begin(), checkpoints.end(), t))
      write_density_csv(p, dir / ("density_T" + std::to_string(t) + ".csv"));
  });

  const double ll_max = fit.loglik_trajectory.back();
  const auto d = stationarity_gradient(fit.final_density, problem.matrix);
  const double max_d = *std::max_element(d.begin(), d.end());

  json support = json::array();
  for (std::size_t j = 0; j < fit.final_density.size(); ++j) {
    const double mass = fit.final_density[j] * problem.grid->weight(j);
    if (mass > o.support_threshold)
      support.push_back({ { "x", problem.grid->node(j) }, { "mass", mass }, { "gradient", d[j] } });
  }
  json cps = json::array();
  for (std::size_t t : checkpoints) {
    if (t >= fit.loglik_trajectory.size())
      continue;
    const double ll = fit.loglik_trajectory[t];
    cps.push_back({ { "t", t }, { "loglik", ll }, { "relative_gap", (ll_max - ll) / std::abs(ll_max) } });
  }

  json result = fit_result_to_json(fit);
  result["max_gradient"] = max_d;
  result["support_threshold"] = o.support_threshold;
  result["support_points"] = support;
  result["checkpoints"] = cps;
  write_text_file(dir / "npmle.json", dump_json(result));
  write_density_csv(fit.final_density, dir / "density.csv");

  std::string trajectory = "t,loglik\n";
  for (std::size_t t = 0; t < fit.loglik_trajectory.size(); ++t)
    trajectory += std::to_string(t) + ',' + format_real(fit.loglik_trajectory[t]) + '\n';
  write_text_file(dir / "trajectory.csv", trajectory);

  json manifest = manifest_base("npmle", o.model, problem);
  manifest["stopping"] = { { "rule", false }, { "max_iter", o.max_iter }, { "fp_tol", o.fp_tol } };
  manifest["checkpoints"] = checkpoints;
  manifest["support_threshold"] = o.support_threshold;
  write_text_file(dir / "manifest.json", dump_json(manifest));

  if (max_d > 1.0 + 1e-3)
    err << dump_json({ { "warning", "not-stationary" },
                       { "message", "max gradient exceeds 1 + 1e-3; run longer for the NPMLE" },
                       { "max_gradient", max_d } });

  out << "iterations=" << fit.stop_iteration << " reason=" << to_string(fit.stop_reason)
      << " loglik=" << format_real(ll_max) << " max_gradient=" << format_real(max_d)
      << " support_cells=" << support.size() << '\n';
  for (const auto& cp : cps)
    out << "  t=" << cp["t"].get<std::size_t>() << " loglik=" << format_real(cp["loglik"].get<double>())
        << " relative_gap=" << format_real(cp["relative_gap"].get<double>()) << '\n';
  return 0;
}

std::vector<StudyConfig> expand_studies(const json& config)
{
  if (!config.is_object())
    throw Error(ErrorCode::invalid_config, "study config must be a JSON object");
  json base = config;
  json kernels = json::array();
  json mixings = json::array();
  if (base.contains("kernels")) {
    kernels = base["kernels"];
    base.erase("kernels");
  }
  if (base.contains("mixings")) {
    mixings = base["mixings"];
    base.erase("mixings");
  }
  if (kernels.empty())
    kernels.push_back(base.contains("kernel") ? base["kernel"] : json("kernel1"));
  if (mixings.empty())
    mixings.push_back(base.contains("mixing") ? base["mixing"] : json("bimodal_normal"));
  if (!kernels.is_array() || !mixings.is_array())
    throw Error(ErrorCode::invalid_config, "'kernels' and 'mixings' must be arrays");

  std::vector<StudyConfig> studies;
  for (const auto& mixing : mixings)
    for (const auto& kernel : kernels) {
      json one = base;
      one["mixing"] = mixing;
      one["kernel"] = kernel;
      if (!kernel.is_string())
        one.erase("kernel_label");
      studies.push_back(study_config_from_json(one));
    }
  return studies;
}

int cmd_simulate(const SimulateOptions& o, std::ostream& out)
{
  const json config = json::parse(read_text_file(o.config_path));

  std::optional<std::uint64_t> seed = o.seed;
  if (!seed && !(config.is_object() && config.contains("seed")))
    if (const char* env = std::getenv("MIXDECONV_SEED")) {
      try {
        seed = std::stoull(env);
      } catch (const std::exception&) {
        throw Error(ErrorCode::invalid_config,
                    "MIXDECONV_SEED is not an unsigned integer: '" + std::string(env) + "'");
      }
    }

  auto studies = expand_studies(config);
  for (auto& study : studies)
    if (seed)
      study.master_seed = *seed;

  const fs::path root = o.out_dir;
  prepare_out_dir(root);
  bool all_ok = true;
  for (const auto& study : studies) {
    const SimReport report = run_study(study, o.jobs);
    const fs::path dir = root / study.directory_name();
    write_report(report, dir);
    json manifest;
    manifest["tool"] = std::string(tool_name);
    manifest["version"] = std::string(tool_version);
    manifest["command"] = "simulate";
    manifest["study"] = study_config_to_json(study);
    write_text_file(dir / "manifest.json", dump_json(manifest));

    const json summary = report_summary_to_json(report);
    out << study.directory_name() << ": " << report.successes() << "/" << report.records.size()
        << " ok, median L1 ratio (pr/nmle) = "
        << (summary["median_ratio_l1_pr_over_l1_nmle"].is_null()
              ? std::string("n/a")
              : format_real(summary["median_ratio_l1_pr_over_l1_nmle"].get<double>()))
        << '\n';
    all_ok = all_ok && report.successes() == report.records.size();
  }
  return all_ok ? 0 : 1;
}

int exit_code_for(ErrorCode code)
{
  switch (code) {
    case ErrorCode::zero_likelihood:
    case ErrorCode::dimension_mismatch:
    case ErrorCode::sampler_domain: return 1;
    default: return 2;
  }
}

void report_error(std::ostream& err, std::string_view code, const std::string& message)
{
  err << json{ { "error", std::string(code) }, { "message", message } }.dump() << '\n';
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
  CLI::App app{ "Smooth mixing-density estimation by averaged Bayes fixed-point iteration",
                std::string(tool_name) };
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tool_version));

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "near-MLE with the relative-gap stopping rule");
  add_model_options(fit_cmd, fit.model, "fit_out");
  fit_cmd->add_option("--delta", fit.delta, "relative gap tolerance")->capture_default_str();
  fit_cmd->add_option("--max-iter", fit.max_iter)->capture_default_str();
  fit_cmd->add_option("--fp-tol", fit.fp_tol, "sup-norm convergence tolerance")->capture_default_str();
  fit_cmd->add_flag("--no-rule", fit.no_rule, "disable the stopping rule");
  fit_cmd->add_option("--anchor-max-iter", fit.anchor_max_iter,
                      "iterations of the long-run anchor used for count data")
    ->capture_default_str();
  fit_cmd->add_flag("--pr", fit.with_pr, "also write a predictive recursion estimate");
  fit_cmd->add_option("--pr-gamma", fit.pr_gamma)->capture_default_str();
  fit_cmd->add_option("--pr-passes", fit.pr_passes)->capture_default_str();
  fit_cmd->add_option("--pr-seed", fit.pr_seed, "permute observations with this seed");

  NpmleOptions npmle;
  auto* npmle_cmd = app.add_subcommand("npmle", "long run towards the NPMLE with diagnostics");
  add_model_options(npmle_cmd, npmle.model, "npmle_out");
  npmle_cmd->add_option("--max-iter", npmle.max_iter)->capture_default_str();
  npmle_cmd->add_option("--fp-tol", npmle.fp_tol)->capture_default_str();
  npmle_cmd->add_option("--support-threshold", npmle.support_threshold,
                        "cell mass reported as a support point")
    ->capture_default_str();
  npmle_cmd->add_option("--checkpoints", npmle.checkpoints, "iterations to snapshot")
    ->delimiter(',')
    ->capture_default_str();

  SimulateOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo comparison with predictive recursion");
  sim_cmd->add_option("--config", sim.config_path, "study JSON")->required();
  sim_cmd->add_option("--out", sim.out_dir)->capture_default_str();
  sim_cmd->add_option("--jobs", sim.jobs, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", sim.seed, "master seed (falls back to MIXDECONV_SEED)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << tool_version << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage", e.what());
    return 2;
  }

  try {
    if (fit_cmd->parsed())
      return cmd_fit(fit, out);
    if (npmle_cmd->parsed())
      return cmd_npmle(npmle, out, err);
    return cmd_simulate(sim, out);
  } catch (const Error& e) {
    report_error(err, to_string(e.code()), e.what());
    return exit_code_for(e.code());
  } catch (const json::exception& e) {
    report_error(err, "invalid-config", e.what());
    return 2;
  } catch (const std::exception& e) {
    report_error(err, "internal", e.what());
    return 1;
  }
}

} // namespace mixdeconv
