#include "mixdeconv/cli.hpp"
#include "mixdeconv/data_io.hpp"
#include "mixdeconv/serialization.hpp"

#include "test_support.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

using namespace mixdeconv;
using mixdeconv::testing::fresh_dir;

namespace fs = std::filesystem;

namespace {

struct CliResult
{
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args)
{
  args.insert(args.begin(), "mixdeconv");
  std::vector<const char*> argv;
  for (const auto& a : args)
    argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return { code, out.str(), err.str() };
}

json read_json(const fs::path& p)
{
  return json::parse(read_text_file(p));
}

const std::string thai = (fs::path(MIXDECONV_DATA_DIR) / "thai.csv").string();

fs::path toy_data(const fs::path& dir)
{
  write_text_file(dir / "toy.csv", "y\n-0.3\n0.4\n2.9\n3.3\n4.1\n");
  return dir / "toy.csv";
}

} // namespace

TEST_CASE("help and version")
{
  CHECK(cli({ "--version" }).out == "1.0.0\n");
  const auto help = cli({ "--help" });
  CHECK(help.code == 0);
  CHECK(help.out.find("simulate") != std::string::npos);
  CHECK(cli({}).code == 2);
}

TEST_CASE("fit on the Thai table")
{
  const auto dir = fresh_dir("fit_thai");
  const auto r = cli({ "fit", "--data", thai, "--kernel", "poisson", "--grid", "0:25:500", "--out",
                       (dir / "out").string() });
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("T=", 0) == 0);

  const json fit = read_json(dir / "out" / "fit.json");
  CHECK(fit["stop_reason"] == "rule-satisfied");
  const auto traj = fit["loglik_trajectory"].get<std::vector<double>>();
  CHECK(traj.size() == fit["stop_iteration"].get<std::size_t>() + 1);
  for (std::size_t t = 1; t < traj.size(); ++t)
    CHECK(traj[t] >= traj[t - 1] - 1e-9 * std::abs(traj[t - 1]));
  const double ext = fit["external_loglik"].get<double>();
  CHECK(ext - traj.back() < 0.05 * std::abs(ext));

  const json manifest = read_json(dir / "out" / "manifest.json");
  CHECK(manifest["command"] == "fit");
  CHECK(manifest["data"]["n"] == 602);
  CHECK(manifest["data"]["kind"] == "count");
  CHECK(fs::exists(dir / "out" / "density.csv"));
}

TEST_CASE("fit with zero iterations returns the start")
{
  const auto dir = fresh_dir("fit_zero");
  const auto r = cli({ "fit", "--data", toy_data(dir).string(), "--kernel", "kernel1", "--grid",
                       "-2:6:80", "--max-iter", "0", "--no-rule", "--out", (dir / "out").string() });
  REQUIRE(r.code == 0);
  const json fit = read_json(dir / "out" / "fit.json");
  CHECK(fit["stop_iteration"] == 0);
  CHECK(fit["stop_reason"] == "max-iter");
  for (double v : fit["density"].get<std::vector<double>>())
    CHECK(v == doctest::Approx(1.0 / 8.0));
}

TEST_CASE("fit with predictive recursion")
{
  const auto dir = fresh_dir("fit_pr");
  const auto r = cli({ "fit", "--data", toy_data(dir).string(), "--grid", "-2:6:80", "--kernel", "kernel1", "--pr",
                       "--pr-seed", "3", "--out", (dir / "out").string() });
  REQUIRE(r.code == 0);
  const std::string csv = read_text_file(dir / "out" / "pr_density.csv");
  CHECK(csv.rfind("x,p\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 81);
}

TEST_CASE("input errors exit with code 2 and a JSON message")
{
  const auto dir = fresh_dir("errors");

  const auto missing = cli({ "fit", "--data", (dir / "nope.csv").string(), "--out",
                             (dir / "out").string() });
  CHECK(missing.code == 2);
  const json e = json::parse(missing.err);
  CHECK(e["error"] == "io-error");
  CHECK(e["message"].get<std::string>().find("nope.csv") != std::string::npos);

  write_text_file(dir / "kernel.json", R"({"family": "laplace"})");
  const auto unknown = cli({ "fit", "--data", toy_data(dir).string(), "--kernel-config",
                             (dir / "kernel.json").string(), "--out", (dir / "out").string() });
  CHECK(unknown.code == 2);
  CHECK(json::parse(unknown.err)["error"] == "invalid-config");

  CHECK(cli({ "fit", "--data", toy_data(dir).string(), "--kernel", "laplace" }).code == 2);
  CHECK(cli({ "fit", "--data", toy_data(dir).string(), "--kernel", "kernel1", "--grid", "5:1:10" }).code == 2);
  CHECK(cli({ "fit", "--data", toy_data(dir).string(), "--bogus" }).code == 2);
  CHECK(cli({ "simulate", "--config", (dir / "kernel.json").string(), "--jobs", "0" }).code == 2);

  write_text_file(dir / "neg.csv", "y\n1.0\n-2.0\n");
  const auto domain = cli({ "fit", "--data", (dir / "neg.csv").string(), "--kernel", "kernel3",
                            "--out", (dir / "out").string() });
  CHECK(domain.code == 2);
  CHECK(json::parse(domain.err)["message"].get<std::string>().find("row 1") != std::string::npos);
}

TEST_CASE("kernel config file")
{
  const auto dir = fresh_dir("kernel_config");
  write_text_file(dir / "k.json", R"({"family": "normal", "sd": 0.5})");
  const auto r = cli({ "fit", "--data", toy_data(dir).string(), "--kernel-config",
                       (dir / "k.json").string(), "--grid", "-2:6:80", "--out",
                       (dir / "out").string() });
  REQUIRE(r.code == 0);
  const json manifest = read_json(dir / "out" / "manifest.json");
  CHECK(manifest["kernel"]["family"] == "normal");
  CHECK(manifest["kernel"]["variance"].get<double>() == doctest::Approx(0.25));
}

TEST_CASE("npmle diagnostics")
{
  const auto dir = fresh_dir("npmle");
  const auto r = cli({ "npmle", "--data", toy_data(dir).string(), "--kernel", "kernel1", "--grid",
                       "-2:6:80", "--max-iter", "20000", "--checkpoints", "5,10,100",
                       "--out", (dir / "out").string() });
  REQUIRE(r.code == 0);
  for (const char* f : { "density_T5.csv", "density_T10.csv", "density_T100.csv", "density.csv",
                         "trajectory.csv", "npmle.json", "manifest.json" })
    CHECK(fs::exists(dir / "out" / f));

  const json result = read_json(dir / "out" / "npmle.json");
  CHECK(result["max_gradient"].get<double>() <= 1.0 + 1e-3);
  double mass = 0.0;
  for (const auto& s : result["support_points"]) {
    mass += s["mass"].get<double>();
    CHECK(s["gradient"].get<double>() == doctest::Approx(1.0).epsilon(1e-2));
  }
  CHECK(std::abs(mass - 1.0) <= 1e-3);
  double previous = 1.0;
  for (const auto& cp : result["checkpoints"]) {
    const double gap = cp["relative_gap"].get<double>();
    CHECK(gap >= 0.0);
    CHECK(gap <= previous);
    previous = gap;
  }
}

TEST_CASE("npmle warns when far from stationary")
{
  const auto dir = fresh_dir("npmle_short");
  const auto r = cli({ "npmle", "--data", toy_data(dir).string(), "--kernel", "kernel1", "--grid", "-2:6:80",
                       "--max-iter", "3", "--checkpoints", "1", "--out", (dir / "out").string() });
  CHECK(r.code == 0);
  CHECK(json::parse(r.err)["warning"] == "not-stationary");
}

TEST_CASE("simulate is reproducible")
{
  const auto dir = fresh_dir("simulate");
  write_text_file(dir / "study.json", R"({
  "kernels": ["kernel1", "kernel2"],
  "mixing": "bimodal_normal",
  "n": 40,
  "replications": 2,
  "grid": "0:10:60"
})");
  const std::string cfg = (dir / "study.json").string();
  const auto a = cli({ "simulate", "--config", cfg, "--seed", "5", "--out", (dir / "a").string() });
  const auto b = cli({ "simulate", "--config", cfg, "--seed", "5", "--jobs", "2", "--out",
                       (dir / "b").string() });
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(a.out == b.out);
  std::size_t compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(dir / "a")) {
    if (!entry.is_regular_file())
      continue;
    const fs::path other = dir / "b" / fs::relative(entry.path(), dir / "a");
    REQUIRE(fs::exists(other));
    CHECK(read_text_file(entry.path()) == read_text_file(other));
    ++compared;
  }
  CHECK(compared == 10);

  const json manifest = read_json(dir / "a" / "bimodal_normal__kernel2" / "manifest.json");
  CHECK(manifest["study"]["seed"] == 5);
}
