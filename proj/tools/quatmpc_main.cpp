// Command-line front end: scenario runs, Monte Carlo batches, and the
// numeric verification suite. Exit codes: 0 success, 1 usage/config error,
// 2 scenario-level failure (fall, solver degradation, failed checks).

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "quatmpc/errors.hpp"
#include "quatmpc/monte_carlo.hpp"
#include "quatmpc/selfcheck.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace quatmpc;

namespace {

constexpr double kRadToDeg = 180.0 / M_PI;

std::string default_out_dir() {
  const char* env = std::getenv("QUATMPC_OUT");
  return env && *env ? env : ".";
}

void write_json_atomic(const json& j, const fs::path& path) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw ConfigError("cannot open '" + tmp.string() + "' for writing");
    out << j.dump(2) << "\n";
  }
  fs::rename(tmp, path);
}

void write_manifest(const fs::path& out_dir, const std::string& subcommand,
                    const std::string& scenario_path, std::uint64_t seed,
                    const std::vector<std::string>& argv, double wall_s) {
  json m;
  m["format"] = "quatmpc-manifest/1";
  m["version"] = QUATMPC_VERSION;
  m["subcommand"] = subcommand;
  m["scenario"] = scenario_path.empty() ? json(nullptr) : json(scenario_path);
  m["seed"] = seed;
  m["out_dir"] = out_dir.string();
  m["argv"] = argv;
  m["wall_time_s"] = wall_s;
  write_json_atomic(m, out_dir / "manifest.json");
}

int outcome_exit(RunOutcome o) {
  return o == RunOutcome::Success || o == RunOutcome::Touchdown ? 0 : 2;
}

struct RunArgs {
  std::string scenario_path;
  std::string out_dir = default_out_dir();
  std::int64_t seed = -1;  // <0: keep the scenario's seed
  bool quiet = false;
};

int cmd_run(const RunArgs& args, const std::vector<std::string>& argv) {
  const auto t0 = std::chrono::steady_clock::now();
  Scenario sc = scenario_from_file(args.scenario_path);
  if (args.seed >= 0) sc.seed = static_cast<std::uint64_t>(args.seed);

  const RunLog log = run_scenario(sc);

  fs::create_directories(args.out_dir);
  const fs::path out_dir(args.out_dir);
  write_run_csv(log, (out_dir / (sc.name + "_log.csv")).string());

  const Vec3 rms = rms_attitude_error(log) * kRadToDeg;
  json summary;
  summary["scenario"] = sc.name;
  summary["outcome"] = to_string(log.outcome);
  summary["note"] = log.note;
  summary["rows"] = log.rows.size();
  summary["ticks"] = log.ticks;
  summary["degraded_ticks"] = log.degraded_ticks;
  summary["median_solve_ms"] = log.median_solve_ms;
  summary["rms_attitude_error_deg"] = {rms.x(), rms.y(), rms.z()};
  summary["peak_attitude_error_deg"] = peak_attitude_error(log) * kRadToDeg;
  summary["peak_position_error_m"] = peak_position_error(log);
  if (sc.end_on_touchdown) {
    summary["touchdown_time_s"] = log.touchdown_time;
    summary["touchdown_tilt_deg"] = log.touchdown_tilt * kRadToDeg;
    summary["touchdown_feet_first"] = log.touchdown_feet_first;
  }
  write_json_atomic(summary, out_dir / (sc.name + "_summary.json"));

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(out_dir, "run", args.scenario_path, sc.seed, argv, wall);

  if (!args.quiet) {
    std::cout << sc.name << ": " << to_string(log.outcome);
    if (!log.note.empty()) std::cout << " (" << log.note << ")";
    std::cout << "\nticks: " << log.ticks << " (" << log.degraded_ticks
              << " degraded), median solve " << log.median_solve_ms << " ms\n"
              << "rms attitude error [deg]: " << rms.transpose() << "\n";
  }
  return outcome_exit(log.outcome);
}

struct MonteCarloArgs {
  int trials = 100;
  std::string controller = "quaternion";
  std::string out_dir = default_out_dir();
  std::uint64_t seed = 0;
  bool quiet = false;
};

int cmd_montecarlo(const MonteCarloArgs& args, const std::vector<std::string>& argv) {
  const auto t0 = std::chrono::steady_clock::now();
  const ControllerType type =
      args.controller == "euler" ? ControllerType::Euler : ControllerType::Quaternion;
  const MonteCarloReport report = monte_carlo(args.trials, type, args.seed);

  fs::create_directories(args.out_dir);
  const fs::path out_dir(args.out_dir);
  write_json_atomic(report.to_json(),
                    out_dir / ("montecarlo_" + report.controller + ".json"));
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(out_dir, "montecarlo", "", args.seed, argv, wall);

  if (!args.quiet) std::cout << report.table();
  std::cout << "success_rate " << report.success_rate << "\n";
  return 0;
}

struct VerifyArgs {
  int samples = 100;
  std::uint64_t seed = 1;
  bool inject_gradient_bug = false;
};

int cmd_verify(const VerifyArgs& args) {
  SelfCheckOptions opts;
  opts.samples = args.samples;
  opts.seed = args.seed;
  opts.inject_gradient_bug = args.inject_gradient_bug;
  const std::vector<CheckResult> results = run_self_checks(opts);
  std::cout << format_check_table(results);
  const bool ok = all_passed(results);
  std::cout << (ok ? "all checks passed\n" : "CHECKS FAILED\n");
  return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quaternion-native model-predictive control for legged robots"};
  app.set_version_flag("--version", QUATMPC_VERSION);
  app.require_subcommand(1);

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "run a scenario file and write its logs");
  run->add_option("scenario", run_args.scenario_path, "scenario JSON path")->required();
  run->add_option("--seed", run_args.seed, "override the scenario RNG seed");
  run->add_option("--out", run_args.out_dir, "output directory (default $QUATMPC_OUT or .)");
  run->add_flag("--quiet", run_args.quiet, "suppress the summary printout");

  MonteCarloArgs mc_args;
  CLI::App* mc = app.add_subcommand("montecarlo", "run seeded falling-cat trials");
  mc->add_option("--trials", mc_args.trials, "number of trials")->check(CLI::PositiveNumber);
  mc->add_option("--controller", mc_args.controller, "quaternion | euler")
      ->check(CLI::IsMember({"quaternion", "euler"}));
  mc->add_option("--seed", mc_args.seed, "base seed");
  mc->add_option("--out", mc_args.out_dir, "output directory (default $QUATMPC_OUT or .)");
  mc->add_flag("--quiet", mc_args.quiet, "suppress the per-trial table");

  VerifyArgs verify_args;
  CLI::App* verify = app.add_subcommand("verify", "run the numeric derivation checks");
  verify->add_option("--samples", verify_args.samples, "random inputs per check")
      ->check(CLI::PositiveNumber);
  verify->add_option("--seed", verify_args.seed, "RNG seed for the checks");
  verify->add_flag("--inject-gradient-bug", verify_args.inject_gradient_bug,
                   "flip a gradient sign to demonstrate regression detection");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;  // usage errors are exit 1 by contract
  }

  const std::vector<std::string> argv_record(argv, argv + argc);
  try {
    if (run->parsed()) return cmd_run(run_args, argv_record);
    if (mc->parsed()) return cmd_montecarlo(mc_args, argv_record);
    if (verify->parsed()) return cmd_verify(verify_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
