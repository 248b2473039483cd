#include "quatmpc/monte_carlo.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

namespace quatmpc {
namespace {

// splitmix64: decorrelates consecutive trial indices into seeds.
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Quaternion sample_uniform_quaternion(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec4 v;
  do {
    for (int i = 0; i < 4; ++i) v[i] = gauss(rng);
  } while (v.norm() < 1e-12);
  return Quaternion(Vec4(v / v.norm()));
}

TrialResult falling_cat_trial(std::uint64_t seed, ControllerType controller, RunLog* log_out) {
  std::mt19937_64 rng(seed);
  const Quaternion q0 = sample_uniform_quaternion(rng);
  const RunLog log = run_scenario(make_falling_cat_scenario(controller, q0));

  TrialResult r;
  r.seed = seed;
  r.initial_attitude = q0;
  r.feet_first = log.touchdown_feet_first;
  r.tilt_deg = log.touchdown_tilt * 180.0 / M_PI;
  r.touchdown_time = log.touchdown_time;
  r.success = log.outcome == RunOutcome::Touchdown && log.touchdown_feet_first &&
              r.tilt_deg < 15.0;
  if (log_out) *log_out = log;
  return r;
}

MonteCarloReport monte_carlo(int n_trials, ControllerType controller, std::uint64_t base_seed) {
  MonteCarloReport report;
  report.controller = controller == ControllerType::Quaternion ? "quaternion" : "euler";
  report.base_seed = base_seed;
  report.trials = n_trials;
  report.results.reserve(n_trials);
  for (int i = 0; i < n_trials; ++i) {
    TrialResult r = falling_cat_trial(mix(base_seed + static_cast<std::uint64_t>(i)), controller);
    r.index = i;
    report.successes += r.success ? 1 : 0;
    report.results.push_back(std::move(r));
  }
  report.success_rate = n_trials > 0 ? static_cast<double>(report.successes) / n_trials : 0.0;
  return report;
}

nlohmann::json MonteCarloReport::to_json() const {
  nlohmann::json j;
  j["controller"] = controller;
  j["base_seed"] = base_seed;
  j["trials"] = trials;
  j["successes"] = successes;
  j["success_rate"] = success_rate;
  nlohmann::json rows = nlohmann::json::array();
  for (const TrialResult& r : results) {
    nlohmann::json row;
    row["index"] = r.index;
    row["seed"] = r.seed;
    row["q0"] = {r.initial_attitude.w(), r.initial_attitude.vec().x(),
                 r.initial_attitude.vec().y(), r.initial_attitude.vec().z()};
    row["success"] = r.success;
    row["feet_first"] = r.feet_first;
    row["tilt_deg"] = r.tilt_deg;
    row["touchdown_time"] = r.touchdown_time;
    rows.push_back(std::move(row));
  }
  j["results"] = std::move(rows);
  return j;
}

std::string MonteCarloReport::table() const {
  std::ostringstream os;
  os << "trial  seed                  success  feet_first  tilt_deg  touchdown_s\n";
  os.precision(2);
  os << std::fixed;
  for (const TrialResult& r : results) {
    os.width(5);
    os << r.index << "  ";
    os.width(20);
    os << r.seed << "  ";
    os.width(7);
    os << (r.success ? "yes" : "no") << "  ";
    os.width(10);
    os << (r.feet_first ? "yes" : "no") << "  ";
    os.width(8);
    os << r.tilt_deg << "  ";
    os.width(11);
    os << r.touchdown_time << "\n";
  }
  os << "\n" << controller << " controller: " << successes << "/" << trials
     << " trials feet-first (rate ";
  os.precision(3);
  os << success_rate << ")\n";
  return os.str();
}

RunLog humanoid_attitude_sweep(ControllerType controller, int axis, double sign) {
  return run_scenario(make_humanoid_sweep_scenario(controller, axis, sign));
}

}  // namespace quatmpc
