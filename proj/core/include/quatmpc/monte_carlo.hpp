#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "quatmpc/sim.hpp"

namespace quatmpc {

// Uniform draw on SO(3): normalized 4-component Gaussian.
Quaternion sample_uniform_quaternion(std::mt19937_64& rng);

struct TrialResult {
  int index = 0;
  std::uint64_t seed = 0;
  Quaternion initial_attitude;
  bool success = false;
  bool feet_first = false;
  double tilt_deg = 0.0;        // roll/pitch error at touchdown
  double touchdown_time = -1.0;  // <0: never touched down within the cap
};

struct MonteCarloReport {
  std::string controller;
  std::uint64_t base_seed = 0;
  int trials = 0;
  int successes = 0;
  double success_rate = 0.0;
  std::vector<TrialResult> results;  // keyed by trial index

  nlohmann::json to_json() const;
  std::string table() const;
};

// One seeded drop from 1.75 m with a uniformly random initial attitude and
// the reaction-wheel quadruped. Success: touchdown is feet-first (all four
// feet below any other body point) with roll/pitch error under 15 deg.
// Identical seeds give identical outcomes. log_out, when given, receives the
// full rollout.
TrialResult falling_cat_trial(std::uint64_t seed, ControllerType controller,
                              RunLog* log_out = nullptr);

// n independent trials with per-index seeds derived from base_seed.
MonteCarloReport monte_carlo(int n_trials, ControllerType controller,
                             std::uint64_t base_seed = 0);

// Standing humanoid attitude sweep (+-105 deg about one body axis).
RunLog humanoid_attitude_sweep(ControllerType controller, int axis = 1, double sign = 1.0);

}  // namespace quatmpc
