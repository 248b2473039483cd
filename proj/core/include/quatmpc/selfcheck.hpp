#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace quatmpc {

// One derivation check: an analytic quantity compared against an independent
// numeric oracle (finite differences, Riccati recursion, closed-form
// ballistics, brute-force grid search).
struct CheckResult {
  std::string name;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct SelfCheckOptions {
  std::uint64_t seed = 1;
  int samples = 100;  // random inputs per finite-difference check
  // Flips the sign of the attitude-cost gradient inside its check so the
  // suite's ability to catch a regression can itself be exercised.
  bool inject_gradient_bug = false;
};

std::vector<CheckResult> run_self_checks(const SelfCheckOptions& opts = {});

bool all_passed(const std::vector<CheckResult>& results);
std::string format_check_table(const std::vector<CheckResult>& results);

}  // namespace quatmpc
