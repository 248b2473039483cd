#pragma once

#include <functional>
#include <string>
#include <vector>

#include "quatmpc/constraints.hpp"
#include "quatmpc/cost.hpp"

namespace quatmpc {

// Trajectory optimization problem over an arbitrary packed state with a
// separate (possibly lower-dimensional) error state. All callbacks must be
// consistent: linearize/cost derivatives live in the error state, step and
// the states themselves in the packed representation.
struct Problem {
  int state_dim = 0;
  int error_dim = 0;
  int control_dim = 0;
  int horizon = 0;  // K knots, K-1 controls
  VecX x0;

  std::function<VecX(int k, const VecX& x, const VecX& u)> step;
  std::function<void(int k, const VecX& x, const VecX& u, const VecX& x_next, MatX& A, MatX& B)>
      linearize;
  std::function<VecX(const VecX& x, const VecX& x_ref)> error;
  std::function<CostExpansion(int k, const VecX& x, const VecX& u)> cost;
  std::function<CostExpansion(const VecX& x)> cost_terminal;
  // Optional; return a zero-row block for unconstrained knots (k in [0, K-2]).
  std::function<ConstraintBlock(int k, const VecX& x, const VecX& u)> constraints;
};

struct SolverSettings {
  int max_outer = 10;
  int max_inner = 50;
  double cost_tol = 1e-4;
  double grad_tol = 1e-5;
  double constraint_tol = 1e-4;
  double penalty_initial = 10.0;
  double penalty_scale = 10.0;
  double penalty_max = 1e8;
  double reg_initial = 1e-9;
  double reg_scale = 10.0;
  double reg_max = 1e8;
  double line_search_backoff = 0.5;
  double line_search_min_step = 1.0 / 64.0;
  double line_search_accept_ratio = 1e-4;
  double divergence_bound = 1e6;
};

struct Trajectory {
  std::vector<VecX> x;  // K
  std::vector<VecX> u;  // K-1
};

// Multiplier estimates per knot plus the shared quadratic penalty weight.
struct AlState {
  std::vector<VecX> lambda;
  double penalty = 10.0;
};

enum class SolveStatus { Converged, MaxIterations, RegularizationExhausted, Diverged };

std::string to_string(SolveStatus s);

struct ConvergenceReport {
  SolveStatus status = SolveStatus::MaxIterations;
  int outer_iterations = 0;
  int inner_iterations = 0;
  double cost = 0.0;           // raw (un-augmented) objective
  double max_violation = 0.0;  // max over knots of equality |c| / inequality max(c, 0)
  double gradient_norm = 0.0;  // max_k |Q_u|_inf at the last backward pass
  double solve_ms = 0.0;

  std::string summary_line() const;
};

struct BackwardPassResult {
  std::vector<MatX> gains;        // K_k, m x error_dim
  std::vector<VecX> feedforward;  // d_k
  std::vector<MatX> value_hessian;   // P_k, K entries
  std::vector<VecX> value_gradient;  // p_k
  double delta1 = 0.0;  // sum d_k . Q_u  (expected first-order decrease, < 0)
  double delta2 = 0.0;  // 0.5 sum d_k . Q_uu d_k
  double grad_norm = 0.0;
};

struct SolveResult {
  Trajectory traj;
  ConvergenceReport report;
};

class AlIlqrSolver {
 public:
  AlIlqrSolver(Problem problem, SolverSettings settings);

  // Rolls out u_init from problem.x0 and runs the full AL outer / iLQR inner
  // loop. Never throws on numerical failure: the report carries the status
  // and the best trajectory found so far is returned.
  SolveResult solve(const std::vector<VecX>& u_init);

  // Pieces below are the solve() building blocks, exposed for verification.
  Trajectory rollout(const std::vector<VecX>& u) const;
  double raw_cost(const Trajectory& traj) const;
  double al_objective(const Trajectory& traj, const AlState& al) const;
  double max_violation(const Trajectory& traj) const;
  // false when Q_uu regularized by reg is not positive definite.
  bool backward_pass(const Trajectory& traj, const AlState& al, double reg,
                     BackwardPassResult& out) const;
  // false when the rollout diverges or leaves the error-state chart.
  bool forward_pass(const Trajectory& traj, const BackwardPassResult& bp, const AlState& al,
                    double alpha, Trajectory& out, double& al_cost) const;

  AlState make_al_state() const;  // zero multipliers sized from the problem
  void update_multipliers(const Trajectory& traj, AlState& al) const;

  const Problem& problem() const { return prob_; }
  const SolverSettings& settings() const { return settings_; }

 private:
  VecX penalty_diagonal(const ConstraintBlock& block, const VecX& lambda, double mu) const;

  Problem prob_;
  SolverSettings settings_;
};

}  // namespace quatmpc
