#include "quatmpc/al_ilqr.hpp"

#include <chrono>
#include <cmath>

#include <Eigen/Cholesky>

#include "quatmpc/errors.hpp"

namespace quatmpc {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterations: return "max_iterations";
    case SolveStatus::RegularizationExhausted: return "regularization_exhausted";
    case SolveStatus::Diverged: return "diverged";
  }
  return "unknown";
}

std::string ConvergenceReport::summary_line() const {
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "status=%s outer=%d inner=%d cost=%.6g viol=%.3g grad=%.3g ms=%.3f",
                to_string(status).c_str(), outer_iterations, inner_iterations, cost,
                max_violation, gradient_norm, solve_ms);
  return std::string(buf);
}

AlIlqrSolver::AlIlqrSolver(Problem problem, SolverSettings settings)
    : prob_(std::move(problem)), settings_(settings) {}

Trajectory AlIlqrSolver::rollout(const std::vector<VecX>& u) const {
  Trajectory traj;
  traj.u = u;
  traj.x.resize(prob_.horizon);
  traj.x[0] = prob_.x0;
  for (int k = 0; k + 1 < prob_.horizon; ++k) {
    traj.x[k + 1] = prob_.step(k, traj.x[k], traj.u[k]);
  }
  return traj;
}

double AlIlqrSolver::raw_cost(const Trajectory& traj) const {
  double total = 0.0;
  for (int k = 0; k + 1 < prob_.horizon; ++k) {
    total += prob_.cost(k, traj.x[k], traj.u[k]).cost;
  }
  total += prob_.cost_terminal(traj.x.back()).cost;
  return total;
}

VecX AlIlqrSolver::penalty_diagonal(const ConstraintBlock& block, const VecX& lambda,
                                    double mu) const {
  VecX im(block.rows());
  for (int i = 0; i < block.rows(); ++i) {
    const bool active = block.equality[i] || block.c[i] > 0.0 || lambda[i] > 0.0;
    im[i] = active ? mu : 0.0;
  }
  return im;
}

double AlIlqrSolver::al_objective(const Trajectory& traj, const AlState& al) const {
  double total = raw_cost(traj);
  if (!prob_.constraints) return total;
  for (int k = 0; k + 1 < prob_.horizon; ++k) {
    const ConstraintBlock block = prob_.constraints(k, traj.x[k], traj.u[k]);
    if (block.rows() == 0) continue;
    const VecX& lam = al.lambda[k];
    const VecX im = penalty_diagonal(block, lam, al.penalty);
    total += lam.dot(block.c) + 0.5 * block.c.dot(im.cwiseProduct(block.c));
  }
  return total;
}

double AlIlqrSolver::max_violation(const Trajectory& traj) const {
  if (!prob_.constraints) return 0.0;
  double worst = 0.0;
  for (int k = 0; k + 1 < prob_.horizon; ++k) {
    const ConstraintBlock block = prob_.constraints(k, traj.x[k], traj.u[k]);
    for (int i = 0; i < block.rows(); ++i) {
      const double v = block.equality[i] ? std::abs(block.c[i]) : std::max(block.c[i], 0.0);
      worst = std::max(worst, v);
    }
  }
  return worst;
}

AlState AlIlqrSolver::make_al_state() const {
  AlState al;
  al.penalty = settings_.penalty_initial;
  al.lambda.resize(std::max(prob_.horizon - 1, 0));
  return al;
}

void AlIlqrSolver::update_multipliers(const Trajectory& traj, AlState& al) const {
  if (!prob_.constraints) return;
  for (int k = 0; k + 1 < prob_.horizon; ++k) {
    const ConstraintBlock block = prob_.constraints(k, traj.x[k], traj.u[k]);
    VecX& lam = al.lambda[k];
    if (lam.size() != block.rows()) lam = VecX::Zero(block.rows());
    for (int i = 0; i < block.rows(); ++i) {
      lam[i] += al.penalty * block.c[i];
      if (!block.equality[i]) lam[i] = std::max(lam[i], 0.0);
    }
  }
}

bool AlIlqrSolver::backward_pass(const Trajectory& traj, const AlState& al, double reg,
                                 BackwardPassResult& out) const {
  const int K = prob_.horizon;
  const int m = prob_.control_dim;
  const int n = prob_.error_dim;

  out.gains.assign(K - 1, MatX());
  out.feedforward.assign(K - 1, VecX());
  out.value_hessian.assign(K, MatX());
  out.value_gradient.assign(K, VecX());
  out.delta1 = 0.0;
  out.delta2 = 0.0;
  out.grad_norm = 0.0;

  const CostExpansion term = prob_.cost_terminal(traj.x.back());
  MatX P = term.lxx;
  VecX p = term.lx;
  out.value_hessian[K - 1] = P;
  out.value_gradient[K - 1] = p;

  MatX A(n, n), B(n, m);
  for (int k = K - 2; k >= 0; --k) {
    prob_.linearize(k, traj.x[k], traj.u[k], traj.x[k + 1], A, B);
    const CostExpansion e = prob_.cost(k, traj.x[k], traj.u[k]);

    VecX Qx = e.lx + A.transpose() * p;
    VecX Qu = e.lu + B.transpose() * p;
    MatX Qxx = e.lxx + A.transpose() * P * A;
    MatX Quu = e.luu + B.transpose() * P * B;
    MatX Qux = e.lux + B.transpose() * P * A;

    if (prob_.constraints) {
      const ConstraintBlock block = prob_.constraints(k, traj.x[k], traj.u[k]);
      if (block.rows() > 0) {
        VecX lam = al.lambda[k];
        if (lam.size() != block.rows()) lam = VecX::Zero(block.rows());
        const VecX im = penalty_diagonal(block, lam, al.penalty);
        const VecX lam_bar = lam + im.cwiseProduct(block.c);
        Qx += block.c_x.transpose() * lam_bar;
        Qu += block.c_u.transpose() * lam_bar;
        Qxx += block.c_x.transpose() * im.asDiagonal() * block.c_x;
        Quu += block.c_u.transpose() * im.asDiagonal() * block.c_u;
        Qux += block.c_u.transpose() * im.asDiagonal() * block.c_x;
      }
    }

    MatX Quu_reg = Quu + reg * MatX::Identity(m, m);
    Quu_reg = 0.5 * (Quu_reg + Quu_reg.transpose());
    Eigen::LLT<MatX> llt(Quu_reg);
    if (llt.info() != Eigen::Success) return false;

    const MatX Kk = -llt.solve(Qux);
    const VecX dk = -llt.solve(Qu);

    out.gains[k] = Kk;
    out.feedforward[k] = dk;
    out.delta1 += dk.dot(Qu);
    out.delta2 += 0.5 * dk.dot(Quu_reg * dk);
    out.grad_norm = std::max(out.grad_norm, Qu.lpNorm<Eigen::Infinity>());

    P = Qxx + Kk.transpose() * Quu_reg * Kk + Kk.transpose() * Qux + Qux.transpose() * Kk;
    P = 0.5 * (P + P.transpose());
    p = Qx + Kk.transpose() * Quu_reg * dk + Kk.transpose() * Qu + Qux.transpose() * dk;
    out.value_hessian[k] = P;
    out.value_gradient[k] = p;
  }
  return true;
}

bool AlIlqrSolver::forward_pass(const Trajectory& traj, const BackwardPassResult& bp,
                                const AlState& al, double alpha, Trajectory& out,
                                double& al_cost) const {
  const int K = prob_.horizon;
  out.x.resize(K);
  out.u.resize(K - 1);
  out.x[0] = traj.x[0];
  for (int k = 0; k + 1 < K; ++k) {
    VecX err;
    try {
      err = prob_.error(out.x[k], traj.x[k]);
    } catch (const NearSingularChart&) {
      return false;  // wandered past the chart; shorter step needed
    }
    out.u[k] = traj.u[k] + alpha * bp.feedforward[k] + bp.gains[k] * err;
    out.x[k + 1] = prob_.step(k, out.x[k], out.u[k]);
    if (!out.x[k + 1].allFinite() ||
        out.x[k + 1].lpNorm<Eigen::Infinity>() > settings_.divergence_bound) {
      return false;  // rollout diverged
    }
  }
  al_cost = al_objective(out, al);
  return std::isfinite(al_cost);
}

SolveResult AlIlqrSolver::solve(const std::vector<VecX>& u_init) {
  const auto t_start = std::chrono::steady_clock::now();

  SolveResult result;
  result.traj = rollout(u_init);
  AlState al = make_al_state();
  // Size multipliers from the initial trajectory so the first backward pass
  // sees consistent lambda dimensions.
  if (prob_.constraints) {
    for (int k = 0; k + 1 < prob_.horizon; ++k) {
      al.lambda[k] =
          VecX::Zero(prob_.constraints(k, result.traj.x[k], result.traj.u[k]).rows());
    }
  }

  ConvergenceReport& rep = result.report;
  double reg = settings_.reg_initial;
  bool exhausted = false;

  for (int outer = 0; outer < settings_.max_outer && !exhausted; ++outer) {
    rep.outer_iterations = outer + 1;
    double J = al_objective(result.traj, al);
    bool inner_converged = false;

    for (int inner = 0; inner < settings_.max_inner; ++inner) {
      BackwardPassResult bp;
      while (!backward_pass(result.traj, al, reg, bp)) {
        reg *= settings_.reg_scale;
        if (reg > settings_.reg_max) {
          exhausted = true;
          break;
        }
      }
      if (exhausted) break;
      rep.inner_iterations++;
      rep.gradient_norm = bp.grad_norm;

      if (bp.grad_norm < settings_.grad_tol) {
        inner_converged = true;
        break;
      }

      bool accepted = false;
      for (double alpha = 1.0; alpha >= settings_.line_search_min_step;
           alpha *= settings_.line_search_backoff) {
        const double expected = alpha * bp.delta1 + alpha * alpha * bp.delta2;
        if (expected >= -1e-14) {
          // No predicted descent left at this step size; the gradient check
          // above will terminate on the next sweep.
          inner_converged = true;
          break;
        }
        Trajectory candidate;
        double J_candidate = 0.0;
        if (!forward_pass(result.traj, bp, al, alpha, candidate, J_candidate)) continue;
        const double ratio = (J_candidate - J) / expected;
        if (ratio > settings_.line_search_accept_ratio && J_candidate < J) {
          const double decrease = J - J_candidate;
          result.traj = std::move(candidate);
          J = J_candidate;
          accepted = true;
          reg = std::max(reg / settings_.reg_scale, settings_.reg_initial);
          if (decrease < settings_.cost_tol) inner_converged = true;
          break;
        }
      }
      if (inner_converged) break;
      if (!accepted) {
        reg *= settings_.reg_scale;
        if (reg > settings_.reg_max) {
          exhausted = true;
          break;
        }
      }
    }

    const double viol = max_violation(result.traj);
    rep.max_violation = viol;
    if (inner_converged && viol < settings_.constraint_tol) {
      rep.status = SolveStatus::Converged;
      break;
    }
    update_multipliers(result.traj, al);
    al.penalty = std::min(al.penalty * settings_.penalty_scale, settings_.penalty_max);
  }

  if (exhausted) rep.status = SolveStatus::RegularizationExhausted;
  rep.cost = raw_cost(result.traj);
  rep.max_violation = max_violation(result.traj);
  rep.solve_ms = std::chrono::duration<double, std::milli>(
                     std::chrono::steady_clock::now() - t_start)
                     .count();
  return result;
}

}  // namespace quatmpc
