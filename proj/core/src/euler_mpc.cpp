#include "quatmpc/euler_mpc.hpp"

#include <algorithm>
#include <cmath>

#include "quatmpc/errors.hpp"

namespace quatmpc {

namespace {

// Shift each angle by whole turns so it lands nearest `near`.
Vec3 unwrap_rpy(const Vec3& rpy, const Vec3& near) {
  Vec3 out;
  for (int i = 0; i < 3; ++i) out[i] = near[i] + wrap_angle(rpy[i] - near[i]);
  return out;
}

CostExpansion euler_state_terms(const EulerState& x, const EulerState& ref,
                                const CostWeights& w, const Vec3& w_att, double scale) {
  CostExpansion e;
  e.lx = VecX::Zero(12);
  e.lxx = MatX::Zero(12, 12);

  Vec12 err = euler_state_error(x, ref);
  Vec12 diag;
  diag << w.w_r, w_att, w.w_v, w.w_omega;
  e.cost = scale * 0.5 * err.dot(diag.cwiseProduct(err));
  e.lx = scale * diag.cwiseProduct(err);
  e.lxx = MatX((scale * diag).asDiagonal());
  return e;
}

}  // namespace

EulerMpcController::EulerMpcController(RobotModel model, MpcSettings settings,
                                       GaitSchedule gait)
    : model_(std::move(model)),
      settings_(std::move(settings)),
      gait_(std::move(gait)),
      weights_(settings_.weights.sized_for(model_.control_dim())),
      tick_dt_(1.0 / settings_.rate_hz) {
  if (settings_.constraints.f_max <= 0.0) {
    settings_.constraints = ConstraintSet::defaults_for(model_);
  }
  // Small-angle curvature match: 1 - |cos(theta/2)| ~ theta^2/8, so a
  // quadratic 0.5 * (w_q/4) * theta^2 reproduces the quaternion cost locally.
  w_attitude_ = Vec3::Constant(weights_.w_q / 4.0);
  shift_knots_ = settings_.warm_start_shift >= 0
                     ? settings_.warm_start_shift
                     : std::max(1, static_cast<int>(std::lround(tick_dt_ / settings_.knot_dt)));
  prev_u0_ = VecX::Zero(model_.control_dim());
}

MpcTick EulerMpcController::step(const SrbState& x, const VelocityCommand& cmd, double t,
                                 const std::vector<Vec3>& feet) {
  update_reference_anchor(x, cmd, tick_dt_, settings_, rel_frame_, anchor_, initialized_);

  const int K = settings_.horizon_knots;
  const double dt = settings_.knot_dt;
  const int m = model_.control_dim();
  const int n_feet = model_.num_contacts();

  const double ref_yaw = rel_frame_.yaw(anchor_.q);
  const double ref_height =
      settings_.attitude_target_mode ? -1.0 : settings_.reference_height;
  const std::vector<SrbState> refs = build_reference(anchor_, cmd, K, dt, ref_height, ref_yaw);

  // Current state and references in the Euler chart, kept angle-continuous
  // across ticks and along the horizon.
  EulerState xe = EulerState::from_srb(x);
  if (have_last_rpy_) xe.rpy = unwrap_rpy(xe.rpy, last_rpy_);
  last_rpy_ = xe.rpy;
  have_last_rpy_ = true;

  std::vector<EulerState> erefs(K);
  Vec3 prev = xe.rpy;
  for (int k = 0; k < K; ++k) {
    erefs[k] = EulerState::from_srb(refs[k]);
    erefs[k].rpy = unwrap_rpy(erefs[k].rpy, prev);
    prev = erefs[k].rpy;
  }

  std::vector<std::vector<bool>> contacts;
  std::vector<Vec3> horizon_feet = feet;
  if (model_.variant == ActuationVariant::FootForce) {
    contacts = gait_contacts(gait_, t, K, dt, n_feet);
    const std::vector<Vec3> targets = foothold_heuristic(model_, x, cmd, gait_, ref_yaw);
    for (int i = 0; i < n_feet; ++i) {
      if (!gait_.stance(t, i)) horizon_feet[i] = targets[i];
    }
  } else {
    contacts.assign(K - 1, std::vector<bool>(n_feet, false));
  }
  const std::vector<VecX> u_ref =
      nominal_controls(model_, settings_.constraints, contacts, horizon_feet, x.r);

  Problem prob;
  prob.state_dim = 12;
  prob.error_dim = 12;
  prob.control_dim = m;
  prob.horizon = K;
  prob.x0 = xe.pack();
  prob.step = [this, &horizon_feet](int, const VecX& xs, const VecX& u) {
    return VecX(
        euler_discrete_dynamics(model_, EulerState::unpack(xs), u, horizon_feet,
                                settings_.knot_dt)
            .pack());
  };
  prob.linearize = [this, &horizon_feet](int, const VecX& xs, const VecX& u, const VecX&,
                                         MatX& A, MatX& B) {
    Mat12 A12;
    euler_discrete_jacobians(model_, EulerState::unpack(xs), u, horizon_feet,
                             settings_.knot_dt, A12, B);
    A = A12;
  };
  prob.error = [](const VecX& xs, const VecX& xr) {
    return VecX(euler_state_error(EulerState::unpack(xs), EulerState::unpack(xr)));
  };
  prob.cost = [this, &erefs, &u_ref](int k, const VecX& xs, const VecX& u) {
    CostExpansion e =
        euler_state_terms(EulerState::unpack(xs), erefs[k], weights_, w_attitude_, 1.0);
    const VecX du = u - u_ref[k];
    e.cost += 0.5 * du.dot(weights_.r_u.cwiseProduct(du));
    e.lu = weights_.r_u.cwiseProduct(du);
    e.luu = MatX(weights_.r_u.asDiagonal());
    e.lux = MatX::Zero(u.size(), 12);
    return e;
  };
  prob.cost_terminal = [this, &erefs](const VecX& xs) {
    return euler_state_terms(EulerState::unpack(xs), erefs.back(), weights_, w_attitude_,
                             weights_.terminal_scale);
  };
  if (model_.variant == ActuationVariant::FootForce) {
    prob.constraints = [this, &contacts](int k, const VecX&, const VecX& u) {
      return friction_constraints(u, contacts[k], settings_.constraints, 12);
    };
  } else {
    const VecX lo = model_.control_lower();
    const VecX hi = model_.control_upper();
    prob.constraints = [lo, hi](int, const VecX&, const VecX& u) {
      return box_constraints(u, lo, hi, 12);
    };
  }

  std::vector<VecX> u_init(K - 1);
  if (static_cast<int>(prev_controls_.size()) == K - 1) {
    for (int k = 0; k + 1 < K; ++k) {
      u_init[k] = prev_controls_[std::min(k + shift_knots_, K - 2)];
    }
  } else {
    u_init = u_ref;
  }

  MpcTick tick;
  tick.t = t;
  tick.reference_now = refs.front();

  bool failed = false;
  SolveResult sol;
  try {
    AlIlqrSolver solver(std::move(prob), settings_.solver);
    sol = solver.solve(u_init);
    tick.report = sol.report;
    tick.solve_ms = sol.report.solve_ms;
    failed = sol.report.status == SolveStatus::RegularizationExhausted ||
             sol.report.status == SolveStatus::Diverged || !sol.traj.u.front().allFinite();
  } catch (const KinematicSingularity&) {
    tick.report.status = SolveStatus::Diverged;
    failed = true;
  }

  if (failed) {
    tick.degraded = true;
    tick.u0 = prev_u0_;
    return tick;
  }

  VecX u0 = sol.traj.u.front();
  if (model_.variant == ActuationVariant::FootForce) {
    for (int i = 0; i < n_feet; ++i) {
      if (!contacts[0][i]) u0.segment<3>(3 * i).setZero();
    }
  }
  u0 = u0.cwiseMax(model_.control_lower()).cwiseMin(model_.control_upper());

  tick.u0 = u0;
  prev_controls_ = sol.traj.u;
  prev_u0_ = u0;
  return tick;
}

}  // namespace quatmpc
