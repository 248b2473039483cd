#include "quatmpc/mpc.hpp"

#include <algorithm>
#include <cmath>

#include "quatmpc/errors.hpp"

namespace quatmpc {

bool GaitSchedule::stance(double t, int foot) const {
  if (type == Type::Stand) return true;
  const double offset = foot < static_cast<int>(offsets.size()) ? offsets[foot] : 0.0;
  double phase = std::fmod(t / period + offset, 1.0);
  if (phase < 0.0) phase += 1.0;
  return phase < duty;
}

double RelativeFrame::yaw(const Quaternion& q) {
  const Mat3 R = rotation_matrix(q);
  const double sin_pitch = -R(2, 0);
  if (frozen_) {
    if (std::abs(sin_pitch) < 0.98) frozen_ = false;
  } else if (std::abs(sin_pitch) > 0.99) {
    frozen_ = true;
  }
  if (!frozen_) last_yaw_ = std::atan2(R(1, 0), R(0, 0));
  return last_yaw_;
}

std::vector<SrbState> build_reference(const SrbState& x_start, const VelocityCommand& cmd,
                                      int knots, double dt, double height, double yaw) {
  const Quaternion yaw_q = Quaternion::from_axis_angle(Vec3::UnitZ(), yaw);
  const Vec3 v_world = rotate(yaw_q, cmd.linear);

  std::vector<SrbState> refs(knots);
  SrbState ref = x_start;
  if (height >= 0.0) ref.r.z() = height;
  ref.v = v_world;
  ref.omega = cmd.angular;
  for (int k = 0; k < knots; ++k) {
    refs[k] = ref;
    ref.r += dt * v_world;
    if (height >= 0.0) ref.r.z() = height;
    ref.q = integrate_body_rate(ref.q, cmd.angular, dt);
  }
  return refs;
}

std::vector<std::vector<bool>> gait_contacts(const GaitSchedule& gait, double t0, int knots,
                                             double dt, int n_feet) {
  std::vector<std::vector<bool>> flags(knots - 1, std::vector<bool>(n_feet));
  for (int k = 0; k + 1 < knots; ++k) {
    const double t_mid = t0 + (k + 0.5) * dt;
    for (int i = 0; i < n_feet; ++i) flags[k][i] = gait.stance(t_mid, i);
  }
  return flags;
}

std::vector<Vec3> foothold_heuristic(const RobotModel& model, const SrbState& x,
                                     const VelocityCommand& cmd, const GaitSchedule& gait,
                                     double yaw) {
  const Quaternion yaw_q = Quaternion::from_axis_angle(Vec3::UnitZ(), yaw);
  const Vec3 v_world = rotate(yaw_q, cmd.linear);

  std::vector<Vec3> targets(model.num_contacts());
  for (int i = 0; i < model.num_contacts(); ++i) {
    Vec3 hip = model.contact_points[i];
    hip.z() = 0.0;
    const Vec3 hip_proj = Vec3(x.r.x(), x.r.y(), 0.0) + rotate(yaw_q, hip);
    Vec3 offset = 0.5 * gait.stance_duration() * v_world;
    offset.z() = 0.0;
    if (offset.norm() > model.reach_radius) offset *= model.reach_radius / offset.norm();
    targets[i] = hip_proj + offset;
  }
  return targets;
}

MpcController::MpcController(RobotModel model, MpcSettings settings, GaitSchedule gait)
    : model_(std::move(model)),
      settings_(std::move(settings)),
      gait_(std::move(gait)),
      weights_(settings_.weights.sized_for(model_.control_dim())),
      tick_dt_(1.0 / settings_.rate_hz) {
  if (settings_.constraints.f_max <= 0.0) {
    settings_.constraints = ConstraintSet::defaults_for(model_);
  }
  shift_knots_ = settings_.warm_start_shift >= 0
                     ? settings_.warm_start_shift
                     : std::max(1, static_cast<int>(std::lround(tick_dt_ / settings_.knot_dt)));
  prev_u0_ = VecX::Zero(model_.control_dim());
}

void update_reference_anchor(const SrbState& x, const VelocityCommand& cmd, double tick_dt,
                             MpcSettings& settings, RelativeFrame& rel_frame, SrbState& anchor,
                             bool& initialized) {
  if (!initialized) {
    anchor = x;
    if (settings.reference_height < 0.0 && !settings.attitude_target_mode) {
      settings.reference_height = anchor.r.z();
    }
    initialized = true;
  }

  if (settings.attitude_target_mode) {
    // Airborne: translation is uncontrollable, so the anchor follows the
    // ballistic state and only the attitude target matters.
    anchor.r = x.r;
    anchor.v = x.v;
    anchor.q = settings.attitude_target;
    anchor.omega.setZero();
    return;
  }

  const double yaw = rel_frame.yaw(anchor.q);
  const Quaternion yaw_q = Quaternion::from_axis_angle(Vec3::UnitZ(), yaw);
  anchor.r += tick_dt * rotate(yaw_q, cmd.linear);
  anchor.r.z() = settings.reference_height;
  anchor.q = integrate_body_rate(anchor.q, cmd.angular, tick_dt);

  // Leash: a reference that runs away from the robot (after a shove or a
  // tracking fault) makes the solve fight an impossible error; clamp it back.
  const Vec3 dr = anchor.r - x.r;
  if (dr.norm() > settings.leash_pos) {
    anchor.r = x.r + dr * (settings.leash_pos / dr.norm());
  }
  Quaternion rel = quat_mul(conj(x.q), anchor.q);
  if (rel.w() < 0.0) rel.wxyz = -rel.wxyz;
  const double angle = 2.0 * std::acos(std::min(rel.w(), 1.0));
  if (angle > settings.leash_angle && rel.vec().norm() > 1e-12) {
    const Vec3 axis = rel.vec().normalized();
    anchor.q = quat_mul(x.q, Quaternion::from_axis_angle(axis, settings.leash_angle));
  }
}

std::vector<VecX> nominal_controls(const RobotModel& model, const ConstraintSet& set,
                                   const std::vector<std::vector<bool>>& contacts,
                                   const std::vector<Vec3>& feet, const Vec3& r) {
  const int m = model.control_dim();
  std::vector<VecX> u_ref(contacts.size(), VecX::Zero(m));
  if (model.variant != ActuationVariant::FootForce) return u_ref;

  const double weight = model.mass * model.gravity.norm();
  for (size_t k = 0; k < contacts.size(); ++k) {
    std::vector<int> stance;
    for (int i = 0; i < model.num_contacts(); ++i)
      if (contacts[k][i]) stance.push_back(i);
    if (stance.empty()) continue;
    for (int i : stance) {
      // Split along the inward normal so wall stances get a sensible seed.
      const Vec3 n = set.frame(i).row(2);
      u_ref[k].segment<3>(3 * i) = n * (weight / static_cast<double>(stance.size()));
    }
    // Vertical least-squares shim zeroing net lift and roll/pitch torque about
    // the CoM. Without it the cost center is not an equilibrium whenever the
    // stance is not symmetric (toe/heel pairs, staggered wall bracing), and
    // the per-tick iteration budget leaves that bias in every solve.
    const int n = static_cast<int>(stance.size());
    MatX A(3, n);
    Vec3 b(weight, 0.0, 0.0);
    for (int j = 0; j < n; ++j) {
      const Vec3 f = u_ref[k].segment<3>(3 * stance[j]);
      const Vec3 lever = feet[stance[j]] - r;
      const Vec3 tau = lever.cross(f);
      b[0] -= f.z();
      b[1] -= tau.x();
      b[2] -= tau.y();
      A(0, j) = 1.0;
      A(1, j) = lever.y();
      A(2, j) = -lever.x();
    }
    const VecX delta = A.completeOrthogonalDecomposition().solve(b);
    for (int j = 0; j < n; ++j) u_ref[k][3 * stance[j] + 2] += delta[j];
  }
  return u_ref;
}

void MpcController::update_anchor(const SrbState& x, const VelocityCommand& cmd) {
  update_reference_anchor(x, cmd, tick_dt_, settings_, rel_frame_, anchor_, initialized_);
}

MpcTick MpcController::step(const SrbState& x, const VelocityCommand& cmd, double t,
                            const std::vector<Vec3>& feet) {
  update_anchor(x, cmd);

  const int K = settings_.horizon_knots;
  const double dt = settings_.knot_dt;
  const int m = model_.control_dim();
  const int n_feet = model_.num_contacts();

  const double ref_yaw = rel_frame_.yaw(anchor_.q);
  const double ref_height =
      settings_.attitude_target_mode ? -1.0 : settings_.reference_height;
  std::vector<SrbState> refs = build_reference(anchor_, cmd, K, dt, ref_height, ref_yaw);

  std::vector<std::vector<bool>> contacts;
  std::vector<Vec3> horizon_feet = feet;
  if (model_.variant == ActuationVariant::FootForce) {
    contacts = gait_contacts(gait_, t, K, dt, n_feet);
    // Feet stay where they are measured; feet currently in swing plan for
    // their upcoming touchdown spot instead.
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
  prob.state_dim = 13;
  prob.error_dim = 12;
  prob.control_dim = m;
  prob.horizon = K;
  prob.x0 = x.pack();
  prob.step = [this, &horizon_feet](int, const VecX& xs, const VecX& u) {
    return discrete_dynamics(model_, SrbState::unpack(xs), u, horizon_feet, settings_.knot_dt)
        .pack();
  };
  prob.linearize = [this, &horizon_feet](int, const VecX& xs, const VecX& u, const VecX& xn,
                                         MatX& A, MatX& B) {
    const LinearizedStep s =
        quatmpc::linearize(model_, SrbState::unpack(xs), u, SrbState::unpack(xn), horizon_feet,
                           settings_.knot_dt);
    A = s.A;
    B = s.B;
  };
  prob.error = [](const VecX& xs, const VecX& xr) {
    return VecX(state_error(SrbState::unpack(xs), SrbState::unpack(xr)));
  };
  prob.cost = [this, &refs, &u_ref](int k, const VecX& xs, const VecX& u) {
    return stage_cost(SrbState::unpack(xs), u, refs[k], u_ref[k], weights_);
  };
  prob.cost_terminal = [this, &refs](const VecX& xs) {
    return terminal_cost(SrbState::unpack(xs), refs.back(), weights_);
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

  // Warm start: previous solution shifted by the tick duration; tail holds
  // the last control. First tick falls back to the nominal distribution.
  std::vector<VecX> u_init(K - 1);
  if (static_cast<int>(prev_controls_.size()) == K - 1) {
    for (int k = 0; k + 1 < K; ++k) {
      u_init[k] = prev_controls_[std::min(k + shift_knots_, K - 2)];
    }
  } else {
    u_init = u_ref;
  }

  AlIlqrSolver solver(std::move(prob), settings_.solver);
  SolveResult sol = solver.solve(u_init);

  MpcTick tick;
  tick.t = t;
  tick.report = sol.report;
  tick.solve_ms = sol.report.solve_ms;
  tick.reference_now = refs.front();

  const bool failed = sol.report.status == SolveStatus::RegularizationExhausted ||
                      sol.report.status == SolveStatus::Diverged ||
                      !sol.traj.u.front().allFinite();
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
