#include "quatmpc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include "quatmpc/errors.hpp"
#include "quatmpc/euler_mpc.hpp"

namespace quatmpc {
namespace {

double yaw_of(const Quaternion& q) {
  const Mat3 R = rotation_matrix(q);
  return std::atan2(R(1, 0), R(0, 0));
}

Mat3 yaw_rotation(double yaw) {
  Mat3 R = Mat3::Identity();
  const double c = std::cos(yaw), s = std::sin(yaw);
  R(0, 0) = c;
  R(0, 1) = -s;
  R(1, 0) = s;
  R(1, 1) = c;
  return R;
}

std::vector<Vec3> box_corners(const Vec3& half) {
  std::vector<Vec3> c;
  c.reserve(8);
  for (int sx : {-1, 1})
    for (int sy : {-1, 1})
      for (int sz : {-1, 1}) c.emplace_back(sx * half.x(), sy * half.y(), sz * half.z());
  return c;
}

// Initial foot pins and (for walls) per-foot contact frames.
void place_feet(const Scenario& sc, const SrbState& x, std::vector<Vec3>& feet,
                ConstraintSet& constraints) {
  feet.clear();
  if (sc.model.variant != ActuationVariant::FootForce) return;
  const Mat3 R = rotation_matrix(x.q);
  switch (sc.env.type) {
    case EnvironmentType::FlatGround:
      for (const Vec3& c : sc.model.contact_points) {
        Vec3 p = x.r + R * c;
        p.z() = 0.0;
        feet.push_back(p);
      }
      break;
    case EnvironmentType::TwoWalls: {
      // Chimney stance: front feet brace one wall, rear feet the other.
      // Pairs sit +-0.10 m around the CoM height — a large vertical stagger
      // turns the squeeze couple into friction demands outside the cone.
      constraints.contact_frames.clear();
      const double half_gap = 0.5 * sc.env.wall_gap;
      for (const Vec3& c : sc.model.contact_points) {
        const bool front = c.x() > 0.0;
        const double side = front ? -1.0 : 1.0;  // wall x = side * half_gap
        Vec3 p = x.r + R * c;
        p.x() = side * half_gap;
        p.z() = x.r.z() + (front ? 0.10 : -0.10);
        feet.push_back(p);
        Mat3 frame;
        frame.row(0) = Vec3::UnitY();          // tangent 1
        frame.row(1) = Vec3::UnitZ();          // tangent 2
        frame.row(2) = Vec3(-side, 0.0, 0.0);  // inward normal (walls push apart)
        constraints.contact_frames.push_back(frame);
      }
      break;
    }
    case EnvironmentType::Airborne:
      break;  // no pins; contact points only matter for touchdown checks
  }
}

struct TouchdownHit {
  bool hit = false;
  bool on_foot = false;
  bool feet_first = false;
  double tilt = 0.0;
};

TouchdownHit check_touchdown(const RobotModel& model, const SrbState& x,
                             const std::vector<Vec3>& corners) {
  const Mat3 R = rotation_matrix(x.q);
  double min_foot = 1e300, max_foot = -1e300, min_corner = 1e300;
  for (const Vec3& c : model.contact_points) {
    const double z = (x.r + R * c).z();
    min_foot = std::min(min_foot, z);
    max_foot = std::max(max_foot, z);
  }
  for (const Vec3& c : corners) min_corner = std::min(min_corner, (x.r + R * c).z());

  TouchdownHit hit;
  if (min_foot > 0.0 && min_corner > 0.0) return hit;
  hit.hit = true;
  hit.on_foot = min_foot <= min_corner;
  // "Feet before any other body part": at this attitude every foot must be
  // below every corner, so the remaining three feet also land first.
  hit.feet_first = hit.on_foot && max_foot <= min_corner + 1e-9;
  hit.tilt = std::acos(std::clamp(R(2, 2), -1.0, 1.0));
  return hit;
}

std::string format_time(double t) {
  std::ostringstream os;
  os.precision(3);
  os << std::fixed << t;
  return os.str();
}

}  // namespace

const char* to_string(RunOutcome o) {
  switch (o) {
    case RunOutcome::Success: return "success";
    case RunOutcome::Fall: return "fall";
    case RunOutcome::DegradedLimit: return "degraded_limit";
    case RunOutcome::Penetration: return "penetration";
    case RunOutcome::Touchdown: return "touchdown";
  }
  return "unknown";
}

SrbState physics_step(const RobotModel& model, const SrbState& x, const VecX& u,
                      const std::vector<Vec3>& feet, double dt) {
  const auto f = [&](const Vec13& y) {
    return continuous_dynamics(model, SrbState::unpack(y), u, feet);
  };
  const Vec13 y0 = x.pack();
  const Vec13 k1 = f(y0);
  const Vec13 k2 = f(y0 + (0.5 * dt) * k1);
  const Vec13 k3 = f(y0 + (0.5 * dt) * k2);
  const Vec13 k4 = f(y0 + dt * k3);
  SrbState next = SrbState::unpack(y0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
  next.q = next.q.normalized();
  return next;
}

RunLog run_scenario(const Scenario& scenario) {
  Scenario sc = scenario;  // local copy: environment injects contact frames
  const RobotModel& model = sc.model;
  if (sc.physics_dt > 1.0 / sc.mpc.rate_hz + 1e-12)
    throw ConfigError("scenario: physics_dt_s must not exceed the MPC period");

  SrbState x;
  const double h0 = sc.initial_height >= 0.0 ? sc.initial_height : model.standing_height;
  x.r = Vec3(0.0, 0.0, h0);
  x.q = sc.has_initial_attitude ? sc.initial_attitude : quat_from_euler_zyx(sc.initial_rpy);
  x.omega = sc.initial_omega;

  std::vector<Vec3> feet;
  place_feet(sc, x, feet, sc.mpc.constraints);

  std::unique_ptr<ControllerBase> ctrl;
  if (sc.controller == ControllerType::Quaternion)
    ctrl = std::make_unique<MpcController>(model, sc.mpc, sc.gait);
  else
    ctrl = std::make_unique<EulerMpcController>(model, sc.mpc, sc.gait);

  // Open-loop reference for logging and fall detection. Integrated from the
  // command script alone so a diverging controller cannot drag the yardstick
  // it is measured against.
  SrbState ideal = x;
  RelativeFrame ideal_rel;
  const double ref_height = sc.mpc.reference_height >= 0.0 ? sc.mpc.reference_height : h0;
  if (sc.mpc.attitude_target_mode) ideal.q = sc.mpc.attitude_target;

  const std::vector<Vec3> corners = box_corners(model.body_half_extents);
  const int n_steps = static_cast<int>(std::llround(sc.duration / sc.physics_dt));
  const double dt = sc.physics_dt;
  const double tick_period = 1.0 / sc.mpc.rate_hz;
  const bool airborne = sc.env.type == EnvironmentType::Airborne;
  const bool foot_model = model.variant == ActuationVariant::FootForce;

  RunLog log;
  log.rows.reserve(n_steps + 1);
  VecX u = VecX::Zero(model.control_dim());
  double next_tick = 0.0;
  double last_solve_ms = 0.0;
  int last_status = 0;
  int consecutive_degraded = 0;
  std::size_t next_disturbance = 0;
  std::string ctrl_error;
  bool stop = false;

  for (int step = 0; step <= n_steps; ++step) {
    const double t = step * dt;
    const VelocityCommand cmd = command_at(sc, t);

    if (t + 1e-9 >= next_tick) {
      MpcTick tick;
      try {
        tick = ctrl->step(x, cmd, t, feet);
        if (!tick.u0.allFinite()) {
          tick.degraded = true;
          tick.u0 = u;  // hold the previous command
        }
      } catch (const std::exception& e) {
        // A controller that cannot produce a command is a degraded tick, not a
        // harness error; the degraded limit below ends the run.
        tick.degraded = true;
        tick.u0 = u;
        if (ctrl_error.empty()) ctrl_error = e.what();
      }
      ++log.ticks;
      log.tick_solve_ms.push_back(tick.solve_ms);
      last_solve_ms = tick.solve_ms;
      if (tick.degraded) {
        ++log.degraded_ticks;
        ++consecutive_degraded;
        last_status = 2;
      } else {
        consecutive_degraded = 0;
        last_status = tick.report.status == SolveStatus::Converged ? 0 : 1;
      }
      u = tick.u0;
      next_tick += tick_period;
      if (consecutive_degraded >= sc.degraded_limit) {
        log.outcome = RunOutcome::DegradedLimit;
        log.note = "solver degraded for " + std::to_string(consecutive_degraded) +
                   " consecutive ticks at t=" + format_time(t) + " s";
        if (!ctrl_error.empty()) log.note += " (first controller error: " + ctrl_error + ")";
        stop = true;
      }
    }

    // Forces act only through feet that are in stance right now (and never
    // while airborne); wheel torques pass through unchanged.
    VecX u_applied = u;
    if (foot_model) {
      for (int i = 0; i < model.num_contacts(); ++i)
        if (airborne || !sc.gait.stance(t, i)) u_applied.segment<3>(3 * i).setZero();
    }

    RunLogRow row;
    row.t = t;
    row.state = x.pack();
    row.reference = ideal.pack();
    row.control = u_applied;
    row.solve_ms = last_solve_ms;
    row.status = last_status;
    log.rows.push_back(row);

    // NaN poisons every comparison below (all come out false), so divergence
    // must be caught explicitly or the run would coast to a clean exit.
    if (!stop && !row.state.allFinite()) {
      log.outcome = RunOutcome::Fall;
      log.note = "state diverged (non-finite) at t=" + format_time(t) + " s";
      if (!ctrl_error.empty()) log.note += " (first controller error: " + ctrl_error + ")";
      stop = true;
    }

    if (sc.end_on_touchdown && !stop) {
      const TouchdownHit hit = check_touchdown(model, x, corners);
      if (hit.hit) {
        log.outcome = RunOutcome::Touchdown;
        log.touchdown_time = t;
        log.touchdown_tilt = hit.tilt;
        log.touchdown_feet_first = hit.feet_first;
        log.note = std::string("touchdown on ") + (hit.on_foot ? "foot" : "body") +
                   " at t=" + format_time(t) + " s";
        stop = true;
      }
    } else if (!stop) {
      const double pos_err = (x.r - ideal.r).norm();
      const double att_err = geodesic_angle(x.q, ideal.q);
      if (pos_err > sc.fall_pos || att_err > sc.fall_angle) {
        log.outcome = RunOutcome::Fall;
        log.note = "fall at t=" + format_time(t) + " s (position error " +
                   format_time(pos_err) + " m, attitude error " + format_time(att_err) +
                   " rad)";
        if (!ctrl_error.empty()) log.note += " (first controller error: " + ctrl_error + ")";
        stop = true;
      }
      for (std::size_t i = 0; i < feet.size() && !stop; ++i) {
        const double pen = sc.env.type == EnvironmentType::TwoWalls
                               ? std::abs(feet[i].x()) - 0.5 * sc.env.wall_gap
                               : -feet[i].z();
        if (pen > 0.05) {
          log.outcome = RunOutcome::Penetration;
          log.note = "contact point " + std::to_string(i) + " penetrates the environment at t=" +
                     format_time(t) + " s";
          stop = true;
        }
      }
    }

    if (stop || step == n_steps) break;

    while (next_disturbance < sc.disturbances.size() &&
           sc.disturbances[next_disturbance].t < t + dt) {
      const Disturbance& d = sc.disturbances[next_disturbance++];
      x.v += d.impulse / model.mass;
      const Vec3 impulse_body = rotation_matrix(x.q).transpose() * d.impulse;
      x.omega += model.inertia_inv * d.point_offset.cross(impulse_body);
    }

    x = physics_step(model, x, u_applied, feet, dt);

    if (sc.mpc.attitude_target_mode) {
      // The target is fixed; position/velocity are uncontrolled (ballistic).
      ideal.r = x.r;
      ideal.v = x.v;
    } else {
      const Mat3 Ryaw = yaw_rotation(ideal_rel.yaw(ideal.q));
      const Vec3 v_world = Ryaw * cmd.linear;
      ideal.r += dt * v_world;
      ideal.r.z() = ref_height;
      ideal.q = integrate_body_rate(ideal.q, cmd.angular, dt);
      ideal.v = v_world;
      ideal.omega = cmd.angular;
    }

    // Swing feet repin at their touchdown instant via the same heuristic the
    // controller plans with, evaluated on the true state.
    if (foot_model && !airborne && sc.gait.type != GaitSchedule::Type::Stand) {
      const double t_next = (step + 1) * dt;
      std::vector<Vec3> targets;
      for (int i = 0; i < model.num_contacts(); ++i) {
        if (sc.gait.stance(t, i) || !sc.gait.stance(t_next, i)) continue;
        if (targets.empty())
          targets = foothold_heuristic(model, x, command_at(sc, t_next), sc.gait, yaw_of(x.q));
        feet[i] = targets[i];
      }
    }
  }

  log.final_state = x;
  if (!log.tick_solve_ms.empty()) {
    std::vector<double> ms = log.tick_solve_ms;
    std::nth_element(ms.begin(), ms.begin() + ms.size() / 2, ms.end());
    log.median_solve_ms = ms[ms.size() / 2];
  }
  return log;
}

void write_run_csv(const RunLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << "time,r_x,r_y,r_z,q_w,q_x,q_y,q_z,v_x,v_y,v_z,w_x,w_y,w_z";
  const char* names[] = {"r_x", "r_y", "r_z", "q_w", "q_x", "q_y", "q_z",
                         "v_x", "v_y", "v_z", "w_x", "w_y", "w_z"};
  for (const char* n : names) out << ",ref_" << n;
  const int m = log.rows.empty() ? 0 : static_cast<int>(log.rows.front().control.size());
  for (int i = 0; i < m; ++i) out << ",u_" << i;
  out << ",solve_ms,status\n";
  out.precision(10);
  for (const RunLogRow& row : log.rows) {
    out << row.t;
    for (int i = 0; i < 13; ++i) out << ',' << row.state[i];
    for (int i = 0; i < 13; ++i) out << ',' << row.reference[i];
    for (int i = 0; i < m; ++i) out << ',' << row.control[i];
    out << ',' << row.solve_ms << ',' << row.status << '\n';
  }
}

Vec3 attitude_error_vector(const Quaternion& q, const Quaternion& q_ref) {
  Quaternion dq = quat_mul(conj(q_ref), q);
  if (dq.w() < 0.0) dq.wxyz = -dq.wxyz;
  const double vn = dq.vec().norm();
  if (vn < 1e-15) return Vec3::Zero();
  return (2.0 * std::atan2(vn, dq.w()) / vn) * dq.vec();
}

double peak_attitude_error(const RunLog& log, double t_start) {
  double peak = 0.0;
  for (const RunLogRow& row : log.rows) {
    if (row.t < t_start) continue;
    const SrbState s = SrbState::unpack(row.state);
    const SrbState r = SrbState::unpack(row.reference);
    peak = std::max(peak, geodesic_angle(s.q, r.q));
  }
  return peak;
}

Vec3 rms_attitude_error(const RunLog& log, double t_start) {
  Vec3 sum = Vec3::Zero();
  int n = 0;
  for (const RunLogRow& row : log.rows) {
    if (row.t < t_start) continue;
    const SrbState s = SrbState::unpack(row.state);
    const SrbState r = SrbState::unpack(row.reference);
    sum += attitude_error_vector(s.q, r.q).cwiseAbs2();
    ++n;
  }
  if (n == 0) return Vec3::Zero();
  return Vec3(sum / n).cwiseSqrt();
}

double peak_position_error(const RunLog& log, double t_start) {
  double peak = 0.0;
  for (const RunLogRow& row : log.rows) {
    if (row.t < t_start) continue;
    peak = std::max(peak, (row.state.head<3>() - row.reference.head<3>()).norm());
  }
  return peak;
}

}  // namespace quatmpc
