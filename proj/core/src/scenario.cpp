#include "quatmpc/scenario.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "quatmpc/errors.hpp"

namespace quatmpc {
namespace {

using nlohmann::json;

constexpr double kDeg = M_PI / 180.0;

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  throw ConfigError("scenario: '" + path + "' " + what);
}

double as_num(const json& j, const std::string& path) {
  if (!j.is_number()) bad(path, "must be a number");
  return j.get<double>();
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) bad(path, "must be a boolean");
  return j.get<bool>();
}

std::string as_str(const json& j, const std::string& path) {
  if (!j.is_string()) bad(path, "must be a string");
  return j.get<std::string>();
}

Vec3 as_vec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) bad(path, "must be an array of 3 numbers");
  Vec3 v;
  for (int i = 0; i < 3; ++i) v[i] = as_num(j[i], path);
  return v;
}

// Fetch j[key] if present, else nullptr.
const json* opt(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

void parse_weights(const json& j, CostWeights& w, const std::string& path) {
  if (const json* p = opt(j, "w_r")) w.w_r = as_vec3(*p, path + ".w_r");
  if (const json* p = opt(j, "w_q")) w.w_q = as_num(*p, path + ".w_q");
  if (const json* p = opt(j, "w_v")) w.w_v = as_vec3(*p, path + ".w_v");
  if (const json* p = opt(j, "w_omega")) w.w_omega = as_vec3(*p, path + ".w_omega");
  if (const json* p = opt(j, "terminal_scale"))
    w.terminal_scale = as_num(*p, path + ".terminal_scale");
  if (const json* p = opt(j, "r_u")) {
    // Scalar broadcasts over all control channels; an array pins the size.
    if (p->is_number()) {
      w.r_u.resize(1);
      w.r_u[0] = p->get<double>();
    } else if (p->is_array()) {
      w.r_u.resize(static_cast<int>(p->size()));
      for (int i = 0; i < w.r_u.size(); ++i) w.r_u[i] = as_num((*p)[i], path + ".r_u");
    } else {
      bad(path + ".r_u", "must be a number or array of numbers");
    }
  }
}

void parse_solver(const json& j, SolverSettings& s, const std::string& path) {
  struct Field {
    const char* key;
    double* dst;
  };
  double max_outer = s.max_outer;
  double max_inner = s.max_inner;
  const Field fields[] = {
      {"max_outer", &max_outer},
      {"max_inner", &max_inner},
      {"cost_tol", &s.cost_tol},
      {"constraint_tol", &s.constraint_tol},
      {"grad_tol", &s.grad_tol},
      {"penalty_initial", &s.penalty_initial},
      {"penalty_scale", &s.penalty_scale},
      {"penalty_max", &s.penalty_max},
      {"reg_initial", &s.reg_initial},
      {"reg_scale", &s.reg_scale},
      {"reg_max", &s.reg_max},
  };
  for (const Field& f : fields)
    if (const json* p = opt(j, f.key)) *f.dst = as_num(*p, path + "." + f.key);
  s.max_outer = static_cast<int>(max_outer);
  s.max_inner = static_cast<int>(max_inner);
}

void parse_mpc(const json& j, MpcSettings& m, double weight_n, const std::string& path) {
  if (const json* p = opt(j, "rate_hz")) m.rate_hz = as_num(*p, path + ".rate_hz");
  if (const json* p = opt(j, "horizon_knots"))
    m.horizon_knots = static_cast<int>(as_num(*p, path + ".horizon_knots"));
  if (const json* p = opt(j, "knot_dt_s")) m.knot_dt = as_num(*p, path + ".knot_dt_s");
  if (const json* p = opt(j, "weights")) parse_weights(*p, m.weights, path + ".weights");
  if (const json* p = opt(j, "constraints")) {
    const std::string cp = path + ".constraints";
    if (const json* q = opt(*p, "mu")) m.constraints.mu = as_num(*q, cp + ".mu");
    if (const json* q = opt(*p, "f_min")) m.constraints.f_min = as_num(*q, cp + ".f_min");
    if (const json* q = opt(*p, "f_max")) m.constraints.f_max = as_num(*q, cp + ".f_max");
    if (const json* q = opt(*p, "f_max_mg"))
      m.constraints.f_max = as_num(*q, cp + ".f_max_mg") * weight_n;
  }
  if (const json* p = opt(j, "solver")) parse_solver(*p, m.solver, path + ".solver");
  if (const json* p = opt(j, "reference")) {
    const std::string rp = path + ".reference";
    if (const json* q = opt(*p, "leash_pos_m")) m.leash_pos = as_num(*q, rp + ".leash_pos_m");
    if (const json* q = opt(*p, "leash_angle_deg"))
      m.leash_angle = as_num(*q, rp + ".leash_angle_deg") * kDeg;
    if (const json* q = opt(*p, "height_m")) m.reference_height = as_num(*q, rp + ".height_m");
  }
}

void parse_gait(const json& j, GaitSchedule& g, const std::string& path) {
  if (const json* p = opt(j, "type")) {
    const std::string t = as_str(*p, path + ".type");
    if (t == "stand")
      g.type = GaitSchedule::Type::Stand;
    else if (t == "trot")
      g.type = GaitSchedule::Type::Trot;
    else
      bad(path + ".type", "must be 'stand' or 'trot'");
  }
  if (const json* p = opt(j, "period_s")) g.period = as_num(*p, path + ".period_s");
  if (const json* p = opt(j, "duty")) g.duty = as_num(*p, path + ".duty");
  if (const json* p = opt(j, "offsets")) {
    if (!p->is_array()) bad(path + ".offsets", "must be an array");
    g.offsets.resize(p->size());
    for (std::size_t i = 0; i < p->size(); ++i)
      g.offsets[i] = as_num((*p)[i], path + ".offsets");
  }
  if (g.period <= 0.0) bad(path + ".period_s", "must be positive");
  if (g.duty <= 0.0 || g.duty > 1.0) bad(path + ".duty", "must be in (0, 1]");
}

}  // namespace

VelocityCommand command_at(const Scenario& s, double t) {
  VelocityCommand cmd;
  for (const CommandKeyframe& kf : s.commands) {
    if (kf.t <= t + 1e-12) cmd = kf.cmd;
    else break;
  }
  if (s.sinusoid.enabled && s.sinusoid.period > 0.0) {
    const double w = 2.0 * M_PI / s.sinusoid.period;
    cmd.angular += s.sinusoid.axes * (s.sinusoid.amplitude * std::sin(w * t));
  }
  return cmd;
}

Scenario scenario_from_json(const json& j) {
  if (!j.is_object()) bad("", "document must be a JSON object");
  if (const json* p = opt(j, "format")) {
    const std::string f = as_str(*p, "format");
    if (f != "quatmpc-scenario/1") bad("format", "unsupported (expect 'quatmpc-scenario/1')");
  }

  Scenario s;
  if (const json* p = opt(j, "name")) s.name = as_str(*p, "name");

  if (const json* p = opt(j, "model")) {
    if (p->is_string())
      s.model = make_model(as_str(*p, "model"));
    else if (p->is_object())
      s.model = model_from_json(*p);
    else
      bad("model", "must be a model name or an inline model object");
    s.mpc.constraints = ConstraintSet::defaults_for(s.model);
  }

  if (const json* p = opt(j, "environment")) {
    if (const json* q = opt(*p, "type")) {
      const std::string t = as_str(*q, "environment.type");
      if (t == "flat_ground")
        s.env.type = EnvironmentType::FlatGround;
      else if (t == "two_walls")
        s.env.type = EnvironmentType::TwoWalls;
      else if (t == "airborne")
        s.env.type = EnvironmentType::Airborne;
      else
        bad("environment.type", "must be 'flat_ground', 'two_walls' or 'airborne'");
    }
    if (const json* q = opt(*p, "wall_gap_m"))
      s.env.wall_gap = as_num(*q, "environment.wall_gap_m");
  }

  if (const json* p = opt(j, "controller")) {
    const std::string c = as_str(*p, "controller");
    if (c == "quaternion")
      s.controller = ControllerType::Quaternion;
    else if (c == "euler")
      s.controller = ControllerType::Euler;
    else
      bad("controller", "must be 'quaternion' or 'euler'");
  }

  if (const json* p = opt(j, "duration_s")) s.duration = as_num(*p, "duration_s");
  if (s.duration <= 0.0) bad("duration_s", "must be positive");
  if (const json* p = opt(j, "physics_dt_s")) s.physics_dt = as_num(*p, "physics_dt_s");
  if (s.physics_dt <= 0.0) bad("physics_dt_s", "must be positive");
  if (const json* p = opt(j, "seed")) {
    if (!p->is_number_unsigned()) bad("seed", "must be a non-negative integer");
    s.seed = p->get<std::uint64_t>();
  }

  if (const json* p = opt(j, "gait")) parse_gait(*p, s.gait, "gait");
  if (const json* p = opt(j, "mpc"))
    parse_mpc(*p, s.mpc, s.model.mass * s.model.gravity.norm(), "mpc");

  if (const json* p = opt(j, "commands")) {
    if (!p->is_array()) bad("commands", "must be an array");
    double prev_t = -1.0;
    for (std::size_t i = 0; i < p->size(); ++i) {
      const std::string cp = "commands[" + std::to_string(i) + "]";
      const json& e = (*p)[i];
      CommandKeyframe kf;
      if (const json* q = opt(e, "t")) kf.t = as_num(*q, cp + ".t");
      if (const json* q = opt(e, "linear")) kf.cmd.linear = as_vec3(*q, cp + ".linear");
      if (const json* q = opt(e, "angular")) kf.cmd.angular = as_vec3(*q, cp + ".angular");
      if (kf.t < prev_t) bad(cp + ".t", "keyframes must be sorted by time");
      prev_t = kf.t;
      s.commands.push_back(kf);
    }
  }

  if (const json* p = opt(j, "angular_sinusoid")) {
    s.sinusoid.enabled = true;
    if (const json* q = opt(*p, "amplitude_deg_s"))
      s.sinusoid.amplitude = as_num(*q, "angular_sinusoid.amplitude_deg_s") * kDeg;
    if (const json* q = opt(*p, "period_s"))
      s.sinusoid.period = as_num(*q, "angular_sinusoid.period_s");
    if (const json* q = opt(*p, "axes")) s.sinusoid.axes = as_vec3(*q, "angular_sinusoid.axes");
    if (s.sinusoid.period <= 0.0) bad("angular_sinusoid.period_s", "must be positive");
  }

  if (const json* p = opt(j, "disturbances")) {
    if (!p->is_array()) bad("disturbances", "must be an array");
    for (std::size_t i = 0; i < p->size(); ++i) {
      const std::string dp = "disturbances[" + std::to_string(i) + "]";
      const json& e = (*p)[i];
      Disturbance d;
      if (const json* q = opt(e, "t")) d.t = as_num(*q, dp + ".t");
      if (const json* q = opt(e, "impulse")) d.impulse = as_vec3(*q, dp + ".impulse");
      if (const json* q = opt(e, "point_offset"))
        d.point_offset = as_vec3(*q, dp + ".point_offset");
      s.disturbances.push_back(d);
    }
  }

  if (const json* p = opt(j, "initial")) {
    if (const json* q = opt(*p, "attitude_rpy_deg"))
      s.initial_rpy = as_vec3(*q, "initial.attitude_rpy_deg") * kDeg;
    if (const json* q = opt(*p, "height_m")) s.initial_height = as_num(*q, "initial.height_m");
    if (const json* q = opt(*p, "omega_rad_s")) s.initial_omega = as_vec3(*q, "initial.omega_rad_s");
  }

  if (const json* p = opt(j, "fall")) {
    if (const json* q = opt(*p, "position_m")) s.fall_pos = as_num(*q, "fall.position_m");
    if (const json* q = opt(*p, "angle_deg")) s.fall_angle = as_num(*q, "fall.angle_deg") * kDeg;
  }

  return s;
}

Scenario scenario_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("scenario: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("scenario: '" + path + "' is not valid JSON: " + e.what());
  }
  return scenario_from_json(j);
}

Scenario make_falling_cat_scenario(ControllerType controller, const Quaternion& q0) {
  Scenario s;
  s.name = "falling_cat";
  s.model = make_quadruped_reaction_wheel();
  // The drop experiment pins its own actuator budget: at 3 N*m a 180 deg
  // pitch flip costs 0.46 s of the 0.53 s flight, so plans that waste
  // rotation do not fit the window.
  s.model.wheel_torque_max = 3.0;
  s.mpc.constraints = ConstraintSet::defaults_for(s.model);
  s.env.type = EnvironmentType::Airborne;
  s.controller = controller;
  s.duration = 1.5;  // drop from 1.75 m lasts ~0.6 s; cap well past touchdown
  s.gait.type = GaitSchedule::Type::Stand;
  s.mpc.weights.w_r.setZero();
  s.mpc.weights.w_v.setZero();
  // The flight window is ~0.5 s, so large reorientations need near-bang-bang
  // wheel torque and body rates of several rad/s; the locomotion default
  // w_omega would price that spin away and land the robot mid-flip.
  s.mpc.weights.w_q = 60.0;
  s.mpc.weights.w_omega.setConstant(0.05);
  // Real-time iteration: one solver sweep per tick at 100 Hz, converging
  // across ticks instead of within them. This is the standard budget for a
  // task this fast, and it is where the two attitude parameterizations
  // separate — a single sweep is only as good as the linearization it rides.
  s.mpc.solver.max_outer = 1;
  s.mpc.solver.max_inner = 1;
  s.mpc.attitude_target_mode = true;
  s.mpc.attitude_target = landing_target(q0);
  s.has_initial_attitude = true;
  s.initial_attitude = q0;
  s.initial_height = 1.75;
  s.end_on_touchdown = true;
  return s;
}

Scenario make_humanoid_sweep_scenario(ControllerType controller, int axis, double sign) {
  if (axis < 0 || axis > 2) throw ConfigError("sweep axis must be 0 (roll), 1 (pitch) or 2 (yaw)");
  Scenario s;
  static const char* kAxisName[] = {"roll", "pitch", "yaw"};
  s.name = std::string("humanoid_") + kAxisName[axis] + "_sweep";
  s.model = make_humanoid();
  s.mpc.constraints = ConstraintSet::defaults_for(s.model);
  s.controller = controller;
  s.duration = 16.5;
  s.gait.type = GaitSchedule::Type::Stand;
  // Rate profile: ramp to 90 deg at 30 deg/s, dwell 2 s on the ZYX chart
  // singularity, push past it to 105 deg, then sweep all the way down to
  // -105 deg and back to level — a 210 deg range crossing both chart poles.
  // The dwell is the discriminating piece: a controller that merely faults
  // while the commanded rate carries it across the singular band cannot hide
  // when the target parks there.
  Vec3 dir = Vec3::Zero();
  dir[axis] = sign;
  const double rate = 30.0 * kDeg;
  CommandKeyframe a, b, c, d, e;
  a.t = 0.0;
  a.cmd.angular = dir * rate;
  b.t = 3.0;
  b.cmd.angular = Vec3::Zero();
  c.t = 5.0;
  c.cmd.angular = dir * rate;
  d.t = 5.5;
  d.cmd.angular = dir * -rate;
  e.t = 12.5;
  e.cmd.angular = dir * rate;
  s.commands = {a, b, c, d, e};
  return s;
}

}  // namespace quatmpc
