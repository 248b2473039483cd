#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "quatmpc/euler_mpc.hpp"
#include "quatmpc/mpc.hpp"

namespace quatmpc {

enum class EnvironmentType { FlatGround, TwoWalls, Airborne };

struct Environment {
  EnvironmentType type = EnvironmentType::FlatGround;
  double wall_gap = 0.60;  // walls at x = +-gap/2, normals along -+x
};

enum class ControllerType { Quaternion, Euler };

struct CommandKeyframe {
  double t = 0.0;
  VelocityCommand cmd;
};

// Additive body-rate sinusoid on top of the keyframed command.
struct AngularSinusoid {
  bool enabled = false;
  double amplitude = 0.0;  // rad/s
  double period = 4.25;    // s
  Vec3 axes{1.0, 1.0, 1.0};
};

// Impulse in World frame applied at a Body-frame offset from the CoM.
struct Disturbance {
  double t = 0.0;
  Vec3 impulse = Vec3::Zero();
  Vec3 point_offset = Vec3::Zero();
};

struct Scenario {
  std::string name = "scenario";
  RobotModel model;
  Environment env;
  ControllerType controller = ControllerType::Quaternion;
  double duration = 10.0;
  double physics_dt = 1e-3;
  std::uint64_t seed = 0;
  GaitSchedule gait;
  MpcSettings mpc;
  std::vector<CommandKeyframe> commands;
  AngularSinusoid sinusoid;
  std::vector<Disturbance> disturbances;

  Vec3 initial_rpy = Vec3::Zero();
  bool has_initial_attitude = false;  // set programmatically (Monte Carlo)
  Quaternion initial_attitude;
  Vec3 initial_omega = Vec3::Zero();  // rad/s, body frame
  double initial_height = -1.0;  // <0: model standing height

  double fall_pos = 0.75;        // m, position error that counts as a fall
  double fall_angle = 1.22173;   // rad (70 deg), attitude error ditto
  int degraded_limit = 50;       // consecutive degraded ticks before aborting
  bool end_on_touchdown = false; // airborne trials stop at first contact

  Scenario() : model(make_quadruped()) {
    mpc.constraints = ConstraintSet::defaults_for(model);
  }
};

// Command active at time t: the latest keyframe at or before t plus the
// sinusoid contribution.
VelocityCommand command_at(const Scenario& s, double t);

// Parse/validate a scenario. Messages name the offending field (ConfigError).
Scenario scenario_from_json(const nlohmann::json& j);
Scenario scenario_from_file(const std::string& path);

// Built-in scenario generators used by the Monte Carlo and sweep drivers.
Scenario make_falling_cat_scenario(ControllerType controller, const Quaternion& q0);

// Large-range attitude sweep (peak +-105 deg) about one body axis
// (0 = roll, 1 = pitch, 2 = yaw), optionally sign-flipped.
Scenario make_humanoid_sweep_scenario(ControllerType controller, int axis = 1,
                                      double sign = 1.0);

}  // namespace quatmpc
