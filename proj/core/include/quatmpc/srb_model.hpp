#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "quatmpc/quaternion.hpp"

namespace quatmpc {

using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using Vec13 = Eigen::Matrix<double, 13, 1>;
using Vec12 = Eigen::Matrix<double, 12, 1>;

// 13-dim rigid-body state. r, v in World; omega in Body; q maps Body -> World.
struct SrbState {
  Vec3 r = Vec3::Zero();
  Quaternion q;
  Vec3 v = Vec3::Zero();
  Vec3 omega = Vec3::Zero();

  Vec13 pack() const {
    Vec13 x;
    x << r, q.coeffs(), v, omega;
    return x;
  }
  static SrbState unpack(const Vec13& x) {
    SrbState s;
    s.r = x.segment<3>(0);
    s.q = Quaternion(Vec4(x.segment<4>(3)));
    s.v = x.segment<3>(7);
    s.omega = x.segment<3>(10);
    return s;
  }
};

enum class ActuationVariant {
  FootForce,      // u = stacked World-frame ground reaction forces, 3 per contact
  ReactionWheel,  // u = [tau_roll, tau_pitch] body torques, N*m
};

// Lumped single-rigid-body robot description. contact_points are nominal
// stance offsets in the Body frame (z roughly -standing_height).
struct RobotModel {
  std::string name;
  ActuationVariant variant = ActuationVariant::FootForce;
  double mass = 1.0;
  Mat3 inertia = Mat3::Identity();
  Mat3 inertia_inv = Mat3::Identity();  // cached at construction/load
  Vec3 gravity{0.0, 0.0, -9.81};
  std::vector<Vec3> contact_points;
  double standing_height = 0.3;
  double reach_radius = 0.3;       // foothold clamp around the hip projection
  double wheel_torque_max = 4.0;   // reaction-wheel variant only
  Vec3 body_half_extents{0.2, 0.1, 0.06};  // collision box for touchdown checks

  int num_contacts() const { return static_cast<int>(contact_points.size()); }
  int control_dim() const {
    return variant == ActuationVariant::ReactionWheel ? 2 : 3 * num_contacts();
  }
  // Per-channel clamp applied to the commanded control after each solve.
  VecX control_lower() const;
  VecX control_upper() const;

  void finalize();  // recompute caches, validate invariants (throws ConfigError)
};

// Built-in models. Masses/inertias are desk-scale stand-ins for a small
// quadruped (with and without a roll/pitch reaction-wheel pack) and a
// humanoid torso with two point-contact pairs per foot.
RobotModel make_quadruped();
RobotModel make_quadruped_reaction_wheel();
RobotModel make_humanoid();

// Lookup by name ("quadruped" | "quadruped_wheel" | "humanoid").
RobotModel make_model(const std::string& name);

// Schema: {"name", "variant": "foot_force"|"reaction_wheel", "mass",
//          "inertia": [3 diag] | [9 row-major], "contact_points": [[x,y,z],...],
//          "standing_height", "reach_radius", "wheel_torque_max", "gravity"}
RobotModel model_from_json(const nlohmann::json& j);

}  // namespace quatmpc
