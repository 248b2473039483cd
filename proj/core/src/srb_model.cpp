#include "quatmpc/srb_model.hpp"

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "quatmpc/errors.hpp"

namespace quatmpc {

VecX RobotModel::control_lower() const {
  VecX lo(control_dim());
  if (variant == ActuationVariant::ReactionWheel) {
    lo.setConstant(-wheel_torque_max);
    return lo;
  }
  const double mg = mass * gravity.norm();
  for (int i = 0; i < num_contacts(); ++i) {
    lo.segment<3>(3 * i) << -2.0 * mg, -2.0 * mg, -2.0 * mg;
  }
  return lo;
}

VecX RobotModel::control_upper() const {
  VecX hi(control_dim());
  if (variant == ActuationVariant::ReactionWheel) {
    hi.setConstant(wheel_torque_max);
    return hi;
  }
  const double mg = mass * gravity.norm();
  hi.setConstant(2.0 * mg);
  return hi;
}

void RobotModel::finalize() {
  if (mass <= 0.0) throw ConfigError("model '" + name + "': mass must be > 0");
  if ((inertia - inertia.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw ConfigError("model '" + name + "': inertia must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(inertia);
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw ConfigError("model '" + name + "': inertia must be positive definite");
  }
  if (variant == ActuationVariant::FootForce && contact_points.empty()) {
    throw ConfigError("model '" + name + "': foot-force variant needs >= 1 contact point");
  }
  inertia_inv = inertia.inverse();
}

RobotModel make_quadruped() {
  RobotModel m;
  m.name = "quadruped";
  m.variant = ActuationVariant::FootForce;
  m.mass = 12.84;
  m.inertia = Vec3(0.0168, 0.0630, 0.0717).asDiagonal();
  m.standing_height = 0.30;
  m.reach_radius = 0.25;
  m.body_half_extents = Vec3(0.19, 0.10, 0.057);
  // Foot order: FL, FR, RL, RR.
  m.contact_points = {
      Vec3(0.19, 0.13, -0.30),
      Vec3(0.19, -0.13, -0.30),
      Vec3(-0.19, 0.13, -0.30),
      Vec3(-0.19, -0.13, -0.30),
  };
  m.finalize();
  return m;
}

RobotModel make_quadruped_reaction_wheel() {
  RobotModel m = make_quadruped();
  m.name = "quadruped_wheel";
  m.variant = ActuationVariant::ReactionWheel;
  // Wheel pack adds mass and some rotor/bracket inertia.
  m.mass = 14.5;
  m.inertia = Vec3(0.020, 0.050, 0.060).asDiagonal();
  m.wheel_torque_max = 4.0;
  m.finalize();
  return m;
}

RobotModel make_humanoid() {
  RobotModel m;
  m.name = "humanoid";
  m.variant = ActuationVariant::FootForce;
  m.mass = 24.0;
  m.inertia = Vec3(0.90, 0.80, 0.26).asDiagonal();
  m.standing_height = 0.60;
  m.reach_radius = 0.35;
  m.body_half_extents = Vec3(0.10, 0.15, 0.25);
  // Two point-contact pairs per foot: toe and heel, left then right.
  m.contact_points = {
      Vec3(0.09, 0.10, -0.60),
      Vec3(-0.07, 0.10, -0.60),
      Vec3(0.09, -0.10, -0.60),
      Vec3(-0.07, -0.10, -0.60),
  };
  m.finalize();
  return m;
}

RobotModel make_model(const std::string& name) {
  if (name == "quadruped") return make_quadruped();
  if (name == "quadruped_wheel") return make_quadruped_reaction_wheel();
  if (name == "humanoid") return make_humanoid();
  throw ConfigError("unknown model '" + name +
                    "' (expected quadruped | quadruped_wheel | humanoid)");
}

RobotModel model_from_json(const nlohmann::json& j) {
  if (j.is_string()) return make_model(j.get<std::string>());

  RobotModel m;
  if (j.contains("base")) m = make_model(j.at("base").get<std::string>());
  m.name = j.value("name", m.name.empty() ? std::string("custom") : m.name);

  if (j.contains("variant")) {
    const std::string v = j.at("variant").get<std::string>();
    if (v == "foot_force") {
      m.variant = ActuationVariant::FootForce;
    } else if (v == "reaction_wheel") {
      m.variant = ActuationVariant::ReactionWheel;
    } else {
      throw ConfigError("model.variant: unknown value '" + v + "'");
    }
  }
  if (j.contains("mass")) m.mass = j.at("mass").get<double>();
  if (j.contains("inertia")) {
    const auto& ji = j.at("inertia");
    if (ji.size() == 3) {
      m.inertia = Vec3(ji[0].get<double>(), ji[1].get<double>(), ji[2].get<double>()).asDiagonal();
    } else if (ji.size() == 9) {
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) m.inertia(r, c) = ji[3 * r + c].get<double>();
    } else {
      throw ConfigError("model.inertia: expected 3 (diagonal) or 9 (row-major) numbers");
    }
  }
  if (j.contains("contact_points")) {
    m.contact_points.clear();
    for (const auto& jp : j.at("contact_points")) {
      if (jp.size() != 3) throw ConfigError("model.contact_points: each point needs 3 numbers");
      m.contact_points.emplace_back(jp[0].get<double>(), jp[1].get<double>(), jp[2].get<double>());
    }
  }
  if (j.contains("gravity")) {
    const auto& jg = j.at("gravity");
    if (jg.size() != 3) throw ConfigError("model.gravity: expected 3 numbers");
    m.gravity = Vec3(jg[0].get<double>(), jg[1].get<double>(), jg[2].get<double>());
  }
  if (j.contains("standing_height")) m.standing_height = j.at("standing_height").get<double>();
  if (j.contains("reach_radius")) m.reach_radius = j.at("reach_radius").get<double>();
  if (j.contains("wheel_torque_max")) m.wheel_torque_max = j.at("wheel_torque_max").get<double>();
  m.finalize();
  return m;
}

}  // namespace quatmpc
