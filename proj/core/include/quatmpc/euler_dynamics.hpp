#pragma once

#include <vector>

#include "quatmpc/srb_dynamics.hpp"

namespace quatmpc {

// 12-dim rigid-body state with ZYX Euler attitude [roll, pitch, yaw].
// Angles are tracked continuously (no wrapping inside a rollout).
struct EulerState {
  Vec3 r = Vec3::Zero();
  Vec3 rpy = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 omega = Vec3::Zero();

  Vec12 pack() const {
    Vec12 x;
    x << r, rpy, v, omega;
    return x;
  }
  static EulerState unpack(const Vec12& x) {
    EulerState s;
    s.r = x.segment<3>(0);
    s.rpy = x.segment<3>(3);
    s.v = x.segment<3>(6);
    s.omega = x.segment<3>(9);
    return s;
  }

  static EulerState from_srb(const SrbState& x);
  SrbState to_srb() const;
};

// R = Rz(yaw) Ry(pitch) Rx(roll).
Mat3 euler_rotation(const Vec3& rpy);

// Body rates -> ZYX angle rates. Throws KinematicSingularity when
// |cos(pitch)| < 1e-6 (gimbal lock).
Vec3 euler_rates(const Vec3& rpy, const Vec3& omega);

// Same physics as the quaternion model in the Euler chart.
Vec12 euler_continuous_dynamics(const RobotModel& model, const EulerState& x, const VecX& u,
                                const std::vector<Vec3>& feet);

// Explicit midpoint step (matches the quaternion model's discretization).
EulerState euler_discrete_dynamics(const RobotModel& model, const EulerState& x, const VecX& u,
                                   const std::vector<Vec3>& feet, double dt);

// First-order discretization of the analytic chart Jacobians:
// A = I + dt * df/dx, B = dt * df/du, evaluated at (x, u). This is the
// textbook linearization used by Euler-angle MPC stacks; its accuracy decays
// with |omega| dt and with proximity to the pitch poles, which is part of
// what the baseline is meant to exhibit.
void euler_discrete_jacobians(const RobotModel& model, const EulerState& x, const VecX& u,
                              const std::vector<Vec3>& feet, double dt, Mat12& A, MatX& B);

// Plain subtraction with the three angle rows wrapped to (-pi, pi].
Vec12 euler_state_error(const EulerState& x, const EulerState& x_ref);

double wrap_angle(double a);  // to (-pi, pi]

}  // namespace quatmpc
