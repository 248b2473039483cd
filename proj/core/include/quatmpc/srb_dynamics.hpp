#pragma once

#include <vector>

#include "quatmpc/srb_model.hpp"

namespace quatmpc {

using Mat12 = Eigen::Matrix<double, 12, 12>;
using Mat13 = Eigen::Matrix<double, 13, 13>;
using Mat13x12 = Eigen::Matrix<double, 13, 12>;

// Error-state transition A (12x12) and input B (12 x control dim) for one
// knot of the midpoint-discretized dynamics.
struct LinearizedStep {
  Mat12 A;
  MatX B;
};

// Time derivative of the packed 13-state. feet are contact-point positions in
// the World frame (foot-force variant; ignored for reaction wheels).
// Throws DimensionMismatch when u/feet arity disagrees with the model.
Vec13 continuous_dynamics(const RobotModel& model, const SrbState& x, const VecX& u,
                          const std::vector<Vec3>& feet);

// Explicit midpoint step with the quaternion renormalized afterwards.
SrbState discrete_dynamics(const RobotModel& model, const SrbState& x, const VecX& u,
                           const std::vector<Vec3>& feet, double dt);

// Jacobians of the (un-renormalized) midpoint map, treating q as a free
// 4-vector: chain rule through the half step.
void raw_jacobians(const RobotModel& model, const SrbState& x, const VecX& u,
                   const std::vector<Vec3>& feet, double dt, Mat13& dfdx, MatX& dfdu);

// E(x) = blkdiag(I3, G(q), I3, I3), maps 12-dim error directions to the
// packed-state tangent. Columns orthonormal.
Mat13x12 error_state_jacobian(const SrbState& x);

// A_k = E(x_next)^T (df/dx) E(x), B_k = E(x_next)^T (df/du). x_next must be
// the midpoint step of (x, u) within consistency_tol (ReferenceInconsistent).
LinearizedStep linearize(const RobotModel& model, const SrbState& x, const VecX& u,
                         const SrbState& x_next, const std::vector<Vec3>& feet, double dt,
                         double consistency_tol = 1e-6);

// [r - r_ref, cayley_inv(conj(q_ref) (x) q), v - v_ref, omega - omega_ref].
Vec12 state_error(const SrbState& x, const SrbState& x_ref);

}  // namespace quatmpc
