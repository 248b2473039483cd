#include "quatmpc/srb_dynamics.hpp"

#include "quatmpc/errors.hpp"

namespace quatmpc {

namespace {

// conj(q) (x) [0,v] (x) q, vector part. Equals R(q)^T v for unit q and stays
// the exact derivative partner of rotate_inv_jacobian when midpoint
// half-states drift slightly off the sphere.
Vec3 rotate_inv_raw(const Quaternion& q, const Vec3& v) {
  const Vec4 p = lmat(conj(q)) * (lmat(Quaternion(0.0, v)) * q.coeffs());
  return p.tail<3>();
}

void check_arity(const RobotModel& model, const VecX& u, const std::vector<Vec3>& feet) {
  if (u.size() != model.control_dim()) {
    throw DimensionMismatch("control size " + std::to_string(u.size()) + " != model dim " +
                            std::to_string(model.control_dim()));
  }
  if (model.variant == ActuationVariant::FootForce &&
      static_cast<int>(feet.size()) != model.num_contacts()) {
    throw DimensionMismatch("feet count " + std::to_string(feet.size()) + " != model contacts " +
                            std::to_string(model.num_contacts()));
  }
}

// World-frame moment of the foot forces about the CoM.
Vec3 world_moment(const SrbState& x, const VecX& u, const std::vector<Vec3>& feet) {
  Vec3 m = Vec3::Zero();
  for (size_t i = 0; i < feet.size(); ++i) {
    m += (feet[i] - x.r).cross(Vec3(u.segment<3>(3 * static_cast<int>(i))));
  }
  return m;
}

// df/dx and df/du of the continuous vector field, q treated as a free
// 4-vector. Row blocks: r 0..2, q 3..6, v 7..9, omega 10..12.
void continuous_jacobians(const RobotModel& model, const SrbState& x, const VecX& u,
                          const std::vector<Vec3>& feet, Mat13& Jx, MatX& Ju) {
  Jx.setZero();
  Ju.setZero(13, model.control_dim());

  Jx.block<3, 3>(0, 7).setIdentity();                                       // dr_dot/dv
  Jx.block<4, 4>(3, 3) = 0.5 * rmat(Quaternion(0.0, x.omega));              // dq_dot/dq
  Jx.block<4, 3>(3, 10) = 0.5 * attitude_jacobian(x.q);                     // dq_dot/domega

  const Mat3& I_inv = model.inertia_inv;
  Jx.block<3, 3>(10, 10) =
      I_inv * (skew(model.inertia * x.omega) - skew(x.omega) * model.inertia);

  if (model.variant == ActuationVariant::ReactionWheel) {
    Ju.block<3, 2>(10, 0) = I_inv * Mat3::Identity().leftCols<2>();
    return;
  }

  Vec3 force_sum = Vec3::Zero();
  for (int i = 0; i < model.num_contacts(); ++i) force_sum += u.segment<3>(3 * i);
  const Vec3 m_w = world_moment(x, u, feet);
  // v -> vector part of conj(q) (x) [0,v] (x) q as a 3x3 matrix. Equals
  // R(q)^T for unit q and stays the exact linearization of rotate_inv_raw
  // when the midpoint half-state drifts off the sphere.
  const Mat3 R_T = hmat().transpose() * lmat(conj(x.q)) * rmat(x.q) * hmat();

  Jx.block<3, 3>(10, 0) = I_inv * R_T * skew(force_sum);                    // domega_dot/dr
  Jx.block<3, 4>(10, 3) = I_inv * rotate_inv_jacobian(x.q, m_w);            // domega_dot/dq
  for (int i = 0; i < model.num_contacts(); ++i) {
    Ju.block<3, 3>(7, 3 * i) = Mat3::Identity() / model.mass;
    Ju.block<3, 3>(10, 3 * i) = I_inv * R_T * skew(feet[i] - x.r);
  }
}

}  // namespace

Vec13 continuous_dynamics(const RobotModel& model, const SrbState& x, const VecX& u,
                          const std::vector<Vec3>& feet) {
  check_arity(model, u, feet);

  Vec3 force_sum = Vec3::Zero();
  Vec3 torque_body;
  if (model.variant == ActuationVariant::ReactionWheel) {
    torque_body = Vec3(u[0], u[1], 0.0);
  } else {
    for (int i = 0; i < model.num_contacts(); ++i) force_sum += u.segment<3>(3 * i);
    torque_body = rotate_inv_raw(x.q, world_moment(x, u, feet));
  }

  Vec13 xdot;
  xdot.segment<3>(0) = x.v;
  xdot.segment<4>(3) = 0.5 * lmat(x.q) * hat_vec(x.omega);
  xdot.segment<3>(7) = force_sum / model.mass + model.gravity;
  xdot.segment<3>(10) =
      model.inertia_inv * (torque_body - x.omega.cross(model.inertia * x.omega));
  return xdot;
}

SrbState discrete_dynamics(const RobotModel& model, const SrbState& x, const VecX& u,
                           const std::vector<Vec3>& feet, double dt) {
  const Vec13 k1 = continuous_dynamics(model, x, u, feet);
  const SrbState x_mid = SrbState::unpack(x.pack() + 0.5 * dt * k1);
  const Vec13 k2 = continuous_dynamics(model, x_mid, u, feet);
  SrbState next = SrbState::unpack(x.pack() + dt * k2);
  next.q = next.q.normalized();
  return next;
}

void raw_jacobians(const RobotModel& model, const SrbState& x, const VecX& u,
                   const std::vector<Vec3>& feet, double dt, Mat13& dfdx, MatX& dfdu) {
  const Vec13 k1 = continuous_dynamics(model, x, u, feet);
  const SrbState x_mid = SrbState::unpack(x.pack() + 0.5 * dt * k1);

  Mat13 J1x, J2x;
  MatX J1u, J2u;
  continuous_jacobians(model, x, u, feet, J1x, J1u);
  continuous_jacobians(model, x_mid, u, feet, J2x, J2u);

  dfdx = Mat13::Identity() + dt * J2x * (Mat13::Identity() + 0.5 * dt * J1x);
  dfdu = dt * (0.5 * dt * (J2x * J1u) + J2u);
}

Mat13x12 error_state_jacobian(const SrbState& x) {
  Mat13x12 E = Mat13x12::Zero();
  E.block<3, 3>(0, 0).setIdentity();
  E.block<4, 3>(3, 3) = attitude_jacobian(x.q);
  E.block<3, 3>(7, 6).setIdentity();
  E.block<3, 3>(10, 9).setIdentity();
  return E;
}

LinearizedStep linearize(const RobotModel& model, const SrbState& x, const VecX& u,
                         const SrbState& x_next, const std::vector<Vec3>& feet, double dt,
                         double consistency_tol) {
  const Vec13 k1 = continuous_dynamics(model, x, u, feet);
  const SrbState x_mid = SrbState::unpack(x.pack() + 0.5 * dt * k1);
  SrbState pred = SrbState::unpack(x.pack() + dt * continuous_dynamics(model, x_mid, u, feet));
  // The stored step renormalizes the quaternion; the normalization Jacobian
  // contributes a 1/|q_raw| factor on the attitude rows (its tangential
  // projector is absorbed by G(q_next)). Fold it in so A, B are exact for the
  // step the rollout actually takes, not just the un-renormalized map.
  const double q_raw_norm = pred.q.norm();
  pred.q = pred.q.normalized();
  const double gap = (pred.pack() - x_next.pack()).norm();
  if (gap > consistency_tol) {
    throw ReferenceInconsistent("linearize: x_next is not the midpoint step of (x, u), gap = " +
                                std::to_string(gap));
  }

  Mat13 dfdx;
  MatX dfdu;
  raw_jacobians(model, x, u, feet, dt, dfdx, dfdu);

  const Mat13x12 E_next = error_state_jacobian(x_next);
  LinearizedStep step;
  step.A = E_next.transpose() * dfdx * error_state_jacobian(x);
  step.B = E_next.transpose() * dfdu;
  step.A.middleRows<3>(3) /= q_raw_norm;
  step.B.middleRows<3>(3) /= q_raw_norm;
  return step;
}

Vec12 state_error(const SrbState& x, const SrbState& x_ref) {
  Vec12 e;
  e.segment<3>(0) = x.r - x_ref.r;
  e.segment<3>(3) = cayley_inv(quat_mul(conj(x_ref.q), x.q));
  e.segment<3>(6) = x.v - x_ref.v;
  e.segment<3>(9) = x.omega - x_ref.omega;
  return e;
}

}  // namespace quatmpc
