#include "quatmpc/cost.hpp"

#include <cmath>

namespace quatmpc {

namespace {

double signed_dot(const Quaternion& q, const Quaternion& q_ref, bool* ambiguous) {
  const double dot = q_ref.coeffs().dot(q.coeffs());
  if (std::abs(dot) < 1e-10) {
    if (ambiguous != nullptr) *ambiguous = true;
    return 1.0;  // ridge: fixed sign restores a descent direction
  }
  return dot;
}

// State-tracking terms (no control), scaled by `scale`.
CostExpansion state_terms(const SrbState& x, const SrbState& x_ref, const CostWeights& w,
                          double scale) {
  CostExpansion e;
  e.lx = VecX::Zero(12);
  e.lxx = MatX::Zero(12, 12);
  const Vec3 dr = x.r - x_ref.r;
  const Vec3 dv = x.v - x_ref.v;
  const Vec3 dw = x.omega - x_ref.omega;

  e.cost = scale * (0.5 * dr.dot(w.w_r.cwiseProduct(dr)) + w.w_q * quat_cost(x.q, x_ref.q) +
                    0.5 * dv.dot(w.w_v.cwiseProduct(dv)) +
                    0.5 * dw.dot(w.w_omega.cwiseProduct(dw)));

  e.lx.segment<3>(0) = scale * w.w_r.cwiseProduct(dr);
  e.lx.segment<3>(3) = scale * w.w_q * quat_cost_gradient(x.q, x_ref.q);
  e.lx.segment<3>(6) = scale * w.w_v.cwiseProduct(dv);
  e.lx.segment<3>(9) = scale * w.w_omega.cwiseProduct(dw);

  e.lxx.block<3, 3>(0, 0) = scale * Mat3(w.w_r.asDiagonal());
  e.lxx.block<3, 3>(3, 3) = scale * w.w_q * quat_cost_hessian(x.q, x_ref.q);
  e.lxx.block<3, 3>(6, 6) = scale * Mat3(w.w_v.asDiagonal());
  e.lxx.block<3, 3>(9, 9) = scale * Mat3(w.w_omega.asDiagonal());
  return e;
}

}  // namespace

double quat_cost(const Quaternion& q, const Quaternion& q_ref) {
  return 1.0 - std::abs(q_ref.coeffs().dot(q.coeffs()));
}

Vec3 quat_cost_gradient(const Quaternion& q, const Quaternion& q_ref, bool* ambiguous) {
  const double sign = signed_dot(q, q_ref, ambiguous) > 0.0 ? 1.0 : -1.0;
  return -sign * (q_ref.coeffs().transpose() * attitude_jacobian(q)).transpose();
}

Mat3 quat_cost_hessian(const Quaternion& q, const Quaternion& q_ref, bool* ambiguous) {
  return std::abs(signed_dot(q, q_ref, ambiguous)) * Mat3::Identity();
}

CostExpansion stage_cost(const SrbState& x, const VecX& u, const SrbState& x_ref,
                         const VecX& u_ref, const CostWeights& w) {
  CostExpansion e = state_terms(x, x_ref, w, 1.0);
  const VecX du = u - u_ref;
  e.cost += 0.5 * du.dot(w.r_u.cwiseProduct(du));
  e.lu = w.r_u.cwiseProduct(du);
  e.luu = MatX(w.r_u.asDiagonal());
  e.lux = MatX::Zero(u.size(), 12);
  return e;
}

CostExpansion terminal_cost(const SrbState& x, const SrbState& x_ref, const CostWeights& w) {
  return state_terms(x, x_ref, w, w.terminal_scale);
}

Quaternion landing_target(const Quaternion& q0) {
  const double denom = std::sqrt(q0.w() * q0.w() + q0.coeffs()[3] * q0.coeffs()[3]);
  if (denom < 1e-10) return Quaternion::identity();
  return Quaternion(q0.w() / denom, 0.0, 0.0, q0.coeffs()[3] / denom);
}

}  // namespace quatmpc
