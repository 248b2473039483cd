#include "quatmpc/quaternion.hpp"

#include <cmath>

#include "quatmpc/errors.hpp"

namespace quatmpc {

Quaternion Quaternion::from_axis_angle(const Vec3& axis, double angle) {
  const double n = axis.norm();
  if (n < 1e-15) return Quaternion::identity();
  const Vec3 u = axis / n;
  return Quaternion(std::cos(0.5 * angle), Vec3(std::sin(0.5 * angle) * u));
}

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

const Mat43& hmat() {
  static const Mat43 h = [] {
    Mat43 m = Mat43::Zero();
    m.bottomRows<3>().setIdentity();
    return m;
  }();
  return h;
}

Mat4 lmat(const Quaternion& q) {
  const double s = q.w();
  const Vec3 v = q.vec();
  Mat4 m;
  m(0, 0) = s;
  m.block<1, 3>(0, 1) = -v.transpose();
  m.block<3, 1>(1, 0) = v;
  m.block<3, 3>(1, 1) = s * Mat3::Identity() + skew(v);
  return m;
}

Mat4 rmat(const Quaternion& q) {
  const double s = q.w();
  const Vec3 v = q.vec();
  Mat4 m;
  m(0, 0) = s;
  m.block<1, 3>(0, 1) = -v.transpose();
  m.block<3, 1>(1, 0) = v;
  m.block<3, 3>(1, 1) = s * Mat3::Identity() - skew(v);
  return m;
}

const Mat4& conj_matrix() {
  static const Mat4 c = Vec4(1.0, -1.0, -1.0, -1.0).asDiagonal();
  return c;
}

Quaternion quat_mul(const Quaternion& q1, const Quaternion& q2) {
  Quaternion out(Vec4(lmat(q1) * q2.coeffs()));
  // Keep compositions of rotations on the unit sphere, but leave deliberately
  // non-unit algebra (pure-vector quaternion products) untouched.
  if (std::abs(q1.norm() - 1.0) < 1e-9 && std::abs(q2.norm() - 1.0) < 1e-9) {
    const double n = out.norm();
    if (std::abs(n - 1.0) > 1e-12) out.wxyz /= n;
  }
  return out;
}

Quaternion conj(const Quaternion& q) {
  return Quaternion(q.w(), Vec3(-q.vec()));
}

Vec4 hat_vec(const Vec3& v) {
  return Vec4(0.0, v.x(), v.y(), v.z());
}

Quaternion cayley(const Vec3& phi) {
  const double scale = 1.0 / std::sqrt(1.0 + phi.squaredNorm());
  return Quaternion(scale, Vec3(scale * phi));
}

Vec3 cayley_inv(const Quaternion& q, double scalar_floor) {
  double s = q.w();
  Vec3 v = q.vec();
  if (s < 0.0) {
    s = -s;
    v = -v;
  }
  if (s < scalar_floor) {
    throw NearSingularChart("cayley_inv: rotation too close to 180 deg for the local chart (|q_s| = " +
                            std::to_string(s) + ")");
  }
  return v / s;
}

Mat43 attitude_jacobian(const Quaternion& q) {
  return lmat(q) * hmat();
}

Mat3 quat_fn_jacobian(const Quaternion& f_of_q, const Mat4& df_dq, const Quaternion& q) {
  return attitude_jacobian(f_of_q).transpose() * df_dq * attitude_jacobian(q);
}

Mat3 scalar_fn_hessian(const Vec4& dh_dq, const Mat4& d2h_dq2, const Quaternion& q) {
  const Mat43 G = attitude_jacobian(q);
  return G.transpose() * d2h_dq2 * G - Mat3::Identity() * dh_dq.dot(q.coeffs());
}

Vec3 rotate(const Quaternion& q, const Vec3& v) {
  // q (x) [0, v] (x) q^-1 without the trig detour.
  const Vec3 qv = q.vec();
  const Vec3 t = 2.0 * qv.cross(v);
  return v + q.w() * t + qv.cross(t);
}

Mat3 rotation_matrix(const Quaternion& q) {
  const double s = q.w();
  const Vec3 v = q.vec();
  return Mat3::Identity() + 2.0 * s * skew(v) + 2.0 * skew(v) * skew(v);
}

Mat34 rotate_jacobian(const Quaternion& q, const Vec3& v) {
  // Product rule on q (x) [0,v] (x) q*: the first factor differentiates to
  // R([0,v] (x) q*), the conjugate factor to L(q) L([0,v]) C. Raw Vec4
  // products here -- quat_mul would renormalize near-unit intermediates.
  const Quaternion vq(0.0, v);
  const Quaternion p(Vec4(lmat(vq) * conj_matrix() * q.coeffs()));
  const Mat4 d = rmat(p) + lmat(q) * lmat(vq) * conj_matrix();
  return hmat().transpose() * d;
}

Mat34 rotate_inv_jacobian(const Quaternion& q, const Vec3& v) {
  const Quaternion vq(0.0, v);
  const Quaternion p(Vec4(lmat(vq) * q.coeffs()));
  const Mat4 d = rmat(p) * conj_matrix() + lmat(conj(q)) * lmat(vq);
  return hmat().transpose() * d;
}

bool same_rotation(const Quaternion& q1, const Quaternion& q2, double tol) {
  const double dot = q1.coeffs().dot(q2.coeffs());
  return std::abs(std::abs(dot) - 1.0) < tol;
}

double geodesic_angle(const Quaternion& q1, const Quaternion& q2) {
  const double dot = std::abs(q1.coeffs().dot(q2.coeffs()));
  return 2.0 * std::acos(std::min(dot, 1.0));
}

Quaternion integrate_body_rate(const Quaternion& q, const Vec3& omega_body, double dt) {
  const double angle = omega_body.norm() * dt;  // signed: dt may be negative
  if (std::abs(angle) < 1e-15) return q;
  const Quaternion dq = Quaternion::from_axis_angle(omega_body, angle);
  Quaternion out = quat_mul(q, dq);
  out.wxyz /= out.norm();
  return out;
}

Vec3 euler_zyx(const Quaternion& q) {
  const Mat3 R = rotation_matrix(q);
  const double pitch = std::asin(std::clamp(-R(2, 0), -1.0, 1.0));
  const double roll = std::atan2(R(2, 1), R(2, 2));
  const double yaw = std::atan2(R(1, 0), R(0, 0));
  return Vec3(roll, pitch, yaw);
}

Quaternion quat_from_euler_zyx(const Vec3& rpy) {
  const Quaternion qx = Quaternion::from_axis_angle(Vec3::UnitX(), rpy.x());
  const Quaternion qy = Quaternion::from_axis_angle(Vec3::UnitY(), rpy.y());
  const Quaternion qz = Quaternion::from_axis_angle(Vec3::UnitZ(), rpy.z());
  return quat_mul(quat_mul(qz, qy), qx);
}

}  // namespace quatmpc
