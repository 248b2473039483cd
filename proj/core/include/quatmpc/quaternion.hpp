#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace quatmpc {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat43 = Eigen::Matrix<double, 4, 3>;
using Mat34 = Eigen::Matrix<double, 3, 4>;

// Unit quaternion stored as [scalar, vector]. As a rotation it maps Body
// coordinates to World coordinates. The double cover means q and -q are the
// same rotation; nothing here canonicalizes sign except cayley_inv.
struct Quaternion {
  Vec4 wxyz{1.0, 0.0, 0.0, 0.0};

  Quaternion() = default;
  Quaternion(double w, double x, double y, double z) : wxyz(w, x, y, z) {}
  Quaternion(double w, const Vec3& v) : wxyz(w, v.x(), v.y(), v.z()) {}
  explicit Quaternion(const Vec4& coeffs) : wxyz(coeffs) {}

  double w() const { return wxyz[0]; }
  Vec3 vec() const { return wxyz.tail<3>(); }
  const Vec4& coeffs() const { return wxyz; }

  double norm() const { return wxyz.norm(); }
  Quaternion normalized() const { return Quaternion(Vec4(wxyz / wxyz.norm())); }

  static Quaternion identity() { return Quaternion(); }
  static Quaternion from_axis_angle(const Vec3& axis, double angle);
};

// [v]x, the cross-product matrix.
Mat3 skew(const Vec3& v);

// H = [0; I3], lifts a 3-vector to a pure-vector quaternion.
const Mat43& hmat();

// Left-multiplication matrix: q1 (x) q2 = lmat(q1) * q2.coeffs().
Mat4 lmat(const Quaternion& q);

// Right-multiplication matrix: q1 (x) q2 = rmat(q2) * q1.coeffs().
Mat4 rmat(const Quaternion& q);

// diag(1, -1, -1, -1); conj(q).coeffs() = conj_matrix() * q.coeffs().
const Mat4& conj_matrix();

// Hamilton product. When both inputs are unit the output is renormalized if
// it drifted more than 1e-12 from the sphere; non-unit algebra is untouched.
Quaternion quat_mul(const Quaternion& q1, const Quaternion& q2);

Quaternion conj(const Quaternion& q);

// [0, v].
Vec4 hat_vec(const Vec3& v);

// Cayley map phi -> [1, phi] / sqrt(1 + |phi|^2). Scalar part is always > 0.
Quaternion cayley(const Vec3& phi);

// Inverse Cayley map q -> q_v / q_s after flipping sign so q_s > 0.
// Throws NearSingularChart when |q_s| < floor (rotation within the chart
// floor of 180 degrees).
Vec3 cayley_inv(const Quaternion& q, double scalar_floor = 1e-8);

// Attitude Jacobian G(q) = L(q) H, 4x3 with orthonormal columns.
Mat43 attitude_jacobian(const Quaternion& q);

// Jacobian of a quaternion-valued function f at q, reduced to the 3-vector
// differential parameterization on both sides: G(f(q))^T (df/dq) G(q).
Mat3 quat_fn_jacobian(const Quaternion& f_of_q, const Mat4& df_dq, const Quaternion& q);

// Hessian of a scalar function of a quaternion in the differential
// parameterization: G^T (d2h/dq2) G - I3 * (dh/dq . q).
Mat3 scalar_fn_hessian(const Vec4& dh_dq, const Mat4& d2h_dq2, const Quaternion& q);

// R(q) v, Body -> World.
Vec3 rotate(const Quaternion& q, const Vec3& v);

// 3x3 rotation matrix of q.
Mat3 rotation_matrix(const Quaternion& q);

// d(R(q) v)/dq and d(R(q)^T v)/dq as raw 3x4 Jacobians (q treated as a free
// 4-vector). Used by the analytic dynamics Jacobians.
Mat34 rotate_jacobian(const Quaternion& q, const Vec3& v);
Mat34 rotate_inv_jacobian(const Quaternion& q, const Vec3& v);

// True when q1 and q2 represent the same rotation (sign-insensitive).
bool same_rotation(const Quaternion& q1, const Quaternion& q2, double tol = 1e-9);

// Angle of the relative rotation between q1 and q2, in [0, pi].
double geodesic_angle(const Quaternion& q1, const Quaternion& q2);

// q (x) exp-style increment for a body angular velocity held over dt.
// Exact axis-angle step, renormalized.
Quaternion integrate_body_rate(const Quaternion& q, const Vec3& omega_body, double dt);

// ZYX Euler angles [roll, pitch, yaw] with pitch in [-pi/2, pi/2].
Vec3 euler_zyx(const Quaternion& q);
Quaternion quat_from_euler_zyx(const Vec3& rpy);

}  // namespace quatmpc
