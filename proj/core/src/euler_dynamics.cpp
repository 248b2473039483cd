#include "quatmpc/euler_dynamics.hpp"

#include <cmath>

#include "quatmpc/errors.hpp"
#include "quatmpc/srb_dynamics.hpp"

namespace quatmpc {

double wrap_angle(double a) {
  a = std::fmod(a + M_PI, 2.0 * M_PI);
  if (a <= 0.0) a += 2.0 * M_PI;
  return a - M_PI;
}

EulerState EulerState::from_srb(const SrbState& x) {
  EulerState s;
  s.r = x.r;
  s.rpy = euler_zyx(x.q);
  s.v = x.v;
  s.omega = x.omega;
  return s;
}

SrbState EulerState::to_srb() const {
  SrbState s;
  s.r = r;
  s.q = quat_from_euler_zyx(rpy);
  s.v = v;
  s.omega = omega;
  return s;
}

Mat3 euler_rotation(const Vec3& rpy) {
  const double cr = std::cos(rpy.x()), sr = std::sin(rpy.x());
  const double cp = std::cos(rpy.y()), sp = std::sin(rpy.y());
  const double cy = std::cos(rpy.z()), sy = std::sin(rpy.z());
  Mat3 Rx, Ry, Rz;
  Rx << 1, 0, 0, 0, cr, -sr, 0, sr, cr;
  Ry << cp, 0, sp, 0, 1, 0, -sp, 0, cp;
  Rz << cy, -sy, 0, sy, cy, 0, 0, 0, 1;
  return Rz * Ry * Rx;
}

Vec3 euler_rates(const Vec3& rpy, const Vec3& omega) {
  const double cp = std::cos(rpy.y());
  if (std::abs(cp) < 1e-6) {
    throw KinematicSingularity("euler_rates: |cos(pitch)| < 1e-6 (pitch = " +
                               std::to_string(rpy.y()) + " rad)");
  }
  const double cr = std::cos(rpy.x()), sr = std::sin(rpy.x());
  const double tp = std::tan(rpy.y());
  return Vec3(omega.x() + sr * tp * omega.y() + cr * tp * omega.z(),
              cr * omega.y() - sr * omega.z(),
              (sr * omega.y() + cr * omega.z()) / cp);
}

Vec12 euler_continuous_dynamics(const RobotModel& model, const EulerState& x, const VecX& u,
                                const std::vector<Vec3>& feet) {
  if (u.size() != model.control_dim()) {
    throw DimensionMismatch("euler dynamics: control size " + std::to_string(u.size()) +
                            " != model dim " + std::to_string(model.control_dim()));
  }

  Vec3 force_sum = Vec3::Zero();
  Vec3 torque_body;
  if (model.variant == ActuationVariant::ReactionWheel) {
    torque_body = Vec3(u[0], u[1], 0.0);
  } else {
    if (static_cast<int>(feet.size()) != model.num_contacts()) {
      throw DimensionMismatch("euler dynamics: feet count mismatch");
    }
    Vec3 moment_world = Vec3::Zero();
    for (int i = 0; i < model.num_contacts(); ++i) {
      const Vec3 f = u.segment<3>(3 * i);
      force_sum += f;
      moment_world += (feet[i] - x.r).cross(f);
    }
    torque_body = euler_rotation(x.rpy).transpose() * moment_world;
  }

  Vec12 xdot;
  xdot.segment<3>(0) = x.v;
  xdot.segment<3>(3) = euler_rates(x.rpy, x.omega);
  xdot.segment<3>(6) = force_sum / model.mass + model.gravity;
  xdot.segment<3>(9) =
      model.inertia_inv * (torque_body - x.omega.cross(model.inertia * x.omega));
  return xdot;
}

EulerState euler_discrete_dynamics(const RobotModel& model, const EulerState& x, const VecX& u,
                                   const std::vector<Vec3>& feet, double dt) {
  const Vec12 k1 = euler_continuous_dynamics(model, x, u, feet);
  const EulerState mid = EulerState::unpack(x.pack() + 0.5 * dt * k1);
  return EulerState::unpack(x.pack() + dt * euler_continuous_dynamics(model, mid, u, feet));
}

namespace {

// dR/d(roll), dR/d(pitch), dR/d(yaw) for R = Rz Ry Rx.
void euler_rotation_partials(const Vec3& rpy, Mat3 dR[3]) {
  const double cr = std::cos(rpy.x()), sr = std::sin(rpy.x());
  const double cp = std::cos(rpy.y()), sp = std::sin(rpy.y());
  const double cy = std::cos(rpy.z()), sy = std::sin(rpy.z());
  Mat3 Rx, Ry, Rz, dRx, dRy, dRz;
  Rx << 1, 0, 0, 0, cr, -sr, 0, sr, cr;
  Ry << cp, 0, sp, 0, 1, 0, -sp, 0, cp;
  Rz << cy, -sy, 0, sy, cy, 0, 0, 0, 1;
  dRx << 0, 0, 0, 0, -sr, -cr, 0, cr, -sr;
  dRy << -sp, 0, cp, 0, 0, 0, -cp, 0, -sp;
  dRz << -sy, -cy, 0, cy, -sy, 0, 0, 0, 0;
  dR[0] = Rz * Ry * dRx;
  dR[1] = Rz * dRy * Rx;
  dR[2] = dRz * Ry * Rx;
}

}  // namespace

void euler_discrete_jacobians(const RobotModel& model, const EulerState& x, const VecX& u,
                              const std::vector<Vec3>& feet, double dt, Mat12& A, MatX& B) {
  const double cr = std::cos(x.rpy.x()), sr = std::sin(x.rpy.x());
  const double cp = std::cos(x.rpy.y());
  if (std::abs(cp) < 1e-6) {
    throw KinematicSingularity("euler_discrete_jacobians: |cos(pitch)| < 1e-6 (pitch = " +
                               std::to_string(x.rpy.y()) + " rad)");
  }
  const double tp = std::tan(x.rpy.y());
  const Vec3& w = x.omega;

  Mat12 Jc = Mat12::Zero();
  MatX Bc = MatX::Zero(12, u.size());

  // r-dot = v.
  Jc.block<3, 3>(0, 6).setIdentity();

  // rpy-dot = T(rpy)^-1 omega.
  Mat3 E;
  E << 1, sr * tp, cr * tp, 0, cr, -sr, 0, sr / cp, cr / cp;
  Jc.block<3, 3>(3, 9) = E;
  const double s = sr * w.y() + cr * w.z();  // recurring combination
  Jc(3, 3) = cr * tp * w.y() - sr * tp * w.z();
  Jc(4, 3) = -sr * w.y() - cr * w.z();
  Jc(5, 3) = (cr * w.y() - sr * w.z()) / cp;
  Jc(3, 4) = s / (cp * cp);
  Jc(5, 4) = s * tp / cp;

  // omega-dot = I^-1 (M - omega x I omega): gyroscopic part.
  Jc.block<3, 3>(9, 9) =
      model.inertia_inv * (skew(model.inertia * w) - skew(w) * model.inertia);

  if (model.variant == ActuationVariant::ReactionWheel) {
    Bc(9, 0) = model.inertia_inv(0, 0);
    Bc(10, 1) = model.inertia_inv(1, 1);
  } else {
    const Mat3 Rt = euler_rotation(x.rpy).transpose();
    Mat3 dR[3];
    euler_rotation_partials(x.rpy, dR);
    Vec3 moment_world = Vec3::Zero();
    Mat3 dmoment_dr = Mat3::Zero();
    for (int i = 0; i < model.num_contacts(); ++i) {
      const Vec3 f = u.segment<3>(3 * i);
      moment_world += (feet[i] - x.r).cross(f);
      dmoment_dr += skew(f);
      Bc.block<3, 3>(6, 3 * i) = Mat3::Identity() / model.mass;
      Bc.block<3, 3>(9, 3 * i) = model.inertia_inv * Rt * skew(feet[i] - x.r);
    }
    Jc.block<3, 3>(9, 0) = model.inertia_inv * Rt * dmoment_dr;
    for (int j = 0; j < 3; ++j)
      Jc.block<3, 1>(9, 3 + j) = model.inertia_inv * (dR[j].transpose() * moment_world);
  }

  A = Mat12::Identity() + dt * Jc;
  B = dt * Bc;
}

Vec12 euler_state_error(const EulerState& x, const EulerState& x_ref) {
  Vec12 e = x.pack() - x_ref.pack();
  for (int i = 3; i < 6; ++i) e[i] = wrap_angle(e[i]);
  return e;
}

}  // namespace quatmpc
