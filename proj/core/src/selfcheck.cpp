#include "quatmpc/selfcheck.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

#include "quatmpc/al_ilqr.hpp"
#include "quatmpc/euler_dynamics.hpp"
#include "quatmpc/monte_carlo.hpp"
#include "quatmpc/srb_dynamics.hpp"

namespace quatmpc {
namespace {

Vec3 random_vec3(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return Vec3(u(rng), u(rng), u(rng));
}

VecX random_control(std::mt19937_64& rng, const RobotModel& model) {
  const double scale = model.variant == ActuationVariant::ReactionWheel ? 3.0 : 120.0;
  std::uniform_real_distribution<double> u(-scale, scale);
  VecX out(model.control_dim());
  for (int i = 0; i < out.size(); ++i) out[i] = u(rng);
  return out;
}

std::vector<Vec3> random_feet(std::mt19937_64& rng, const RobotModel& model, const Vec3& r) {
  std::vector<Vec3> feet;
  if (model.variant == ActuationVariant::FootForce)
    for (int i = 0; i < model.num_contacts(); ++i) feet.push_back(r + random_vec3(rng, 0.4));
  return feet;
}

SrbState random_state(std::mt19937_64& rng) {
  SrbState x;
  x.r = random_vec3(rng, 1.0);
  x.q = sample_uniform_quaternion(rng);
  x.v = random_vec3(rng, 1.0);
  x.omega = random_vec3(rng, 2.0);
  return x;
}

// Central difference of a scalar over the Cayley chart at q.
Vec3 fd_chart_gradient(const std::function<double(const Quaternion&)>& f, const Quaternion& q,
                       double h) {
  Vec3 g;
  for (int i = 0; i < 3; ++i) {
    Vec3 e = Vec3::Zero();
    e[i] = h;
    g[i] = (f(quat_mul(q, cayley(e))) - f(quat_mul(q, cayley(-e)))) / (2.0 * h);
  }
  return g;
}

// Four-point second differences of a scalar over the Cayley chart at q.
Mat3 fd_chart_hessian(const std::function<double(const Quaternion&)>& f, const Quaternion& q,
                      double h) {
  Mat3 H;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      Vec3 ei = Vec3::Zero(), ej = Vec3::Zero();
      ei[i] = h;
      ej[j] = h;
      const double fpp = f(quat_mul(q, cayley(ei + ej)));
      const double fpm = f(quat_mul(q, cayley(ei - ej)));
      const double fmp = f(quat_mul(q, cayley(-ei + ej)));
      const double fmm = f(quat_mul(q, cayley(-ei - ej)));
      H(i, j) = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
    }
  }
  return H;
}

// q (x) [0,v] (x) q' as raw 4-vector products (no unit assumption), matching
// what the rotation Jacobians differentiate.
Vec3 raw_rotate(const Quaternion& q, const Vec3& v) {
  const Vec4 p = lmat(q) * (lmat(Quaternion(hat_vec(v))) * (conj_matrix() * q.coeffs()));
  return p.tail<3>();
}

Vec3 raw_rotate_inv(const Quaternion& q, const Vec3& v) {
  const Vec4 p = lmat(conj(q)) * (lmat(Quaternion(hat_vec(v))) * q.coeffs());
  return p.tail<3>();
}

// Midpoint map without the final renormalization, on packed coordinates —
// the function raw_jacobians differentiates.
Vec13 raw_midpoint(const RobotModel& model, const Vec13& y, const VecX& u,
                   const std::vector<Vec3>& feet, double dt) {
  const Vec13 k1 = continuous_dynamics(model, SrbState::unpack(y), u, feet);
  const Vec13 mid = y + (0.5 * dt) * k1;
  return y + dt * continuous_dynamics(model, SrbState::unpack(mid), u, feet);
}

SrbState retract(const SrbState& x, const Vec12& d) {
  SrbState out = x;
  out.r += d.segment<3>(0);
  out.q = quat_mul(x.q, cayley(d.segment<3>(3)));
  out.v += d.segment<3>(6);
  out.omega += d.segment<3>(9);
  return out;
}

double check_attitude_jacobian(std::mt19937_64& rng, int samples) {
  double worst = 0.0;
  const double h = 1e-6;
  for (int s = 0; s < samples; ++s) {
    const Quaternion q = sample_uniform_quaternion(rng);
    const Mat43 G = attitude_jacobian(q);
    for (int i = 0; i < 3; ++i) {
      Vec3 e = Vec3::Zero();
      e[i] = h;
      const Vec4 col =
          (quat_mul(q, cayley(e)).coeffs() - quat_mul(q, cayley(-e)).coeffs()) / (2.0 * h);
      worst = std::max(worst, (col - G.col(i)).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

double check_rotation_jacobians(std::mt19937_64& rng, int samples) {
  double worst = 0.0;
  const double h = 1e-6;
  for (int s = 0; s < samples; ++s) {
    const Quaternion q = sample_uniform_quaternion(rng);
    const Vec3 v = random_vec3(rng, 2.0);
    const Mat34 J = rotate_jacobian(q, v);
    const Mat34 Ji = rotate_inv_jacobian(q, v);
    for (int i = 0; i < 4; ++i) {
      Vec4 e = Vec4::Zero();
      e[i] = h;
      const Quaternion qp(Vec4(q.coeffs() + e)), qm(Vec4(q.coeffs() - e));
      const Vec3 col = (raw_rotate(qp, v) - raw_rotate(qm, v)) / (2.0 * h);
      const Vec3 coli = (raw_rotate_inv(qp, v) - raw_rotate_inv(qm, v)) / (2.0 * h);
      worst = std::max(worst, (col - J.col(i)).cwiseAbs().maxCoeff());
      worst = std::max(worst, (coli - Ji.col(i)).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

double check_cost_gradient(std::mt19937_64& rng, int samples, bool inject_bug) {
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Quaternion q = sample_uniform_quaternion(rng);
    Quaternion q_ref = sample_uniform_quaternion(rng);
    if (std::abs(q.coeffs().dot(q_ref.coeffs())) < 1e-3) q_ref = q;  // avoid the |.| kink
    Vec3 g = quat_cost_gradient(q, q_ref);
    if (inject_bug) g = -g;
    const Vec3 g_fd = fd_chart_gradient(
        [&](const Quaternion& p) { return quat_cost(p, q_ref); }, q, 1e-6);
    worst = std::max(worst, (g - g_fd).cwiseAbs().maxCoeff());
  }
  return worst;
}

double check_cost_hessian(std::mt19937_64& rng, int samples) {
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Quaternion q = sample_uniform_quaternion(rng);
    Quaternion q_ref = sample_uniform_quaternion(rng);
    if (std::abs(q.coeffs().dot(q_ref.coeffs())) < 1e-3) q_ref = q;
    const Mat3 H = quat_cost_hessian(q, q_ref);
    const Mat3 H_fd = fd_chart_hessian(
        [&](const Quaternion& p) { return quat_cost(p, q_ref); }, q, 1e-4);
    worst = std::max(worst, (H - H_fd).cwiseAbs().maxCoeff());
  }
  return worst;
}

double check_dynamics_jacobians(std::mt19937_64& rng, int samples) {
  double worst = 0.0;
  const double dt = 0.01;
  const RobotModel models[] = {make_quadruped(), make_quadruped_reaction_wheel(),
                               make_humanoid()};
  for (int s = 0; s < samples; ++s) {
    const RobotModel& model = models[s % 3];
    const SrbState x = random_state(rng);
    const VecX u = random_control(rng, model);
    const std::vector<Vec3> feet = random_feet(rng, model, x.r);

    Mat13 dfdx;
    MatX dfdu;
    raw_jacobians(model, x, u, feet, dt, dfdx, dfdu);

    const Vec13 y = x.pack();
    for (int i = 0; i < 13; ++i) {
      const double h = 1e-6;
      Vec13 e = Vec13::Zero();
      e[i] = h;
      const Vec13 col =
          (raw_midpoint(model, y + e, u, feet, dt) - raw_midpoint(model, y - e, u, feet, dt)) /
          (2.0 * h);
      worst = std::max(worst, (col - dfdx.col(i)).cwiseAbs().maxCoeff());
    }
    for (int i = 0; i < u.size(); ++i) {
      const double h = 1e-4;
      VecX up = u, um = u;
      up[i] += h;
      um[i] -= h;
      const Vec13 col =
          (raw_midpoint(model, y, up, feet, dt) - raw_midpoint(model, y, um, feet, dt)) /
          (2.0 * h);
      worst = std::max(worst, (col - dfdu.col(i)).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

double check_error_state_linearization(std::mt19937_64& rng, int samples) {
  double worst = 0.0;
  const double dt = 0.01;
  const RobotModel models[] = {make_quadruped(), make_quadruped_reaction_wheel(),
                               make_humanoid()};
  for (int s = 0; s < samples; ++s) {
    const RobotModel& model = models[s % 3];
    const SrbState x = random_state(rng);
    const VecX u = random_control(rng, model);
    const std::vector<Vec3> feet = random_feet(rng, model, x.r);
    const SrbState x_next = discrete_dynamics(model, x, u, feet, dt);
    const LinearizedStep lin = linearize(model, x, u, x_next, feet, dt);

    const double h = 1e-6;
    for (int i = 0; i < 12; ++i) {
      Vec12 e = Vec12::Zero();
      e[i] = h;
      const SrbState yp = discrete_dynamics(model, retract(x, e), u, feet, dt);
      const SrbState ym = discrete_dynamics(model, retract(x, Vec12(-e)), u, feet, dt);
      const Vec12 col = (state_error(yp, x_next) - state_error(ym, x_next)) / (2.0 * h);
      worst = std::max(worst, (col - lin.A.col(i)).cwiseAbs().maxCoeff());
    }
    for (int i = 0; i < u.size(); ++i) {
      const double hu = 1e-4;
      VecX up = u, um = u;
      up[i] += hu;
      um[i] -= hu;
      const SrbState yp = discrete_dynamics(model, x, up, feet, dt);
      const SrbState ym = discrete_dynamics(model, x, um, feet, dt);
      const Vec12 col = (state_error(yp, x_next) - state_error(ym, x_next)) / (2.0 * hu);
      worst = std::max(worst, (col - lin.B.col(i)).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

double check_riccati_lqr() {
  // Double integrator, 20 knots: the solver must reproduce the LQR solution.
  const double dt = 0.1;
  MatX A(2, 2), B(2, 1), Q(2, 2), R(1, 1), Qf(2, 2);
  A << 1.0, dt, 0.0, 1.0;
  B << 0.5 * dt * dt, dt;
  Q << 1.0, 0.0, 0.0, 0.1;
  R << 0.01;
  Qf = 10.0 * Q;
  const int K = 20;

  Problem prob;
  prob.state_dim = 2;
  prob.error_dim = 2;
  prob.control_dim = 1;
  prob.horizon = K;
  prob.x0 = VecX(2);
  prob.x0 << 1.0, 0.5;
  prob.step = [&](int, const VecX& x, const VecX& u) -> VecX { return A * x + B * u; };
  prob.linearize = [&](int, const VecX&, const VecX&, const VecX&, MatX& Ao, MatX& Bo) {
    Ao = A;
    Bo = B;
  };
  prob.error = [](const VecX& x, const VecX& x_ref) -> VecX { return x - x_ref; };
  prob.cost = [&](int, const VecX& x, const VecX& u) {
    CostExpansion e;
    e.cost = 0.5 * x.dot(Q * x) + 0.5 * u.dot(R * u);
    e.lx = Q * x;
    e.lu = R * u;
    e.lxx = Q;
    e.luu = R;
    e.lux = MatX::Zero(1, 2);
    return e;
  };
  prob.cost_terminal = [&](const VecX& x) {
    CostExpansion e;
    e.cost = 0.5 * x.dot(Qf * x);
    e.lx = Qf * x;
    e.lxx = Qf;
    e.lu = VecX::Zero(1);
    e.luu = MatX::Zero(1, 1);
    e.lux = MatX::Zero(1, 2);
    return e;
  };

  SolverSettings settings;
  settings.reg_initial = 1e-12;  // keep the always-on Levenberg term below the oracle tol
  AlIlqrSolver solver(prob, settings);
  std::vector<VecX> u_init(K - 1, VecX::Zero(1));
  const SolveResult res = solver.solve(u_init);

  // Independent Riccati recursion and closed-loop rollout.
  std::vector<MatX> gains(K - 1);
  MatX P = Qf;
  for (int k = K - 2; k >= 0; --k) {
    gains[k] = (R + B.transpose() * P * B).inverse() * (B.transpose() * P * A);
    const MatX Acl = A - B * gains[k];
    P = Q + gains[k].transpose() * R * gains[k] + Acl.transpose() * P * Acl;
  }
  double worst = 0.0;
  VecX x = prob.x0;
  for (int k = 0; k < K - 1; ++k) {
    const VecX u = -gains[k] * x;
    worst = std::max(worst, (res.traj.u[k] - u).cwiseAbs().maxCoeff());
    worst = std::max(worst, (res.traj.x[k] - x).cwiseAbs().maxCoeff());
    x = A * x + B * u;
  }
  worst = std::max(worst, (res.traj.x[K - 1] - x).cwiseAbs().maxCoeff());
  return worst;
}

double check_ballistic() {
  const RobotModel model = make_quadruped();
  SrbState x;
  x.r = Vec3(0.0, 0.0, 10.0);
  const VecX u = VecX::Zero(model.control_dim());
  const std::vector<Vec3> feet(model.num_contacts(), Vec3::Zero());
  for (int i = 0; i < 1000; ++i) x = physics_step(model, x, u, feet, 1e-3);
  return std::abs((x.r.z() - 10.0) - (-0.5 * 9.81));
}

double check_norm_drift() {
  const RobotModel model = make_quadruped();
  SrbState x;
  x.omega = Vec3(0.7, -0.4, 0.9);  // tumbling free body
  const VecX u = VecX::Zero(model.control_dim());
  const std::vector<Vec3> feet(model.num_contacts(), Vec3::Zero());
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    x = physics_step(model, x, u, feet, 1e-3);
    worst = std::max(worst, std::abs(x.q.norm() - 1.0));
  }
  return worst;
}

double check_landing_target() {
  // Brute-force yaw grid: no yaw rotation may beat the closed-form target by
  // more than the tolerance.
  const double step = 1e-4;
  const int n_grid = static_cast<int>(std::ceil(2.0 * M_PI / step));
  std::vector<double> cg(n_grid), sg(n_grid);
  for (int k = 0; k < n_grid; ++k) {
    const double half = 0.5 * (-M_PI + k * step);
    cg[k] = std::cos(half);
    sg[k] = std::sin(half);
  }

  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int s = 0; s < 1000; ++s) {
    const Quaternion q0 = sample_uniform_quaternion(rng);
    const double a = q0.w(), b = q0.vec().z();
    double best = 0.0;
    for (int k = 0; k < n_grid; ++k) best = std::max(best, std::abs(a * cg[k] + b * sg[k]));
    const double grid_angle = 2.0 * std::acos(std::min(1.0, best));
    const double target_angle = geodesic_angle(q0, landing_target(q0));
    worst = std::max(worst, target_angle - grid_angle);
  }
  return std::max(worst, 0.0);
}

double check_euler_chart(std::mt19937_64& rng, int samples) {
  const RobotModel model = make_quadruped();
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    SrbState x = random_state(rng);
    const Vec3 rpy = random_vec3(rng, 1.0);  // comfortably away from 90 deg pitch
    x.q = quat_from_euler_zyx(rpy);
    const VecX u = random_control(rng, model);
    const std::vector<Vec3> feet = random_feet(rng, model, x.r);

    const Vec13 f_quat = continuous_dynamics(model, x, u, feet);
    const EulerState xe = EulerState::from_srb(x);
    const Vec12 f_euler = euler_continuous_dynamics(model, xe, u, feet);

    // Translational and angular accelerations agree exactly across charts.
    worst = std::max(worst, (f_quat.segment<3>(7) - f_euler.segment<3>(6)).cwiseAbs().maxCoeff());
    worst = std::max(worst,
                     (f_quat.segment<3>(10) - f_euler.segment<3>(9)).cwiseAbs().maxCoeff());

    // Angle rates match finite differences of the angles along the flow.
    const double h = 1e-6;
    const Vec3 rpy_p = euler_zyx(integrate_body_rate(x.q, x.omega, h));
    const Vec3 rpy_m = euler_zyx(integrate_body_rate(x.q, x.omega, -h));
    const Vec3 rates_fd = (rpy_p - rpy_m) / (2.0 * h);
    worst = std::max(worst, (f_euler.segment<3>(3) - rates_fd).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace

std::vector<CheckResult> run_self_checks(const SelfCheckOptions& opts) {
  std::vector<CheckResult> out;
  const auto add = [&](const char* name, double tol, const std::function<double()>& body) {
    CheckResult r;
    r.name = name;
    r.tolerance = tol;
    try {
      r.max_error = body();
      r.pass = r.max_error <= tol;
    } catch (const std::exception& e) {
      r.name += std::string(" [exception: ") + e.what() + "]";
      r.max_error = std::numeric_limits<double>::infinity();
      r.pass = false;
    }
    out.push_back(r);
  };

  std::mt19937_64 rng(opts.seed);
  const int n = opts.samples;
  add("attitude_jacobian_fd", 1e-5, [&] { return check_attitude_jacobian(rng, n); });
  add("rotation_jacobian_fd", 1e-5, [&] { return check_rotation_jacobians(rng, n); });
  add("cost_gradient_fd", 1e-5,
      [&] { return check_cost_gradient(rng, n, opts.inject_gradient_bug); });
  add("cost_hessian_fd", 1e-4, [&] { return check_cost_hessian(rng, n); });
  add("dynamics_jacobian_fd", 1e-5, [&] { return check_dynamics_jacobians(rng, n); });
  add("error_state_linearization_fd", 1e-4,
      [&] { return check_error_state_linearization(rng, n); });
  add("riccati_lqr", 1e-8, [&] { return check_riccati_lqr(); });
  add("ballistic_free_fall", 1e-6, [&] { return check_ballistic(); });
  add("quaternion_norm_drift", 1e-9, [&] { return check_norm_drift(); });
  add("landing_target_grid", 1e-8, [&] { return check_landing_target(); });
  add("euler_chart_consistency", 1e-5, [&] { return check_euler_chart(rng, n); });
  return out;
}

bool all_passed(const std::vector<CheckResult>& results) {
  for (const CheckResult& r : results)
    if (!r.pass) return false;
  return true;
}

std::string format_check_table(const std::vector<CheckResult>& results) {
  std::ostringstream os;
  os << "check                              max_error    tolerance  result\n";
  for (const CheckResult& r : results) {
    os.setf(std::ios::left, std::ios::adjustfield);
    os.width(33);
    os << r.name << "  ";
    os.setf(std::ios::right, std::ios::adjustfield);
    os.setf(std::ios::scientific, std::ios::floatfield);
    os.precision(3);
    os.width(11);
    os << r.max_error << "  ";
    os.width(11);
    os << r.tolerance << "  ";
    os << (r.pass ? "pass" : "FAIL") << "\n";
  }
  return os.str();
}

}  // namespace quatmpc
