// Microbenchmarks for the hot path: quaternion primitives, dynamics and
// linearization per knot, and a full warm-started controller tick.

#include <benchmark/benchmark.h>

#include "quatmpc/mpc.hpp"
#include "quatmpc/sim.hpp"

using namespace quatmpc;

namespace {

SrbState standing_state(const RobotModel& model) {
  SrbState x;
  x.r = Vec3(0.0, 0.0, model.standing_height);
  x.q = Quaternion::from_axis_angle(Vec3(0.3, 0.5, 0.8).normalized(), 0.2);
  x.omega = Vec3(0.1, -0.2, 0.3);
  return x;
}

std::vector<Vec3> standing_feet(const RobotModel& model, const SrbState& x) {
  std::vector<Vec3> feet;
  const Mat3 R = rotation_matrix(x.q);
  for (const Vec3& c : model.contact_points) {
    Vec3 p = x.r + R * c;
    p.z() = 0.0;
    feet.push_back(p);
  }
  return feet;
}

VecX hover_control(const RobotModel& model) {
  VecX u = VecX::Zero(model.control_dim());
  const double fz = model.mass * model.gravity.norm() / model.num_contacts();
  for (int i = 0; i < model.num_contacts(); ++i) u[3 * i + 2] = fz;
  return u;
}

void BM_QuatMul(benchmark::State& state) {
  const Quaternion a = Quaternion::from_axis_angle(Vec3::UnitX(), 0.4);
  const Quaternion b = Quaternion::from_axis_angle(Vec3(0.1, 0.7, -0.2).normalized(), 1.1);
  for (auto _ : state) benchmark::DoNotOptimize(quat_mul(a, b));
}
BENCHMARK(BM_QuatMul);

void BM_Rotate(benchmark::State& state) {
  const Quaternion q = Quaternion::from_axis_angle(Vec3(0.1, 0.7, -0.2).normalized(), 1.1);
  const Vec3 v(0.3, -1.2, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(rotate(q, v));
}
BENCHMARK(BM_Rotate);

void BM_RotateJacobian(benchmark::State& state) {
  const Quaternion q = Quaternion::from_axis_angle(Vec3(0.1, 0.7, -0.2).normalized(), 1.1);
  const Vec3 v(0.3, -1.2, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(rotate_jacobian(q, v));
}
BENCHMARK(BM_RotateJacobian);

void BM_ContinuousDynamics(benchmark::State& state) {
  const RobotModel model = make_quadruped();
  const SrbState x = standing_state(model);
  const std::vector<Vec3> feet = standing_feet(model, x);
  const VecX u = hover_control(model);
  for (auto _ : state) benchmark::DoNotOptimize(continuous_dynamics(model, x, u, feet));
}
BENCHMARK(BM_ContinuousDynamics);

void BM_DiscreteStep(benchmark::State& state) {
  const RobotModel model = make_quadruped();
  const SrbState x = standing_state(model);
  const std::vector<Vec3> feet = standing_feet(model, x);
  const VecX u = hover_control(model);
  for (auto _ : state) benchmark::DoNotOptimize(discrete_dynamics(model, x, u, feet, 0.01));
}
BENCHMARK(BM_DiscreteStep);

void BM_Linearize(benchmark::State& state) {
  const RobotModel model = make_quadruped();
  const SrbState x = standing_state(model);
  const std::vector<Vec3> feet = standing_feet(model, x);
  const VecX u = hover_control(model);
  const SrbState x_next = discrete_dynamics(model, x, u, feet, 0.01);
  for (auto _ : state) benchmark::DoNotOptimize(linearize(model, x, u, x_next, feet, 0.01));
}
BENCHMARK(BM_Linearize);

void BM_PhysicsStepRk4(benchmark::State& state) {
  const RobotModel model = make_quadruped();
  SrbState x = standing_state(model);
  const std::vector<Vec3> feet = standing_feet(model, x);
  const VecX u = hover_control(model);
  for (auto _ : state) {
    x = physics_step(model, x, u, feet, 1e-3);
    benchmark::DoNotOptimize(x);
  }
}
BENCHMARK(BM_PhysicsStepRk4);

void BM_MpcTickWarm(benchmark::State& state) {
  const RobotModel model = make_quadruped();
  MpcController ctrl(model, MpcSettings{}, GaitSchedule{});
  SrbState x = standing_state(model);
  const std::vector<Vec3> feet = standing_feet(model, x);
  VelocityCommand cmd;
  double t = 0.0;
  ctrl.step(x, cmd, t, feet);  // cold solve primes the warm start
  for (auto _ : state) {
    t += 0.01;
    benchmark::DoNotOptimize(ctrl.step(x, cmd, t, feet));
  }
}
BENCHMARK(BM_MpcTickWarm)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
