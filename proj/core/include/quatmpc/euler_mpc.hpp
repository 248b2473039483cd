#pragma once

#include "quatmpc/euler_dynamics.hpp"
#include "quatmpc/mpc.hpp"

namespace quatmpc {

// Euler-angle MPC baseline: identical physics and constraints, 12-dim state
// with a diagonal quadratic attitude cost on wrapped ZYX angle errors, and a
// standard (unmodified) iLQR expansion. Gimbal-lock faults surface as
// degraded ticks, never as exceptions.
class EulerMpcController : public ControllerBase {
 public:
  EulerMpcController(RobotModel model, MpcSettings settings, GaitSchedule gait);

  MpcTick step(const SrbState& x, const VelocityCommand& cmd, double t,
               const std::vector<Vec3>& feet) override;

 private:
  RobotModel model_;
  MpcSettings settings_;
  GaitSchedule gait_;
  CostWeights weights_;
  Vec3 w_attitude_;  // angle-space weight matched to the quaternion cost curvature
  double tick_dt_;
  int shift_knots_;

  bool initialized_ = false;
  SrbState anchor_;
  RelativeFrame rel_frame_;
  std::vector<VecX> prev_controls_;
  VecX prev_u0_;
  Vec3 last_rpy_ = Vec3::Zero();  // unwrap continuity across ticks
  bool have_last_rpy_ = false;
};

}  // namespace quatmpc
