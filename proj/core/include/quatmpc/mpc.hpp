#pragma once

#include <vector>

#include "quatmpc/al_ilqr.hpp"

namespace quatmpc {

// Stance/swing assignment per foot. Stand keeps every foot planted; trot
// alternates diagonal pairs via per-foot phase offsets.
struct GaitSchedule {
  enum class Type { Stand, Trot };
  Type type = Type::Stand;
  double period = 0.5;
  double duty = 0.5;
  std::vector<double> offsets{0.0, 0.5, 0.5, 0.0};  // FL, FR, RL, RR

  bool stance(double t, int foot) const;
  double stance_duration() const { return period * duty; }
};

// Desired body motion: linear velocity in the Relative (yaw-aligned) frame,
// angular velocity in the Body frame.
struct VelocityCommand {
  Vec3 linear = Vec3::Zero();
  Vec3 angular = Vec3::Zero();
};

// Yaw extraction for the Relative frame. Near +-90 deg pitch the yaw angle is
// ill-conditioned, so the last well-conditioned value is held (with a small
// hysteresis band) instead of letting the frame spin.
class RelativeFrame {
 public:
  double yaw(const Quaternion& q);

 private:
  double last_yaw_ = 0.0;
  bool frozen_ = false;
};

struct MpcSettings {
  int horizon_knots = 37;
  double knot_dt = 0.01;
  double rate_hz = 100.0;
  CostWeights weights;
  ConstraintSet constraints;
  SolverSettings solver;
  // Reference anchor: integrated command pose, kept within a leash of the
  // measured state so large disturbances stay recoverable.
  double leash_pos = 0.2;            // meters
  double leash_angle = 0.5235988;    // 30 deg
  double reference_height = -1.0;    // <0: captured from the first state
  // Falling-cat style operation: hold a fixed target attitude instead of
  // integrating velocity commands.
  bool attitude_target_mode = false;
  Quaternion attitude_target;
  int warm_start_shift = -1;  // knots; <0 derives round(period / knot_dt)

  MpcSettings() {
    // Receding-horizon defaults: few, cheap iterations per tick; scenario
    // configs may widen them for offline solves.
    solver.max_outer = 2;
    solver.max_inner = 8;
    solver.penalty_initial = 100.0;
    solver.cost_tol = 1e-3;
  }
};

// One controller tick: the control to apply plus solve telemetry.
struct MpcTick {
  double t = 0.0;
  VecX u0;
  double solve_ms = 0.0;
  bool degraded = false;
  ConvergenceReport report;
  SrbState reference_now;  // first reference knot, for logging/tracking error
};

// Forward integration of the command from x_start: positions accumulate the
// yaw-rotated linear command, attitudes accumulate the body angular command,
// velocities are set to the command itself. The height channel tracks
// `height` when >= 0. Every returned quaternion is unit.
std::vector<SrbState> build_reference(const SrbState& x_start, const VelocityCommand& cmd,
                                      int knots, double dt, double height, double yaw);

// Stance flags sampled at knot midtimes, (knots-1) x n_feet.
std::vector<std::vector<bool>> gait_contacts(const GaitSchedule& gait, double t0, int knots,
                                             double dt, int n_feet);

// Raibert-style touchdown targets: hip projection plus half a stance period
// of commanded velocity, clamped to the model's reach radius. Flat ground.
std::vector<Vec3> foothold_heuristic(const RobotModel& model, const SrbState& x,
                                     const VelocityCommand& cmd, const GaitSchedule& gait,
                                     double yaw);

// Abstract tick interface shared by the quaternion and Euler controllers.
class ControllerBase {
 public:
  virtual ~ControllerBase() = default;
  virtual MpcTick step(const SrbState& x, const VelocityCommand& cmd, double t,
                       const std::vector<Vec3>& feet) = 0;
};

// Advances the command-integrated reference pose and clamps it back within
// the leash of the measured state. Captures reference_height into settings on
// the first call. Shared by both controller flavors.
void update_reference_anchor(const SrbState& x, const VelocityCommand& cmd, double tick_dt,
                             MpcSettings& settings, RelativeFrame& rel, SrbState& anchor,
                             bool& initialized);

// Nominal per-knot controls: body weight split over stance feet along each
// foot's inward contact normal, plus a vertical shim solved by least squares
// so the net force and the roll/pitch torque about the CoM vanish (zeros for
// wheels). Serves as both warm start and control cost center.
std::vector<VecX> nominal_controls(const RobotModel& model, const ConstraintSet& set,
                                   const std::vector<std::vector<bool>>& contacts,
                                   const std::vector<Vec3>& feet, const Vec3& r);

// Receding-horizon controller over the quaternion-native solver.
class MpcController : public ControllerBase {
 public:
  MpcController(RobotModel model, MpcSettings settings, GaitSchedule gait);

  MpcTick step(const SrbState& x, const VelocityCommand& cmd, double t,
               const std::vector<Vec3>& feet) override;

  const SrbState& anchor() const { return anchor_; }
  const RobotModel& model() const { return model_; }
  const MpcSettings& settings() const { return settings_; }

 private:
  void update_anchor(const SrbState& x, const VelocityCommand& cmd);

  RobotModel model_;
  MpcSettings settings_;
  GaitSchedule gait_;
  CostWeights weights_;  // r_u sized for the model
  double tick_dt_;
  int shift_knots_;

  bool initialized_ = false;
  SrbState anchor_;
  RelativeFrame rel_frame_;
  std::vector<VecX> prev_controls_;
  VecX prev_u0_;
};

}  // namespace quatmpc
