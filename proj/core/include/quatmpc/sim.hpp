#pragma once

#include <string>
#include <vector>

#include "quatmpc/scenario.hpp"
#include "quatmpc/srb_dynamics.hpp"

namespace quatmpc {

// One physics-rate sample: ground-truth state, the open-loop commanded
// reference, the control held over the step, and telemetry from the most
// recent controller tick. status: 0 converged, 1 iteration-limited (still
// usable), 2 degraded (solver failed; fallback control applied).
struct RunLogRow {
  double t = 0.0;
  Vec13 state = Vec13::Zero();
  Vec13 reference = Vec13::Zero();
  VecX control;
  double solve_ms = 0.0;
  int status = 0;
};

enum class RunOutcome { Success, Fall, DegradedLimit, Penetration, Touchdown };

const char* to_string(RunOutcome o);

struct RunLog {
  std::vector<RunLogRow> rows;
  RunOutcome outcome = RunOutcome::Success;
  std::string note;
  SrbState final_state;

  // Airborne runs: first ground contact.
  double touchdown_time = -1.0;
  double touchdown_tilt = 0.0;  // rad between body z and world z at contact
  bool touchdown_feet_first = false;

  // Controller telemetry (per tick, not per physics row).
  int ticks = 0;
  int degraded_ticks = 0;
  std::vector<double> tick_solve_ms;
  double median_solve_ms = 0.0;
};

// RK4 step of the rigid-body vector field with the control applied as given
// (mask swing-foot channels before calling). Renormalizes the quaternion.
SrbState physics_step(const RobotModel& model, const SrbState& x, const VecX& u,
                      const std::vector<Vec3>& feet, double dt);

// Deterministic closed-loop rollout: controller ticks at the MPC rate,
// physics substeps at scenario.physics_dt in between, disturbances injected
// as velocity impulses, stance feet kinematically pinned (repinned by the
// touchdown heuristic on swing->stance transitions). The logged reference is
// the open-loop command integral, independent of the controller's internal
// (leashed) anchor, so tracking errors are measured against what was asked.
RunLog run_scenario(const Scenario& scenario);

// CSV: time, r_x..r_z, q_w..q_z, v_x..v_z, w_x..w_z, the same 13 reference
// columns prefixed ref_, u_0..u_{m-1}, solve_ms, status. One row per physics
// step.
void write_run_csv(const RunLog& log, const std::string& path);

// Tracking-error summaries over rows with t >= t_start. The attitude error is
// the body-frame rotation vector of conj(q_ref) * q (radians).
Vec3 attitude_error_vector(const Quaternion& q, const Quaternion& q_ref);
double peak_attitude_error(const RunLog& log, double t_start = 0.0);
Vec3 rms_attitude_error(const RunLog& log, double t_start = 0.0);
double peak_position_error(const RunLog& log, double t_start = 0.0);

}  // namespace quatmpc
