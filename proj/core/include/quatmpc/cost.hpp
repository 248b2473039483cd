#pragma once

#include "quatmpc/srb_dynamics.hpp"

namespace quatmpc {

// Diagonal stage-cost weights. r_u must be sized to the model's control dim
// before use (sized_for does that).
struct CostWeights {
  Vec3 w_r{20.0, 20.0, 50.0};
  double w_q = 30.0;
  Vec3 w_v{1.0, 1.0, 1.0};
  Vec3 w_omega{0.4, 0.4, 0.4};
  VecX r_u;
  double terminal_scale = 10.0;

  CostWeights sized_for(int control_dim) const {
    CostWeights w = *this;
    if (w.r_u.size() == 0) w.r_u = VecX::Constant(control_dim, 1e-4);
    if (w.r_u.size() == 1) w.r_u = VecX::Constant(control_dim, w.r_u[0]);
    return w;
  }
};

// Attitude tracking cost 1 - |q_ref . q|. Zero iff same rotation; in [0, 1];
// invariant under sign flips of either argument.
double quat_cost(const Quaternion& q, const Quaternion& q_ref);

// Gradient in the differential parameterization: -sign(q_ref . q) q_ref^T G(q).
// At the 90-degree ridge (|dot| < 1e-10) the sign is taken as +1 and
// *ambiguous (when supplied) is set.
Vec3 quat_cost_gradient(const Quaternion& q, const Quaternion& q_ref,
                        bool* ambiguous = nullptr);

// |q_ref . q| I3 -- exact, always PSD.
Mat3 quat_cost_hessian(const Quaternion& q, const Quaternion& q_ref,
                       bool* ambiguous = nullptr);

// Value plus derivative blocks of one stage (or terminal) cost, taken in the
// problem's error state. Sized dynamically so the solver stays generic.
struct CostExpansion {
  double cost = 0.0;
  VecX lx;
  VecX lu;
  MatX lxx;
  MatX luu;
  MatX lux;
};

// Quadratic tracking cost on [r, v, omega, u] offsets plus w_q * quat_cost.
// Derivatives are taken in the 12-dim error state around x (attitude rows
// from the quaternion cost's analytic gradient/Hessian).
CostExpansion stage_cost(const SrbState& x, const VecX& u, const SrbState& x_ref,
                         const VecX& u_ref, const CostWeights& w);

// State terms only, scaled by terminal_scale. lu/luu/lux left empty.
CostExpansion terminal_cost(const SrbState& x, const SrbState& x_ref, const CostWeights& w);

// Closest yaw-only attitude to q0 under quat_cost, in closed form:
// [q0_s, 0, 0, q0_z] normalized, or identity when that vector is degenerate.
Quaternion landing_target(const Quaternion& q0);

}  // namespace quatmpc
