#pragma once

#include <vector>

#include "quatmpc/srb_model.hpp"

namespace quatmpc {

// Friction/contact parameters for one solve. contact_frames holds one
// rotation per foot with rows [tangent1; tangent2; inward normal] mapping a
// World force into contact coordinates; leave empty for flat ground
// (identity, normal = +z).
struct ConstraintSet {
  double mu = 0.6;
  double f_min = 0.0;
  double f_max = 250.0;
  std::vector<Mat3> contact_frames;

  Mat3 frame(int foot) const {
    return contact_frames.empty() ? Mat3::Identity() : contact_frames.at(foot);
  }
  static ConstraintSet defaults_for(const RobotModel& model) {
    ConstraintSet s;
    s.f_max = 2.0 * model.mass * model.gravity.norm();
    return s;
  }
};

// One knot's constraint residuals and Jacobians. Inequality rows are c <= 0;
// equality rows are c = 0 (marked in `equality`). c_x columns are in the
// solver's error state and are zero for the built-in constraint families.
struct ConstraintBlock {
  VecX c;
  MatX c_u;
  MatX c_x;
  std::vector<bool> equality;

  int rows() const { return static_cast<int>(c.size()); }
  static ConstraintBlock empty(int control_dim, int error_dim) {
    ConstraintBlock b;
    b.c = VecX::Zero(0);
    b.c_u = MatX::Zero(0, control_dim);
    b.c_x = MatX::Zero(0, error_dim);
    return b;
  }
};

// Pyramid friction rows per stance foot, in a fixed order per foot:
//   [ fx - mu*fz, -fx - mu*fz, fy - mu*fz, -fy - mu*fz, f_min - fz, fz - f_max ]
// with (fx, fy, fz) the force in that foot's contact frame. Swing feet
// contribute 3 equality rows F = 0. Feet are emitted in ascending index
// order. error_dim sizes the zero c_x block.
ConstraintBlock friction_constraints(const VecX& u, const std::vector<bool>& stance,
                                     const ConstraintSet& set, int error_dim = 12);

// Elementwise box rows: u - upper <= 0 and lower - u <= 0 (2 * dim rows).
ConstraintBlock box_constraints(const VecX& u, const VecX& lower, const VecX& upper,
                                int error_dim = 12);

}  // namespace quatmpc
