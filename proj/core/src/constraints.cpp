#include "quatmpc/constraints.hpp"

#include "quatmpc/errors.hpp"

namespace quatmpc {

ConstraintBlock friction_constraints(const VecX& u, const std::vector<bool>& stance,
                                     const ConstraintSet& set, int error_dim) {
  const int n_feet = static_cast<int>(stance.size());
  if (u.size() != 3 * n_feet) {
    throw DimensionMismatch("friction_constraints: control size " + std::to_string(u.size()) +
                            " != 3 * " + std::to_string(n_feet) + " feet");
  }

  int rows = 0;
  for (bool s : stance) rows += s ? 6 : 3;

  ConstraintBlock b;
  b.c = VecX::Zero(rows);
  b.c_u = MatX::Zero(rows, u.size());
  b.c_x = MatX::Zero(rows, error_dim);
  b.equality.assign(rows, false);

  int r = 0;
  for (int i = 0; i < n_feet; ++i) {
    const Vec3 f_world = u.segment<3>(3 * i);
    if (stance[i]) {
      const Mat3 C = set.frame(i);
      const Vec3 f = C * f_world;  // (t1, t2, n) components
      const Vec3 t1 = C.row(0), t2 = C.row(1), n = C.row(2);
      // rows only touch this foot's force channels
      auto cols = [&](int row) { return b.c_u.row(row).segment<3>(3 * i); };
      b.c[r] = f.x() - set.mu * f.z();
      cols(r) = (t1 - set.mu * n).transpose();
      b.c[r + 1] = -f.x() - set.mu * f.z();
      cols(r + 1) = (-t1 - set.mu * n).transpose();
      b.c[r + 2] = f.y() - set.mu * f.z();
      cols(r + 2) = (t2 - set.mu * n).transpose();
      b.c[r + 3] = -f.y() - set.mu * f.z();
      cols(r + 3) = (-t2 - set.mu * n).transpose();
      b.c[r + 4] = set.f_min - f.z();
      cols(r + 4) = -n.transpose();
      b.c[r + 5] = f.z() - set.f_max;
      cols(r + 5) = n.transpose();
      r += 6;
    } else {
      for (int k = 0; k < 3; ++k) {
        b.c[r + k] = f_world[k];
        b.c_u(r + k, 3 * i + k) = 1.0;
        b.equality[r + k] = true;
      }
      r += 3;
    }
  }
  return b;
}

ConstraintBlock box_constraints(const VecX& u, const VecX& lower, const VecX& upper,
                                int error_dim) {
  const int m = static_cast<int>(u.size());
  ConstraintBlock b;
  b.c = VecX::Zero(2 * m);
  b.c_u = MatX::Zero(2 * m, m);
  b.c_x = MatX::Zero(2 * m, error_dim);
  b.equality.assign(2 * m, false);
  for (int i = 0; i < m; ++i) {
    b.c[2 * i] = u[i] - upper[i];
    b.c_u(2 * i, i) = 1.0;
    b.c[2 * i + 1] = lower[i] - u[i];
    b.c_u(2 * i + 1, i) = -1.0;
  }
  return b;
}

}  // namespace quatmpc
