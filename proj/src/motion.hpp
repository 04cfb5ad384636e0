#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "sim.hpp"

namespace dlo {

// Minimum-jerk arc s(x) = 10x^3 - 15x^4 + 6x^5; slope 30 x^2 (1-x)^2 is zero
// at both ends.
inline double min_jerk_pos(double x) {
  return x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
}
inline double min_jerk_slope(double x) {
  return 30.0 * x * x * (1.0 - x) * (1.0 - x);
}

// Knot velocities for a min-jerk segment of length d along dir spanning Tn
// knot intervals at rate hz, written into v starting at k0.
inline void fill_min_jerk_segment(std::vector<Eigen::Vector3d>& v, size_t k0,
                                  const Eigen::Vector3d& dir, double d, int Tn,
                                  double hz) {
  for (int j = 0; j <= Tn; ++j) {
    size_t k = k0 + j;
    if (k >= v.size()) break;
    double x = double(j) / Tn;
    v[k] = dir * (d * min_jerk_slope(x) * hz / Tn);
  }
}

// Executes one knot interval: each simulator step uses the velocity
// interpolated at its midpoint, so the displacement over the interval equals
// the trapezoid of the two knot velocities.
inline void advance_knot(RodSimulator& sim, const Eigen::Vector3d& va,
                         const Eigen::Vector3d& vb, int steps) {
  for (int j = 0; j < steps; ++j) {
    double f = (j + 0.5) / steps;
    sim.step(va + f * (vb - va));
  }
}

// Min-jerk glide of the gripper to `to` over `seconds`.
inline void glide_to(RodSimulator& sim, const Eigen::Vector3d& to,
                     double seconds, double hz) {
  Eigen::Vector3d delta = to - sim.gripper_position();
  double d = delta.norm();
  if (d < 1e-9) return;
  int steps = int(std::lround(1.0 / (hz * sim.config().dt)));
  int Tn = std::max(2, int(std::lround(seconds * hz)));
  std::vector<Eigen::Vector3d> v(Tn + 1, Eigen::Vector3d::Zero());
  fill_min_jerk_segment(v, 0, delta / d, d, Tn, hz);
  for (int k = 0; k < Tn; ++k) advance_knot(sim, v[k], v[k + 1], steps);
}

}  // namespace dlo
