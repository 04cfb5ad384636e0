#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Core>

#include "dataset.hpp"
#include "sim.hpp"

namespace dlo {

// Exploration run that produces training data. The gripper first glides from
// the construction pose to `home` and lets the rod settle. Then, once per
// window of `window_s` seconds, a random waypoint is drawn uniformly in a
// cube centred on `home` and the gripper heads toward it for that window
// with a minimum-jerk speed profile (zero end velocities, distance capped at
// avg_speed * window_s, so far-away draws just set the direction). Feature
// positions and the commanded velocity are sampled at the control rate;
// feature velocities come from central differences smoothed with a 5-sample
// moving average (rows without a full stencil are dropped).
struct CollectConfig {
  double duration_s = 300.0;  // recorded portion, prep excluded
  uint64_t seed = 1;
  double control_hz = 50.0;
  Eigen::Vector3d home{0.28, 0.0, -0.03};
  double workspace_edge = 0.3;  // m, cube side
  double avg_speed = 0.06;      // m/s within a window
  double window_s = 1.0;        // one waypoint draw per window
  double dwell_s = 0.25;  // pause between windows
  // Head back to `home` (over as many windows as that takes) after this many
  // wandering windows; 0 = never. On the table the rod's draped shape depends
  // on its drag history; regular re-homing keeps runs with different seeds
  // exploring the same neighbourhood of shapes instead of drifting apart.
  int home_every = 2;
  double prep_glide_s = 3.0;
  double prep_settle_s = 2.0;
  // The rig the built-in scenarios run on: rod draped onto a table. Cleared,
  // the rod hangs free.
  std::optional<double> table_z = -0.05;
  SimConfig sim;

  void validate() const;
};

Dataset collect(const CollectConfig& cfg);

}  // namespace dlo
