#pragma once

#include <optional>
#include <set>
#include <vector>

#include <Eigen/Core>

namespace dlo {

struct SimConfig {
  int particle_count = 40;
  double rod_length = 0.5;           // m
  double stretch_stiffness = 500.0;  // N/m, adjacent pairs
  double bend_stiffness = 2.0;       // N/m, next-nearest pairs
  double damping = 0.08;             // N*s/m, viscous drag per particle
  double particle_mass = 0.002;      // kg
  double dt = 0.005;                 // s, one step() advance
  int substeps = 10;                 // internal integrator subdivisions
  Eigen::Vector3d gravity{0.0, 0.0, -9.81};
  std::optional<double> table_plane;  // z floor particles cannot fall below
  int feature_count = 10;             // tracked features along the rod
  double settle_time = 0.5;           // s, quiescence horizon used by probes

  void validate() const;
};

struct RodState {
  std::vector<Eigen::Vector3d> positions;
  std::vector<Eigen::Vector3d> velocities;
  std::vector<double> rest_lengths;  // per adjacent segment, size P-1
  std::set<int> nailed;              // particle indices pinned in place
  int anchor_index = 0;
  int gripper_index = 0;
};

// Chain of point masses with stretch springs on adjacent pairs and bend
// springs on next-nearest pairs, viscous drag, semi-implicit Euler.
// One end is anchored for the whole run; the other is kinematic and follows
// the commanded end-effector velocity exactly.
class RodSimulator {
 public:
  explicit RodSimulator(const SimConfig& cfg,
                        const Eigen::Vector3d& anchor = Eigen::Vector3d::Zero());

  // Advances by cfg.dt with the gripper moving at `gripper_velocity`.
  // Throws Error(DivergedSimulation) if any particle goes non-finite.
  void step(const Eigen::Vector3d& gripper_velocity);

  // Zero-input stepping for `seconds` (rounded down to whole steps).
  void settle(double seconds);

  // Positions of the m tracked features stacked into phi (dimension 3*m).
  // Features sit at equally spaced interior arc-length indices.
  Eigen::VectorXd features() const { return features(cfg_.feature_count); }
  Eigen::VectorXd features(int m) const;
  Eigen::Vector3d feature_position(int feature) const;

  static std::vector<int> feature_particles(int particle_count, int m);

  // Pins the feature's particle at its current position. Idempotent.
  // There is no un-nail: the pin lasts for the life of the state.
  void nail_feature(int feature);
  bool feature_nailed(int feature) const;

  // Central-difference Jacobian of one feature w.r.t. gripper displacement,
  // probed on copies of the current state: the gripper ramps +/- h along each
  // axis and the rod settles for cfg.settle_time before reading.
  Eigen::Matrix3d probe_jacobian(int feature, double h) const;

  Eigen::Vector3d gripper_position() const {
    return st_.positions[st_.gripper_index];
  }

  double kinetic_energy() const;
  double elastic_energy() const;

  const RodState& state() const { return st_; }
  RodState& state() { return st_; }
  const SimConfig& config() const { return cfg_; }
  double time() const { return time_; }

 private:
  void substep(const Eigen::Vector3d& gripper_velocity, double h);
  void check_finite() const;
  bool movable(int i) const {
    return i != st_.anchor_index && !st_.nailed.count(i);
  }

  SimConfig cfg_;
  RodState st_;
  double time_ = 0.0;
  std::vector<Eigen::Vector3d> forces_;  // scratch
};

}  // namespace dlo
