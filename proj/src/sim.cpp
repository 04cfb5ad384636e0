#include "sim.hpp"

#include <cmath>
#include <string>

#include "error.hpp"

namespace dlo {

void SimConfig::validate() const {
  if (particle_count < 4)
    raise(ErrorCode::BadConfig, "particle_count must be >= 4");
  if (!(rod_length > 0.0)) raise(ErrorCode::BadConfig, "rod_length must be > 0");
  if (!(stretch_stiffness > 0.0))
    raise(ErrorCode::BadConfig, "stretch_stiffness must be > 0");
  if (bend_stiffness < 0.0)
    raise(ErrorCode::BadConfig, "bend_stiffness must be >= 0");
  if (damping < 0.0) raise(ErrorCode::BadConfig, "damping must be >= 0");
  if (!(particle_mass > 0.0))
    raise(ErrorCode::BadConfig, "particle_mass must be > 0");
  if (!(dt > 0.0)) raise(ErrorCode::BadConfig, "dt must be > 0");
  if (substeps < 1) raise(ErrorCode::BadConfig, "substeps must be >= 1");
  if (feature_count < 1 || feature_count > particle_count - 2)
    raise(ErrorCode::BadConfig, "feature_count out of range");
  // Explicit springs go unstable when the sub-interval resolves less than
  // a few samples per oscillation period.
  const double h = dt / substeps;
  const double omega = std::sqrt(stretch_stiffness / particle_mass);
  if (omega * h > 1.0)
    raise(ErrorCode::BadConfig,
          "dt/substeps too coarse for stretch_stiffness/particle_mass "
          "(omega*h = " + std::to_string(omega * h) + " > 1)");
}

RodSimulator::RodSimulator(const SimConfig& cfg, const Eigen::Vector3d& anchor)
    : cfg_(cfg) {
  cfg_.validate();
  const int P = cfg_.particle_count;
  const double seg = cfg_.rod_length / (P - 1);
  st_.positions.resize(P);
  st_.velocities.assign(P, Eigen::Vector3d::Zero());
  st_.rest_lengths.assign(P - 1, seg);
  for (int i = 0; i < P; ++i)
    st_.positions[i] = anchor + Eigen::Vector3d(seg * i, 0.0, 0.0);
  st_.anchor_index = 0;
  st_.gripper_index = P - 1;
  forces_.assign(P, Eigen::Vector3d::Zero());
}

std::vector<int> RodSimulator::feature_particles(int particle_count, int m) {
  std::vector<int> idx(m);
  for (int k = 0; k < m; ++k) {
    double f = double(k + 1) * (particle_count - 1) / (m + 1);
    idx[k] = int(std::lround(f));
  }
  return idx;
}

Eigen::VectorXd RodSimulator::features(int m) const {
  if (m < 1 || m > cfg_.particle_count - 2)
    raise(ErrorCode::InvalidArgument, "feature count out of range");
  auto idx = feature_particles(cfg_.particle_count, m);
  Eigen::VectorXd phi(3 * m);
  for (int k = 0; k < m; ++k) phi.segment<3>(3 * k) = st_.positions[idx[k]];
  return phi;
}

Eigen::Vector3d RodSimulator::feature_position(int feature) const {
  if (feature < 0 || feature >= cfg_.feature_count)
    raise(ErrorCode::InvalidArgument, "feature index out of range");
  auto idx = feature_particles(cfg_.particle_count, cfg_.feature_count);
  return st_.positions[idx[feature]];
}

void RodSimulator::nail_feature(int feature) {
  if (feature < 0 || feature >= cfg_.feature_count)
    raise(ErrorCode::InvalidArgument, "feature index out of range");
  auto idx = feature_particles(cfg_.particle_count, cfg_.feature_count);
  st_.nailed.insert(idx[feature]);
  st_.velocities[idx[feature]].setZero();
}

bool RodSimulator::feature_nailed(int feature) const {
  if (feature < 0 || feature >= cfg_.feature_count)
    raise(ErrorCode::InvalidArgument, "feature index out of range");
  auto idx = feature_particles(cfg_.particle_count, cfg_.feature_count);
  return st_.nailed.count(idx[feature]) > 0;
}

void RodSimulator::substep(const Eigen::Vector3d& gripper_velocity, double h) {
  const int P = cfg_.particle_count;
  const auto& x = st_.positions;

  for (int i = 0; i < P; ++i)
    forces_[i] = cfg_.particle_mass * cfg_.gravity - cfg_.damping * st_.velocities[i];

  auto spring = [&](int a, int b, double rest, double k) {
    Eigen::Vector3d d = x[b] - x[a];
    double len = d.norm();
    if (len < 1e-12) return;  // coincident: no defined direction
    Eigen::Vector3d f = (k * (len - rest) / len) * d;
    forces_[a] += f;
    forces_[b] -= f;
  };

  for (int i = 0; i + 1 < P; ++i)
    spring(i, i + 1, st_.rest_lengths[i], cfg_.stretch_stiffness);
  if (cfg_.bend_stiffness > 0.0)
    for (int i = 0; i + 2 < P; ++i)
      spring(i, i + 2, st_.rest_lengths[i] + st_.rest_lengths[i + 1],
             cfg_.bend_stiffness);

  const double inv_m = 1.0 / cfg_.particle_mass;
  for (int i = 0; i < P; ++i) {
    if (i == st_.gripper_index) {
      st_.velocities[i] = gripper_velocity;
      st_.positions[i] += gripper_velocity * h;
      continue;
    }
    if (!movable(i)) {
      st_.velocities[i].setZero();
      continue;
    }
    st_.velocities[i] += forces_[i] * (inv_m * h);
    st_.positions[i] += st_.velocities[i] * h;
    if (cfg_.table_plane && st_.positions[i].z() < *cfg_.table_plane) {
      st_.positions[i].z() = *cfg_.table_plane;
      if (st_.velocities[i].z() < 0.0) st_.velocities[i].z() = 0.0;
    }
  }
}

void RodSimulator::step(const Eigen::Vector3d& gripper_velocity) {
  const double h = cfg_.dt / cfg_.substeps;
  for (int s = 0; s < cfg_.substeps; ++s) substep(gripper_velocity, h);
  time_ += cfg_.dt;
  check_finite();
}

void RodSimulator::settle(double seconds) {
  const int n = int(seconds / cfg_.dt);
  for (int i = 0; i < n; ++i) step(Eigen::Vector3d::Zero());
}

void RodSimulator::check_finite() const {
  for (int i = 0; i < cfg_.particle_count; ++i)
    if (!st_.positions[i].allFinite() || !st_.velocities[i].allFinite())
      raise(ErrorCode::DivergedSimulation,
            "non-finite state at particle " + std::to_string(i) + " (t=" +
                std::to_string(time_) + "s); reduce dt or stiffness");
}

Eigen::Matrix3d RodSimulator::probe_jacobian(int feature, double h) const {
  if (!(h > 0.0)) raise(ErrorCode::InvalidArgument, "probe step h must be > 0");
  if (feature < 0 || feature >= cfg_.feature_count)
    raise(ErrorCode::InvalidArgument, "feature index out of range");

  // Displace the gripper by +/- h along one axis with a short constant-speed
  // ramp, let the rod settle, and read the feature.
  auto displaced = [&](int axis, double sign) {
    RodSimulator probe(*this);
    const double ramp = 0.1;  // s
    const int n = int(ramp / cfg_.dt);
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    v[axis] = sign * h / (n * cfg_.dt);
    for (int i = 0; i < n; ++i) probe.step(v);
    probe.settle(cfg_.settle_time);
    return probe.feature_position(feature);
  };

  Eigen::Matrix3d J;
  for (int axis = 0; axis < 3; ++axis) {
    Eigen::Vector3d plus = displaced(axis, +1.0);
    Eigen::Vector3d minus = displaced(axis, -1.0);
    J.col(axis) = (plus - minus) / (2.0 * h);
  }
  return J;
}

double RodSimulator::kinetic_energy() const {
  double e = 0.0;
  for (const auto& v : st_.velocities) e += 0.5 * cfg_.particle_mass * v.squaredNorm();
  return e;
}

double RodSimulator::elastic_energy() const {
  const auto& x = st_.positions;
  double e = 0.0;
  for (int i = 0; i + 1 < cfg_.particle_count; ++i) {
    double s = (x[i + 1] - x[i]).norm() - st_.rest_lengths[i];
    e += 0.5 * cfg_.stretch_stiffness * s * s;
  }
  if (cfg_.bend_stiffness > 0.0)
    for (int i = 0; i + 2 < cfg_.particle_count; ++i) {
      double rest = st_.rest_lengths[i] + st_.rest_lengths[i + 1];
      double s = (x[i + 2] - x[i]).norm() - rest;
      e += 0.5 * cfg_.bend_stiffness * s * s;
    }
  return e;
}

}  // namespace dlo
