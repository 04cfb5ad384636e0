#include "collect.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "error.hpp"
#include "motion.hpp"
#include "rng.hpp"

namespace dlo {

void CollectConfig::validate() const {
  sim.validate();
  if (!(duration_s > 0.0)) raise(ErrorCode::BadConfig, "duration_s must be > 0");
  if (!(control_hz >= 5.0)) raise(ErrorCode::BadConfig, "control_hz must be >= 5");
  if (!(workspace_edge > 0.0))
    raise(ErrorCode::BadConfig, "workspace_edge must be > 0");
  if (!(avg_speed > 0.0)) raise(ErrorCode::BadConfig, "avg_speed must be > 0");
  if (!(window_s > 0.0)) raise(ErrorCode::BadConfig, "window_s must be > 0");
  if (home_every < 0) raise(ErrorCode::BadConfig, "home_every must be >= 0");
  const double ratio = 1.0 / (control_hz * sim.dt);
  if (std::abs(ratio - std::lround(ratio)) > 1e-9 || std::lround(ratio) < 1)
    raise(ErrorCode::BadConfig,
          "control period must be a whole number of simulator steps");
  // Every cube corner must stay reachable from the anchored end.
  double worst = 0.0;
  for (int c = 0; c < 8; ++c) {
    Eigen::Vector3d corner = home;
    for (int a = 0; a < 3; ++a)
      corner[a] += ((c >> a) & 1 ? 0.5 : -0.5) * workspace_edge;
    worst = std::max(worst, corner.norm());
  }
  if (worst >= 0.995 * sim.rod_length)
    raise(ErrorCode::BadConfig,
          "workspace cube reaches beyond the rod (corner at " +
              std::to_string(worst) + " m, rod " +
              std::to_string(sim.rod_length) + " m)");
}

Dataset collect(const CollectConfig& cfg) {
  cfg.validate();
  const double dt_c = 1.0 / cfg.control_hz;
  const int steps_per_knot = int(std::lround(dt_c / cfg.sim.dt));
  const size_t K = size_t(std::lround(cfg.duration_s * cfg.control_hz));
  if (K < 12) raise(ErrorCode::BadConfig, "duration too short to record anything");

  SimConfig simcfg = cfg.sim;
  simcfg.table_plane = cfg.table_z;
  RodSimulator sim(simcfg);
  Rng rng(cfg.seed);

  // Prep: glide to home, then settle. Not recorded.
  glide_to(sim, cfg.home, cfg.prep_glide_s, cfg.control_hz);
  sim.settle(cfg.prep_settle_s);

  // Waypoint schedule for the recorded phase: one draw per window.
  std::vector<Eigen::Vector3d> v(K + 1, Eigen::Vector3d::Zero());
  {
    const int dwell = int(std::lround(cfg.dwell_s * cfg.control_hz));
    const int Wn = std::max(2, int(std::lround(cfg.window_s * cfg.control_hz)));
    const double reach = cfg.avg_speed * cfg.window_s;
    Eigen::Vector3d pos = cfg.home;
    size_t kc = 0;
    int wandered = 0;
    bool homing = false;
    while (kc < K) {
      if (!homing && cfg.home_every > 0 && wandered >= cfg.home_every)
        homing = true;
      Eigen::Vector3d target;
      if (homing) {
        target = cfg.home;
        if ((target - pos).norm() < 1e-3) {
          homing = false;
          wandered = 0;
        }
      }
      if (!homing) {
        target = rng.uniform_in_box(cfg.home, cfg.workspace_edge);
        // The gripper cannot dive through the desk; waypoints drawn below it
        // land on the surface, which also concentrates time in the dragging
        // regime the tasks live in.
        if (cfg.table_z) target[2] = std::max(target[2], *cfg.table_z);
        ++wandered;
      }
      const double d = (target - pos).norm();
      if (d < 1e-3) continue;  // degenerate draw
      const double L = std::min(d, reach);
      fill_min_jerk_segment(v, kc, (target - pos) / d, L, Wn, cfg.control_hz);
      kc += size_t(Wn) + size_t(dwell);
      pos += L * (target - pos) / d;
    }
  }

  // Execute and sample at the knots.
  const int m = cfg.sim.feature_count;
  std::vector<Eigen::VectorXd> phi(K + 1);
  std::vector<Eigen::Vector3d> r(K + 1);
  for (size_t k = 0; k <= K; ++k) {
    phi[k] = sim.features();
    r[k] = sim.gripper_position();
    if (k < K) advance_knot(sim, v[k], v[k + 1], steps_per_knot);
  }

  // Central differences then a 5-sample moving average; rows 3..K-3 keep a
  // full stencil on both operations.
  const int lm = 3 * m;
  std::vector<Eigen::VectorXd> xdot(K + 1, Eigen::VectorXd::Zero(lm));
  for (size_t k = 1; k < K; ++k) xdot[k] = (phi[k + 1] - phi[k - 1]) / (2.0 * dt_c);

  Dataset ds;
  ds.l = 3;
  ds.n = 3;
  ds.m = m;
  const size_t first = 3, last = K - 3;
  for (size_t k = first; k <= last; ++k) {
    TrainingSample s;
    s.t = double(k) * dt_c;
    s.phi = phi[k];
    s.rdot = v[k];
    Eigen::VectorXd avg = Eigen::VectorXd::Zero(lm);
    for (int o = -2; o <= 2; ++o) avg += xdot[k + o];
    s.xdot = avg / 5.0;
    ds.samples.push_back(std::move(s));
  }

  auto put = [&](const std::string& key, double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    ds.meta[key] = buf;
  };
  auto put3 = [&](const std::string& key, const Eigen::Vector3d& p) {
    const char* ax = "xyz";
    for (int a = 0; a < 3; ++a) put(key + "_" + ax[a], p[a]);
  };
  ds.meta["kind"] = "dlo-exploration";
  ds.meta["seed"] = std::to_string(cfg.seed);
  ds.meta["duration_s"] = std::to_string(cfg.duration_s);
  ds.meta["control_hz"] = std::to_string(cfg.control_hz);
  ds.meta["samples"] = std::to_string(ds.samples.size());
  ds.meta["features"] = std::to_string(m);
  put("workspace_edge", cfg.workspace_edge);
  put("avg_speed", cfg.avg_speed);
  put("window_s", cfg.window_s);
  put("dwell_s", cfg.dwell_s);
  ds.meta["home_every"] = std::to_string(cfg.home_every);
  put("prep_glide_s", cfg.prep_glide_s);
  put("prep_settle_s", cfg.prep_settle_s);
  if (cfg.table_z) put("table_z", *cfg.table_z);
  put3("home", cfg.home);
  put3("gripper_first", r[first]);
  put3("gripper_last", r[last]);
  ds.meta["sim_particle_count"] = std::to_string(simcfg.particle_count);
  put("sim_rod_length", simcfg.rod_length);
  put("sim_stretch_stiffness", simcfg.stretch_stiffness);
  put("sim_bend_stiffness", simcfg.bend_stiffness);
  put("sim_damping", simcfg.damping);
  put("sim_particle_mass", simcfg.particle_mass);
  put("sim_dt", simcfg.dt);
  ds.meta["sim_substeps"] = std::to_string(simcfg.substeps);
  put3("sim_gravity", simcfg.gravity);
  return ds;
}

}  // namespace dlo
