#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "control.hpp"
#include "rbfn.hpp"
#include "sim.hpp"

namespace dlo {

// One servo goal: drive `feature` to its settled position plus `offset`.
// path_s > 0 makes the target a min-jerk path of that duration instead of a
// step. nail_on_reach pins the feature once within tolerance and moves on.
struct Stage {
  int feature = 4;
  Eigen::Vector3d offset{0.0, 0.0, 0.0};
  double path_s = 0.0;
  bool nail_on_reach = false;
};

struct Scenario {
  std::string name = "custom";
  std::vector<Stage> stages;
  double kp = 0.2;
  double lambda = 10.0;
  double gain_L = 20.0;
  double sigma_trunc = 1e-3;
  double u_max = 0.12;
  double control_hz = 50.0;
  Eigen::Vector3d u_mask{1.0, 1.0, 1.0};
  bool adapt = true;
  double stage_budget_s = 60.0;
  double total_budget_s = 0.0;  // 0 = no overall cap
  double reach_tol = 5e-3;
  std::optional<double> table_z;
  Eigen::Vector3d home{0.28, 0.0, -0.03};
  double prep_glide_s = 3.0;
  double prep_settle_s = 2.0;
  uint64_t seed = 0;
  double offset_jitter = 0.0;  // m, edge of the random cube added to offsets
  SimConfig sim;

  void validate() const;

  // key=value text form ('#' comments; stages as
  // stage=<feature>;<ox>,<oy>,<oz>;<path_s>;<nail>).
  void save(const std::string& path) const;
  static Scenario load(const std::string& path);
};

// The three built-in tasks: "task1" (single feature step goal), "task2"
// (feature follows a timed path), "task3" (three features placed and nailed
// in sequence on a table, vertical action disabled).
Scenario builtin_scenario(const std::string& name);

struct StageOutcome {
  int feature = -1;
  bool reached = false;
  double time_to_reach = 0.0;  // seconds into the stage; inf if never
  double final_err = 0.0;
  bool nailed = false;
  LoopResult loop;
};

struct ScenarioOutcome {
  bool success = false;
  double elapsed_s = 0.0;  // servo time across stages, prep excluded
  std::vector<StageOutcome> stages;
};

// Runs the scenario against a freshly prepared simulator. The network is
// copied; online adaptation never touches the caller's model. If tick_csv is
// non-empty a per-tick log (stage,t,dy,u,ew,eq16) is written there.
ScenarioOutcome run_scenario(const Scenario& sc, const RbfNetwork& net,
                             const std::string& tick_csv = "");

}  // namespace dlo
