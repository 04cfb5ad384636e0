#include "scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "error.hpp"
#include "motion.hpp"
#include "rng.hpp"

namespace dlo {

void Scenario::validate() const {
  sim.validate();
  if (stages.empty()) raise(ErrorCode::BadConfig, "scenario has no stages");
  for (const auto& st : stages) {
    if (st.feature < 0 || st.feature >= sim.feature_count)
      raise(ErrorCode::BadConfig, "stage feature out of range");
    if (st.path_s < 0.0) raise(ErrorCode::BadConfig, "path_s must be >= 0");
  }
  if (!(stage_budget_s > 0.0))
    raise(ErrorCode::BadConfig, "stage_budget_s must be > 0");
  if (total_budget_s < 0.0)
    raise(ErrorCode::BadConfig, "total_budget_s must be >= 0");
  if (offset_jitter < 0.0)
    raise(ErrorCode::BadConfig, "offset_jitter must be >= 0");
}

namespace {

std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_vec3(const Eigen::Vector3d& v) {
  return fmt_num(v[0]) + "," + fmt_num(v[1]) + "," + fmt_num(v[2]);
}

Eigen::Vector3d parse_vec3(const std::string& s, const std::string& key) {
  Eigen::Vector3d v;
  std::istringstream is(s);
  std::string tok;
  for (int i = 0; i < 3; ++i) {
    if (!std::getline(is, tok, ','))
      raise(ErrorCode::CorruptPayload, "expected 3 comma fields for " + key);
    char* end = nullptr;
    v[i] = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0')
      raise(ErrorCode::CorruptPayload, "bad number in " + key + ": " + tok);
  }
  if (std::getline(is, tok, ','))
    raise(ErrorCode::CorruptPayload, "too many fields for " + key);
  return v;
}

double parse_num(const std::string& s, const std::string& key) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    raise(ErrorCode::CorruptPayload, "bad number for " + key + ": " + s);
  return v;
}

}  // namespace

void Scenario::save(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) raise(ErrorCode::Io, "cannot open for writing: " + path);
  out << "name=" << name << "\n";
  out << "kp=" << fmt_num(kp) << "\n";
  out << "lambda=" << fmt_num(lambda) << "\n";
  out << "gain_L=" << fmt_num(gain_L) << "\n";
  out << "sigma_trunc=" << fmt_num(sigma_trunc) << "\n";
  out << "u_max=" << fmt_num(u_max) << "\n";
  out << "control_hz=" << fmt_num(control_hz) << "\n";
  out << "u_mask=" << fmt_vec3(u_mask) << "\n";
  out << "adapt=" << (adapt ? 1 : 0) << "\n";
  out << "stage_budget_s=" << fmt_num(stage_budget_s) << "\n";
  out << "total_budget_s=" << fmt_num(total_budget_s) << "\n";
  out << "reach_tol=" << fmt_num(reach_tol) << "\n";
  if (table_z) out << "table_z=" << fmt_num(*table_z) << "\n";
  out << "home=" << fmt_vec3(home) << "\n";
  out << "prep_glide_s=" << fmt_num(prep_glide_s) << "\n";
  out << "prep_settle_s=" << fmt_num(prep_settle_s) << "\n";
  out << "seed=" << seed << "\n";
  out << "offset_jitter=" << fmt_num(offset_jitter) << "\n";
  for (const auto& st : stages)
    out << "stage=" << st.feature << ";" << fmt_vec3(st.offset) << ";"
        << fmt_num(st.path_s) << ";" << (st.nail_on_reach ? 1 : 0) << "\n";
  if (!out) raise(ErrorCode::Io, "write failed: " + path);
}

Scenario Scenario::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::Io, "cannot open: " + path);
  Scenario sc;
  sc.stages.clear();
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      raise(ErrorCode::CorruptPayload, "bad scenario line: " + line);
    const std::string key = line.substr(0, eq);
    const std::string val = line.substr(eq + 1);
    if (key == "name") {
      sc.name = val;
    } else if (key == "kp") {
      sc.kp = parse_num(val, key);
    } else if (key == "lambda") {
      sc.lambda = parse_num(val, key);
    } else if (key == "gain_L") {
      sc.gain_L = parse_num(val, key);
    } else if (key == "sigma_trunc") {
      sc.sigma_trunc = parse_num(val, key);
    } else if (key == "u_max") {
      sc.u_max = parse_num(val, key);
    } else if (key == "control_hz") {
      sc.control_hz = parse_num(val, key);
    } else if (key == "u_mask") {
      sc.u_mask = parse_vec3(val, key);
    } else if (key == "adapt") {
      sc.adapt = parse_num(val, key) != 0.0;
    } else if (key == "stage_budget_s") {
      sc.stage_budget_s = parse_num(val, key);
    } else if (key == "total_budget_s") {
      sc.total_budget_s = parse_num(val, key);
    } else if (key == "reach_tol") {
      sc.reach_tol = parse_num(val, key);
    } else if (key == "table_z") {
      sc.table_z = parse_num(val, key);
    } else if (key == "home") {
      sc.home = parse_vec3(val, key);
    } else if (key == "prep_glide_s") {
      sc.prep_glide_s = parse_num(val, key);
    } else if (key == "prep_settle_s") {
      sc.prep_settle_s = parse_num(val, key);
    } else if (key == "seed") {
      sc.seed = uint64_t(parse_num(val, key));
    } else if (key == "offset_jitter") {
      sc.offset_jitter = parse_num(val, key);
    } else if (key == "stage") {
      std::istringstream is(val);
      std::string f, o, p, nl;
      if (!std::getline(is, f, ';') || !std::getline(is, o, ';') ||
          !std::getline(is, p, ';') || !std::getline(is, nl, ';'))
        raise(ErrorCode::CorruptPayload, "bad stage line: " + val);
      Stage st;
      st.feature = int(parse_num(f, "stage feature"));
      st.offset = parse_vec3(o, "stage offset");
      st.path_s = parse_num(p, "stage path_s");
      st.nail_on_reach = parse_num(nl, "stage nail") != 0.0;
      sc.stages.push_back(st);
    } else {
      raise(ErrorCode::CorruptPayload, "unknown scenario key: " + key);
    }
  }
  return sc;
}

// All built-in tasks share the desk rig the training data comes from: the rod
// drapes from the elevated anchor onto a table at z = -0.05 and is dragged
// across it. Task goals are therefore lateral.
Scenario builtin_scenario(const std::string& name) {
  Scenario sc;
  sc.name = name;
  sc.table_z = -0.05;
  if (name == "task1") {
    // Step goal for one mid-rod feature.
    sc.stages = {{4, {0.04, 0.04, 0.0}, 0.0, false}};
    sc.kp = 0.2;
    sc.gain_L = 20.0;
    sc.lambda = 10.0;
    sc.stage_budget_s = 60.0;
  } else if (name == "task2") {
    // Timed tracking around a virtual cylinder of radius 0.05 m standing at
    // +y of the feature's start: three chords of the surrounding arc.
    sc.stages = {{5, {0.05, 0.05, 0.0}, 10.0, false},
                 {5, {-0.05, 0.05, 0.0}, 9.0, false},
                 {5, {-0.05, -0.05, 0.0}, 9.0, false}};
    sc.kp = 0.5;
    sc.gain_L = 20.0;
    sc.lambda = 10.0;
    sc.stage_budget_s = 10.0;  // ~28 s of path across the three stages
  } else if (name == "task3") {
    // Pin three features one after another; the gripper cannot act
    // vertically.
    sc.stages = {{1, {0.02, 0.05, 0.0}, 0.0, true},
                 {5, {0.0, 0.08, 0.0}, 0.0, true},
                 {8, {-0.02, 0.05, 0.0}, 0.0, true}};
    sc.kp = 0.2;
    sc.gain_L = 1.0;
    sc.lambda = 10.0;
    sc.u_mask = {1.0, 1.0, 0.0};
    sc.stage_budget_s = 60.0;
    sc.total_budget_s = 120.0;
  } else {
    raise(ErrorCode::InvalidArgument, "unknown scenario: " + name);
  }
  return sc;
}

ScenarioOutcome run_scenario(const Scenario& sc, const RbfNetwork& net,
                             const std::string& tick_csv) {
  sc.validate();
  SimConfig simcfg = sc.sim;
  simcfg.table_plane = sc.table_z;
  if (net.m() != simcfg.feature_count || net.l() != 3 || net.n() != 3)
    raise(ErrorCode::DimensionMismatch, "network does not match scenario");

  RodSimulator sim(simcfg);
  glide_to(sim, sc.home, sc.prep_glide_s, sc.control_hz);
  sim.settle(sc.prep_settle_s);

  RbfNetwork live = net;  // adaptation happens on this copy
  Rng rng(sc.seed);

  std::ofstream csv;
  if (!tick_csv.empty()) {
    csv.open(tick_csv, std::ios::trunc);
    if (!csv) raise(ErrorCode::Io, "cannot open for writing: " + tick_csv);
    csv << kTickCsvHeader << "\n";
  }

  ScenarioOutcome out;
  const double inf = std::numeric_limits<double>::infinity();
  double spent = 0.0;
  bool all_ok = true;

  for (size_t si = 0; si < sc.stages.size(); ++si) {
    const Stage& st = sc.stages[si];
    double budget = sc.stage_budget_s;
    if (sc.total_budget_s > 0.0)
      budget = std::min(budget, sc.total_budget_s - spent);
    if (budget <= 0.0) {
      all_ok = false;
      break;
    }

    sim.settle(0.5);  // quiesce before reading the start pose
    Eigen::Vector3d y0 = sim.feature_position(st.feature);
    Eigen::Vector3d offset = st.offset;
    if (sc.offset_jitter > 0.0)
      offset += rng.uniform_in_box(Eigen::Vector3d::Zero(), sc.offset_jitter);
    const Eigen::Vector3d y1 = y0 + offset;

    TargetFn target;
    if (st.path_s > 0.0) {
      const double T = st.path_s;
      target = [y0, y1, T](double t, Eigen::VectorXd& y_d,
                           Eigen::VectorXd& yd_dot) {
        const double x = std::min(t / T, 1.0);
        y_d = y0 + min_jerk_pos(x) * (y1 - y0);
        yd_dot = (x < 1.0 ? min_jerk_slope(x) / T : 0.0) * (y1 - y0);
      };
    } else {
      target = fixed_target(y1);
    }

    LoopConfig lc;
    lc.target_features = {st.feature};
    lc.duration_s = budget;
    lc.control_hz = sc.control_hz;
    lc.kp = sc.kp;
    lc.lambda = sc.lambda;
    lc.gain_L = sc.gain_L;
    lc.sigma_trunc = sc.sigma_trunc;
    lc.u_max = sc.u_max;
    lc.u_mask = sc.u_mask;
    lc.adapt = sc.adapt;
    lc.reach_tol = sc.reach_tol;
    lc.stop_on_reach = st.nail_on_reach;

    StageOutcome so;
    so.feature = st.feature;
    so.loop = run_closed_loop(sim, live, target, lc);
    so.final_err = so.loop.final_err;
    so.time_to_reach = so.loop.reached ? so.loop.time_to_reach : inf;

    // A step goal succeeds on first reach; a tracking goal must end on target.
    so.reached = st.path_s > 0.0 ? so.loop.final_err <= sc.reach_tol
                                 : so.loop.reached;
    if (so.reached && st.nail_on_reach) {
      sim.nail_feature(st.feature);
      so.nailed = true;
    }

    const double used = so.loop.ticks.size() / sc.control_hz;
    if (csv) {
      for (const auto& tk : so.loop.ticks)
        csv << fmt_num(spent + tk.t) << "," << fmt_num(tk.dy) << ","
            << fmt_num(tk.ew) << "," << fmt_num(tk.u[0]) << ","
            << fmt_num(tk.u[1]) << "," << fmt_num(tk.u[2]) << "," << tk.rank
            << "," << fmt_num(tk.v_task) << "\n";
    }
    spent += used;
    all_ok = all_ok && so.reached;
    out.stages.push_back(std::move(so));
  }

  if (csv && !csv.good()) raise(ErrorCode::Io, "write failed: " + tick_csv);
  out.success = all_ok && out.stages.size() == sc.stages.size();
  out.elapsed_s = spent;
  return out;
}

}  // namespace dlo
