// Command-line front end. Talks to the library exclusively through the C API.
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dlo/dlo.h"

namespace {

// 0 ok, 2 usage/config, 3 file problems, 4 runtime failure, 5 task failed.
int exit_code(dlo_status s) {
  switch (s) {
    case DLO_OK:
      return 0;
    case DLO_ERR_INVALID_ARGUMENT:
    case DLO_ERR_BAD_CONFIG:
      return 2;
    case DLO_ERR_IO:
    case DLO_ERR_VERSION_MISMATCH:
    case DLO_ERR_DIMENSION_MISMATCH:
    case DLO_ERR_CORRUPT_PAYLOAD:
      return 3;
    default:
      return 4;
  }
}

int report(dlo_status s) {
  if (s == DLO_OK) return 0;
  std::fprintf(stderr, "error code=%s msg=\"%s\"\n", dlo_status_name(s),
               dlo_last_error());
  return exit_code(s);
}

bool parse_vec3(const std::string& s, double out[3]) {
  return std::sscanf(s.c_str(), "%lf,%lf,%lf", &out[0], &out[1], &out[2]) == 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deformable linear object shape servoing toolkit"};
  app.require_subcommand(1);

  // ---- collect ----
  auto* collect = app.add_subcommand(
      "collect", "Run the exploration simulation and write a dataset");
  std::string c_out;
  dlo_collect_config cc;
  dlo_collect_config_init(&cc);
  std::string c_home;
  collect->add_option("--out", c_out, "dataset CSV path")->required();
  collect->add_option("--duration", cc.duration_s, "recorded seconds");
  collect->add_option("--seed", cc.seed, "RNG seed");
  collect->add_option("--hz", cc.control_hz, "control rate");
  collect->add_option("--edge", cc.workspace_edge, "workspace cube edge (m)");
  collect->add_option("--avg-speed", cc.avg_speed, "segment speed (m/s)");
  collect->add_option("--home", c_home, "workspace centre x,y,z");
  collect->add_option("--features", cc.sim.feature_count, "tracked features");
  bool c_no_table = false;
  collect->add_option("--table-z", cc.table_z, "table plane height (m)");
  collect->add_flag("--no-table", c_no_table, "let the rod hang free");

  // ---- train ----
  auto* train = app.add_subcommand("train", "Fit the Jacobian model");
  std::string t_data, t_out;
  dlo_train_config tc;
  dlo_train_config_init(&tc);
  bool t_no_centers = false, t_no_widths = false;
  train->add_option("--data", t_data, "dataset CSV")->required();
  train->add_option("--out-model", t_out, "model output path")->required();
  train->add_option("--q", tc.q, "RBF units");
  train->add_option("--epochs", tc.epochs, "training epochs");
  train->add_option("--batch", tc.batch, "minibatch size");
  train->add_option("--alpha", tc.alpha, "Adam step size");
  train->add_option("--beta", tc.beta, "smooth-L1 transition");
  train->add_option("--seed", tc.seed, "RNG seed");
  train->add_option("--target-feature", tc.target_feature,
                    "feature the target head learns");
  train->add_flag("--freeze-centers", t_no_centers, "do not adapt centers");
  train->add_flag("--freeze-widths", t_no_widths, "do not adapt widths");

  // ---- eval ----
  auto* eval = app.add_subcommand("eval", "Model loss over a dataset");
  std::string e_model, e_data;
  double e_beta = 1.0;
  int e_target = 4;
  eval->add_option("--model", e_model, "model path")->required();
  eval->add_option("--data", e_data, "dataset CSV")->required();
  eval->add_option("--beta", e_beta, "smooth-L1 transition");
  eval->add_option("--target-feature", e_target, "target head feature");

  // ---- run ----
  auto* run = app.add_subcommand("run", "Execute a servo scenario");
  std::string r_scenario, r_model, r_log;
  int r_adapt = -1;
  bool r_adapt_on = false, r_adapt_off = false, r_has_seed = false;
  uint64_t r_seed = 0;
  run->add_option("--scenario", r_scenario,
                  "task1|task2|task3 or a scenario file")
      ->required();
  run->add_option("--model", r_model, "model path")->required();
  run->add_option("--log", r_log, "per-tick CSV log");
  run->add_flag("--online-update", r_adapt_on, "force online Jacobian updates on");
  run->add_flag("--no-online-update", r_adapt_off,
                "force online Jacobian updates off");
  auto* seed_opt = run->add_option("--seed", r_seed, "override scenario seed");

  // ---- gradcheck ----
  auto* gc = app.add_subcommand("gradcheck",
                                "Finite-difference check of training gradients");
  int g_configs = 100;
  uint64_t g_seed = 42;
  gc->add_option("--configs", g_configs, "random configurations");
  gc->add_option("--seed", g_seed, "RNG seed");

  // ---- probe-jacobian ----
  auto* probe = app.add_subcommand(
      "probe-jacobian", "Finite-difference feature Jacobian of the simulator");
  int p_feature = 4;
  double p_h = 0.01, p_glide = 3.0, p_settle = 2.0;
  std::string p_home = "0.28,0,-0.03";
  probe->add_option("--feature", p_feature, "feature index (0-based)");
  probe->add_option("--step", p_h, "probe displacement (m)");
  probe->add_option("--home", p_home, "gripper pose to probe from, x,y,z");
  probe->add_option("--glide", p_glide, "seconds to reach the pose");
  probe->add_option("--settle", p_settle, "seconds to settle before probing");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (collect->parsed()) {
    if (!c_home.empty() && !parse_vec3(c_home, cc.home)) {
      std::fprintf(stderr, "error code=invalid_argument msg=\"bad --home\"\n");
      return 2;
    }
    if (c_no_table) cc.has_table = 0;
    dlo_status s = dlo_collect(&cc, c_out.c_str());
    if (s != DLO_OK) return report(s);
    std::printf("dataset=%s\nduration_s=%g\nseed=%" PRIu64 "\n", c_out.c_str(),
                cc.duration_s, cc.seed);
    return 0;
  }

  if (train->parsed()) {
    tc.train_centers = t_no_centers ? 0 : 1;
    tc.train_widths = t_no_widths ? 0 : 1;
    dlo_train_stats st{};
    dlo_status s = dlo_train(t_data.c_str(), &tc, t_out.c_str(), &st);
    if (s != DLO_OK) return report(s);
    std::printf("model=%s\nfinal_loss=%.6g\nkmeans_objective=%.6g\n"
                "elapsed_s=%.1f\n",
                t_out.c_str(), st.final_loss, st.kmeans_objective, st.elapsed_s);
    return 0;
  }

  if (eval->parsed()) {
    double loss = 0.0;
    dlo_status s = dlo_evaluate_loss(e_model.c_str(), e_data.c_str(), e_beta,
                                     e_target, &loss);
    if (s != DLO_OK) return report(s);
    std::printf("loss=%.10g\n", loss);
    return 0;
  }

  if (run->parsed()) {
    if (r_adapt_on && r_adapt_off) {
      std::fprintf(stderr,
                   "error code=invalid_argument msg=\"--online-update and "
                   "--no-online-update are exclusive\"\n");
      return 2;
    }
    if (r_adapt_on) r_adapt = 1;
    if (r_adapt_off) r_adapt = 0;
    r_has_seed = seed_opt->count() > 0;
    dlo_scenario_outcome oc{};
    dlo_status s = dlo_run_scenario(
        r_scenario.c_str(), r_model.c_str(), r_log.empty() ? nullptr : r_log.c_str(),
        r_adapt, r_has_seed ? 1 : 0, r_seed, &oc);
    if (s != DLO_OK) return report(s);
    std::printf("scenario=%s\nsuccess=%d\nstages=%d\nreached=%d\n"
                "elapsed_s=%.2f\nfinal_err=%.6g\n",
                r_scenario.c_str(), oc.success, oc.stages, oc.stages_reached,
                oc.elapsed_s, oc.final_err);
    for (int i = 0; i < oc.stages && i < DLO_MAX_STAGES; ++i)
      std::printf("stage%d feature=%d reached=%d time_to_reach=%.2f "
                  "final_err=%.6g nailed=%d\n",
                  i, oc.stage[i].feature, oc.stage[i].reached,
                  oc.stage[i].time_to_reach, oc.stage[i].final_err,
                  oc.stage[i].nailed);
    return oc.success ? 0 : 5;
  }

  if (gc->parsed()) {
    dlo_gradcheck_report rep{};
    dlo_status s = dlo_gradcheck(g_configs, g_seed, &rep);
    if (s != DLO_OK) return report(s);
    std::printf("configs=%d\nparams_checked=%ld\nmax_rel_err=%.3e\n"
                "elapsed_s=%.2f\n",
                rep.configs, rep.params_checked, rep.max_rel_err, rep.elapsed_s);
    return 0;
  }

  if (probe->parsed()) {
    double home[3];
    if (!parse_vec3(p_home, home)) {
      std::fprintf(stderr, "error code=invalid_argument msg=\"bad --home\"\n");
      return 2;
    }
    dlo_sim_config sc;
    dlo_sim_config_init(&sc);
    dlo_sim* sim = nullptr;
    dlo_status s = dlo_sim_create(&sc, nullptr, &sim);
    if (s != DLO_OK) return report(s);
    double pos[3];
    dlo_sim_gripper_position(sim, pos);
    const int nsteps = int(std::lround(p_glide / sc.dt));
    double v[3];
    for (int i = 0; i < 3; ++i) v[i] = (home[i] - pos[i]) / p_glide;
    for (int k = 0; k < nsteps && s == DLO_OK; ++k) s = dlo_sim_step(sim, v);
    if (s == DLO_OK) s = dlo_sim_settle(sim, p_settle);
    double J[9];
    if (s == DLO_OK) s = dlo_sim_probe_jacobian(sim, p_feature, p_h, J);
    dlo_sim_destroy(sim);
    if (s != DLO_OK) return report(s);
    std::printf("feature=%d\n", p_feature);
    for (int r = 0; r < 3; ++r)
      std::printf("J_row%d=%.6f,%.6f,%.6f\n", r, J[r], J[3 + r], J[6 + r]);
    return 0;
  }

  return 2;
}
