#include "dlo/dlo.h"

#include <algorithm>
#include <cstring>
#include <new>
#include <string>

#include "collect.hpp"
#include "control.hpp"
#include "dataset.hpp"
#include "error.hpp"
#include "rbfn.hpp"
#include "scenario.hpp"
#include "sim.hpp"
#include "train.hpp"

struct dlo_sim {
  dlo::RodSimulator impl;
};

struct dlo_net {
  dlo::RbfNetwork impl;
};

namespace {

thread_local std::string g_last_error;

dlo_status map_code(dlo::ErrorCode c) {
  switch (c) {
    case dlo::ErrorCode::InvalidArgument: return DLO_ERR_INVALID_ARGUMENT;
    case dlo::ErrorCode::Io: return DLO_ERR_IO;
    case dlo::ErrorCode::VersionMismatch: return DLO_ERR_VERSION_MISMATCH;
    case dlo::ErrorCode::DimensionMismatch: return DLO_ERR_DIMENSION_MISMATCH;
    case dlo::ErrorCode::CorruptPayload: return DLO_ERR_CORRUPT_PAYLOAD;
    case dlo::ErrorCode::DivergedSimulation: return DLO_ERR_DIVERGED_SIMULATION;
    case dlo::ErrorCode::DivergedTraining: return DLO_ERR_DIVERGED_TRAINING;
    case dlo::ErrorCode::RunAborted: return DLO_ERR_RUN_ABORTED;
    case dlo::ErrorCode::BadConfig: return DLO_ERR_BAD_CONFIG;
  }
  return DLO_ERR_UNKNOWN;
}

template <typename F>
dlo_status wrap(F&& f) noexcept {
  try {
    f();
    return DLO_OK;
  } catch (const dlo::Error& e) {
    g_last_error = e.what();
    return map_code(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return DLO_ERR_UNKNOWN;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return DLO_ERR_UNKNOWN;
  } catch (...) {
    g_last_error = "unknown error";
    return DLO_ERR_UNKNOWN;
  }
}

dlo_status fail_arg(const char* msg) {
  g_last_error = msg;
  return DLO_ERR_INVALID_ARGUMENT;
}

dlo::SimConfig to_cpp(const dlo_sim_config& c) {
  dlo::SimConfig s;
  s.particle_count = c.particle_count;
  s.rod_length = c.rod_length;
  s.stretch_stiffness = c.stretch_stiffness;
  s.bend_stiffness = c.bend_stiffness;
  s.damping = c.damping;
  s.particle_mass = c.particle_mass;
  s.dt = c.dt;
  s.substeps = c.substeps;
  s.gravity = Eigen::Vector3d(c.gravity[0], c.gravity[1], c.gravity[2]);
  if (c.has_table) s.table_plane = c.table_z;
  s.feature_count = c.feature_count;
  s.settle_time = c.settle_time;
  return s;
}

}  // namespace

extern "C" {

const char* dlo_version(void) { return "0.1.0"; }

const char* dlo_status_name(dlo_status s) {
  switch (s) {
    case DLO_OK: return "ok";
    case DLO_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case DLO_ERR_IO: return "io";
    case DLO_ERR_VERSION_MISMATCH: return "version_mismatch";
    case DLO_ERR_DIMENSION_MISMATCH: return "dimension_mismatch";
    case DLO_ERR_CORRUPT_PAYLOAD: return "corrupt_payload";
    case DLO_ERR_DIVERGED_SIMULATION: return "diverged_simulation";
    case DLO_ERR_DIVERGED_TRAINING: return "diverged_training";
    case DLO_ERR_RUN_ABORTED: return "run_aborted";
    case DLO_ERR_BAD_CONFIG: return "bad_config";
    case DLO_ERR_UNKNOWN: return "unknown";
  }
  return "unknown";
}

const char* dlo_last_error(void) { return g_last_error.c_str(); }

void dlo_sim_config_init(dlo_sim_config* cfg) {
  if (!cfg) return;
  dlo::SimConfig d;
  cfg->particle_count = d.particle_count;
  cfg->rod_length = d.rod_length;
  cfg->stretch_stiffness = d.stretch_stiffness;
  cfg->bend_stiffness = d.bend_stiffness;
  cfg->damping = d.damping;
  cfg->particle_mass = d.particle_mass;
  cfg->dt = d.dt;
  cfg->substeps = d.substeps;
  for (int i = 0; i < 3; ++i) cfg->gravity[i] = d.gravity[i];
  cfg->has_table = 0;
  cfg->table_z = 0.0;
  cfg->feature_count = d.feature_count;
  cfg->settle_time = d.settle_time;
}

dlo_status dlo_sim_create(const dlo_sim_config* cfg, const double anchor[3],
                          dlo_sim** out) {
  if (!cfg || !out) return fail_arg("null argument");
  *out = nullptr;
  return wrap([&] {
    Eigen::Vector3d a = Eigen::Vector3d::Zero();
    if (anchor) a = Eigen::Vector3d(anchor[0], anchor[1], anchor[2]);
    *out = new dlo_sim{dlo::RodSimulator(to_cpp(*cfg), a)};
  });
}

void dlo_sim_destroy(dlo_sim* sim) { delete sim; }

dlo_status dlo_sim_step(dlo_sim* sim, const double gripper_velocity[3]) {
  if (!sim || !gripper_velocity) return fail_arg("null argument");
  return wrap([&] {
    sim->impl.step(Eigen::Vector3d(gripper_velocity[0], gripper_velocity[1],
                                   gripper_velocity[2]));
  });
}

dlo_status dlo_sim_settle(dlo_sim* sim, double seconds) {
  if (!sim) return fail_arg("null argument");
  return wrap([&] { sim->impl.settle(seconds); });
}

dlo_status dlo_sim_feature_count(const dlo_sim* sim, int* out) {
  if (!sim || !out) return fail_arg("null argument");
  *out = sim->impl.config().feature_count;
  return DLO_OK;
}

dlo_status dlo_sim_features(const dlo_sim* sim, double* out, size_t cap) {
  if (!sim || !out) return fail_arg("null argument");
  return wrap([&] {
    Eigen::VectorXd phi = sim->impl.features();
    if (cap < size_t(phi.size()))
      dlo::raise(dlo::ErrorCode::InvalidArgument, "output buffer too small");
    std::memcpy(out, phi.data(), sizeof(double) * phi.size());
  });
}

dlo_status dlo_sim_gripper_position(const dlo_sim* sim, double out[3]) {
  if (!sim || !out) return fail_arg("null argument");
  Eigen::Vector3d p = sim->impl.gripper_position();
  for (int i = 0; i < 3; ++i) out[i] = p[i];
  return DLO_OK;
}

dlo_status dlo_sim_nail_feature(dlo_sim* sim, int feature) {
  if (!sim) return fail_arg("null argument");
  return wrap([&] { sim->impl.nail_feature(feature); });
}

dlo_status dlo_sim_probe_jacobian(const dlo_sim* sim, int feature, double h,
                                  double out[9]) {
  if (!sim || !out) return fail_arg("null argument");
  return wrap([&] {
    Eigen::Matrix3d J = sim->impl.probe_jacobian(feature, h);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) out[i * 3 + j] = J(j, i);
  });
}

dlo_status dlo_net_load(const char* path, dlo_net** out) {
  if (!path || !out) return fail_arg("null argument");
  *out = nullptr;
  return wrap([&] { *out = new dlo_net{dlo::RbfNetwork::load(path)}; });
}

dlo_status dlo_net_save(const dlo_net* net, const char* path) {
  if (!net || !path) return fail_arg("null argument");
  return wrap([&] { net->impl.save(path); });
}

void dlo_net_destroy(dlo_net* net) { delete net; }

dlo_status dlo_net_dims(const dlo_net* net, int* q, int* l, int* n, int* m) {
  if (!net) return fail_arg("null argument");
  if (q) *q = net->impl.q();
  if (l) *l = net->impl.l();
  if (n) *n = net->impl.n();
  if (m) *m = net->impl.m();
  return DLO_OK;
}

dlo_status dlo_net_activations(const dlo_net* net, const double* phi,
                               size_t phi_len, double* out, size_t cap) {
  if (!net || !phi || !out) return fail_arg("null argument");
  return wrap([&] {
    if (phi_len != size_t(net->impl.input_dim()))
      dlo::raise(dlo::ErrorCode::DimensionMismatch, "phi has wrong dimension");
    if (cap < size_t(net->impl.q()))
      dlo::raise(dlo::ErrorCode::InvalidArgument, "output buffer too small");
    Eigen::VectorXd theta = net->impl.activations(
        Eigen::Map<const Eigen::VectorXd>(phi, phi_len));
    std::memcpy(out, theta.data(), sizeof(double) * theta.size());
  });
}

dlo_status dlo_net_estimate_jacobian(const dlo_net* net, const double* phi,
                                     size_t phi_len, int block, double* out,
                                     size_t cap) {
  if (!net || !phi || !out) return fail_arg("null argument");
  return wrap([&] {
    if (phi_len != size_t(net->impl.input_dim()))
      dlo::raise(dlo::ErrorCode::DimensionMismatch, "phi has wrong dimension");
    const size_t need = size_t(net->impl.l()) * net->impl.n();
    if (cap < need)
      dlo::raise(dlo::ErrorCode::InvalidArgument, "output buffer too small");
    Eigen::MatrixXd J = net->impl.estimate_jacobian(
        Eigen::Map<const Eigen::VectorXd>(phi, phi_len), block);
    std::memcpy(out, J.data(), sizeof(double) * need);  // column-major
  });
}

void dlo_collect_config_init(dlo_collect_config* cfg) {
  if (!cfg) return;
  dlo::CollectConfig d;
  cfg->duration_s = d.duration_s;
  cfg->seed = d.seed;
  cfg->control_hz = d.control_hz;
  for (int i = 0; i < 3; ++i) cfg->home[i] = d.home[i];
  cfg->workspace_edge = d.workspace_edge;
  cfg->avg_speed = d.avg_speed;
  cfg->window_s = d.window_s;
  cfg->home_every = d.home_every;
  cfg->dwell_s = d.dwell_s;
  cfg->prep_glide_s = d.prep_glide_s;
  cfg->prep_settle_s = d.prep_settle_s;
  cfg->has_table = d.table_z.has_value() ? 1 : 0;
  cfg->table_z = d.table_z.value_or(0.0);
  dlo_sim_config_init(&cfg->sim);
}

dlo_status dlo_collect(const dlo_collect_config* cfg, const char* csv_path) {
  if (!cfg || !csv_path) return fail_arg("null argument");
  return wrap([&] {
    dlo::CollectConfig c;
    c.duration_s = cfg->duration_s;
    c.seed = cfg->seed;
    c.control_hz = cfg->control_hz;
    c.home = Eigen::Vector3d(cfg->home[0], cfg->home[1], cfg->home[2]);
    c.workspace_edge = cfg->workspace_edge;
    c.avg_speed = cfg->avg_speed;
    c.window_s = cfg->window_s;
    c.home_every = cfg->home_every;
    c.dwell_s = cfg->dwell_s;
    c.prep_glide_s = cfg->prep_glide_s;
    c.prep_settle_s = cfg->prep_settle_s;
    if (cfg->has_table)
      c.table_z = cfg->table_z;
    else
      c.table_z.reset();
    c.sim = to_cpp(cfg->sim);
    dlo::collect(c).save(csv_path);
  });
}

void dlo_train_config_init(dlo_train_config* cfg) {
  if (!cfg) return;
  dlo::TrainConfig d;
  cfg->q = d.q;
  cfg->beta = d.beta;
  cfg->epochs = d.epochs;
  cfg->batch = d.batch;
  cfg->alpha = d.alpha;
  cfg->seed = d.seed;
  cfg->sigma_min = d.sigma_min;
  cfg->kmeans_iters = d.kmeans_iters;
  cfg->train_centers = d.train_centers ? 1 : 0;
  cfg->train_widths = d.train_widths ? 1 : 0;
  cfg->target_feature = d.target_feature;
}

dlo_status dlo_train(const char* dataset_csv, const dlo_train_config* cfg,
                     const char* model_out, dlo_train_stats* stats) {
  if (!dataset_csv || !cfg || !model_out) return fail_arg("null argument");
  return wrap([&] {
    dlo::TrainConfig c;
    c.q = cfg->q;
    c.beta = cfg->beta;
    c.epochs = cfg->epochs;
    c.batch = cfg->batch;
    c.alpha = cfg->alpha;
    c.seed = cfg->seed;
    c.sigma_min = cfg->sigma_min;
    c.kmeans_iters = cfg->kmeans_iters;
    c.train_centers = cfg->train_centers != 0;
    c.train_widths = cfg->train_widths != 0;
    c.target_feature = cfg->target_feature;
    dlo::Dataset ds = dlo::Dataset::load(dataset_csv);
    dlo::TrainResult res;
    dlo::RbfNetwork net = dlo::train(ds, c, &res);
    net.save(model_out);
    if (stats) {
      stats->final_loss = res.final_loss;
      stats->kmeans_objective = res.kmeans_objective;
      stats->elapsed_s = res.elapsed_s;
    }
  });
}

dlo_status dlo_evaluate_loss(const char* model_path, const char* dataset_csv,
                             double beta, int target_feature, double* out) {
  if (!model_path || !dataset_csv || !out) return fail_arg("null argument");
  return wrap([&] {
    dlo::RbfNetwork net = dlo::RbfNetwork::load(model_path);
    dlo::Dataset ds = dlo::Dataset::load(dataset_csv);
    *out = dlo::evaluate_loss(net, ds, beta, target_feature);
  });
}

dlo_status dlo_gradcheck(int configs, uint64_t seed,
                         dlo_gradcheck_report* out) {
  if (!out) return fail_arg("null argument");
  return wrap([&] {
    dlo::GradcheckReport rep = dlo::run_gradcheck(configs, seed);
    out->configs = rep.configs;
    out->params_checked = rep.params_checked;
    out->max_rel_err = rep.max_rel_err;
    out->elapsed_s = rep.elapsed_s;
  });
}

dlo_status dlo_run_scenario(const char* scenario, const char* model_path,
                            const char* tick_csv, int adapt_override,
                            int has_seed, uint64_t seed,
                            dlo_scenario_outcome* out) {
  if (!scenario || !model_path || !out) return fail_arg("null argument");
  return wrap([&] {
    const std::string name = scenario;
    dlo::Scenario sc;
    if (name == "task1" || name == "task2" || name == "task3")
      sc = dlo::builtin_scenario(name);
    else
      sc = dlo::Scenario::load(name);
    if (adapt_override >= 0) sc.adapt = adapt_override != 0;
    if (has_seed) sc.seed = seed;
    dlo::RbfNetwork net = dlo::RbfNetwork::load(model_path);
    dlo::ScenarioOutcome oc =
        dlo::run_scenario(sc, net, tick_csv ? tick_csv : "");
    out->success = oc.success ? 1 : 0;
    out->elapsed_s = oc.elapsed_s;
    out->stages = int(oc.stages.size());
    int reached = 0;
    for (const auto& st : oc.stages) reached += st.reached ? 1 : 0;
    out->stages_reached = reached;
    out->final_err = oc.stages.empty() ? 0.0 : oc.stages.back().final_err;
    const int keep = std::min(out->stages, DLO_MAX_STAGES);
    for (int i = 0; i < keep; ++i) {
      const dlo::StageOutcome& st = oc.stages[size_t(i)];
      out->stage[i].feature = st.feature;
      out->stage[i].reached = st.reached ? 1 : 0;
      out->stage[i].time_to_reach = st.time_to_reach;
      out->stage[i].final_err = st.final_err;
      out->stage[i].nailed = st.nailed ? 1 : 0;
    }
  });
}

}  // extern "C"
