/* C interface to the DLO shape-servo toolkit: rod simulation, Jacobian
 * model training, and task execution behind opaque handles. Every function
 * returns a dlo_status; on failure dlo_last_error() describes the problem
 * (thread-local, valid until the next failing call on that thread). */
#ifndef DLO_DLO_H
#define DLO_DLO_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  DLO_OK = 0,
  DLO_ERR_INVALID_ARGUMENT = 1,
  DLO_ERR_IO = 2,
  DLO_ERR_VERSION_MISMATCH = 3,
  DLO_ERR_DIMENSION_MISMATCH = 4,
  DLO_ERR_CORRUPT_PAYLOAD = 5,
  DLO_ERR_DIVERGED_SIMULATION = 6,
  DLO_ERR_DIVERGED_TRAINING = 7,
  DLO_ERR_RUN_ABORTED = 8,
  DLO_ERR_BAD_CONFIG = 9,
  DLO_ERR_UNKNOWN = 127
} dlo_status;

const char* dlo_version(void);
const char* dlo_status_name(dlo_status s);
const char* dlo_last_error(void);

/* ---- simulator ---- */

typedef struct dlo_sim dlo_sim;

typedef struct {
  int particle_count;
  double rod_length;
  double stretch_stiffness;
  double bend_stiffness;
  double damping;
  double particle_mass;
  double dt;
  int substeps;
  double gravity[3];
  int has_table;
  double table_z;
  int feature_count;
  double settle_time;
} dlo_sim_config;

void dlo_sim_config_init(dlo_sim_config* cfg);

dlo_status dlo_sim_create(const dlo_sim_config* cfg, const double anchor[3],
                          dlo_sim** out);
void dlo_sim_destroy(dlo_sim* sim);
dlo_status dlo_sim_step(dlo_sim* sim, const double gripper_velocity[3]);
dlo_status dlo_sim_settle(dlo_sim* sim, double seconds);
dlo_status dlo_sim_feature_count(const dlo_sim* sim, int* out);
/* out must hold 3*feature_count doubles (x,y,z per feature). */
dlo_status dlo_sim_features(const dlo_sim* sim, double* out, size_t cap);
dlo_status dlo_sim_gripper_position(const dlo_sim* sim, double out[3]);
dlo_status dlo_sim_nail_feature(dlo_sim* sim, int feature);
/* Central-difference feature/gripper Jacobian, column-major 3x3 in out. */
dlo_status dlo_sim_probe_jacobian(const dlo_sim* sim, int feature, double h,
                                  double out[9]);

/* ---- Jacobian model ---- */

typedef struct dlo_net dlo_net;

dlo_status dlo_net_load(const char* path, dlo_net** out);
dlo_status dlo_net_save(const dlo_net* net, const char* path);
void dlo_net_destroy(dlo_net* net);
dlo_status dlo_net_dims(const dlo_net* net, int* q, int* l, int* n, int* m);
/* phi has l*m entries; out q entries. */
dlo_status dlo_net_activations(const dlo_net* net, const double* phi,
                               size_t phi_len, double* out, size_t cap);
/* Jacobian head `block` (0..m-1 features, m the target head) at phi,
 * column-major l x n in out. */
dlo_status dlo_net_estimate_jacobian(const dlo_net* net, const double* phi,
                                     size_t phi_len, int block, double* out,
                                     size_t cap);

/* ---- offline pipeline ---- */

typedef struct {
  double duration_s;
  uint64_t seed;
  double control_hz;
  double home[3];
  double workspace_edge;
  double avg_speed;
  double window_s;
  int home_every;
  double dwell_s;
  double prep_glide_s;
  double prep_settle_s;
  /* When has_table is nonzero the rod rests on a plane at table_z,
   * overriding sim.has_table/sim.table_z. */
  int has_table;
  double table_z;
  dlo_sim_config sim;
} dlo_collect_config;

void dlo_collect_config_init(dlo_collect_config* cfg);
/* Runs the exploration and writes <csv_path> plus <csv_path>.meta. */
dlo_status dlo_collect(const dlo_collect_config* cfg, const char* csv_path);

typedef struct {
  int q;
  double beta;
  int epochs;
  int batch;
  double alpha;
  uint64_t seed;
  double sigma_min;
  int kmeans_iters;
  int train_centers;
  int train_widths;
  int target_feature;
} dlo_train_config;

void dlo_train_config_init(dlo_train_config* cfg);

typedef struct {
  double final_loss;
  double kmeans_objective;
  double elapsed_s;
} dlo_train_stats;

dlo_status dlo_train(const char* dataset_csv, const dlo_train_config* cfg,
                     const char* model_out, dlo_train_stats* stats);
/* Mean smooth-L1 objective of a saved model over a dataset. */
dlo_status dlo_evaluate_loss(const char* model_path, const char* dataset_csv,
                             double beta, int target_feature, double* out);

typedef struct {
  int configs;
  long params_checked;
  double max_rel_err;
  double elapsed_s;
} dlo_gradcheck_report;

dlo_status dlo_gradcheck(int configs, uint64_t seed,
                         dlo_gradcheck_report* out);

/* ---- task execution ---- */

typedef struct {
  int feature;
  int reached;
  double time_to_reach; /* seconds into the stage; +inf if never reached */
  double final_err;
  int nailed;
} dlo_stage_outcome;

#define DLO_MAX_STAGES 16

typedef struct {
  int success;
  double elapsed_s;
  int stages;
  int stages_reached;
  double final_err; /* last executed stage */
  /* first min(stages, DLO_MAX_STAGES) entries are valid */
  dlo_stage_outcome stage[DLO_MAX_STAGES];
} dlo_scenario_outcome;

/* `scenario` is a built-in name (task1, task2, task3) or a scenario file
 * path. tick_csv may be NULL. adapt_override: -1 keep, 0 off, 1 on.
 * If has_seed is nonzero, `seed` replaces the scenario seed. */
dlo_status dlo_run_scenario(const char* scenario, const char* model_path,
                            const char* tick_csv, int adapt_override,
                            int has_seed, uint64_t seed,
                            dlo_scenario_outcome* out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* DLO_DLO_H */
