#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "dataset.hpp"
#include "rbfn.hpp"

namespace dlo {

struct TrainConfig {
  int q = 256;               // RBF units
  double beta = 1.0;         // smooth-L1 transition point
  int epochs = 200;
  int batch = 256;
  double alpha = 1e-3;       // Adam step size
  uint64_t seed = 7;
  double sigma_min = 1e-3;   // width floor, normalized input units
  double width_scale = 1.0;  // multiplies the k-means widths before training
  int kmeans_iters = 100;
  bool train_centers = true;
  bool train_widths = true;
  int target_feature = 4;    // feature the target head is trained against

  void validate() const;
};

struct TrainResult {
  std::vector<double> loss_history;  // per-epoch mean batch loss
  double final_loss = 0.0;
  double kmeans_objective = 0.0;     // final within-cluster sum of squares
  double elapsed_s = 0.0;
};

// Loss and parameter gradients of the Jacobian model over a batch of columns.
// The loss is the batch mean over samples of the summed smooth-L1 error of
// every feature head plus the target head (matched against feature
// `target_feature`).
struct GradEval {
  double loss = 0.0;
  Eigen::MatrixXd dW;
  Eigen::MatrixXd dcenters;
  Eigen::VectorXd dsigma;
};

GradEval loss_and_gradients(const RbfNetwork& net, const Eigen::MatrixXd& Phi,
                            const Eigen::MatrixXd& Rdot,
                            const Eigen::MatrixXd& Xdot, double beta,
                            int target_feature, bool want_grads = true);

// Mean per-sample loss of a trained model over a dataset (same objective the
// trainer minimizes).
double evaluate_loss(const RbfNetwork& net, const Dataset& ds, double beta,
                     int target_feature = 4);

// k-means initialization + Adam on the smooth-L1 objective. Inputs are
// shifted per channel to zero mean and scaled by one global factor while
// training; the returned network has that normalization folded into its
// centers and widths and operates on raw feature vectors.
RbfNetwork train(const Dataset& ds, const TrainConfig& cfg,
                 TrainResult* result = nullptr);

// Same k-means placement and normalization fold, but weights left at zero:
// the pre-training baseline.
RbfNetwork untrained_baseline(const Dataset& ds, const TrainConfig& cfg);

struct GradcheckReport {
  int configs = 0;
  long params_checked = 0;
  double max_rel_err = 0.0;
  double elapsed_s = 0.0;
};

// Central-difference verification of loss_and_gradients on random small
// networks (q <= 16, inputs <= 12 wide). Relative error uses
// |a - f| / max(|a|, |f|, 1).
GradcheckReport run_gradcheck(int configs, uint64_t seed);

}  // namespace dlo
