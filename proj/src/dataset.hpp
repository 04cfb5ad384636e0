#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace dlo {

struct TrainingSample {
  double t = 0.0;
  Eigen::VectorXd phi;   // stacked feature positions, l*m
  Eigen::VectorXd rdot;  // end-effector velocity, n
  Eigen::VectorXd xdot;  // stacked feature velocities, l*m
};

// Recorded exploration data plus free-form run metadata. On disk a dataset is
// a CSV (header t,phi_*,rdot_*,xdot_i_j; %.17g values) with a key=value
// sidecar at <path>.meta.
struct Dataset {
  int l = 3;
  int n = 3;
  int m = 10;
  std::vector<TrainingSample> samples;
  std::map<std::string, std::string> meta;

  int input_dim() const { return l * m; }
  size_t size() const { return samples.size(); }

  // Column-per-sample views used by the trainer.
  Eigen::MatrixXd phi_matrix() const;
  Eigen::MatrixXd rdot_matrix() const;
  Eigen::MatrixXd xdot_matrix() const;

  void save(const std::string& path) const;
  static Dataset load(const std::string& path);
};

}  // namespace dlo
