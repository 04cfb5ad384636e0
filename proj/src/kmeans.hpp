#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace dlo {

struct KmeansResult {
  Eigen::MatrixXd centers;  // d x k, one column per cluster
  Eigen::VectorXd widths;   // k, mean member distance to center, floored
  std::vector<double> objective;  // within-cluster sum of squares per Lloyd iteration
};

// k-means++ seeding followed by Lloyd iterations. `points` is d x N.
// An emptied cluster is re-seeded from the point farthest from its center.
KmeansResult kmeans_init(const Eigen::MatrixXd& points, int k, uint64_t seed,
                         double sigma_min, int max_iters = 100,
                         double tol = 1e-10);

}  // namespace dlo
