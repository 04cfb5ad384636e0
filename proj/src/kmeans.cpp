#include "kmeans.hpp"

#include <limits>

#include "error.hpp"
#include "rng.hpp"

namespace dlo {

namespace {

// index of nearest center and the squared distance to it
std::pair<int, double> nearest(const Eigen::MatrixXd& centers,
                               const Eigen::VectorXd& p) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int c = 0; c < centers.cols(); ++c) {
    const double d = (centers.col(c) - p).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return {best, best_d};
}

}  // namespace

KmeansResult kmeans_init(const Eigen::MatrixXd& points, int k, uint64_t seed,
                         double sigma_min, int max_iters, double tol) {
  const Eigen::Index n = points.cols();
  const Eigen::Index d = points.rows();
  if (k < 1) raise(ErrorCode::InvalidArgument, "kmeans: k must be >= 1");
  if (n < k)
    raise(ErrorCode::InvalidArgument, "kmeans: fewer points than clusters");

  Rng rng(seed);
  Eigen::MatrixXd centers(d, k);

  // k-means++ seeding
  centers.col(0) = points.col(rng.index(n));
  Eigen::VectorXd dist2(n);
  for (Eigen::Index i = 0; i < n; ++i)
    dist2[i] = (points.col(i) - centers.col(0)).squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = dist2.sum();
    Eigen::Index pick;
    if (total <= 0.0) {
      pick = rng.index(n);  // all remaining points coincide with a center
    } else {
      double r = rng.uniform() * total;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        r -= dist2[i];
        if (r <= 0.0) {
          pick = i;
          break;
        }
      }
    }
    centers.col(c) = points.col(pick);
    for (Eigen::Index i = 0; i < n; ++i)
      dist2[i] = std::min(dist2[i], (points.col(i) - centers.col(c)).squaredNorm());
  }

  // Lloyd iterations
  std::vector<int> assign(n, 0);
  KmeansResult result;
  for (int iter = 0; iter < max_iters; ++iter) {
    double wcss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      auto [c, dd] = nearest(centers, points.col(i));
      assign[i] = c;
      wcss += dd;
    }
    result.objective.push_back(wcss);

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(d, k);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.col(assign[i]) += points.col(i);
      counts[assign[i]] += 1.0;
    }
    double shift = 0.0;
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0.0) {
        const Eigen::VectorXd mean = sums.col(c) / counts[c];
        shift = std::max(shift, (mean - centers.col(c)).norm());
        centers.col(c) = mean;
      } else {
        // re-seed from the point farthest from its assigned center
        Eigen::Index far_i = 0;
        double far_d = -1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          const double dd = (points.col(i) - centers.col(assign[i])).squaredNorm();
          if (dd > far_d) {
            far_d = dd;
            far_i = i;
          }
        }
        centers.col(c) = points.col(far_i);
        shift = std::numeric_limits<double>::infinity();
      }
    }
    if (shift < tol) break;
  }

  // widths: mean member distance per cluster
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd cnt = Eigen::VectorXd::Zero(k);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto [c, dd] = nearest(centers, points.col(i));
    acc[c] += std::sqrt(dd);
    cnt[c] += 1.0;
  }
  result.widths.resize(k);
  for (int c = 0; c < k; ++c) {
    const double mean_dist = cnt[c] > 0.0 ? acc[c] / cnt[c] : 0.0;
    result.widths[c] = std::max(mean_dist, sigma_min);
  }
  result.centers = std::move(centers);
  return result;
}

}  // namespace dlo
