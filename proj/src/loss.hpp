#pragma once

#include <cmath>

#include <Eigen/Core>

namespace dlo {

// Smooth-L1: quadratic inside the knee |e| < beta, linear outside.
// Continuous in value and gradient at the knee.
inline double smooth_l1(double e, double beta) {
  const double a = std::abs(e);
  return a < beta ? 0.5 * e * e / beta : a - 0.5 * beta;
}

inline double smooth_l1_grad(double e, double beta) {
  if (std::abs(e) < beta) return e / beta;
  return e > 0.0 ? 1.0 : (e < 0.0 ? -1.0 : 0.0);
}

// Sum of per-component losses; gradient written to *grad if non-null.
inline double smooth_l1(const Eigen::VectorXd& e, double beta,
                        Eigen::VectorXd* grad = nullptr) {
  double total = 0.0;
  if (grad) grad->resize(e.size());
  for (Eigen::Index j = 0; j < e.size(); ++j) {
    total += smooth_l1(e[j], beta);
    if (grad) (*grad)[j] = smooth_l1_grad(e[j], beta);
  }
  return total;
}

}  // namespace dlo
