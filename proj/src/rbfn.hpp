#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace dlo {

// Radial-basis-function model of the deformation Jacobian.
//
// For input phi (stacked feature positions, dimension l*m) the network emits
// one l-by-n Jacobian per feature plus a separate target head, all driven by
// shared Gaussian units:
//
//   theta_i(phi) = exp(-|phi - mu_i|^2 / sigma_i^2)
//   vec(J_k)     = W_k theta(phi)
//
// vec() stacks columns, so row k*l*n + i*l + j of W holds the weight vector
// for entry (j, i) of feature k's Jacobian. Blocks 0..m-1 belong to the
// features in order; block m is the target head.
class RbfNetwork {
 public:
  RbfNetwork(int q, int l, int n, int m);

  int q() const { return q_; }
  int l() const { return l_; }
  int n() const { return n_; }
  int m() const { return m_; }
  int input_dim() const { return l_ * m_; }
  int block_rows() const { return l_ * n_; }
  int rows() const { return (m_ + 1) * l_ * n_; }
  static constexpr int target_block_index(int m) { return m; }

  Eigen::VectorXd activations(const Eigen::VectorXd& phi) const;

  // Jacobian head `block` evaluated at phi; blocks 0..m-1 are the features,
  // block m the target head.
  Eigen::MatrixXd estimate_jacobian(const Eigen::VectorXd& phi, int block) const;

  // Feature blocks stacked vertically in the order given: (l*|blocks|) x n.
  Eigen::MatrixXd stacked_jacobian(const Eigen::VectorXd& phi,
                                   const std::vector<int>& blocks) const;

  // All m feature blocks stacked: (l*m) x n.
  Eigen::MatrixXd full_jacobian(const Eigen::VectorXd& phi) const;

  // Predicted feature velocities for action rdot: full_jacobian(phi) * rdot.
  Eigen::VectorXd predict_velocities(const Eigen::VectorXd& phi,
                                     const Eigen::VectorXd& rdot) const;

  // Storage: centers are columns of a (l*m) x q matrix.
  const Eigen::MatrixXd& centers() const { return centers_; }
  Eigen::MatrixXd& centers() { return centers_; }
  const Eigen::VectorXd& sigma() const { return sigma_; }
  Eigen::VectorXd& sigma() { return sigma_; }
  const Eigen::MatrixXd& weights() const { return W_; }
  Eigen::MatrixXd& weights() { return W_; }

  void save(const std::string& path) const;
  static RbfNetwork load(const std::string& path);

 private:
  int q_, l_, n_, m_;
  Eigen::MatrixXd centers_;  // input_dim x q
  Eigen::VectorXd sigma_;    // q
  Eigen::MatrixXd W_;        // rows() x q
};

}  // namespace dlo
