#include "synthetic.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "control.hpp"
#include "error.hpp"
#include "rbfn.hpp"
#include "rng.hpp"

namespace dlo {

void SyntheticConfig::validate() const {
  if (q < 2) raise(ErrorCode::BadConfig, "q must be >= 2");
  if (m < 1) raise(ErrorCode::BadConfig, "m must be >= 1");
  if (target_feature < 0 || target_feature >= m)
    raise(ErrorCode::BadConfig, "target_feature out of range");
  if (!(duration_s > 0.0)) raise(ErrorCode::BadConfig, "duration_s must be > 0");
  if (!(dt > 0.0)) raise(ErrorCode::BadConfig, "dt must be > 0");
  if (!(kp > 0.0)) raise(ErrorCode::BadConfig, "kp must be > 0");
  if (lambda < 0.0 || gain_L <= 0.0)
    raise(ErrorCode::BadConfig, "bad adaptation gains");
}

SyntheticResult run_synthetic(const SyntheticConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const int l = 3, n = 3;
  const int D = l * cfg.m;
  const int tf = cfg.target_feature;

  // State and unit placement around it.
  Eigen::VectorXd nu(D);
  for (int i = 0; i < D; ++i) nu[i] = 0.1 * rng.normal();

  RbfNetwork truth(cfg.q, l, n, cfg.m);
  for (int c = 0; c < cfg.q; ++c) {
    for (int i = 0; i < D; ++i) truth.centers()(i, c) = nu[i] + 0.1 * rng.normal();
    truth.sigma()[c] = rng.uniform(0.9, 1.3);
  }

  // True weights put every feature Jacobian near the identity so the plant
  // stays well conditioned; w0 makes the diagonal come out at 1 at the start.
  const double theta_sum = truth.activations(nu).sum();
  const double w0 = 1.0 / theta_sum;
  for (int k = 0; k <= cfg.m; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < l; ++j)
        for (int c = 0; c < cfg.q; ++c)
          truth.weights()(k * l * n + i * l + j, c) =
              (i == j ? w0 : 0.0) + cfg.weight_noise * w0 * rng.normal();

  RbfNetwork est = truth;
  const int row0 = tf * l * n;
  for (int r = 0; r < l * n; ++r)
    for (int c = 0; c < cfg.q; ++c)
      est.weights()(row0 + r, c) += cfg.perturb * w0 * rng.normal();

  Eigen::Vector3d dir(rng.normal(), rng.normal(), rng.normal());
  dir.normalize();
  const Eigen::Vector3d y_d = nu.segment<3>(3 * tf) + cfg.target_offset * dir;

  const std::vector<int> target{tf};
  const int nticks = int(std::lround(cfg.duration_s / cfg.dt));
  SyntheticResult res;
  res.ticks.reserve(nticks);

  double prev_V = std::numeric_limits<double>::infinity();
  for (int k = 0; k < nticks; ++k) {
    const double t = k * cfg.dt;
    const Eigen::Vector3d dy = nu.segment<3>(3 * tf) - y_d;
    const Eigen::VectorXd theta = est.activations(nu);

    const Eigen::MatrixXd Jhat = est.stacked_jacobian(nu, target);
    const Eigen::MatrixXd Jtrue = truth.stacked_jacobian(nu, target);
    const Eigen::VectorXd u = truncated_pinv(Jhat, 1e-9) * (-cfg.kp * dy);
    const Eigen::VectorXd ew = (Jtrue - Jhat) * u;  // exact: ydot - Jhat u

    const Eigen::MatrixXd dW = est.weights().middleRows(row0, l * n) -
                               truth.weights().middleRows(row0, l * n);
    const double V =
        0.5 * dy.squaredNorm() + dW.squaredNorm() / (2.0 * cfg.gain_L);
    if (k > 0 && V - prev_V > 1e-15 * std::max(1.0, prev_V)) ++res.v_increases;
    prev_V = V;

    SyntheticTick tick;
    tick.t = t;
    tick.V = V;
    tick.dy = dy.norm();
    tick.ew = ew.norm();
    res.ticks.push_back(tick);

    // Adapt, then advance the state with the command held for one tick.
    const Eigen::VectorXd b = dy + cfg.lambda * ew;
    for (int i = 0; i < n; ++i) {
      const double ci = cfg.dt * cfg.gain_L * u[i];
      if (ci == 0.0) continue;
      for (int j = 0; j < l; ++j)
        est.weights().row(row0 + i * l + j) += (ci * b[j]) * theta.transpose();
    }

    auto f = [&](const Eigen::VectorXd& s) {
      return Eigen::VectorXd(truth.full_jacobian(s) * u);
    };
    const Eigen::VectorXd k1 = f(nu);
    const Eigen::VectorXd k2 = f(nu + 0.5 * cfg.dt * k1);
    const Eigen::VectorXd k3 = f(nu + 0.5 * cfg.dt * k2);
    const Eigen::VectorXd k4 = f(nu + cfg.dt * k3);
    nu += (cfg.dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!nu.allFinite())
      raise(ErrorCode::DivergedSimulation, "synthetic state went non-finite");
  }

  res.final_err = (nu.segment<3>(3 * tf) - y_d).norm();
  res.frac_nonincreasing =
      res.ticks.size() < 2
          ? 1.0
          : 1.0 - double(res.v_increases) / double(res.ticks.size() - 1);
  return res;
}

}  // namespace dlo
