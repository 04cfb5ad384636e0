#include "control.hpp"

#include <cmath>
#include <deque>

#include <Eigen/SVD>

#include "error.hpp"

namespace dlo {

Eigen::MatrixXd truncated_pinv(const Eigen::MatrixXd& J, double sigma_trunc,
                               int* rank_out) {
  if (!(sigma_trunc > 0.0))
    raise(ErrorCode::InvalidArgument, "sigma_trunc must be > 0");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      J, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd inv = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < inv.size(); ++i) {
    if (inv[i] > sigma_trunc) {
      inv[i] = 1.0 / inv[i];
      ++rank;
    } else {
      inv[i] = 0.0;
    }
  }
  if (rank_out) *rank_out = rank;
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

TargetFn fixed_target(const Eigen::VectorXd& y_d) {
  return [y_d](double, Eigen::VectorXd& out, Eigen::VectorXd& out_dot) {
    out = y_d;
    out_dot = Eigen::VectorXd::Zero(y_d.size());
  };
}

void LoopConfig::validate(const SimConfig& sim) const {
  if (target_features.empty())
    raise(ErrorCode::BadConfig, "no target features");
  for (int f : target_features)
    if (f < 0 || f >= sim.feature_count)
      raise(ErrorCode::BadConfig, "target feature out of range");
  if (!(duration_s > 0.0)) raise(ErrorCode::BadConfig, "duration_s must be > 0");
  if (!(kp > 0.0)) raise(ErrorCode::BadConfig, "kp must be > 0");
  if (lambda < 0.0) raise(ErrorCode::BadConfig, "lambda must be >= 0");
  if (gain_L < 0.0) raise(ErrorCode::BadConfig, "gain_L must be >= 0");
  if (!(sigma_trunc > 0.0))
    raise(ErrorCode::BadConfig, "sigma_trunc must be > 0");
  if (!(u_max > 0.0)) raise(ErrorCode::BadConfig, "u_max must be > 0");
  if (vel_window < 1) raise(ErrorCode::BadConfig, "vel_window must be >= 1");
  if (!(reach_tol > 0.0)) raise(ErrorCode::BadConfig, "reach_tol must be > 0");
  if (reach_hold_s < 0.0)
    raise(ErrorCode::BadConfig, "reach_hold_s must be >= 0");
  if (!(diverge_dy > 0.0)) raise(ErrorCode::BadConfig, "diverge_dy must be > 0");
  if (eq16_tol < 0.0) raise(ErrorCode::BadConfig, "eq16_tol must be >= 0");
  const double ratio = 1.0 / (control_hz * sim.dt);
  if (std::abs(ratio - std::lround(ratio)) > 1e-9 || std::lround(ratio) < 1)
    raise(ErrorCode::BadConfig,
          "control period must be a whole number of simulator steps");
}

namespace {

// Target-feature Jacobian stack from precomputed activations.
Eigen::MatrixXd stacked_from_theta(const RbfNetwork& net,
                                   const Eigen::VectorXd& theta,
                                   const std::vector<int>& feats) {
  const int l = net.l(), n = net.n(), br = net.block_rows();
  Eigen::MatrixXd J(l * feats.size(), n);
  for (size_t a = 0; a < feats.size(); ++a) {
    Eigen::VectorXd g = net.weights().middleRows(feats[a] * br, br) * theta;
    J.middleRows(a * l, l) = Eigen::Map<const Eigen::MatrixXd>(g.data(), l, n);
  }
  return J;
}

}  // namespace

LoopResult run_closed_loop(RodSimulator& sim, RbfNetwork& net,
                           const TargetFn& target, const LoopConfig& cfg) {
  cfg.validate(sim.config());
  if (net.m() != sim.config().feature_count || net.l() != 3 || net.n() != 3)
    raise(ErrorCode::DimensionMismatch, "network does not match simulator");

  const double dt_c = 1.0 / cfg.control_hz;
  const int steps_per_tick = int(std::lround(dt_c / sim.config().dt));
  const int nticks = int(std::lround(cfg.duration_s * cfg.control_hz));
  const int p = 3 * int(cfg.target_features.size());
  const int w = cfg.vel_window;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const bool masked = (cfg.u_mask.array() == 0.0).any();

  LoopResult res;
  res.ticks.reserve(nticks);

  std::deque<Eigen::VectorXd> y_hist;  // y_{k-w}..y_{k-1} once full
  std::deque<Eigen::VectorXd> u_hist;  // u_{k-w}..u_{k-1} once full
  double below_since = -1.0;           // start of the current sub-tol streak

  Eigen::VectorXd y_d(p), yd_dot(p);
  for (int k = 0; k < nticks; ++k) {
    const double t = k * dt_c;
    const Eigen::VectorXd phi = sim.features();
    Eigen::VectorXd y(p);
    for (size_t a = 0; a < cfg.target_features.size(); ++a)
      y.segment<3>(3 * a) = phi.segment<3>(3 * cfg.target_features[a]);

    target(t, y_d, yd_dot);
    if (y_d.size() != p || yd_dot.size() != p)
      raise(ErrorCode::DimensionMismatch, "target has wrong dimension");
    const Eigen::VectorXd dy = y - y_d;

    LoopTick tick;
    tick.t = t;
    tick.dy = dy.norm();
    tick.v_task = 0.5 * dy.squaredNorm();
    tick.ew = nan;
    tick.eq16 = nan;

    if (tick.dy > cfg.diverge_dy)
      raise(ErrorCode::RunAborted,
            "run aborted: |dy| = " + std::to_string(tick.dy) + " at t = " +
                std::to_string(t) + " s exceeds the divergence bound " +
                std::to_string(cfg.diverge_dy));

    if (tick.dy <= cfg.reach_tol) {
      if (below_since < 0.0) below_since = t;
      if (!res.reached && t - below_since + dt_c >= cfg.reach_hold_s - 1e-12) {
        res.reached = true;
        res.time_to_reach = below_since;
      }
    } else {
      below_since = -1.0;
    }
    if (res.reached && cfg.stop_on_reach) {
      res.ticks.push_back(tick);
      break;
    }

    const Eigen::VectorXd theta = net.activations(phi);
    Eigen::MatrixXd Jhat = stacked_from_theta(net, theta, cfg.target_features);
    for (int i = 0; i < 3; ++i)
      if (cfg.u_mask[i] == 0.0) Jhat.col(i).setZero();

    const Eigen::VectorXd v_cmd = yd_dot - cfg.kp * dy;
    Eigen::VectorXd u = truncated_pinv(Jhat, cfg.sigma_trunc, &tick.rank) * v_cmd;
    const double un = u.norm();
    if (un > cfg.u_max) {
      u *= cfg.u_max / un;
      tick.clamped = true;
    }
    for (int i = 0; i < 3; ++i)
      if (cfg.u_mask[i] == 0.0) u[i] = 0.0;
    tick.u = u;
    tick.u_norm = u.norm();

    if (int(y_hist.size()) == w && int(u_hist.size()) == w) {
      const Eigen::VectorXd ydot_meas = (y - y_hist.front()) / (w * dt_c);
      Eigen::VectorXd u_bar = Eigen::VectorXd::Zero(3);
      for (const auto& uh : u_hist) u_bar += uh;
      u_bar /= double(w);
      const Eigen::VectorXd ew = ydot_meas - Jhat * u_bar;
      tick.ew = ew.norm();
      tick.eq16 = (ew - (ydot_meas - yd_dot + cfg.kp * dy)).norm();

      if (cfg.eq16_tol > 0.0 && tick.rank == p && !tick.clamped && !masked &&
          tick.eq16 > cfg.eq16_tol)
        raise(ErrorCode::RunAborted,
              "run aborted: error-dynamics residual " +
                  std::to_string(tick.eq16) + " exceeds " +
                  std::to_string(cfg.eq16_tol) + " at t = " +
                  std::to_string(t) + " s");

      if (cfg.adapt) {
        // dw_ij = dt * L * u_i * (dy_j + lambda*ew_j) * theta, scattered into
        // the feature blocks the target aliases.
        const Eigen::VectorXd b = dy + cfg.lambda * ew;
        for (size_t a = 0; a < cfg.target_features.size(); ++a) {
          const int block = cfg.target_features[a] * net.block_rows();
          for (int i = 0; i < 3; ++i) {
            if (cfg.u_mask[i] == 0.0) continue;
            const double ci = dt_c * cfg.gain_L * u[i];
            if (ci == 0.0) continue;
            for (int j = 0; j < 3; ++j)
              net.weights().row(block + 3 * i + j) +=
                  (ci * b[3 * a + j]) * theta.transpose();
          }
        }
      }
    }

    y_hist.push_back(y);
    if (int(y_hist.size()) > w) y_hist.pop_front();
    u_hist.push_back(u);
    if (int(u_hist.size()) > w) u_hist.pop_front();

    for (int s = 0; s < steps_per_tick; ++s) sim.step(u);
    res.ticks.push_back(tick);
  }

  if (!res.ticks.empty()) res.final_err = res.ticks.back().dy;
  return res;
}

}  // namespace dlo
