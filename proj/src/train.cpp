#include "train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <utility>

#include "adam.hpp"
#include "error.hpp"
#include "kmeans.hpp"
#include "loss.hpp"
#include "rng.hpp"

namespace dlo {

void TrainConfig::validate() const {
  if (q < 1) raise(ErrorCode::BadConfig, "q must be >= 1");
  if (!(beta > 0.0)) raise(ErrorCode::BadConfig, "beta must be > 0");
  if (epochs < 0) raise(ErrorCode::BadConfig, "epochs must be >= 0");
  if (batch < 1) raise(ErrorCode::BadConfig, "batch must be >= 1");
  if (!(alpha > 0.0)) raise(ErrorCode::BadConfig, "alpha must be > 0");
  if (!(sigma_min > 0.0)) raise(ErrorCode::BadConfig, "sigma_min must be > 0");
  if (!(width_scale > 0.0))
    raise(ErrorCode::BadConfig, "width_scale must be > 0");
  if (kmeans_iters < 1) raise(ErrorCode::BadConfig, "kmeans_iters must be >= 1");
  if (target_feature < 0)
    raise(ErrorCode::BadConfig, "target_feature must be >= 0");
}

GradEval loss_and_gradients(const RbfNetwork& net, const Eigen::MatrixXd& Phi,
                            const Eigen::MatrixXd& Rdot,
                            const Eigen::MatrixXd& Xdot, double beta,
                            int target_feature, bool want_grads) {
  const int q = net.q(), l = net.l(), n = net.n(), m = net.m();
  const int D = net.input_dim(), R = net.rows();
  const Eigen::Index B = Phi.cols();
  if (B < 1) raise(ErrorCode::InvalidArgument, "empty batch");
  if (Phi.rows() != D || Xdot.rows() != D || Rdot.rows() != n ||
      Rdot.cols() != B || Xdot.cols() != B)
    raise(ErrorCode::DimensionMismatch, "batch dimensions disagree with network");
  if (target_feature < 0 || target_feature >= m)
    raise(ErrorCode::InvalidArgument, "target_feature out of range");

  // Squared distances and activations for the whole batch at once.
  Eigen::VectorXd csq_mu = net.centers().colwise().squaredNorm();
  Eigen::VectorXd csq_phi = Phi.colwise().squaredNorm();
  Eigen::MatrixXd D2 = -2.0 * (net.centers().transpose() * Phi);
  D2.colwise() += csq_mu;
  D2.rowwise() += csq_phi.transpose();
  D2 = D2.cwiseMax(0.0);
  Eigen::ArrayXd inv_s2 = net.sigma().array().square().inverse();
  Eigen::MatrixXd Theta =
      ((-D2).array().colwise() * inv_s2).exp().matrix();
  Eigen::MatrixXd G = net.weights() * Theta;  // R x B

  GradEval out;
  Eigen::MatrixXd dG;
  if (want_grads) dG = Eigen::MatrixXd::Zero(R, B);
  const double invB = 1.0 / double(B);

  double loss = 0.0;
  for (int k = 0; k <= m; ++k) {
    const int src = (k < m) ? k : target_feature;
    Eigen::MatrixXd Vhat = Eigen::MatrixXd::Zero(l, B);
    for (int i = 0; i < n; ++i)
      Vhat.array() += G.middleRows(k * l * n + i * l, l).array().rowwise() *
                      Rdot.row(i).array();
    Eigen::MatrixXd E = Vhat - Xdot.middleRows(src * l, l);
    loss += E.unaryExpr([beta](double e) { return smooth_l1(e, beta); }).sum();
    if (want_grads) {
      Eigen::MatrixXd Lp =
          E.unaryExpr([beta](double e) { return smooth_l1_grad(e, beta); });
      for (int i = 0; i < n; ++i)
        dG.middleRows(k * l * n + i * l, l) =
            (Lp.array().rowwise() * Rdot.row(i).array()) * invB;
    }
  }
  out.loss = loss * invB;
  if (!want_grads) return out;

  out.dW = dG * Theta.transpose();
  Eigen::MatrixXd A =
      (net.weights().transpose() * dG).cwiseProduct(Theta);  // q x B
  Eigen::VectorXd rowsum = A.rowwise().sum();
  out.dcenters = ((Phi * A.transpose() - net.centers() * rowsum.asDiagonal())
                      .array()
                      .rowwise() *
                  (2.0 * inv_s2).transpose())
                     .matrix();
  out.dsigma = (2.0 * A.cwiseProduct(D2).rowwise().sum().array() /
                net.sigma().array().pow(3))
                   .matrix();
  return out;
}

double evaluate_loss(const RbfNetwork& net, const Dataset& ds, double beta,
                     int target_feature) {
  if (ds.samples.empty()) raise(ErrorCode::InvalidArgument, "empty dataset");
  if (ds.l != net.l() || ds.n != net.n() || ds.m != net.m())
    raise(ErrorCode::DimensionMismatch, "dataset dimensions disagree with network");
  const Eigen::Index N = Eigen::Index(ds.samples.size());
  const int D = ds.input_dim();
  const Eigen::Index chunk = 8192;
  double acc = 0.0;
  for (Eigen::Index s0 = 0; s0 < N; s0 += chunk) {
    const Eigen::Index B = std::min(chunk, N - s0);
    Eigen::MatrixXd P(D, B), Rd(ds.n, B), X(D, B);
    for (Eigen::Index i = 0; i < B; ++i) {
      P.col(i) = ds.samples[s0 + i].phi;
      Rd.col(i) = ds.samples[s0 + i].rdot;
      X.col(i) = ds.samples[s0 + i].xdot;
    }
    acc += loss_and_gradients(net, P, Rd, X, beta, target_feature, false).loss *
           double(B);
  }
  return acc / double(N);
}

namespace {

struct Normalization {
  Eigen::VectorXd shift;  // per-channel mean
  double scale = 1.0;     // one global factor (mean channel std)
};

Normalization compute_normalization(const Eigen::MatrixXd& Phi) {
  Normalization nm;
  nm.shift = Phi.rowwise().mean();
  Eigen::VectorXd var =
      (Phi.colwise() - nm.shift).rowwise().squaredNorm() / double(Phi.cols());
  nm.scale = var.array().sqrt().mean();
  if (!(nm.scale > 1e-12)) nm.scale = 1.0;
  return nm;
}

// Places centers/widths with k-means on normalized inputs; weights zero.
// Hour-long datasets dwarf what Lloyd iterations need, so clustering sees at
// most a 10k-sample draw.
RbfNetwork kmeans_network(const Eigen::MatrixXd& Phin, const Dataset& ds,
                          const TrainConfig& cfg, double* objective) {
  const Eigen::Index N = Phin.cols();
  if (Eigen::Index(cfg.q) > N)
    raise(ErrorCode::InvalidArgument,
          "dataset smaller than the requested unit count");
  const Eigen::Index cap = std::max<Eigen::Index>(10000, cfg.q);
  KmeansResult km;
  if (N > cap) {
    Rng rng(cfg.seed ^ 0xC2B2AE3D27D4EB4Full);
    std::vector<Eigen::Index> idx(N);
    std::iota(idx.begin(), idx.end(), Eigen::Index(0));
    Eigen::MatrixXd sub(Phin.rows(), cap);
    for (Eigen::Index i = 0; i < cap; ++i) {
      std::swap(idx[i], idx[i + Eigen::Index(rng.index(size_t(N - i)))]);
      sub.col(i) = Phin.col(idx[i]);
    }
    km = kmeans_init(sub, cfg.q, cfg.seed, cfg.sigma_min, cfg.kmeans_iters);
  } else {
    km = kmeans_init(Phin, cfg.q, cfg.seed, cfg.sigma_min, cfg.kmeans_iters);
  }
  RbfNetwork net(cfg.q, ds.l, ds.n, ds.m);
  net.centers() = km.centers;
  net.sigma() = (km.widths * cfg.width_scale).cwiseMax(cfg.sigma_min);
  if (objective)
    *objective = km.objective.empty() ? 0.0 : km.objective.back();
  return net;
}

// Rewrites the network to accept raw inputs: mu -> shift + scale*mu,
// sigma -> scale*sigma. Activations are unchanged because the exponent
// |phi - mu|^2 / sigma^2 is invariant under the affine map.
void fold_normalization(RbfNetwork& net, const Normalization& nm) {
  net.centers() = (net.centers() * nm.scale).colwise() + nm.shift;
  net.sigma() *= nm.scale;
}

}  // namespace

RbfNetwork untrained_baseline(const Dataset& ds, const TrainConfig& cfg) {
  cfg.validate();
  if (ds.samples.empty()) raise(ErrorCode::InvalidArgument, "empty dataset");
  Eigen::MatrixXd Phi = ds.phi_matrix();
  Normalization nm = compute_normalization(Phi);
  Eigen::MatrixXd Phin = (Phi.colwise() - nm.shift) / nm.scale;
  RbfNetwork net = kmeans_network(Phin, ds, cfg, nullptr);
  fold_normalization(net, nm);
  return net;
}

RbfNetwork train(const Dataset& ds, const TrainConfig& cfg, TrainResult* result) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  cfg.validate();
  if (ds.samples.empty()) raise(ErrorCode::InvalidArgument, "empty dataset");
  if (cfg.target_feature >= ds.m)
    raise(ErrorCode::BadConfig, "target_feature out of range for dataset");

  const Eigen::Index N = Eigen::Index(ds.samples.size());
  const int D = ds.input_dim();
  Eigen::MatrixXd Phi = ds.phi_matrix();
  Eigen::MatrixXd Rd = ds.rdot_matrix();
  Eigen::MatrixXd Xd = ds.xdot_matrix();

  Normalization nm = compute_normalization(Phi);
  Eigen::MatrixXd Phin = (Phi.colwise() - nm.shift) / nm.scale;
  Phi.resize(0, 0);  // large; normalized copy is the one we train on

  double km_obj = 0.0;
  RbfNetwork net = kmeans_network(Phin, ds, cfg, &km_obj);

  AdamConfig ac;
  ac.alpha = cfg.alpha;
  AdamOptimizer opt(ac);
  const int slot_w = opt.add_param(net.rows(), cfg.q);
  const int slot_c = opt.add_param(D, cfg.q);
  const int slot_s = opt.add_param(cfg.q, 1);

  // Distinct stream from the k-means seeding.
  Rng rng(cfg.seed ^ 0x9E3779B97F4A7C15ull);
  std::vector<Eigen::Index> order(N);
  std::iota(order.begin(), order.end(), Eigen::Index(0));
  const Eigen::Index B = std::min<Eigen::Index>(cfg.batch, N);

  std::vector<double> history;
  Eigen::MatrixXd Pb(D, B), Rb(ds.n, B), Xb(D, B);
  Eigen::Map<Eigen::ArrayXXd> wp(net.weights().data(), net.rows(), cfg.q);
  Eigen::Map<Eigen::ArrayXXd> cp(net.centers().data(), D, cfg.q);
  Eigen::Map<Eigen::ArrayXXd> sp(net.sigma().data(), cfg.q, 1);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double esum = 0.0;
    int nbatches = 0;
    for (Eigen::Index s0 = 0; s0 + B <= N; s0 += B) {
      for (Eigen::Index i = 0; i < B; ++i) {
        Pb.col(i) = Phin.col(order[s0 + i]);
        Rb.col(i) = Rd.col(order[s0 + i]);
        Xb.col(i) = Xd.col(order[s0 + i]);
      }
      GradEval ge =
          loss_and_gradients(net, Pb, Rb, Xb, cfg.beta, cfg.target_feature);
      if (!std::isfinite(ge.loss))
        raise(ErrorCode::DivergedTraining,
              "non-finite loss at epoch " + std::to_string(epoch));
      opt.begin_step();
      opt.update(slot_w, wp, ge.dW.array());
      if (cfg.train_centers) opt.update(slot_c, cp, ge.dcenters.array());
      if (cfg.train_widths) {
        opt.update(slot_s, sp, ge.dsigma.array());
        net.sigma() = net.sigma().cwiseMax(cfg.sigma_min);
      }
      esum += ge.loss;
      ++nbatches;
    }
    history.push_back(esum / std::max(1, nbatches));
  }

  fold_normalization(net, nm);

  if (result) {
    result->loss_history = std::move(history);
    result->final_loss =
        result->loss_history.empty() ? 0.0 : result->loss_history.back();
    result->kmeans_objective = km_obj;
    result->elapsed_s =
        std::chrono::duration<double>(clock::now() - t0).count();
  }
  return net;
}

GradcheckReport run_gradcheck(int configs, uint64_t seed) {
  if (configs < 1) raise(ErrorCode::InvalidArgument, "configs must be >= 1");
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  Rng rng(seed);
  GradcheckReport rep;
  rep.configs = configs;

  for (int c = 0; c < configs; ++c) {
    const int q = 2 + int(rng.index(15));  // 2..16
    const int m = 1 + int(rng.index(4));   // input width 3m <= 12
    const int l = 3, n = 3;
    RbfNetwork net(q, l, n, m);
    const int D = net.input_dim();
    const int N = 4 + int(rng.index(7));

    for (int i = 0; i < D; ++i)
      for (int j = 0; j < q; ++j) net.centers()(i, j) = rng.normal();
    for (int j = 0; j < q; ++j) net.sigma()[j] = rng.uniform(0.6, 2.0);
    for (int r = 0; r < net.rows(); ++r)
      for (int j = 0; j < q; ++j) net.weights()(r, j) = 0.3 * rng.normal();

    Eigen::MatrixXd Phi(D, N), Rdot(n, N), Xdot(D, N);
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < N; ++j) Phi(i, j) = rng.normal();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < N; ++j) Rdot(i, j) = 0.7 * rng.normal();
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < N; ++j) Xdot(i, j) = 0.5 * rng.normal();
    const int tf = int(rng.index(m));
    const double beta = 1.0;

    GradEval ge = loss_and_gradients(net, Phi, Rdot, Xdot, beta, tf);

    auto check = [&](double* p, double analytic) {
      const double orig = *p;
      const double h = 1e-6 * std::max(1.0, std::abs(orig));
      *p = orig + h;
      const double lp =
          loss_and_gradients(net, Phi, Rdot, Xdot, beta, tf, false).loss;
      *p = orig - h;
      const double lm =
          loss_and_gradients(net, Phi, Rdot, Xdot, beta, tf, false).loss;
      *p = orig;
      const double fd = (lp - lm) / (2.0 * h);
      const double rel = std::abs(analytic - fd) /
                         std::max({std::abs(analytic), std::abs(fd), 1.0});
      rep.max_rel_err = std::max(rep.max_rel_err, rel);
      ++rep.params_checked;
    };

    for (int r = 0; r < net.rows(); ++r)
      for (int j = 0; j < q; ++j) check(&net.weights()(r, j), ge.dW(r, j));
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < q; ++j)
        check(&net.centers()(i, j), ge.dcenters(i, j));
    for (int j = 0; j < q; ++j) check(&net.sigma()[j], ge.dsigma[j]);
  }

  rep.elapsed_s = std::chrono::duration<double>(clock::now() - t0).count();
  return rep;
}

}  // namespace dlo
