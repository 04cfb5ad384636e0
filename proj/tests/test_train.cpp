#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "dataset.hpp"
#include "error.hpp"
#include "loss.hpp"
#include "rbfn.hpp"
#include "rng.hpp"
#include "train.hpp"

using dlo::Dataset;
using dlo::RbfNetwork;
using dlo::TrainConfig;

namespace {

RbfNetwork random_net(int q, int m, dlo::Rng& rng) {
  RbfNetwork net(q, 3, 3, m);
  for (int i = 0; i < net.input_dim(); ++i)
    for (int j = 0; j < q; ++j) net.centers()(i, j) = rng.normal();
  for (int j = 0; j < q; ++j) net.sigma()[j] = rng.uniform(0.8, 1.5);
  for (int r = 0; r < net.rows(); ++r)
    for (int j = 0; j < q; ++j) net.weights()(r, j) = 0.3 * rng.normal();
  return net;
}

// Samples drawn from an actual RBF map, so the regression target is
// realizable by the model class.
Dataset realizable_dataset(const RbfNetwork& truth, int N, uint64_t seed) {
  dlo::Rng rng(seed);
  Dataset ds;
  ds.l = 3;
  ds.n = 3;
  ds.m = truth.m();
  const int D = truth.input_dim();
  for (int s = 0; s < N; ++s) {
    dlo::TrainingSample smp;
    smp.t = 0.02 * s;
    smp.phi.resize(D);
    for (int i = 0; i < D; ++i) smp.phi[i] = rng.normal();
    smp.rdot.resize(3);
    for (int i = 0; i < 3; ++i) smp.rdot[i] = 0.5 * rng.normal();
    smp.xdot = truth.predict_velocities(smp.phi, smp.rdot);
    ds.samples.push_back(std::move(smp));
  }
  return ds;
}

}  // namespace

TEST_CASE("analytic gradients agree with finite differences") {
  dlo::GradcheckReport rep = dlo::run_gradcheck(15, 1234);
  CHECK(rep.configs == 15);
  CHECK(rep.params_checked > 1000);
  CHECK(rep.max_rel_err < 1e-5);
  CHECK(rep.max_rel_err > 0.0);  // finite differences never agree exactly
}

TEST_CASE("untrained baseline scores exactly the zero-prediction loss") {
  dlo::Rng rng(5);
  RbfNetwork truth = random_net(4, 2, rng);
  Dataset ds = realizable_dataset(truth, 60, 11);

  TrainConfig cfg;
  cfg.q = 6;
  cfg.target_feature = 1;
  RbfNetwork base = dlo::untrained_baseline(ds, cfg);
  CHECK(base.weights().isZero(0.0));
  CHECK(base.sigma().minCoeff() >= cfg.sigma_min);
  CHECK(base.q() == 6);
  CHECK(base.m() == 2);

  // With zero weights every head predicts zero velocity, so the loss is the
  // smooth-L1 of the recorded velocities themselves (target head counts the
  // chosen feature twice).
  double want = 0.0;
  for (const auto& s : ds.samples) {
    for (int i = 0; i < s.xdot.size(); ++i) want += dlo::smooth_l1(s.xdot[i], cfg.beta);
    for (int j = 0; j < 3; ++j)
      want += dlo::smooth_l1(s.xdot[3 * cfg.target_feature + j], cfg.beta);
  }
  want /= double(ds.samples.size());
  double got = dlo::evaluate_loss(base, ds, cfg.beta, cfg.target_feature);
  CHECK(got == doctest::Approx(want).epsilon(1e-12));
  CHECK(got > 0.0);
}

TEST_CASE("evaluate_loss matches a single full-batch evaluation") {
  dlo::Rng rng(9);
  RbfNetwork net = random_net(5, 3, rng);
  Dataset ds = realizable_dataset(net, 50, 21);
  // Perturb xdot so the loss is non-trivial.
  for (auto& s : ds.samples) s.xdot.array() += 0.3;
  double chunked = dlo::evaluate_loss(net, ds, 1.0, 2);
  double direct = dlo::loss_and_gradients(net, ds.phi_matrix(), ds.rdot_matrix(),
                                          ds.xdot_matrix(), 1.0, 2, false)
                      .loss;
  CHECK(chunked == doctest::Approx(direct).epsilon(1e-13));
}

TEST_CASE("training on realizable data beats the untrained baseline") {
  dlo::Rng rng(17);
  RbfNetwork truth = random_net(4, 2, rng);
  Dataset ds = realizable_dataset(truth, 1500, 33);

  TrainConfig cfg;
  cfg.q = 12;
  cfg.epochs = 150;
  cfg.batch = 256;
  cfg.alpha = 5e-3;
  cfg.seed = 3;
  cfg.target_feature = 0;

  double base = dlo::evaluate_loss(dlo::untrained_baseline(ds, cfg), ds, cfg.beta,
                                   cfg.target_feature);
  dlo::TrainResult res;
  RbfNetwork net = dlo::train(ds, cfg, &res);
  double trained = dlo::evaluate_loss(net, ds, cfg.beta, cfg.target_feature);

  CHECK(trained < 0.5 * base);
  REQUIRE(res.loss_history.size() == 150);
  CHECK(res.loss_history.back() < res.loss_history.front());
  CHECK(res.final_loss == doctest::Approx(res.loss_history.back()));
  CHECK(res.elapsed_s > 0.0);
}

TEST_CASE("training is deterministic in the seed") {
  dlo::Rng rng(23);
  RbfNetwork truth = random_net(3, 2, rng);
  Dataset ds = realizable_dataset(truth, 300, 44);

  TrainConfig cfg;
  cfg.q = 8;
  cfg.epochs = 4;
  cfg.batch = 64;
  cfg.target_feature = 1;

  dlo::TrainResult ra, rb;
  RbfNetwork a = dlo::train(ds, cfg, &ra);
  RbfNetwork b = dlo::train(ds, cfg, &rb);
  CHECK((a.weights() - b.weights()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.centers() - b.centers()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.sigma() - b.sigma()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(ra.final_loss == rb.final_loss);

  cfg.seed = 99;
  RbfNetwork c = dlo::train(ds, cfg, nullptr);
  CHECK((a.weights() - c.weights()).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("zero epochs reproduces the untrained baseline") {
  dlo::Rng rng(31);
  RbfNetwork truth = random_net(3, 1, rng);
  Dataset ds = realizable_dataset(truth, 120, 55);
  TrainConfig cfg;
  cfg.q = 5;
  cfg.epochs = 0;
  cfg.target_feature = 0;
  RbfNetwork a = dlo::train(ds, cfg, nullptr);
  RbfNetwork b = dlo::untrained_baseline(ds, cfg);
  CHECK((a.weights() - b.weights()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.centers() - b.centers()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.sigma() - b.sigma()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("exploding training aborts naming the epoch") {
  dlo::Rng rng(61);
  RbfNetwork truth = random_net(3, 2, rng);
  Dataset ds = realizable_dataset(truth, 400, 88);

  TrainConfig cfg;
  cfg.q = 4;
  cfg.epochs = 50;
  cfg.batch = 64;
  cfg.alpha = 1e308;  // each step hurls every parameter toward +-inf
  cfg.target_feature = 0;
  try {
    dlo::train(ds, cfg, nullptr);
    FAIL("expected training to abort");
  } catch (const dlo::Error& e) {
    CHECK(e.code() == dlo::ErrorCode::DivergedTraining);
    CHECK(std::string(e.what()).find("epoch") != std::string::npos);
  }
}

TEST_CASE("oversized datasets cluster on a seed-driven subsample") {
  dlo::Rng rng(51);
  RbfNetwork truth = random_net(3, 2, rng);
  Dataset ds = realizable_dataset(truth, 10050, 77);

  TrainConfig cfg;
  cfg.q = 4;
  cfg.epochs = 0;
  cfg.kmeans_iters = 20;
  cfg.target_feature = 0;
  RbfNetwork a = dlo::train(ds, cfg, nullptr);
  RbfNetwork b = dlo::train(ds, cfg, nullptr);
  CHECK((a.centers() - b.centers()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.sigma() - b.sigma()).cwiseAbs().maxCoeff() == 0.0);

  cfg.seed = 12;
  RbfNetwork c = dlo::train(ds, cfg, nullptr);
  CHECK((a.centers() - c.centers()).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("training rejects bad inputs") {
  dlo::Rng rng(41);
  RbfNetwork truth = random_net(3, 2, rng);
  Dataset ds = realizable_dataset(truth, 20, 66);

  TrainConfig cfg;
  cfg.q = 64;  // more units than samples
  CHECK_THROWS_AS(dlo::train(ds, cfg, nullptr), dlo::Error);

  TrainConfig tf;
  tf.q = 4;
  tf.target_feature = 2;  // dataset only has features 0..1
  CHECK_THROWS_AS(dlo::train(ds, tf, nullptr), dlo::Error);

  TrainConfig bb;
  bb.batch = 0;
  CHECK_THROWS_AS(dlo::train(ds, bb, nullptr), dlo::Error);

  Dataset empty;
  TrainConfig ok;
  ok.q = 2;
  CHECK_THROWS_AS(dlo::train(empty, ok, nullptr), dlo::Error);

  // Batch-level dimension guards.
  RbfNetwork net = random_net(2, 2, rng);
  Eigen::MatrixXd Phi = Eigen::MatrixXd::Zero(6, 4);
  Eigen::MatrixXd Rd = Eigen::MatrixXd::Zero(3, 4);
  Eigen::MatrixXd Xd = Eigen::MatrixXd::Zero(6, 4);
  CHECK_THROWS_AS(dlo::loss_and_gradients(net, Phi, Rd, Xd, 1.0, 5), dlo::Error);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(5, 4);
  CHECK_THROWS_AS(dlo::loss_and_gradients(net, bad, Rd, Xd, 1.0, 0), dlo::Error);
}
