#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "adam.hpp"
#include "error.hpp"
#include "kmeans.hpp"
#include "loss.hpp"
#include "rng.hpp"

using doctest::Approx;

TEST_CASE("smooth-L1 values at hand-computed points") {
  // beta = 1: 0.5 e^2 inside, |e| - 0.5 outside.
  CHECK(dlo::smooth_l1(0.0, 1.0) == 0.0);
  CHECK(dlo::smooth_l1(0.5, 1.0) == Approx(0.125));
  CHECK(dlo::smooth_l1(-0.5, 1.0) == Approx(0.125));
  CHECK(dlo::smooth_l1(2.0, 1.0) == Approx(1.5));
  CHECK(dlo::smooth_l1(-3.0, 1.0) == Approx(2.5));
  // beta = 2: 0.5 e^2 / beta inside, |e| - beta/2 outside.
  CHECK(dlo::smooth_l1(1.0, 2.0) == Approx(0.25));
  CHECK(dlo::smooth_l1(3.0, 2.0) == Approx(2.0));
}

TEST_CASE("smooth-L1 is continuous and C1 at the knee") {
  for (double beta : {0.5, 1.0, 2.0}) {
    const double eps = 1e-9;
    CHECK(dlo::smooth_l1(beta - eps, beta) ==
          Approx(dlo::smooth_l1(beta + eps, beta)).epsilon(1e-6));
    CHECK(dlo::smooth_l1_grad(beta - eps, beta) ==
          Approx(dlo::smooth_l1_grad(beta + eps, beta)).epsilon(1e-6));
    CHECK(dlo::smooth_l1_grad(beta, beta) == Approx(1.0));
  }
}

TEST_CASE("smooth-L1 gradient matches finite differences") {
  for (double e : {-2.7, -1.0 + 1e-3, -0.3, 0.0, 0.4, 0.999, 1.5}) {
    const double h = 1e-7;
    double fd = (dlo::smooth_l1(e + h, 1.0) - dlo::smooth_l1(e - h, 1.0)) / (2 * h);
    CHECK(dlo::smooth_l1_grad(e, 1.0) == Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("adam matches an independent scalar reference") {
  // Reference loop written out by hand, no shared code with adam.hpp.
  const double alpha = 0.1, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  double p_ref = 1.0, m = 0.0, v = 0.0;
  const double grads[] = {0.3, -0.2, 0.1, 0.7, -0.05};

  Eigen::ArrayXXd p(1, 1);
  p(0, 0) = 1.0;
  dlo::AdamState st = dlo::AdamState::zeros(1, 1);
  dlo::AdamConfig cfg;
  cfg.alpha = alpha;

  for (int t = 1; t <= 5; ++t) {
    const double g = grads[t - 1];
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mh = m / (1 - std::pow(b1, t));
    const double vh = v / (1 - std::pow(b2, t));
    p_ref -= alpha * mh / (std::sqrt(vh) + eps);

    Eigen::ArrayXXd grad(1, 1);
    grad(0, 0) = g;
    dlo::adam_step(p, grad, st, t, cfg);
    CHECK(p(0, 0) == Approx(p_ref).epsilon(1e-14));
  }
}

TEST_CASE("adam first step moves by about alpha against the gradient") {
  Eigen::ArrayXXd p(1, 2);
  p << 5.0, -3.0;
  Eigen::ArrayXXd g(1, 2);
  g << 0.01, -2000.0;  // magnitude must not matter on step one
  dlo::AdamState st = dlo::AdamState::zeros(1, 2);
  dlo::AdamConfig cfg;
  dlo::adam_step(p, g, st, 1, cfg);
  CHECK(p(0, 0) == Approx(5.0 - cfg.alpha).epsilon(1e-5));
  CHECK(p(0, 1) == Approx(-3.0 + cfg.alpha).epsilon(1e-5));
}

TEST_CASE("adam optimizer shares the step counter across slots") {
  dlo::AdamConfig cfg;
  dlo::AdamOptimizer opt(cfg);
  int a = opt.add_param(2, 2);
  int b = opt.add_param(1, 1);
  Eigen::ArrayXXd pa = Eigen::ArrayXXd::Zero(2, 2), ga = Eigen::ArrayXXd::Ones(2, 2);
  Eigen::ArrayXXd pb = Eigen::ArrayXXd::Zero(1, 1), gb = Eigen::ArrayXXd::Ones(1, 1);
  opt.begin_step();
  opt.update(a, pa, ga);
  opt.update(b, pb, gb);
  CHECK(opt.step_count() == 1);
  CHECK(pa(0, 0) == Approx(pb(0, 0)));
}

namespace {

Eigen::MatrixXd four_blobs(int per_cluster, uint64_t seed) {
  // Clusters at the corners of a square, radius ~0.1.
  dlo::Rng rng(seed);
  const double cx[] = {0.0, 4.0, 0.0, 4.0};
  const double cy[] = {0.0, 0.0, 4.0, 4.0};
  Eigen::MatrixXd pts(2, 4 * per_cluster);
  for (int c = 0; c < 4; ++c)
    for (int i = 0; i < per_cluster; ++i) {
      pts(0, c * per_cluster + i) = cx[c] + 0.1 * rng.normal();
      pts(1, c * per_cluster + i) = cy[c] + 0.1 * rng.normal();
    }
  return pts;
}

}  // namespace

TEST_CASE("kmeans recovers well-separated blobs") {
  Eigen::MatrixXd pts = four_blobs(50, 77);
  dlo::KmeansResult km = dlo::kmeans_init(pts, 4, 1, 1e-3);
  REQUIRE(km.centers.cols() == 4);

  // Every true centre has a recovered centre nearby.
  const double cx[] = {0.0, 4.0, 0.0, 4.0};
  const double cy[] = {0.0, 0.0, 4.0, 4.0};
  for (int c = 0; c < 4; ++c) {
    double best = 1e9;
    for (int j = 0; j < 4; ++j)
      best = std::min(best, std::hypot(km.centers(0, j) - cx[c],
                                       km.centers(1, j) - cy[c]));
    CHECK(best < 0.15);
  }
  // Widths are the mean member distance: about 0.12 for a 2D gaussian blob.
  for (int j = 0; j < 4; ++j) {
    CHECK(km.widths[j] > 0.03);
    CHECK(km.widths[j] < 0.4);
  }
}

TEST_CASE("kmeans objective never increases across Lloyd iterations") {
  Eigen::MatrixXd pts = four_blobs(40, 5);
  dlo::KmeansResult km = dlo::kmeans_init(pts, 6, 3, 1e-3);
  for (size_t i = 1; i < km.objective.size(); ++i)
    CHECK(km.objective[i] <= km.objective[i - 1] + 1e-9);
}

TEST_CASE("kmeans with k=1 returns the mean") {
  Eigen::MatrixXd pts(1, 4);
  pts << 1.0, 2.0, 3.0, 6.0;
  dlo::KmeansResult km = dlo::kmeans_init(pts, 1, 9, 1e-6);
  CHECK(km.centers(0, 0) == Approx(3.0));
}

TEST_CASE("kmeans widths respect the floor") {
  // All points identical: member distances are zero, floor must apply.
  Eigen::MatrixXd pts = Eigen::MatrixXd::Ones(3, 10);
  dlo::KmeansResult km = dlo::kmeans_init(pts, 2, 4, 0.25);
  for (int j = 0; j < 2; ++j) CHECK(km.widths[j] >= 0.25);
}

TEST_CASE("kmeans is deterministic per seed") {
  Eigen::MatrixXd pts = four_blobs(30, 13);
  dlo::KmeansResult a = dlo::kmeans_init(pts, 5, 42, 1e-3);
  dlo::KmeansResult b = dlo::kmeans_init(pts, 5, 42, 1e-3);
  CHECK((a.centers - b.centers).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.widths - b.widths).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("kmeans rejects impossible requests") {
  Eigen::MatrixXd pts = Eigen::MatrixXd::Random(2, 3);
  CHECK_THROWS_AS(dlo::kmeans_init(pts, 0, 1, 1e-3), dlo::Error);
  CHECK_THROWS_AS(dlo::kmeans_init(pts, 4, 1, 1e-3), dlo::Error);
}
