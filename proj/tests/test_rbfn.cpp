#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "error.hpp"
#include "rbfn.hpp"
#include "rng.hpp"

using doctest::Approx;
using dlo::RbfNetwork;

namespace {

RbfNetwork random_net(int q, int l, int n, int m, uint64_t seed) {
  RbfNetwork net(q, l, n, m);
  dlo::Rng rng(seed);
  for (int i = 0; i < net.input_dim(); ++i)
    for (int j = 0; j < q; ++j) net.centers()(i, j) = rng.normal();
  for (int j = 0; j < q; ++j) net.sigma()[j] = rng.uniform(0.5, 2.0);
  for (int r = 0; r < net.rows(); ++r)
    for (int j = 0; j < q; ++j) net.weights()(r, j) = rng.normal();
  return net;
}

}  // namespace

TEST_CASE("activations follow exp(-d^2/sigma^2)") {
  RbfNetwork net(2, 3, 3, 1);
  net.centers().col(0) << 1.0, 0.0, 0.0;
  net.centers().col(1) << 0.0, 2.0, 0.0;
  net.sigma() << 0.5, 2.0;
  Eigen::Vector3d phi(0.0, 0.0, 0.0);
  Eigen::VectorXd theta = net.activations(phi);
  CHECK(theta[0] == Approx(std::exp(-1.0 / 0.25)).epsilon(1e-12));
  CHECK(theta[1] == Approx(std::exp(-4.0 / 4.0)).epsilon(1e-12));
  // At a center the unit saturates to 1.
  CHECK(net.activations(Eigen::Vector3d(1.0, 0.0, 0.0))[0] == Approx(1.0));
}

TEST_CASE("weight rows map to Jacobian entries column-first") {
  // Row k*l*n + i*l + j of W must feed entry (j, i) of feature k's Jacobian.
  const int q = 2, l = 3, n = 3, m = 2;
  RbfNetwork net(q, l, n, m);
  net.centers().setZero();
  net.sigma().setConstant(1.0);

  struct Probe {
    int k, i, j;
  };
  for (Probe p : {Probe{0, 0, 0}, Probe{0, 2, 1}, Probe{1, 1, 2}, Probe{2, 2, 2}}) {
    net.weights().setZero();
    net.weights()(p.k * l * n + p.i * l + p.j, 1) = 2.5;
    Eigen::VectorXd phi = Eigen::VectorXd::Constant(net.input_dim(), 0.3);
    Eigen::VectorXd theta = net.activations(phi);
    Eigen::MatrixXd J = net.estimate_jacobian(phi, p.k);
    for (int jj = 0; jj < l; ++jj)
      for (int ii = 0; ii < n; ++ii) {
        double want = (jj == p.j && ii == p.i) ? 2.5 * theta[1] : 0.0;
        CHECK(J(jj, ii) == Approx(want).epsilon(1e-12));
      }
  }
}

TEST_CASE("stacked and full jacobians agree with per-block estimates") {
  RbfNetwork net = random_net(5, 3, 3, 4, 99);
  Eigen::VectorXd phi = Eigen::VectorXd::Random(net.input_dim());

  Eigen::MatrixXd full = net.full_jacobian(phi);
  REQUIRE(full.rows() == 12);
  for (int k = 0; k < 4; ++k) {
    Eigen::MatrixXd Jk = net.estimate_jacobian(phi, k);
    CHECK((full.middleRows(3 * k, 3) - Jk).cwiseAbs().maxCoeff() < 1e-14);
  }
  Eigen::MatrixXd st = net.stacked_jacobian(phi, {2, 0});
  CHECK((st.topRows(3) - net.estimate_jacobian(phi, 2)).cwiseAbs().maxCoeff() <
        1e-14);
  CHECK((st.bottomRows(3) - net.estimate_jacobian(phi, 0)).cwiseAbs().maxCoeff() <
        1e-14);

  Eigen::Vector3d rdot(0.1, -0.2, 0.05);
  Eigen::VectorXd v = net.predict_velocities(phi, rdot);
  CHECK((v - full * rdot).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("the target head is block m") {
  RbfNetwork net = random_net(3, 3, 3, 2, 7);
  Eigen::VectorXd phi = Eigen::VectorXd::Random(net.input_dim());
  CHECK(RbfNetwork::target_block_index(2) == 2);
  CHECK_NOTHROW(net.estimate_jacobian(phi, 2));
  CHECK_THROWS_AS(net.estimate_jacobian(phi, 3), dlo::Error);
}

TEST_CASE("save/load round-trips bit-exactly") {
  const std::string path = "tmp_net_roundtrip.bin";
  RbfNetwork net = random_net(7, 3, 3, 5, 1234);
  net.save(path);
  RbfNetwork back = RbfNetwork::load(path);
  CHECK(back.q() == net.q());
  CHECK(back.l() == net.l());
  CHECK(back.n() == net.n());
  CHECK(back.m() == net.m());
  CHECK((back.centers() - net.centers()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.sigma() - net.sigma()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.weights() - net.weights()).cwiseAbs().maxCoeff() == 0.0);
  std::remove(path.c_str());
}

TEST_CASE("saving twice produces identical bytes") {
  RbfNetwork net = random_net(4, 3, 3, 3, 55);
  net.save("tmp_net_a.bin");
  net.save("tmp_net_b.bin");
  std::ifstream a("tmp_net_a.bin", std::ios::binary);
  std::ifstream b("tmp_net_b.bin", std::ios::binary);
  std::string sa((std::istreambuf_iterator<char>(a)), {});
  std::string sb((std::istreambuf_iterator<char>(b)), {});
  CHECK(sa == sb);
  CHECK(!sa.empty());
  std::remove("tmp_net_a.bin");
  std::remove("tmp_net_b.bin");
}

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

void spit(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), std::streamsize(bytes.size()));
}

dlo::ErrorCode load_code(const std::string& path) {
  try {
    RbfNetwork::load(path);
  } catch (const dlo::Error& e) {
    return e.code();
  }
  return dlo::ErrorCode(0);
}

}  // namespace

TEST_CASE("load failures are told apart") {
  const std::string path = "tmp_net_damage.bin";
  RbfNetwork net = random_net(3, 3, 3, 2, 9);
  net.save(path);
  const std::string good = slurp(path);

  SUBCASE("missing file -> Io") {
    CHECK(load_code("tmp_no_such_file.bin") == dlo::ErrorCode::Io);
  }
  SUBCASE("bad magic -> VersionMismatch") {
    std::string bad = good;
    bad[6] = '9';  // DLORBF9
    spit(path, bad);
    CHECK(load_code(path) == dlo::ErrorCode::VersionMismatch);
  }
  SUBCASE("flipped payload byte -> CorruptPayload") {
    std::string bad = good;
    bad[40] ^= 0x5A;
    spit(path, bad);
    CHECK(load_code(path) == dlo::ErrorCode::CorruptPayload);
  }
  SUBCASE("flipped checksum -> CorruptPayload") {
    std::string bad = good;
    bad[bad.size() - 1] ^= 0xFF;
    spit(path, bad);
    CHECK(load_code(path) == dlo::ErrorCode::CorruptPayload);
  }
  SUBCASE("truncated payload -> DimensionMismatch") {
    spit(path, good.substr(0, good.size() - 12));
    CHECK(load_code(path) == dlo::ErrorCode::DimensionMismatch);
  }
  SUBCASE("absurd header dims -> DimensionMismatch") {
    std::string bad = good;
    bad[8] = bad[9] = bad[10] = bad[11] = char(0xFF);  // q
    spit(path, bad);
    CHECK(load_code(path) == dlo::ErrorCode::DimensionMismatch);
  }
  std::remove(path.c_str());
}

TEST_CASE("dimension guards") {
  RbfNetwork net = random_net(3, 3, 3, 2, 21);
  Eigen::VectorXd wrong = Eigen::VectorXd::Zero(5);
  CHECK_THROWS_AS(net.activations(wrong), dlo::Error);
  CHECK_THROWS_AS(net.predict_velocities(Eigen::VectorXd::Zero(6),
                                         Eigen::VectorXd::Zero(2)),
                  dlo::Error);
  CHECK_THROWS_AS(RbfNetwork(0, 3, 3, 1), dlo::Error);
}
