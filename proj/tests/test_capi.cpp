#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <dlo/dlo.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

namespace {

struct TempPath {
  std::string path;
  explicit TempPath(const std::string& name) : path("/tmp/dlo_capi_" + name) {}
  ~TempPath() {
    std::remove(path.c_str());
    std::remove((path + ".meta").c_str());
  }
};

std::vector<char> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::vector<char>(std::istreambuf_iterator<char>(in),
                           std::istreambuf_iterator<char>());
}

void spit(const std::string& path, const std::vector<char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), std::streamsize(bytes.size()));
  REQUIRE(out.good());
}

// Tiny but complete pipeline artifacts shared by several cases.
struct Pipeline {
  TempPath csv{"data.csv"};
  TempPath model{"model.bin"};
  dlo_train_stats stats{};

  Pipeline() {
    dlo_collect_config cc;
    dlo_collect_config_init(&cc);
    cc.duration_s = 0.3;  // smallest recordable run
    cc.seed = 9;
    REQUIRE(dlo_collect(&cc, csv.path.c_str()) == DLO_OK);

    dlo_train_config tc;
    dlo_train_config_init(&tc);
    tc.q = 8;
    tc.epochs = 2;
    tc.batch = 8;
    REQUIRE(dlo_train(csv.path.c_str(), &tc, model.path.c_str(), &stats) ==
            DLO_OK);
  }
};

Pipeline& pipeline() {
  static Pipeline p;
  return p;
}

}  // namespace

TEST_CASE("version and status names") {
  REQUIRE(dlo_version() != nullptr);
  CHECK(std::strchr(dlo_version(), '.') != nullptr);
  CHECK(std::string(dlo_status_name(DLO_OK)) == "ok");
  CHECK(std::string(dlo_status_name(DLO_ERR_IO)) == "io");
  CHECK(std::string(dlo_status_name(DLO_ERR_BAD_CONFIG)) == "bad_config");
  CHECK(std::string(dlo_status_name(DLO_ERR_UNKNOWN)) == "unknown");
}

TEST_CASE("simulator lifecycle through the C surface") {
  dlo_sim_config cfg;
  dlo_sim_config_init(&cfg);
  CHECK(cfg.particle_count == 40);
  CHECK(cfg.feature_count == 10);
  CHECK(cfg.has_table == 0);

  const double anchor[3] = {1.0, 2.0, 3.0};
  dlo_sim* sim = nullptr;
  REQUIRE(dlo_sim_create(&cfg, anchor, &sim) == DLO_OK);
  REQUIRE(sim != nullptr);

  int m = 0;
  CHECK(dlo_sim_feature_count(sim, &m) == DLO_OK);
  CHECK(m == 10);

  double grip[3] = {0, 0, 0};
  CHECK(dlo_sim_gripper_position(sim, grip) == DLO_OK);
  CHECK(grip[0] == doctest::Approx(1.0 + cfg.rod_length));
  CHECK(grip[1] == doctest::Approx(2.0));
  CHECK(grip[2] == doctest::Approx(3.0));

  const double v[3] = {0.02, 0.0, -0.01};
  CHECK(dlo_sim_step(sim, v) == DLO_OK);
  double after[3];
  CHECK(dlo_sim_gripper_position(sim, after) == DLO_OK);
  CHECK(after[0] == doctest::Approx(grip[0] + 0.02 * cfg.dt).epsilon(1e-12));
  CHECK(after[2] == doctest::Approx(grip[2] - 0.01 * cfg.dt).epsilon(1e-12));

  CHECK(dlo_sim_settle(sim, 0.2) == DLO_OK);

  std::vector<double> phi(3 * size_t(m));
  CHECK(dlo_sim_features(sim, phi.data(), phi.size()) == DLO_OK);
  CHECK(dlo_sim_features(sim, phi.data(), phi.size() - 1) ==
        DLO_ERR_INVALID_ARGUMENT);
  CHECK(std::string(dlo_last_error()).find("small") != std::string::npos);

  CHECK(dlo_sim_nail_feature(sim, 3) == DLO_OK);
  CHECK(dlo_sim_nail_feature(sim, 99) == DLO_ERR_INVALID_ARGUMENT);

  dlo_sim_destroy(sim);

  dlo_sim_config bad = cfg;
  bad.particle_count = 2;
  dlo_sim* none = nullptr;
  CHECK(dlo_sim_create(&bad, nullptr, &none) == DLO_ERR_BAD_CONFIG);
  CHECK(none == nullptr);

  CHECK(dlo_sim_create(nullptr, nullptr, &none) == DLO_ERR_INVALID_ARGUMENT);
  CHECK(dlo_sim_step(nullptr, v) == DLO_ERR_INVALID_ARGUMENT);
  CHECK(dlo_sim_features(nullptr, phi.data(), phi.size()) ==
        DLO_ERR_INVALID_ARGUMENT);
}

TEST_CASE("collect defaults put the rod on the table") {
  dlo_collect_config cc;
  dlo_collect_config_init(&cc);
  CHECK(cc.has_table == 1);
  CHECK(cc.table_z == -0.05);
  CHECK(cc.control_hz == 50.0);
}

TEST_CASE("offline pipeline produces a usable model file") {
  Pipeline& p = pipeline();
  CHECK(p.stats.elapsed_s > 0.0);
  CHECK(p.stats.final_loss >= 0.0);

  dlo_net* net = nullptr;
  REQUIRE(dlo_net_load(p.model.path.c_str(), &net) == DLO_OK);
  int q = 0, l = 0, n = 0, mm = 0;
  CHECK(dlo_net_dims(net, &q, &l, &n, &mm) == DLO_OK);
  CHECK(q == 8);
  CHECK(l == 3);
  CHECK(n == 3);
  CHECK(mm == 10);

  std::vector<double> phi(30, 0.1);
  std::vector<double> theta(8, -1.0);
  CHECK(dlo_net_activations(net, phi.data(), phi.size(), theta.data(),
                            theta.size()) == DLO_OK);
  for (double t : theta) {
    CHECK(t >= 0.0);
    CHECK(t <= 1.0);
  }
  CHECK(dlo_net_activations(net, phi.data(), 7, theta.data(), theta.size()) ==
        DLO_ERR_DIMENSION_MISMATCH);

  double J[9];
  CHECK(dlo_net_estimate_jacobian(net, phi.data(), phi.size(), 10, J, 9) ==
        DLO_OK);  // target head
  CHECK(dlo_net_estimate_jacobian(net, phi.data(), phi.size(), 11, J, 9) ==
        DLO_ERR_INVALID_ARGUMENT);
  CHECK(dlo_net_estimate_jacobian(net, phi.data(), phi.size(), 0, J, 8) ==
        DLO_ERR_INVALID_ARGUMENT);

  // Save -> reload is byte-identical.
  TempPath copy("model_copy.bin");
  CHECK(dlo_net_save(net, copy.path.c_str()) == DLO_OK);
  CHECK(slurp(copy.path) == slurp(p.model.path));
  dlo_net_destroy(net);

  double loss = -1.0;
  CHECK(dlo_evaluate_loss(p.model.path.c_str(), p.csv.path.c_str(), 1.0, 4,
                          &loss) == DLO_OK);
  CHECK(loss >= 0.0);
}

TEST_CASE("model load failure taxonomy through the C surface") {
  dlo_net* net = nullptr;
  CHECK(dlo_net_load("/tmp/dlo_capi_no_such_model.bin", &net) == DLO_ERR_IO);
  CHECK(net == nullptr);
  CHECK(std::strlen(dlo_last_error()) > 0);

  Pipeline& p = pipeline();

  TempPath stub("stub.bin");
  spit(stub.path, {'h', 'e', 'l', 'l', 'o'});  // shorter than any header
  CHECK(dlo_net_load(stub.path.c_str(), &net) == DLO_ERR_IO);

  TempPath alien("alien.bin");
  spit(alien.path, std::vector<char>(64, 'x'));  // header-sized, wrong magic
  CHECK(dlo_net_load(alien.path.c_str(), &net) == DLO_ERR_VERSION_MISMATCH);

  std::vector<char> good = slurp(p.model.path);
  TempPath flipped("flipped.bin");
  std::vector<char> bad = good;
  bad[40] = char(bad[40] ^ 0x01);  // payload byte behind the checksum
  spit(flipped.path, bad);
  CHECK(dlo_net_load(flipped.path.c_str(), &net) == DLO_ERR_CORRUPT_PAYLOAD);

  TempPath shorty("short.bin");
  spit(shorty.path, std::vector<char>(good.begin(), good.end() - 13));
  CHECK(dlo_net_load(shorty.path.c_str(), &net) == DLO_ERR_DIMENSION_MISMATCH);
}

TEST_CASE("gradcheck through the C surface") {
  dlo_gradcheck_report rep;
  REQUIRE(dlo_gradcheck(3, 5, &rep) == DLO_OK);
  CHECK(rep.configs == 3);
  CHECK(rep.params_checked > 0);
  CHECK(rep.max_rel_err < 1e-5);
  CHECK(dlo_gradcheck(0, 5, &rep) == DLO_ERR_INVALID_ARGUMENT);
  CHECK(dlo_gradcheck(3, 5, nullptr) == DLO_ERR_INVALID_ARGUMENT);
}

TEST_CASE("scenario execution through the C surface") {
  Pipeline& p = pipeline();

  TempPath scen("scenario.txt");
  {
    std::ofstream out(scen.path);
    out << "name=capi-smoke\n";
    out << "kp=0.5\n";
    out << "stage_budget_s=2\n";
    out << "stage=4;0.01,0,0;0;0\n";
  }

  TempPath ticks("ticks.csv");
  dlo_scenario_outcome oc;
  REQUIRE(dlo_run_scenario(scen.path.c_str(), p.model.path.c_str(),
                           ticks.path.c_str(), 0, 1, 123, &oc) == DLO_OK);
  CHECK(oc.stages == 1);
  CHECK(oc.elapsed_s > 0.0);
  CHECK(oc.final_err >= 0.0);
  CHECK(oc.stage[0].feature == 4);
  CHECK(oc.stage[0].final_err == oc.final_err);
  if (!oc.stage[0].reached) CHECK(std::isinf(oc.stage[0].time_to_reach));
  std::ifstream csv(ticks.path);
  std::string header;
  std::getline(csv, header);
  CHECK(header == "t,dy_norm,ew_norm,u_0,u_1,u_2,rank,V_task");

  CHECK(dlo_run_scenario("task9", p.model.path.c_str(), nullptr, -1, 0, 0,
                         &oc) == DLO_ERR_IO);  // not builtin, not a file
  CHECK(dlo_run_scenario(nullptr, p.model.path.c_str(), nullptr, -1, 0, 0,
                         &oc) == DLO_ERR_INVALID_ARGUMENT);
}
