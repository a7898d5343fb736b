#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>
#include <json.hpp>

#include "diprober/runner.hpp"

using namespace diprober;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config parsing applies values and rejects unknown keys") {
  nlohmann::json j = {{"method", "torflow-p"}, {"rounds", 7},      {"lambda_s", 1234.0},
                      {"seed", 99},            {"trials", 3},      {"quant_base", 1.05},
                      {"noise", true},         {"out_dir", "x"},   {"window", 4},
                      {"population", {{"guards", 5}, {"exits", 2}}}};
  auto spec = run_spec_from_json(j);
  CHECK(spec.sim.method == EstimatorKind::TorFlowP);
  CHECK(spec.sim.rounds == 7);
  CHECK(spec.sim.lambda_s == 1234.0);
  CHECK(spec.sim.seed == 99);
  CHECK(spec.trials == 3);
  CHECK(spec.sim.estimator.grid.base() == 1.05);
  CHECK(spec.sim.estimator.grid.bins() == 0);  // bounds resolved later
  CHECK(spec.sim.noise.has_value());
  CHECK(spec.sim.window == 4);
  CHECK(spec.population.guards == 5);
  CHECK(spec.population.exits == 2);
  CHECK(spec.population.middles == 22);  // default preserved

  CHECK_THROWS(run_spec_from_json({{"metod", "actual"}}));
  CHECK_THROWS(run_spec_from_json({{"method", "pid"}}));
  CHECK_THROWS(run_spec_from_json({{"quant_base", 0.9}}));
  CHECK_THROWS(run_spec_from_json({{"case_tolerance", 0.7}}));
  CHECK_THROWS(run_spec_from_json({{"population", {{"guard_count", 5}}}}));
}

TEST_CASE("a manifest is accepted wherever a config is") {
  RunSpec spec;
  spec.sim.rounds = 3;
  spec.sim.lambda_s = 222.0;
  nlohmann::json manifest = {{"artifact_version", "1.0.0"}, {"config", run_spec_to_json(spec)}};
  auto back = run_spec_from_json(manifest);
  CHECK(back.sim.rounds == 3);
  CHECK(back.sim.lambda_s == 222.0);
}

TEST_CASE("spec serialization round-trips through json") {
  RunSpec spec;
  spec.sim.method = EstimatorKind::Sbws;
  spec.sim.rounds = 9;
  spec.sim.seed = 77;
  spec.sim.underloaded = true;
  spec.sim.noise = NoiseModel{1.0, 0.1, 0.8, 1.2};
  spec.trials = 4;
  spec.out_dir = "somewhere";
  auto back = run_spec_from_json(run_spec_to_json(spec));
  CHECK(back.sim.method == spec.sim.method);
  CHECK(back.sim.rounds == spec.sim.rounds);
  CHECK(back.sim.seed == spec.sim.seed);
  CHECK(back.sim.underloaded == spec.sim.underloaded);
  REQUIRE(back.sim.noise.has_value());
  CHECK(back.sim.noise->stddev == 0.1);
  CHECK(back.trials == 4);
  CHECK(back.out_dir == "somewhere");
}

TEST_CASE("a run writes its outputs and its manifest reproduces them") {
  const std::string dir_a = "runner_tmp_a", dir_b = "runner_tmp_b";
  RunSpec spec;
  spec.sim.method = EstimatorKind::DiProberWH;
  spec.sim.rounds = 3;
  spec.sim.lambda_s = 200.0;
  spec.sim.seed = 123;
  spec.population = {4, 4, 3, 100.0, 10000.0};
  spec.out_dir = dir_a;
  execute_run(spec);
  CHECK(fs::exists(dir_a + "/rounds.csv"));
  CHECK(fs::exists(dir_a + "/summary.json"));
  CHECK(fs::exists(dir_a + "/manifest.json"));
  CHECK(!fs::exists(dir_a + "/mc_summary.json"));

  auto spec_b = load_run_spec(dir_a + "/manifest.json");
  spec_b.out_dir = dir_b;
  execute_run(spec_b);
  CHECK(slurp(dir_a + "/rounds.csv") == slurp(dir_b + "/rounds.csv"));
  CHECK(slurp(dir_a + "/summary.json") == slurp(dir_b + "/summary.json"));

  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST_CASE("monte carlo runs add mc_summary.json") {
  const std::string dir = "runner_tmp_mc";
  RunSpec spec;
  spec.sim.rounds = 2;
  spec.sim.lambda_s = 150.0;
  spec.sim.seed = 5;
  spec.trials = 3;
  spec.threads = 2;
  spec.population = {3, 3, 3, 100.0, 5000.0};
  spec.out_dir = dir;
  execute_run(spec);
  auto mc = nlohmann::json::parse(slurp(dir + "/mc_summary.json"));
  CHECK(mc["trials"] == 3);
  CHECK(mc["rounds"] == 2);
  CHECK(mc["relays"] == 9);
  CHECK(mc["estimate_mean"].size() == 2);
  CHECK(mc["estimate_mean"][0].size() == 9);
  fs::remove_all(dir);
}

TEST_CASE("relay csv populations flow through the runner with a digest") {
  const std::string dir = "runner_tmp_csv";
  const std::string csv = "runner_tmp_relays.csv";
  {
    std::ofstream out(csv);
    out << "relay_id,class,capacity_kbps\n";
    out << "0,guard,4000\n1,guard,3000\n2,middle,2500\n3,exit,1500\n4,exit,900\n";
  }
  RunSpec spec;
  spec.sim.rounds = 2;
  spec.sim.lambda_s = 100.0;
  spec.relays_csv = csv;
  spec.out_dir = dir;
  execute_run(spec);
  auto manifest = nlohmann::json::parse(slurp(dir + "/manifest.json"));
  CHECK(manifest["input_digests"]["relays_csv"] == fnv1a_file_digest(csv));
  CHECK(manifest["config"]["relays_csv"] == csv);
  fs::remove_all(dir);
  fs::remove(csv);
}

TEST_CASE("digests are stable and content-sensitive") {
  const std::string p1 = "digest_tmp_1", p2 = "digest_tmp_2";
  { std::ofstream(p1) << "hello"; }
  { std::ofstream(p2) << "hello!"; }
  CHECK(fnv1a_file_digest(p1) == fnv1a_file_digest(p1));
  CHECK(fnv1a_file_digest(p1) != fnv1a_file_digest(p2));
  CHECK_THROWS(fnv1a_file_digest("no_such_file"));
  fs::remove(p1);
  fs::remove(p2);
}
