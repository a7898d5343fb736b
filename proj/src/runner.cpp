#include "diprober/runner.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

#include "diprober/metrics.hpp"

namespace diprober {

namespace {

constexpr const char* kArtifactVersion = "1.0.0";

void check_known_keys(const nlohmann::json& j, const std::set<std::string>& known,
                      const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw std::invalid_argument(where + ": unknown key '" + it.key() + "'");
}

}  // namespace

RunSpec run_spec_from_json(const nlohmann::json& j_in) {
  const nlohmann::json& j = j_in.contains("config") ? j_in.at("config") : j_in;
  check_known_keys(j, {"method", "rounds", "lambda_s", "seed", "underloaded", "cap_min_kbps",
                       "cap_max_kbps", "noise", "quant_base", "case_tolerance",
                       "c_avg_client_kbps", "window", "trials", "threads", "relays_csv",
                       "population", "out_dir"},
                   "config");
  RunSpec spec;
  if (j.contains("method")) spec.sim.method = estimator_kind_from_string(j.at("method").get<std::string>());
  if (j.contains("rounds")) spec.sim.rounds = j.at("rounds").get<std::size_t>();
  if (j.contains("lambda_s")) spec.sim.lambda_s = j.at("lambda_s").get<double>();
  if (j.contains("seed")) spec.sim.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("underloaded")) spec.sim.underloaded = j.at("underloaded").get<bool>();
  if (j.contains("cap_min_kbps")) spec.sim.cap_min = j.at("cap_min_kbps").get<double>();
  if (j.contains("cap_max_kbps")) spec.sim.cap_max = j.at("cap_max_kbps").get<double>();
  if (j.contains("noise")) {
    const auto& nj = j.at("noise");
    if (nj.is_boolean()) {
      if (nj.get<bool>()) spec.sim.noise = NoiseModel{};
    } else {
      check_known_keys(nj, {"mean", "stddev", "y_min", "y_max"}, "config.noise");
      NoiseModel nm;
      if (nj.contains("mean")) nm.mean = nj.at("mean").get<double>();
      if (nj.contains("stddev")) nm.stddev = nj.at("stddev").get<double>();
      if (nj.contains("y_min")) nm.y_min = nj.at("y_min").get<double>();
      if (nj.contains("y_max")) nm.y_max = nj.at("y_max").get<double>();
      spec.sim.noise = nm;
    }
  }
  if (j.contains("quant_base")) {
    const double base = j.at("quant_base").get<double>();
    if (!(base > 1.0)) throw std::invalid_argument("config: quant_base must be > 1");
    spec.sim.estimator.grid = QuantizationGrid::base_only(base);
  }
  if (j.contains("case_tolerance")) {
    spec.sim.estimator.case_tolerance = j.at("case_tolerance").get<double>();
    if (!(spec.sim.estimator.case_tolerance >= 0.0 && spec.sim.estimator.case_tolerance < 0.5))
      throw std::invalid_argument("config: case_tolerance must be in [0, 0.5)");
  }
  if (j.contains("c_avg_client_kbps")) spec.sim.estimator.c_avg_client = j.at("c_avg_client_kbps").get<double>();
  if (j.contains("window")) spec.sim.window = j.at("window").get<std::size_t>();
  if (j.contains("trials")) spec.trials = j.at("trials").get<std::size_t>();
  if (j.contains("threads")) spec.threads = j.at("threads").get<std::size_t>();
  if (j.contains("relays_csv")) spec.relays_csv = j.at("relays_csv").get<std::string>();
  if (j.contains("population")) {
    const auto& pj = j.at("population");
    check_known_keys(pj, {"guards", "middles", "exits", "cap_lo_kbps", "cap_hi_kbps"}, "config.population");
    if (pj.contains("guards")) spec.population.guards = pj.at("guards").get<std::size_t>();
    if (pj.contains("middles")) spec.population.middles = pj.at("middles").get<std::size_t>();
    if (pj.contains("exits")) spec.population.exits = pj.at("exits").get<std::size_t>();
    if (pj.contains("cap_lo_kbps")) spec.population.cap_lo = pj.at("cap_lo_kbps").get<double>();
    if (pj.contains("cap_hi_kbps")) spec.population.cap_hi = pj.at("cap_hi_kbps").get<double>();
  }
  if (j.contains("out_dir")) spec.out_dir = j.at("out_dir").get<std::string>();
  return spec;
}

nlohmann::json run_spec_to_json(const RunSpec& spec) {
  nlohmann::json j;
  j["method"] = to_string(spec.sim.method);
  j["rounds"] = spec.sim.rounds;
  j["lambda_s"] = spec.sim.lambda_s;
  j["seed"] = spec.sim.seed;
  j["underloaded"] = spec.sim.underloaded;
  j["cap_min_kbps"] = spec.sim.cap_min;
  j["cap_max_kbps"] = spec.sim.cap_max;
  if (spec.sim.noise) {
    j["noise"] = {{"mean", spec.sim.noise->mean},
                  {"stddev", spec.sim.noise->stddev},
                  {"y_min", spec.sim.noise->y_min},
                  {"y_max", spec.sim.noise->y_max}};
  } else {
    j["noise"] = false;
  }
  j["quant_base"] = spec.sim.estimator.grid.base();
  j["case_tolerance"] = spec.sim.estimator.case_tolerance;
  j["c_avg_client_kbps"] = spec.sim.estimator.c_avg_client;
  j["window"] = spec.sim.window;
  j["trials"] = spec.trials;
  j["threads"] = spec.threads;
  j["relays_csv"] = spec.relays_csv;
  j["population"] = {{"guards", spec.population.guards},
                     {"middles", spec.population.middles},
                     {"exits", spec.population.exits},
                     {"cap_lo_kbps", spec.population.cap_lo},
                     {"cap_hi_kbps", spec.population.cap_hi}};
  j["out_dir"] = spec.out_dir;
  return j;
}

RunSpec load_run_spec(const std::string& config_path) {
  std::ifstream in(config_path);
  if (!in) throw std::runtime_error("cannot open config: " + config_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("config " + config_path + ": " + e.what());
  }
  return run_spec_from_json(j);
}

Network realize_network(const RunSpec& spec) {
  if (!spec.relays_csv.empty()) return load_network_csv(spec.relays_csv);
  Rng rng = Rng::derive(spec.sim.seed, 0x706f70756cULL);
  return generate_network(spec.population.guards, spec.population.middles, spec.population.exits,
                          spec.population.cap_lo, spec.population.cap_hi, rng);
}

std::string fnv1a_file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for digest: " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void execute_run(const RunSpec& spec) {
  std::filesystem::create_directories(spec.out_dir);
  Network network = realize_network(spec);

  nlohmann::json manifest;
  manifest["artifact_version"] = kArtifactVersion;
  manifest["input_digests"] = nlohmann::json::object();
  if (!spec.relays_csv.empty())
    manifest["input_digests"]["relays_csv"] = fnv1a_file_digest(spec.relays_csv);
  manifest["config"] = run_spec_to_json(spec);

  if (spec.trials <= 1) {
    auto records = run_simulation(network, spec.sim);
    auto errors = compute_error_stats(records, network);
    auto path_stats = compute_path_stats(records);
    export_outputs(records, network, errors, path_stats, spec.sim.method, spec.sim.seed,
                   spec.out_dir);
  } else {
    auto trials = run_monte_carlo(network, spec.sim, spec.trials, spec.threads);
    auto errors = compute_error_stats(trials.front(), network);
    auto path_stats = compute_path_stats(trials.front());
    export_outputs(trials.front(), network, errors, path_stats, spec.sim.method, spec.sim.seed,
                   spec.out_dir);
    McStats stats = mc_estimate_stats(trials);
    nlohmann::json mc;
    mc["method"] = to_string(spec.sim.method);
    mc["seed"] = spec.sim.seed;
    mc["trials"] = spec.trials;
    mc["rounds"] = spec.sim.rounds;
    mc["relays"] = network.size();
    auto to_arr = [](const std::vector<std::vector<double>>& m) {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& row : m) {
        nlohmann::json r = nlohmann::json::array();
        for (double v : row) r.push_back(std::stod(format_float(v)));
        arr.push_back(r);
      }
      return arr;
    };
    mc["estimate_mean"] = to_arr(stats.mean);
    mc["estimate_variance"] = to_arr(stats.variance);
    std::ofstream out(spec.out_dir + "/mc_summary.json", std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write mc_summary.json in " + spec.out_dir);
    out << mc.dump(2) << "\n";
  }

  std::ofstream mout(spec.out_dir + "/manifest.json", std::ios::binary | std::ios::trunc);
  if (!mout) throw std::runtime_error("cannot write manifest.json in " + spec.out_dir);
  mout << manifest.dump(2) << "\n";
}

}  // namespace diprober
