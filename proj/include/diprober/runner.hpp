#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "diprober/simulator.hpp"

namespace diprober {

// Synthetic population parameters used when no relay CSV is given.
struct PopulationSpec {
  std::size_t guards = 24;
  std::size_t middles = 22;
  std::size_t exits = 14;
  double cap_lo = 100.0;     // kb/s
  double cap_hi = 169000.0;  // kb/s
};

// Fully resolved run description; serialized into the manifest.
struct RunSpec {
  SimConfig sim;
  std::size_t trials = 1;
  std::size_t threads = 0;  // 0 = hardware concurrency
  std::string relays_csv;   // empty = synthetic population
  PopulationSpec population;
  std::string out_dir = ".";
};

// JSON round trip; unknown keys are rejected. A manifest (an object with a
// "config" member) is accepted wherever a config is.
RunSpec run_spec_from_json(const nlohmann::json& j);
nlohmann::json run_spec_to_json(const RunSpec& spec);

RunSpec load_run_spec(const std::string& config_path);

Network realize_network(const RunSpec& spec);

// Executes the run (simulation or Monte Carlo), writing rounds.csv,
// summary.json, mc_summary.json (trials > 1) and manifest.json.
void execute_run(const RunSpec& spec);

std::string fnv1a_file_digest(const std::string& path);

}  // namespace diprober
