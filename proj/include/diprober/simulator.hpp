#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "diprober/allocator.hpp"
#include "diprober/estimators.hpp"
#include "diprober/network.hpp"

namespace diprober {

// Multiplicative measurement noise, truncated normal around 1. Off by
// default; all baseline runs are noise-free.
struct NoiseModel {
  double mean = 1.0;
  double stddev = 0.05;
  double y_min = 0.7;
  double y_max = 1.3;
};

struct SimConfig {
  double lambda_s = 5000.0;
  std::size_t rounds = 50;
  EstimatorKind method = EstimatorKind::DiProberWH;
  std::uint64_t seed = 0;
  bool underloaded = false;
  double cap_min = 64.0;   // kb/s (8 KB/s)
  double cap_max = 144.0;  // kb/s (18 KB/s)
  std::optional<NoiseModel> noise;
  EstimatorConfig estimator;
  std::size_t window = 5;  // observed-bandwidth window, rounds
};

struct RoundRecord {
  std::size_t round = 0;
  std::uint64_t user_count = 0;
  ConsensusRound weights_used;            // the consensus this round's paths were drawn from
  std::vector<double> selection_weights;  // per-relay effective path probability
  std::vector<double> estimates;          // published after this round's update
  std::vector<double> m1;
  std::vector<double> m2;
  std::vector<std::size_t> client_flow_count;  // X_t[j]
  std::vector<double> client_throughput;       // kb/s, probe-free
  std::vector<double> client_path_rates;       // probe-free per-flow rates
  std::vector<bool> fell_back;
};

// Fills in derived defaults: the quantization grid from the network's
// capacity range and, when unset, the average client utilization.
SimConfig resolve_config(SimConfig cfg, const Network& network);

// The synchronous round loop: sample users, build paths, allocate, dual
// probe, update estimates with the configured method, recompute weights,
// drop all paths.
std::vector<RoundRecord> run_simulation(const Network& network, const SimConfig& cfg);

// K independent trials with seeds derived from (cfg.seed, trial). Results
// are identical for any thread count.
std::vector<std::vector<RoundRecord>> run_monte_carlo(const Network& network, const SimConfig& cfg,
                                                      std::size_t trials,
                                                      std::size_t threads = 0);

}  // namespace diprober
