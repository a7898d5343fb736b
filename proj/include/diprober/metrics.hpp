#pragma once

#include <optional>
#include <string>
#include <vector>

#include "diprober/simulator.hpp"

namespace diprober {

// Population-std aggregate (divisor N, not N-1).
struct StatLine {
  double mean = 0.0;
  double std = 0.0;
  double max = 0.0;
  double min = 0.0;
};

// Per relay-class, per round aggregates of |C_t - C*| / C*.
struct ErrorStats {
  std::vector<StatLine> guard;
  std::vector<StatLine> middle;
  std::vector<StatLine> exit;
};

// Per round aggregates of the probe-free client path rates. Rounds with no
// client flows are explicitly absent.
struct PathBandwidthStats {
  std::vector<std::optional<StatLine>> rounds;
};

ErrorStats compute_error_stats(const std::vector<RoundRecord>& records, const Network& network);

PathBandwidthStats compute_path_stats(const std::vector<RoundRecord>& records);

// The true-capacity-proportional selection weights (the w* of the
// convergence bound).
std::vector<double> ideal_selection_weights(const Network& network);

// Per (round, relay) sample mean and sample variance of the estimates over
// Monte Carlo trials.
struct McStats {
  std::vector<std::vector<double>> mean;      // [round][relay]
  std::vector<std::vector<double>> variance;  // [round][relay], divisor K-1
};

McStats mc_estimate_stats(const std::vector<std::vector<RoundRecord>>& trials);

// rounds.csv + summary.json, byte-deterministic; floats carry 9 significant
// digits.
void export_outputs(const std::vector<RoundRecord>& records, const Network& network,
                    const ErrorStats& errors, const PathBandwidthStats& path_stats,
                    EstimatorKind method, std::uint64_t seed, const std::string& out_dir);

std::string format_float(double v);  // %.9g

}  // namespace diprober
