#include "diprober/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace diprober {

namespace {

StatLine aggregate(const std::vector<double>& values) {
  StatLine s;
  s.min = values.front();
  s.max = values.front();
  double sum = 0.0;
  for (double v : values) {
    sum += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(values.size()));
  return s;
}

}  // namespace

ErrorStats compute_error_stats(const std::vector<RoundRecord>& records, const Network& network) {
  if (records.empty()) throw std::invalid_argument("compute_error_stats: no records");
  ErrorStats out;
  for (const auto& rec : records) {
    std::vector<double> by_class[3];
    for (const auto& r : network.relays) {
      const double err = std::abs(rec.estimates[r.id] - r.true_capacity) / r.true_capacity;
      by_class[static_cast<int>(r.cls)].push_back(err);
    }
    out.guard.push_back(aggregate(by_class[static_cast<int>(RelayClass::Guard)]));
    out.middle.push_back(aggregate(by_class[static_cast<int>(RelayClass::Middle)]));
    out.exit.push_back(aggregate(by_class[static_cast<int>(RelayClass::Exit)]));
  }
  return out;
}

PathBandwidthStats compute_path_stats(const std::vector<RoundRecord>& records) {
  PathBandwidthStats out;
  for (const auto& rec : records) {
    if (rec.client_path_rates.empty()) {
      out.rounds.push_back(std::nullopt);
    } else {
      out.rounds.push_back(aggregate(rec.client_path_rates));
    }
  }
  return out;
}

std::vector<double> ideal_selection_weights(const Network& network) {
  ConsensusRound w = compute_weights(network.true_capacities(), network);
  return effective_selection_weights(w, network);
}

McStats mc_estimate_stats(const std::vector<std::vector<RoundRecord>>& trials) {
  if (trials.empty()) throw std::invalid_argument("mc_estimate_stats: no trials");
  const std::size_t rounds = trials.front().size();
  const std::size_t n = trials.front().front().estimates.size();
  const double k = static_cast<double>(trials.size());
  McStats out;
  out.mean.assign(rounds, std::vector<double>(n, 0.0));
  out.variance.assign(rounds, std::vector<double>(n, 0.0));
  for (std::size_t t = 0; t < rounds; ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      double sum = 0.0;
      for (const auto& trial : trials) sum += trial[t].estimates[j];
      const double mean = sum / k;
      double ss = 0.0;
      for (const auto& trial : trials) {
        const double d = trial[t].estimates[j] - mean;
        ss += d * d;
      }
      out.mean[t][j] = mean;
      out.variance[t][j] = trials.size() > 1 ? ss / (k - 1.0) : 0.0;
    }
  }
  return out;
}

std::string format_float(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

namespace {

nlohmann::json stat_json(std::size_t round, const StatLine& s) {
  // Numbers are rounded to 9 significant digits so serialization is stable.
  auto f = [](double v) { return std::stod(format_float(v)); };
  return {{"round", round}, {"mean", f(s.mean)}, {"std", f(s.std)}, {"max", f(s.max)}, {"min", f(s.min)}};
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace

void export_outputs(const std::vector<RoundRecord>& records, const Network& network,
                    const ErrorStats& errors, const PathBandwidthStats& path_stats,
                    EstimatorKind method, std::uint64_t seed, const std::string& out_dir) {
  std::string csv =
      "round,relay_id,class,true_capacity_kbps,weight_exit,weight_guard,weight_middle,"
      "m1_kbps,m2_kbps,estimate_kbps,rel_error\n";
  for (const auto& rec : records) {
    for (const auto& r : network.relays) {
      const double rel_err = std::abs(rec.estimates[r.id] - r.true_capacity) / r.true_capacity;
      csv += std::to_string(rec.round);
      csv += ',';
      csv += std::to_string(r.id);
      csv += ',';
      csv += to_string(r.cls);
      csv += ',';
      csv += format_float(r.true_capacity);
      csv += ',';
      csv += format_float(rec.weights_used.weight_exit[r.id]);
      csv += ',';
      csv += format_float(rec.weights_used.weight_guard[r.id]);
      csv += ',';
      csv += format_float(rec.weights_used.weight_middle[r.id]);
      csv += ',';
      csv += format_float(rec.m1[r.id]);
      csv += ',';
      csv += format_float(rec.m2[r.id]);
      csv += ',';
      csv += format_float(rec.estimates[r.id]);
      csv += ',';
      csv += format_float(rel_err);
      csv += '\n';
    }
  }
  write_file(out_dir + "/rounds.csv", csv);

  nlohmann::json summary;
  summary["method"] = to_string(method);
  summary["seed"] = seed;
  summary["rounds"] = records.size();
  auto series = [](const std::vector<StatLine>& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t t = 0; t < v.size(); ++t) arr.push_back(stat_json(t, v[t]));
    return arr;
  };
  summary["per_class"] = {{"guard", series(errors.guard)},
                          {"middle", series(errors.middle)},
                          {"exit", series(errors.exit)}};
  nlohmann::json path_arr = nlohmann::json::array();
  for (std::size_t t = 0; t < path_stats.rounds.size(); ++t) {
    if (path_stats.rounds[t]) {
      path_arr.push_back(stat_json(t, *path_stats.rounds[t]));
    } else {
      path_arr.push_back({{"round", t}, {"empty", true}});
    }
  }
  summary["path_bw"] = path_arr;
  write_file(out_dir + "/summary.json", summary.dump(2) + "\n");
}

}  // namespace diprober
