#include "diprober/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

namespace diprober {

SimConfig resolve_config(SimConfig cfg, const Network& network) {
  network.validate();
  if (cfg.rounds < 1) throw std::invalid_argument("config: rounds must be >= 1");
  if (!(cfg.lambda_s > 0.0)) throw std::invalid_argument("config: lambda_s must be positive");
  if (cfg.underloaded && !(cfg.cap_min > 0.0 && cfg.cap_min <= cfg.cap_max))
    throw std::invalid_argument("config: cap range must satisfy 0 < cap_min <= cap_max");
  if (cfg.noise && !(cfg.noise->y_min <= 1.0 && 1.0 <= cfg.noise->y_max && cfg.noise->stddev > 0.0))
    throw std::invalid_argument("config: noise bounds must bracket 1 with positive stddev");

  if (cfg.estimator.grid.bins() == 0) {
    double min_cap = network.relays.front().true_capacity;
    for (const auto& r : network.relays) min_cap = std::min(min_cap, r.true_capacity);
    const double lo = std::min(1.0, min_cap / 10.0);
    const double hi = 1.1 * network.max_true_capacity();
    const double base = cfg.estimator.grid.base();
    cfg.estimator.grid = QuantizationGrid::make(base, lo, hi);
  }
  if (!(cfg.estimator.c_avg_client > 0.0)) {
    if (cfg.underloaded) {
      cfg.estimator.c_avg_client = 0.5 * (cfg.cap_min + cfg.cap_max);
    } else {
      // Fully utilized clients are bottlenecked by the scarce exit pool.
      double exit_total = 0.0;
      for (const auto& r : network.relays)
        if (r.cls == RelayClass::Exit) exit_total += r.true_capacity;
      cfg.estimator.c_avg_client = exit_total / cfg.lambda_s;
    }
  }
  cfg.estimator.lambda_s = cfg.lambda_s;
  return cfg;
}

namespace {

std::vector<double> extract_m1(const std::vector<MeasurementPair>& pairs) {
  std::vector<double> out(pairs.size());
  for (std::size_t j = 0; j < pairs.size(); ++j) out[j] = pairs[j].m1;
  return out;
}

}  // namespace

std::vector<RoundRecord> run_simulation(const Network& network_in, const SimConfig& cfg_in) {
  Network network = network_in;  // owns the observed-bandwidth windows
  const SimConfig cfg = resolve_config(cfg_in, network);
  const std::size_t n = network.size();
  const auto true_caps = network.true_capacities();

  const double initial_estimate =
      std::sqrt(cfg.estimator.grid.min_edge() * cfg.estimator.grid.max_edge());
  std::vector<double> estimates(n, initial_estimate);
  if (cfg.method == EstimatorKind::Actual) estimates = true_caps;
  ConsensusRound weights = compute_weights(estimates, network);

  LikelihoodTable table;
  if (cfg.method == EstimatorKind::DiProberWH || cfg.method == EstimatorKind::MleFlowQ)
    table = LikelihoodTable(n, cfg.estimator.grid.bins());

  std::vector<RoundRecord> records;
  records.reserve(cfg.rounds);
  for (std::size_t t = 0; t < cfg.rounds; ++t) {
    try {
      Rng round_rng = Rng::derive(cfg.seed, 2 * t);
      Rng noise_rng = Rng::derive(cfg.seed, 2 * t + 1);

      RoundRecord rec;
      rec.round = t;
      rec.weights_used = weights;
      rec.weights_used.round_index = t;
      rec.selection_weights = effective_selection_weights(weights, network);

      rec.user_count = sample_user_count(cfg.lambda_s, round_rng);
      auto paths = sample_paths(rec.user_count, weights, network, round_rng, cfg.underloaded,
                                cfg.cap_min, cfg.cap_max);
      RoundMeasurement meas = measure_relay_pair(true_caps, paths);

      if (cfg.noise) {
        for (auto& p : meas.pairs) {
          p.m1 *= noise_rng.truncated_normal(cfg.noise->mean, cfg.noise->stddev, cfg.noise->y_min,
                                             cfg.noise->y_max);
          p.m2 *= noise_rng.truncated_normal(cfg.noise->mean, cfg.noise->stddev, cfg.noise->y_min,
                                             cfg.noise->y_max);
        }
      }

      for (auto& relay : network.relays) {
        relay.observed_bw_window.push_back(meas.relay_throughput[relay.id]);
        while (relay.observed_bw_window.size() > cfg.window) relay.observed_bw_window.pop_front();
      }

      rec.fell_back.assign(n, false);
      switch (cfg.method) {
        case EstimatorKind::Actual:
          estimates = true_caps;
          break;
        case EstimatorKind::TorFlowP:
          estimates = torflow_p_update(estimates, extract_m1(meas.pairs));
          break;
        case EstimatorKind::Sbws: {
          std::vector<double> observed(n);
          for (const auto& relay : network.relays) observed[relay.id] = relay.observed_bandwidth();
          estimates = sbws_update(observed, extract_m1(meas.pairs));
          break;
        }
        case EstimatorKind::MleFlowQ: {
          auto upd = mleflow_q_update(table, extract_m1(meas.pairs), rec.selection_weights,
                                      estimates, cfg.estimator);
          estimates = std::move(upd.estimates);
          rec.fell_back = std::move(upd.fell_back);
          break;
        }
        case EstimatorKind::DiProberO: {
          for (std::size_t j = 0; j < n; ++j)
            estimates[j] = diprober_o_estimate(meas.pairs[j], rec.selection_weights[j], cfg.estimator);
          break;
        }
        case EstimatorKind::DiProberWH: {
          auto upd =
              diprober_wh_update(table, meas.pairs, rec.selection_weights, estimates, cfg.estimator);
          estimates = std::move(upd.estimates);
          rec.fell_back = std::move(upd.fell_back);
          break;
        }
      }

      weights = compute_weights(estimates, network);

      rec.estimates = estimates;
      rec.m1 = extract_m1(meas.pairs);
      rec.m2.resize(n);
      for (std::size_t j = 0; j < n; ++j) rec.m2[j] = meas.pairs[j].m2;
      rec.client_flow_count = std::move(meas.load.client_flow_count);
      rec.client_throughput = std::move(meas.load.client_throughput);
      rec.client_path_rates = std::move(meas.client_flow_rates);
      records.push_back(std::move(rec));
    } catch (const std::exception& e) {
      throw std::runtime_error("round " + std::to_string(t) + ": " + e.what());
    }
  }
  return records;
}

std::vector<std::vector<RoundRecord>> run_monte_carlo(const Network& network, const SimConfig& cfg,
                                                      std::size_t trials, std::size_t threads) {
  if (trials < 1) throw std::invalid_argument("run_monte_carlo: trials must be >= 1");
  std::vector<std::vector<RoundRecord>> results(trials);

  if (threads == 0) threads = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  threads = std::min(threads, trials);

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string error;
  std::mutex error_mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= trials || failed.load()) return;
      SimConfig trial_cfg = cfg;
      trial_cfg.seed = Rng::derive(cfg.seed, 0x7472696131ULL + i).next_u64();
      try {
        results[i] = run_simulation(network, trial_cfg);
      } catch (const std::exception& e) {
        std::scoped_lock lock(error_mu);
        failed = true;
        if (error.empty()) error = "trial " + std::to_string(i) + ": " + e.what();
      }
    }
  };

  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failed) throw std::runtime_error(error);
  return results;
}

}  // namespace diprober
