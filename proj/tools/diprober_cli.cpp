#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "diprober/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Flow-level Tor relay capacity estimation simulator"};

  std::string config_path;
  std::string relays_csv;
  std::string method;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::size_t rounds = 0, trials = 0, threads = 0, window = 0;
  double lambda = 0.0, cap_min = 0.0, cap_max = 0.0, quant_base = 0.0;
  double case_tolerance = -1.0, c_avg_client = 0.0;
  bool underloaded = false, noise = false;

  app.add_option("--config", config_path, "JSON config file (or a manifest.json from a previous run)");
  app.add_option("--relays", relays_csv, "relay population CSV (relay_id,class,capacity_kbps)");
  app.add_option("--method", method, "actual | torflow-p | sbws | mleflow-q | diprober-o | diprober-wh");
  app.add_option("--rounds", rounds, "measurement periods");
  app.add_option("--seed", seed, "RNG seed");
  app.add_option("--lambda", lambda, "mean user paths per round");
  app.add_flag("--underloaded", underloaded, "cap each client flow with a private fourth relay");
  app.add_option("--cap-min", cap_min, "client cap lower bound, kb/s");
  app.add_option("--cap-max", cap_max, "client cap upper bound, kb/s");
  app.add_flag("--noise", noise, "enable multiplicative measurement noise");
  app.add_option("--quant-base", quant_base, "quantization grid base (> 1)");
  app.add_option("--case-tolerance", case_tolerance, "relative tolerance for the probe case split");
  app.add_option("--c-avg-client", c_avg_client, "average client utilization, kb/s");
  app.add_option("--trials", trials, "Monte Carlo trials (> 1 enables mc_summary.json)");
  app.add_option("--threads", threads, "Monte Carlo worker threads (0 = all cores)");
  app.add_option("--window", window, "observed-bandwidth window, rounds");
  app.add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    diprober::RunSpec spec;
    if (!config_path.empty()) spec = diprober::load_run_spec(config_path);

    // Flags override config-file values.
    if (!relays_csv.empty()) spec.relays_csv = relays_csv;
    if (!method.empty()) spec.sim.method = diprober::estimator_kind_from_string(method);
    if (app.count("--rounds")) spec.sim.rounds = rounds;
    if (app.count("--seed")) spec.sim.seed = seed;
    if (app.count("--lambda")) spec.sim.lambda_s = lambda;
    if (app.count("--underloaded")) spec.sim.underloaded = underloaded;
    if (app.count("--cap-min")) spec.sim.cap_min = cap_min;
    if (app.count("--cap-max")) spec.sim.cap_max = cap_max;
    if (app.count("--noise")) spec.sim.noise = diprober::NoiseModel{};
    if (app.count("--quant-base")) spec.sim.estimator.grid = diprober::QuantizationGrid::base_only(quant_base);
    if (app.count("--case-tolerance")) spec.sim.estimator.case_tolerance = case_tolerance;
    if (app.count("--c-avg-client")) spec.sim.estimator.c_avg_client = c_avg_client;
    if (app.count("--trials")) spec.trials = trials;
    if (app.count("--threads")) spec.threads = threads;
    if (app.count("--window")) spec.sim.window = window;
    if (!out_dir.empty()) spec.out_dir = out_dir;

    diprober::execute_run(spec);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
