#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "diprober/rng.hpp"

namespace diprober {

enum class RelayClass { Guard, Middle, Exit };

const char* to_string(RelayClass c);
RelayClass relay_class_from_string(const std::string& s);

struct Relay {
  std::size_t id = 0;
  RelayClass cls = RelayClass::Middle;
  double true_capacity = 0.0;  // kb/s
  // Recent per-round realized throughputs, newest last, length <= window.
  std::deque<double> observed_bw_window;

  // Self-reported observed bandwidth: max throughput over the window.
  double observed_bandwidth() const;
};

struct Network {
  std::vector<Relay> relays;

  std::size_t size() const { return relays.size(); }
  std::vector<std::size_t> ids_of(RelayClass c) const;
  std::vector<double> true_capacities() const;
  double max_true_capacity() const;

  void validate() const;  // throws on broken invariants
};

// Per-round selection weights derived from published estimates.
struct ConsensusRound {
  std::size_t round_index = 0;
  std::vector<double> estimates;      // kb/s, per relay
  std::vector<double> weight_exit;    // support on E, sums to 1
  std::vector<double> weight_guard;   // support on G, sums to 1
  std::vector<double> weight_middle;  // support on G u M, sums to 1
  double w_mg = 0.0;                  // guard-in-middle multiplier, in [0, 1]
};

struct Path {
  std::size_t guard_id = 0;
  std::size_t middle_id = 0;
  std::size_t exit_id = 0;
  std::optional<double> cap_relay_capacity;  // kb/s, under-loaded mode only
};

// Selection weights from published estimates. Exit and guard weights are
// capacity-proportional within their class; guards enter the middle pool
// scaled by W_mg = (sum_G C - sum_M C) / (2 sum_G C), clamped to [0, 1].
ConsensusRound compute_weights(const std::vector<double>& estimates, const Network& network);

// Draws `count` three-relay paths by independent weighted sampling
// (exit, guard, then middle), re-drawing the middle on collision.
std::vector<Path> sample_paths(std::size_t count, const ConsensusRound& weights,
                               const Network& network, Rng& rng, bool underloaded = false,
                               double cap_min = 0.0, double cap_max = 0.0);

std::uint64_t sample_user_count(double lambda_s, Rng& rng);

// Probability that one sampled path traverses relay j: exit weight for
// exits, middle weight for middles, guard + middle weight for guards.
std::vector<double> effective_selection_weights(const ConsensusRound& weights,
                                                const Network& network);

// CSV ingestion: header `relay_id,class,capacity_kbps`.
Network load_network_csv(const std::string& path);

// Log-uniform capacities over [cap_lo, cap_hi] per class.
Network generate_network(std::size_t guards, std::size_t middles, std::size_t exits,
                         double cap_lo, double cap_hi, Rng& rng);

}  // namespace diprober
