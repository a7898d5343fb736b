#pragma once

#include <cstddef>
#include <vector>

#include "diprober/network.hpp"

namespace diprober {

// One flow is the set of relay indices it traverses. Client flows traverse
// three relays (plus a private virtual cap relay in under-loaded mode);
// probe flows traverse exactly one.
struct Flow {
  std::vector<std::size_t> relay_ids;
};

struct AllocationProblem {
  std::vector<double> relay_capacities;  // kb/s, may include virtual cap relays
  std::vector<Flow> flows;

  void validate() const;
};

struct AllocationResult {
  std::vector<double> flow_rates;   // kb/s
  std::vector<double> relay_loads;  // kb/s, sum of rates of flows crossing each relay
};

// Per-relay client load from the probe-free allocation.
struct RoundLoad {
  std::vector<std::size_t> client_flow_count;  // X[j]
  std::vector<double> client_throughput;       // kb/s
};

struct MeasurementPair {
  double m1 = 0.0;  // kb/s
  double m2 = 0.0;  // kb/s
};

struct RoundMeasurement {
  RoundLoad load;
  std::vector<MeasurementPair> pairs;      // one per real relay
  std::vector<double> client_flow_rates;   // probe-free rates, one per client flow
  std::vector<double> relay_throughput;    // kb/s with both probes active
};

// Progressive-filling max-min allocation. The common rate of all unfrozen
// flows rises by the exact increment that saturates the next relay; flows on
// a saturated relay freeze. No flow's rate can be increased without lowering
// a flow of equal or smaller rate.
AllocationResult maxmin_allocate(const AllocationProblem& problem);

// Maps round paths onto an allocation problem. Under-loaded paths get their
// private cap appended as a virtual relay beyond the real relay range.
AllocationProblem build_round_problem(const std::vector<double>& relay_capacities,
                                      const std::vector<Path>& paths);

// Sequential dual-probe measurement. The probe-free allocation fixes each
// relay's client usage; the two probes then share the relay with its
// clients, displacing them only when an equal split forces it. The first
// probe's rate is m1, the second probe's rate (first still active) is m2.
RoundMeasurement measure_relay_pair(const std::vector<double>& relay_capacities,
                                    const std::vector<Path>& paths);

}  // namespace diprober
