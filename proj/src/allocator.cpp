#include "diprober/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace diprober {

namespace {
constexpr double kTol = 1e-9;  // kb/s, absolute
}

void AllocationProblem::validate() const {
  for (double c : relay_capacities)
    if (!(c > 0.0)) throw std::invalid_argument("allocation: capacities must be positive");
  for (const auto& f : flows) {
    if (f.relay_ids.empty()) throw std::invalid_argument("allocation: flow traverses no relay");
    for (std::size_t id : f.relay_ids)
      if (id >= relay_capacities.size()) throw std::invalid_argument("allocation: flow references unknown relay");
  }
}

AllocationResult maxmin_allocate(const AllocationProblem& problem) {
  problem.validate();
  const std::size_t n = problem.relay_capacities.size();
  const std::size_t nf = problem.flows.size();

  AllocationResult res;
  res.flow_rates.assign(nf, 0.0);
  res.relay_loads.assign(n, 0.0);
  if (nf == 0) return res;

  std::vector<double> remaining = problem.relay_capacities;
  std::vector<std::size_t> unfrozen_cnt(n, 0);
  std::vector<std::vector<std::size_t>> relay_flows(n);
  for (std::size_t f = 0; f < nf; ++f)
    for (std::size_t id : problem.flows[f].relay_ids) {
      ++unfrozen_cnt[id];
      relay_flows[id].push_back(f);
    }

  std::vector<bool> frozen(nf, false);
  double level = 0.0;  // common rate of every unfrozen flow
  std::size_t live = nf;
  while (live > 0) {
    double delta = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j)
      if (unfrozen_cnt[j] > 0) delta = std::min(delta, remaining[j] / static_cast<double>(unfrozen_cnt[j]));
    if (!std::isfinite(delta)) throw std::logic_error("maxmin_allocate: live flow without a live relay");
    level += delta;
    for (std::size_t j = 0; j < n; ++j)
      if (unfrozen_cnt[j] > 0) remaining[j] -= delta * static_cast<double>(unfrozen_cnt[j]);
    for (std::size_t j = 0; j < n; ++j) {
      if (unfrozen_cnt[j] == 0 || remaining[j] > kTol) continue;
      remaining[j] = std::max(remaining[j], 0.0);
      for (std::size_t f : relay_flows[j]) {
        if (frozen[f]) continue;
        frozen[f] = true;
        res.flow_rates[f] = level;
        --live;
        for (std::size_t id : problem.flows[f].relay_ids) --unfrozen_cnt[id];
      }
    }
  }

  std::vector<long double> loads(n, 0.0L);
  for (std::size_t f = 0; f < nf; ++f)
    for (std::size_t id : problem.flows[f].relay_ids) loads[id] += res.flow_rates[f];
  for (std::size_t j = 0; j < n; ++j) res.relay_loads[j] = static_cast<double>(loads[j]);
  return res;
}

AllocationProblem build_round_problem(const std::vector<double>& relay_capacities,
                                      const std::vector<Path>& paths) {
  AllocationProblem p;
  p.relay_capacities = relay_capacities;
  p.flows.reserve(paths.size());
  for (const auto& path : paths) {
    Flow f;
    f.relay_ids = {path.guard_id, path.middle_id, path.exit_id};
    if (path.cap_relay_capacity) {
      f.relay_ids.push_back(p.relay_capacities.size());
      p.relay_capacities.push_back(*path.cap_relay_capacity);
    }
    p.flows.push_back(std::move(f));
  }
  return p;
}

RoundMeasurement measure_relay_pair(const std::vector<double>& relay_capacities,
                                    const std::vector<Path>& paths) {
  const std::size_t n = relay_capacities.size();
  AllocationProblem base = build_round_problem(relay_capacities, paths);
  AllocationResult pass0 = maxmin_allocate(base);

  RoundMeasurement out;
  out.client_flow_rates = pass0.flow_rates;
  out.load.client_flow_count.assign(n, 0);
  out.load.client_throughput.assign(n, 0.0);
  for (const auto& path : paths) {
    ++out.load.client_flow_count[path.guard_id];
    ++out.load.client_flow_count[path.middle_id];
    ++out.load.client_flow_count[path.exit_id];
  }
  for (std::size_t j = 0; j < n; ++j) out.load.client_throughput[j] = pass0.relay_loads[j];

  out.pairs.resize(n);
  out.relay_throughput.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double cap = relay_capacities[j];
    const double used = std::min(pass0.relay_loads[j], cap);
    const double x = static_cast<double>(out.load.client_flow_count[j]);
    double m1, m2;
    if (x == 0.0) {
      m1 = cap;
      m2 = cap / 2.0;
    } else {
      // Clients keep their usage unless an equal split with the probes
      // forces them down to the relay's fair share.
      m1 = (used > x * cap / (x + 1.0)) ? cap / (x + 1.0) : cap - used;
      m2 = (used > x * cap / (x + 2.0)) ? cap / (x + 2.0) : (cap - used) / 2.0;
    }
    out.pairs[j] = MeasurementPair{m1, m2};
    const double clients_after = std::min(used, x * cap / (x + 2.0));
    out.relay_throughput[j] = clients_after + 2.0 * m2;
  }
  return out;
}

}  // namespace diprober
