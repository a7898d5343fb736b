#include "diprober/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace diprober {

const char* to_string(RelayClass c) {
  switch (c) {
    case RelayClass::Guard: return "guard";
    case RelayClass::Middle: return "middle";
    case RelayClass::Exit: return "exit";
  }
  return "?";
}

RelayClass relay_class_from_string(const std::string& s) {
  if (s == "guard") return RelayClass::Guard;
  if (s == "middle") return RelayClass::Middle;
  if (s == "exit") return RelayClass::Exit;
  throw std::invalid_argument("unknown relay class: " + s);
}

double Relay::observed_bandwidth() const {
  double best = 0.0;
  for (double v : observed_bw_window) best = std::max(best, v);
  return best;
}

std::vector<std::size_t> Network::ids_of(RelayClass c) const {
  std::vector<std::size_t> out;
  for (const auto& r : relays)
    if (r.cls == c) out.push_back(r.id);
  return out;
}

std::vector<double> Network::true_capacities() const {
  std::vector<double> out(relays.size());
  for (const auto& r : relays) out[r.id] = r.true_capacity;
  return out;
}

double Network::max_true_capacity() const {
  double best = 0.0;
  for (const auto& r : relays) best = std::max(best, r.true_capacity);
  return best;
}

void Network::validate() const {
  std::vector<bool> seen(relays.size(), false);
  for (const auto& r : relays) {
    if (r.id >= relays.size() || seen[r.id]) throw std::invalid_argument("relay ids must be a permutation of [0,n)");
    seen[r.id] = true;
    if (!(r.true_capacity > 0.0)) throw std::invalid_argument("relay capacity must be positive");
  }
}

ConsensusRound compute_weights(const std::vector<double>& estimates, const Network& network) {
  const std::size_t n = network.size();
  if (estimates.size() != n) throw std::invalid_argument("compute_weights: estimate count != relay count");
  for (double c : estimates)
    if (!(c >= 0.0) || !std::isfinite(c)) throw std::invalid_argument("compute_weights: estimates must be finite and >= 0");

  double sum_g = 0.0, sum_m = 0.0, sum_e = 0.0;
  for (const auto& r : network.relays) {
    switch (r.cls) {
      case RelayClass::Guard: sum_g += estimates[r.id]; break;
      case RelayClass::Middle: sum_m += estimates[r.id]; break;
      case RelayClass::Exit: sum_e += estimates[r.id]; break;
    }
  }
  if (sum_g <= 0.0 || sum_m <= 0.0 || sum_e <= 0.0)
    throw std::runtime_error("compute_weights: degenerate consensus (a relay class has zero total estimate)");

  // The formula assumes a guard-rich network; outside that regime we clamp.
  double w_mg = (sum_g - sum_m) / (2.0 * sum_g);
  w_mg = std::clamp(w_mg, 0.0, 1.0);

  ConsensusRound out;
  out.estimates = estimates;
  out.w_mg = w_mg;
  out.weight_exit.assign(n, 0.0);
  out.weight_guard.assign(n, 0.0);
  out.weight_middle.assign(n, 0.0);
  const double middle_denom = w_mg * sum_g + sum_m;
  for (const auto& r : network.relays) {
    const double c = estimates[r.id];
    switch (r.cls) {
      case RelayClass::Guard:
        out.weight_guard[r.id] = c / sum_g;
        out.weight_middle[r.id] = w_mg * c / middle_denom;
        break;
      case RelayClass::Middle:
        out.weight_middle[r.id] = c / middle_denom;
        break;
      case RelayClass::Exit:
        out.weight_exit[r.id] = c / sum_e;
        break;
    }
  }
  return out;
}

std::vector<Path> sample_paths(std::size_t count, const ConsensusRound& weights,
                               const Network& network, Rng& rng, bool underloaded,
                               double cap_min, double cap_max) {
  (void)network;
  std::vector<Path> paths;
  if (count == 0) return paths;
  if (underloaded && !(cap_min <= cap_max && cap_min > 0.0))
    throw std::invalid_argument("sample_paths: bad cap range");

  WeightedSampler exit_s(weights.weight_exit);
  WeightedSampler guard_s(weights.weight_guard);
  WeightedSampler middle_s(weights.weight_middle);

  paths.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Path p;
    p.exit_id = exit_s.sample(rng);
    p.guard_id = guard_s.sample(rng);
    // Exit and guard classes are disjoint; only the middle draw can collide.
    p.middle_id = middle_s.sample(rng);
    int attempts = 0;
    while (p.middle_id == p.guard_id) {
      if (++attempts > 1000) {
        if (middle_s.support_size() < 2)
          throw std::runtime_error("sample_paths: degenerate network, cannot resolve middle collision");
        throw std::runtime_error("sample_paths: collision resolution did not terminate");
      }
      p.middle_id = middle_s.sample(rng);
    }
    if (underloaded) p.cap_relay_capacity = rng.uniform(cap_min, cap_max);
    paths.push_back(p);
  }
  return paths;
}

std::uint64_t sample_user_count(double lambda_s, Rng& rng) { return rng.poisson(lambda_s); }

std::vector<double> effective_selection_weights(const ConsensusRound& weights,
                                                const Network& network) {
  std::vector<double> out(network.size(), 0.0);
  for (const auto& r : network.relays) {
    switch (r.cls) {
      case RelayClass::Guard: out[r.id] = weights.weight_guard[r.id] + weights.weight_middle[r.id]; break;
      case RelayClass::Middle: out[r.id] = weights.weight_middle[r.id]; break;
      case RelayClass::Exit: out[r.id] = weights.weight_exit[r.id]; break;
    }
  }
  return out;
}

Network load_network_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open relay CSV: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty relay CSV: " + path);
  // Tolerate trailing \r from CRLF files.
  auto strip = [](std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
    return s;
  };
  if (strip(line) != "relay_id,class,capacity_kbps")
    throw std::runtime_error("relay CSV " + path + ": expected header relay_id,class,capacity_kbps");

  Network net;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip(line);
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string id_s, cls_s, cap_s;
    if (!std::getline(ss, id_s, ',') || !std::getline(ss, cls_s, ',') || !std::getline(ss, cap_s, ','))
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed row");
    Relay r;
    try {
      r.id = std::stoul(id_s);
      r.cls = relay_class_from_string(cls_s);
      r.true_capacity = std::stod(cap_s);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!(r.true_capacity > 0.0))
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": capacity must be positive");
    net.relays.push_back(r);
  }
  net.validate();
  return net;
}

Network generate_network(std::size_t guards, std::size_t middles, std::size_t exits,
                         double cap_lo, double cap_hi, Rng& rng) {
  if (!(cap_lo > 0.0 && cap_lo <= cap_hi)) throw std::invalid_argument("generate_network: bad capacity range");
  Network net;
  std::size_t id = 0;
  auto add = [&](RelayClass cls, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
      Relay r;
      r.id = id++;
      r.cls = cls;
      r.true_capacity = std::exp(rng.uniform(std::log(cap_lo), std::log(cap_hi)));
      net.relays.push_back(r);
    }
  };
  add(RelayClass::Guard, guards);
  add(RelayClass::Middle, middles);
  add(RelayClass::Exit, exits);
  net.validate();
  return net;
}

}  // namespace diprober
