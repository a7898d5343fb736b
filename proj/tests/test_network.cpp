#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include <doctest.h>

#include "diprober/network.hpp"

using namespace diprober;

namespace {

Network make_network(const std::vector<std::pair<RelayClass, double>>& spec) {
  Network net;
  for (std::size_t i = 0; i < spec.size(); ++i)
    net.relays.push_back({i, spec[i].first, spec[i].second, {}});
  net.validate();
  return net;
}

void check_weights_well_formed(const ConsensusRound& w, const Network& net) {
  double se = 0.0, sg = 0.0, sm = 0.0;
  for (const auto& r : net.relays) {
    CHECK(w.weight_exit[r.id] >= 0.0);
    CHECK(w.weight_guard[r.id] >= 0.0);
    CHECK(w.weight_middle[r.id] >= 0.0);
    if (r.cls != RelayClass::Exit) CHECK(w.weight_exit[r.id] == 0.0);
    if (r.cls != RelayClass::Guard) CHECK(w.weight_guard[r.id] == 0.0);
    if (r.cls == RelayClass::Exit) CHECK(w.weight_middle[r.id] == 0.0);
    se += w.weight_exit[r.id];
    sg += w.weight_guard[r.id];
    sm += w.weight_middle[r.id];
  }
  CHECK(std::fabs(se - 1.0) <= 1e-9);
  CHECK(std::fabs(sg - 1.0) <= 1e-9);
  CHECK(std::fabs(sm - 1.0) <= 1e-9);
  CHECK(w.w_mg >= 0.0);
  CHECK(w.w_mg <= 1.0);
}

}  // namespace

TEST_CASE("equal exits split the exit weight evenly") {
  auto net = make_network({{RelayClass::Exit, 50.0},
                           {RelayClass::Exit, 50.0},
                           {RelayClass::Guard, 10.0},
                           {RelayClass::Middle, 10.0}});
  auto w = compute_weights(net.true_capacities(), net);
  CHECK(w.weight_exit[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(w.weight_exit[1] == doctest::Approx(0.5).epsilon(1e-12));
  check_weights_well_formed(w, net);
}

TEST_CASE("guard-to-middle multiplier follows the scarcity formula") {
  // Guards total 300 (one of them 30), middles total 100.
  auto net = make_network({{RelayClass::Guard, 30.0},
                           {RelayClass::Guard, 270.0},
                           {RelayClass::Middle, 100.0},
                           {RelayClass::Exit, 40.0}});
  auto w = compute_weights(net.true_capacities(), net);
  CHECK(w.w_mg == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  // (1/3 * 30) / ((1/3)*300 + 100) = 0.05
  CHECK(w.weight_middle[0] == doctest::Approx(0.05).epsilon(1e-12));
  check_weights_well_formed(w, net);
}

TEST_CASE("middle-rich regime clamps the multiplier to zero") {
  auto net = make_network({{RelayClass::Guard, 100.0},
                           {RelayClass::Middle, 300.0},
                           {RelayClass::Exit, 40.0}});
  auto w = compute_weights(net.true_capacities(), net);
  CHECK(w.w_mg == 0.0);
  CHECK(w.weight_middle[0] == 0.0);  // the guard gets no middle-position weight
  CHECK(w.weight_middle[1] == doctest::Approx(1.0).epsilon(1e-12));
  check_weights_well_formed(w, net);
}

TEST_CASE("zero-total class is rejected") {
  auto net = make_network({{RelayClass::Guard, 10.0},
                           {RelayClass::Middle, 10.0},
                           {RelayClass::Exit, 10.0}});
  std::vector<double> est = {10.0, 10.0, 0.0};
  CHECK_THROWS(compute_weights(est, net));
  CHECK_THROWS(compute_weights({10.0, 10.0}, net));  // size mismatch
}

TEST_CASE("weights on a random population are well formed") {
  Rng rng(100);
  auto net = generate_network(8, 7, 5, 100.0, 169000.0, rng);
  auto w = compute_weights(net.true_capacities(), net);
  check_weights_well_formed(w, net);
}

TEST_CASE("sampling zero paths yields an empty list") {
  auto net = make_network({{RelayClass::Guard, 10.0},
                           {RelayClass::Middle, 10.0},
                           {RelayClass::Exit, 10.0}});
  auto w = compute_weights(net.true_capacities(), net);
  Rng rng(1);
  CHECK(sample_paths(0, w, net, rng).empty());
}

TEST_CASE("a one-relay-per-class network forces the unique triple") {
  auto net = make_network({{RelayClass::Guard, 10.0},
                           {RelayClass::Middle, 20.0},
                           {RelayClass::Exit, 30.0}});
  auto w = compute_weights(net.true_capacities(), net);
  Rng rng(2);
  for (const auto& p : sample_paths(200, w, net, rng)) {
    CHECK(p.guard_id == 0);
    CHECK(p.middle_id == 1);
    CHECK(p.exit_id == 2);
    CHECK(!p.cap_relay_capacity.has_value());
  }
}

TEST_CASE("path sampling is deterministic and distinct per path") {
  Rng rng(100);
  auto net = generate_network(8, 7, 5, 100.0, 169000.0, rng);
  auto w = compute_weights(net.true_capacities(), net);
  Rng a(55), b(55);
  auto pa = sample_paths(5000, w, net, a);
  auto pb = sample_paths(5000, w, net, b);
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i].guard_id == pb[i].guard_id);
    CHECK(pa[i].middle_id == pb[i].middle_id);
    CHECK(pa[i].exit_id == pb[i].exit_id);
    CHECK(pa[i].guard_id != pa[i].middle_id);
    CHECK(pa[i].guard_id != pa[i].exit_id);
    CHECK(pa[i].middle_id != pa[i].exit_id);
    CHECK(net.relays[pa[i].guard_id].cls == RelayClass::Guard);
    CHECK(net.relays[pa[i].exit_id].cls == RelayClass::Exit);
    CHECK(net.relays[pa[i].middle_id].cls != RelayClass::Exit);
  }
}

TEST_CASE("under-loaded paths carry a cap in range") {
  Rng rng(100);
  auto net = generate_network(4, 4, 4, 100.0, 10000.0, rng);
  auto w = compute_weights(net.true_capacities(), net);
  Rng s(8);
  for (const auto& p : sample_paths(1000, w, net, s, true, 64.0, 144.0)) {
    REQUIRE(p.cap_relay_capacity.has_value());
    CHECK(*p.cap_relay_capacity >= 64.0);
    CHECK(*p.cap_relay_capacity <= 144.0);
  }
}

TEST_CASE("exit selection frequencies track the exit weights") {
  Rng rng(100);
  auto net = generate_network(4, 4, 6, 100.0, 169000.0, rng);
  auto w = compute_weights(net.true_capacities(), net);
  Rng s(77);
  const std::size_t n = 100000;
  auto paths = sample_paths(n, w, net, s);
  std::vector<std::size_t> hits(net.size(), 0);
  for (const auto& p : paths) ++hits[p.exit_id];
  for (const auto& r : net.relays) {
    if (r.cls != RelayClass::Exit) continue;
    double p = w.weight_exit[r.id];
    double sigma = std::sqrt(n * p * (1.0 - p));
    CHECK(std::fabs(static_cast<double>(hits[r.id]) - n * p) <= 4.0 * sigma);
  }
}

TEST_CASE("user counts: zero rate and determinism") {
  Rng a(5), b(5);
  CHECK(sample_user_count(0.0, a) == 0);
  for (int i = 0; i < 20; ++i) CHECK(sample_user_count(500.0, a) == sample_user_count(500.0, b));
}

TEST_CASE("effective selection weights combine positions") {
  auto net = make_network({{RelayClass::Guard, 30.0},
                           {RelayClass::Guard, 270.0},
                           {RelayClass::Middle, 100.0},
                           {RelayClass::Exit, 40.0}});
  auto w = compute_weights(net.true_capacities(), net);
  auto eff = effective_selection_weights(w, net);
  CHECK(eff[0] == doctest::Approx(w.weight_guard[0] + w.weight_middle[0]).epsilon(1e-12));
  CHECK(eff[2] == doctest::Approx(w.weight_middle[2]).epsilon(1e-12));
  CHECK(eff[3] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("relay CSV round-trips and rejects malformed input") {
  const std::string path = "test_relays_tmp.csv";
  {
    std::ofstream out(path);
    out << "relay_id,class,capacity_kbps\n";
    out << "0,guard,1234.5\n";
    out << "1,middle,42\n";
    out << "2,exit,169000\n";
  }
  auto net = load_network_csv(path);
  REQUIRE(net.size() == 3);
  CHECK(net.relays[0].cls == RelayClass::Guard);
  CHECK(net.relays[0].true_capacity == doctest::Approx(1234.5));
  CHECK(net.relays[2].cls == RelayClass::Exit);

  { std::ofstream out(path); out << "id,class,cap\n0,guard,1\n"; }
  CHECK_THROWS(load_network_csv(path));
  { std::ofstream out(path); out << "relay_id,class,capacity_kbps\n0,bridge,1\n"; }
  CHECK_THROWS(load_network_csv(path));
  { std::ofstream out(path); out << "relay_id,class,capacity_kbps\n0,guard,-5\n"; }
  CHECK_THROWS(load_network_csv(path));
  CHECK_THROWS(load_network_csv("no_such_file.csv"));
  std::remove(path.c_str());
}

TEST_CASE("synthetic populations respect class counts and capacity range") {
  Rng rng(9);
  auto net = generate_network(24, 22, 14, 100.0, 169000.0, rng);
  CHECK(net.ids_of(RelayClass::Guard).size() == 24);
  CHECK(net.ids_of(RelayClass::Middle).size() == 22);
  CHECK(net.ids_of(RelayClass::Exit).size() == 14);
  for (const auto& r : net.relays) {
    CHECK(r.true_capacity >= 100.0);
    CHECK(r.true_capacity <= 169000.0);
  }
}

TEST_CASE("observed bandwidth is the window maximum") {
  Relay r{0, RelayClass::Guard, 100.0, {3.0, 9.0, 5.0}};
  CHECK(r.observed_bandwidth() == 9.0);
  Relay empty{1, RelayClass::Exit, 100.0, {}};
  CHECK(empty.observed_bandwidth() == 0.0);
}

TEST_CASE("network validation catches broken id sets") {
  Network net;
  net.relays.push_back({0, RelayClass::Guard, 10.0, {}});
  net.relays.push_back({0, RelayClass::Exit, 10.0, {}});
  CHECK_THROWS(net.validate());
}
