#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "diprober/allocator.hpp"

namespace diprober {

enum class EstimatorKind { Actual, TorFlowP, Sbws, MleFlowQ, DiProberO, DiProberWH };

const char* to_string(EstimatorKind k);
EstimatorKind estimator_kind_from_string(const std::string& s);

// Geometric capacity bins [lo*a^(k), lo*a^(k+1)] with centers at the
// geometric midpoints lo*a^(k+1/2).
class QuantizationGrid {
 public:
  static QuantizationGrid make(double base, double lo, double hi);

  // Carries only the base; bounds are resolved later from the network.
  static QuantizationGrid base_only(double base);

  double base() const { return base_; }
  std::size_t bins() const { return bins_; }
  double edge(std::size_t k) const;    // k in [0, bins]
  double center(std::size_t k) const;  // k in [0, bins)
  double min_edge() const { return lo_; }
  double max_edge() const { return edge(bins_); }

 private:
  double base_ = 1.1;
  double lo_ = 1.0;
  std::size_t bins_ = 0;
};

struct EstimatorConfig {
  double lambda_s = 5000.0;      // expected user paths per round
  double c_avg_client = 0.0;     // kb/s, average per-client utilization
  double case_tolerance = 0.05;  // relative band for the case split
  QuantizationGrid grid;
  double kp = 1.0;  // proportional gain; only 1.0 is modeled
};

// Cumulative log-likelihood scores S[relay][bin], initialized to zero.
class LikelihoodTable {
 public:
  LikelihoodTable() = default;
  LikelihoodTable(std::size_t relays, std::size_t bins)
      : bins_(bins), scores_(relays * bins, 0.0) {}

  std::size_t relays() const { return bins_ == 0 ? 0 : scores_.size() / bins_; }
  std::size_t bins() const { return bins_; }
  std::span<double> row(std::size_t relay) { return {scores_.data() + relay * bins_, bins_}; }
  std::span<const double> row(std::size_t relay) const { return {scores_.data() + relay * bins_, bins_}; }

 private:
  std::size_t bins_ = 0;
  std::vector<double> scores_;
};

enum class ProbeCase { Case1, Case2 };

// Case1 iff |m1 - 2*m2| <= tol * m1.
ProbeCase classify_case(const MeasurementPair& m, double tol);

// Per-round log-likelihood of capacity bin kappa under the dual-probe
// Poisson model. Returns -infinity when the implied client count is
// negative; non-integer factorials go through lgamma.
double log_likelihood_term(double kappa, const MeasurementPair& m, double weight,
                           const EstimatorConfig& cfg);

struct GridEstimates {
  std::vector<double> estimates;
  std::vector<bool> fell_back;  // all-infeasible rows keep the previous estimate
};

// Full-history dual-probe estimator: accumulate the round's terms into the
// table and return per-relay argmax bin centers (ties toward the smallest).
GridEstimates diprober_wh_update(LikelihoodTable& table,
                                 const std::vector<MeasurementPair>& measurements,
                                 const std::vector<double>& weights,
                                 const std::vector<double>& prev_estimates,
                                 const EstimatorConfig& cfg);

// One-step closed form: case 1 adds the expected client usage to the unused
// capacity; case 2 scales m2 by the expected path count plus the two probes.
double diprober_o_estimate(const MeasurementPair& m, double weight, const EstimatorConfig& cfg);

// Single-probe full-history estimator (divisor kappa/m - 1).
GridEstimates mleflow_q_update(LikelihoodTable& table, const std::vector<double>& m1,
                               const std::vector<double>& weights,
                               const std::vector<double>& prev_estimates,
                               const EstimatorConfig& cfg);

// C_{t+1} = C_t * m_t / mean(m_t).
std::vector<double> torflow_p_update(const std::vector<double>& prev_estimates,
                                     const std::vector<double>& measured);

// C_{t+1} = b_t * m_t / mean(m_t).
std::vector<double> sbws_update(const std::vector<double>& observed,
                                const std::vector<double>& measured);

// Principal branch of the Lambert W function, Halley iteration, relative
// accuracy 1e-12 on w*e^w = x.
double lambert_w0(double x);

// Closed form of the always-bottlenecked (case 2) full-history maximizer;
// cross-check oracle for the grid search. Refuses histories containing a
// case-1 round.
double diprober_wh_analytic_case2(std::span<const MeasurementPair> history,
                                  std::span<const double> weights, double lambda_s,
                                  double case_tolerance = 0.05);

}  // namespace diprober
