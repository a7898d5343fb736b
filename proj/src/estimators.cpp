#include "diprober/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace diprober {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

const char* to_string(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::Actual: return "actual";
    case EstimatorKind::TorFlowP: return "torflow-p";
    case EstimatorKind::Sbws: return "sbws";
    case EstimatorKind::MleFlowQ: return "mleflow-q";
    case EstimatorKind::DiProberO: return "diprober-o";
    case EstimatorKind::DiProberWH: return "diprober-wh";
  }
  return "?";
}

EstimatorKind estimator_kind_from_string(const std::string& s) {
  if (s == "actual") return EstimatorKind::Actual;
  if (s == "torflow-p") return EstimatorKind::TorFlowP;
  if (s == "sbws") return EstimatorKind::Sbws;
  if (s == "mleflow-q") return EstimatorKind::MleFlowQ;
  if (s == "diprober-o") return EstimatorKind::DiProberO;
  if (s == "diprober-wh") return EstimatorKind::DiProberWH;
  throw std::invalid_argument(
      "unknown method '" + s +
      "' (valid: actual, torflow-p, sbws, mleflow-q, diprober-o, diprober-wh)");
}

QuantizationGrid QuantizationGrid::make(double base, double lo, double hi) {
  if (!(base > 1.0)) throw std::invalid_argument("grid base must be > 1");
  if (!(lo > 0.0 && hi > lo)) throw std::invalid_argument("grid bounds must satisfy 0 < lo < hi");
  QuantizationGrid g;
  g.base_ = base;
  g.lo_ = lo;
  g.bins_ = static_cast<std::size_t>(std::ceil(std::log(hi / lo) / std::log(base)));
  if (g.bins_ == 0) g.bins_ = 1;
  return g;
}

QuantizationGrid QuantizationGrid::base_only(double base) {
  if (!(base > 1.0)) throw std::invalid_argument("grid base must be > 1");
  QuantizationGrid g;
  g.base_ = base;
  return g;
}

double QuantizationGrid::edge(std::size_t k) const { return lo_ * std::pow(base_, static_cast<double>(k)); }

double QuantizationGrid::center(std::size_t k) const {
  return lo_ * std::pow(base_, static_cast<double>(k) + 0.5);
}

ProbeCase classify_case(const MeasurementPair& m, double tol) {
  return std::abs(m.m1 - 2.0 * m.m2) <= tol * m.m1 ? ProbeCase::Case1 : ProbeCase::Case2;
}

namespace {

// log Pois(x; lw) with x relaxed to the reals via lgamma; -inf for x < 0.
double log_poisson_relaxed(double x, double lw) {
  if (x < 0.0) return kNegInf;
  if (lw <= 0.0) return x == 0.0 ? 0.0 : kNegInf;
  double term = -lw - std::lgamma(x + 1.0);
  if (x > 0.0) term += x * std::log(lw);
  return term;
}

std::size_t argmax_smallest(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < row.size(); ++k)
    if (row[k] > row[best]) best = k;
  return best;
}

}  // namespace

double log_likelihood_term(double kappa, const MeasurementPair& m, double weight,
                           const EstimatorConfig& cfg) {
  if (!(kappa > 0.0)) throw std::invalid_argument("log_likelihood_term: kappa must be positive");
  if (weight < 0.0) throw std::invalid_argument("log_likelihood_term: negative weight");
  const double lw = cfg.lambda_s * weight;
  if (classify_case(m, cfg.case_tolerance) == ProbeCase::Case1) {
    return log_poisson_relaxed((kappa - m.m1) / cfg.c_avg_client, lw);
  }
  return log_poisson_relaxed(kappa / m.m2 - 2.0, lw);
}

namespace {

GridEstimates accumulate_and_argmax(LikelihoodTable& table,
                                    const std::vector<double>& prev_estimates,
                                    const EstimatorConfig& cfg,
                                    const std::function<double(std::size_t, double)>& term) {
  const std::size_t n = table.relays();
  GridEstimates out;
  out.estimates.assign(n, 0.0);
  out.fell_back.assign(n, false);
  for (std::size_t j = 0; j < n; ++j) {
    auto row = table.row(j);
    bool feasible = false;
    for (std::size_t k = 0; k < row.size(); ++k) {
      row[k] += term(j, cfg.grid.center(k));
      if (row[k] > kNegInf) feasible = true;
    }
    if (!feasible) {
      out.estimates[j] = prev_estimates[j];
      out.fell_back[j] = true;
    } else {
      out.estimates[j] = cfg.grid.center(argmax_smallest(row));
    }
  }
  return out;
}

}  // namespace

GridEstimates diprober_wh_update(LikelihoodTable& table,
                                 const std::vector<MeasurementPair>& measurements,
                                 const std::vector<double>& weights,
                                 const std::vector<double>& prev_estimates,
                                 const EstimatorConfig& cfg) {
  if (table.relays() != measurements.size() || table.bins() != cfg.grid.bins())
    throw std::invalid_argument("diprober_wh_update: table shape mismatch");
  return accumulate_and_argmax(table, prev_estimates, cfg, [&](std::size_t j, double kappa) {
    return log_likelihood_term(kappa, measurements[j], weights[j], cfg);
  });
}

GridEstimates mleflow_q_update(LikelihoodTable& table, const std::vector<double>& m1,
                               const std::vector<double>& weights,
                               const std::vector<double>& prev_estimates,
                               const EstimatorConfig& cfg) {
  if (table.relays() != m1.size() || table.bins() != cfg.grid.bins())
    throw std::invalid_argument("mleflow_q_update: table shape mismatch");
  return accumulate_and_argmax(table, prev_estimates, cfg, [&](std::size_t j, double kappa) {
    return log_poisson_relaxed(kappa / m1[j] - 1.0, cfg.lambda_s * weights[j]);
  });
}

double diprober_o_estimate(const MeasurementPair& m, double weight, const EstimatorConfig& cfg) {
  const double lw = cfg.lambda_s * weight;
  double estimate;
  if (classify_case(m, cfg.case_tolerance) == ProbeCase::Case1) {
    estimate = lw * cfg.c_avg_client + 2.0 * m.m2;
  } else {
    estimate = m.m2 * (lw + 2.0);
  }
  return std::clamp(estimate, cfg.grid.min_edge(), cfg.grid.max_edge());
}

std::vector<double> torflow_p_update(const std::vector<double>& prev_estimates,
                                     const std::vector<double>& measured) {
  if (prev_estimates.size() != measured.size())
    throw std::invalid_argument("torflow_p_update: size mismatch");
  double mean = 0.0;
  for (double m : measured) mean += m;
  mean /= static_cast<double>(measured.size());
  if (!(mean > 0.0)) throw std::runtime_error("torflow_p_update: zero mean measurement (dead network)");
  std::vector<double> out(measured.size());
  for (std::size_t j = 0; j < measured.size(); ++j) out[j] = prev_estimates[j] * measured[j] / mean;
  return out;
}

std::vector<double> sbws_update(const std::vector<double>& observed,
                                const std::vector<double>& measured) {
  if (observed.size() != measured.size()) throw std::invalid_argument("sbws_update: size mismatch");
  double mean = 0.0;
  for (double m : measured) mean += m;
  mean /= static_cast<double>(measured.size());
  if (!(mean > 0.0)) throw std::runtime_error("sbws_update: zero mean measurement (dead network)");
  std::vector<double> out(measured.size());
  for (std::size_t j = 0; j < measured.size(); ++j) out[j] = observed[j] * measured[j] / mean;
  return out;
}

double lambert_w0(double x) {
  constexpr double kEInv = 0.36787944117144233;  // 1/e
  if (x < -kEInv) throw std::domain_error("lambert_w0: argument below -1/e");
  if (x == 0.0) return 0.0;

  double w;
  if (x < -0.3) {
    // Series around the branch point -1/e.
    double p = std::sqrt(2.0 * (std::exp(1.0) * x + 1.0));
    w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
  } else if (x < std::exp(1.0)) {
    w = std::log1p(x);
  } else {
    double lx = std::log(x);
    w = lx - std::log(lx);
  }

  for (int it = 0; it < 100; ++it) {
    double ew = std::exp(w);
    double f = w * ew - x;
    double denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0);
    double step = f / denom;
    w -= step;
    if (std::abs(step) <= 1e-14 * std::max(1.0, std::abs(w))) break;
  }
  return w;
}

double diprober_wh_analytic_case2(std::span<const MeasurementPair> history,
                                  std::span<const double> weights, double lambda_s,
                                  double case_tolerance) {
  if (history.empty() || history.size() != weights.size())
    throw std::invalid_argument("diprober_wh_analytic_case2: bad history");
  double inv_sum = 0.0;
  double log_num = 0.0;
  for (std::size_t i = 0; i < history.size(); ++i) {
    if (classify_case(history[i], case_tolerance) == ProbeCase::Case1)
      throw std::invalid_argument("diprober_wh_analytic_case2: history contains a case-1 round");
    const double m = history[i].m2;
    if (!(m > 0.0)) throw std::invalid_argument("diprober_wh_analytic_case2: nonpositive measurement");
    inv_sum += 1.0 / m;
    log_num += std::log(m * lambda_s * weights[i]) / m;
  }
  const double a = 2.0 * static_cast<double>(history.size()) / inv_sum;
  const double arg = a * std::exp(-log_num / inv_sum);
  return a / lambert_w0(arg);
}

}  // namespace diprober
