#include "diprober/rng.hpp"

#include <algorithm>
#include <cmath>

namespace diprober {

WeightedSampler::WeightedSampler(const std::vector<double>& weights) {
  cum_.reserve(weights.size());
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0 || !std::isfinite(w)) throw std::invalid_argument("WeightedSampler: bad weight");
    if (w > 0.0) ++support_;
    total += w;
    cum_.push_back(total);
  }
  if (total <= 0.0) throw std::invalid_argument("WeightedSampler: zero total weight");
}

std::size_t WeightedSampler::sample(Rng& rng) const {
  double u = rng.uniform01() * cum_.back();
  // First index whose cumulative weight exceeds u; it always carries
  // nonzero weight because the cumulative sum is flat across zeros.
  auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
  std::size_t idx = it == cum_.end() ? cum_.size() - 1 : static_cast<std::size_t>(it - cum_.begin());
  while (idx > 0 && cum_[idx] == cum_[idx - 1]) --idx;  // u rounded onto the total
  return idx;
}

}  // namespace diprober
