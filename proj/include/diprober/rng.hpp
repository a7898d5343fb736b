#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

namespace diprober {

// Counter-based splittable RNG. Streams are derived by hashing
// (seed, stream id) with SplitMix64, so independent relays/trials get
// independent, reproducible streams regardless of scheduling.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : state_(mix(seed)) {}

  static Rng derive(std::uint64_t seed, std::uint64_t stream) {
    return Rng(mix(seed) ^ mix(stream * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL));
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<std::uint64_t>::max(); }

  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  std::uint64_t poisson(double lambda) {
    if (lambda < 0.0) throw std::invalid_argument("poisson: negative rate");
    if (lambda == 0.0) return 0;
    std::poisson_distribution<std::uint64_t> dist(lambda);
    return dist(*this);
  }

  double normal(double mean, double stddev) {
    std::normal_distribution<double> dist(mean, stddev);
    return dist(*this);
  }

  // Rejection-sampled truncated normal on [lo, hi].
  double truncated_normal(double mean, double stddev, double lo, double hi) {
    if (!(lo <= hi)) throw std::invalid_argument("truncated_normal: empty interval");
    for (;;) {
      double x = normal(mean, stddev);
      if (x >= lo && x <= hi) return x;
    }
  }

 private:
  explicit Rng(std::uint64_t raw, int) : state_(raw) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

// Cumulative-sum categorical sampler over nonnegative weights.
class WeightedSampler {
 public:
  explicit WeightedSampler(const std::vector<double>& weights);

  // Number of indices with nonzero weight.
  std::size_t support_size() const { return support_; }

  // Index drawn with probability weight[i] / total.
  std::size_t sample(Rng& rng) const;

 private:
  std::vector<double> cum_;
  std::size_t support_ = 0;
};

}  // namespace diprober
