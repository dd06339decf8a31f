#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace qpgnn {

/// Seedable, platform-portable random stream: std::mt19937_64 (the engine is
/// fully specified by the standard) with explicit uniform/Box-Muller
/// transforms, so sequences are byte-reproducible everywhere. Never uses
/// std::*_distribution, whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1): top 53 bits of the next word.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi] via rejection sampling (unbiased).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  /// Standard normal via Box-Muller; the second value of each pair is cached.
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Fisher-Yates shuffle of {0..count-1}.
  std::vector<int> permutation(int count);

  /// The first `take` elements of a permutation of {0..count-1}, sorted.
  std::vector<int> sample_without_replacement(int count, int take);

 private:
  std::mt19937_64 engine_;
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

/// Independent child stream id: splitmix64 mix of (seed, stream index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace qpgnn
