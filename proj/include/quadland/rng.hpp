#pragma once

#include <cstdint>
#include <limits>

namespace quadland {

// Counter-based generator: the k-th output is SplitMix64's finalizer applied to
// seed + k * 0x9E3779B97F4A7C15. Streams are identical on every platform, and
// any position in the stream can be reached without replaying the prefix.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed, std::uint64_t counter = 0)
      : seed_(seed), counter_(counter) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return next_u64(); }
  std::uint64_t next_u64();

  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform_open();
  // Standard normal by inverse CDF (one counter step per draw).
  double standard_normal();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
};

std::uint64_t splitmix64_mix(std::uint64_t z);

// Independent seed for sub-stream `index` of `seed` (per-trial seeds in sweeps).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

// Standard normal quantile.
double normal_quantile(double p);

}  // namespace quadland
