#pragma once

#include <cstdint>

namespace colliderbias {

// Counter-based generator: the value at (seed, counter) is
//   finalize(finalize(seed) + 0x9E3779B97F4A7C15 * (counter + 1))
// where finalize is the SplitMix64 output function. Uniforms take the top 53
// bits. This mapping is part of the reproducibility contract of `sample` and
// `verify`; do not change it without bumping the release.
inline std::uint64_t splitmix64_finalize(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t counter_bits(std::uint64_t seed, std::uint64_t counter) {
  const std::uint64_t key = splitmix64_finalize(seed);
  return splitmix64_finalize(key + 0x9E3779B97F4A7C15ULL * (counter + 1));
}

// Uniform on [0, 1).
inline double counter_uniform(std::uint64_t seed, std::uint64_t counter) {
  return static_cast<double>(counter_bits(seed, counter) >> 11) * 0x1.0p-53;
}

class CounterStream {
 public:
  explicit CounterStream(std::uint64_t seed, std::uint64_t start = 0)
      : seed_(seed), counter_(start) {}

  double uniform() { return counter_uniform(seed_, counter_++); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t position() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
};

}  // namespace colliderbias
