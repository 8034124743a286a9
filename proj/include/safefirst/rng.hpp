#pragma once

#include <cstdint>

namespace safefirst {

/// SplitMix64 step. Used to expand seeds and derive substreams.
std::uint64_t splitmix64(std::uint64_t& state);

/// xoshiro256** 1.0 (Blackman & Vigna). Seeded by running SplitMix64 on the
/// 64-bit seed four times, so a given seed reproduces the same stream in any
/// implementation of the two published algorithms.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed);

  /// Independent stream for (seed, index), e.g. one per Monte Carlo replication.
  static Xoshiro256 substream(std::uint64_t seed, std::uint64_t index);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()();

  /// Uniform on the open interval (0, 1): ((x >> 11) + 0.5) * 2^-53.
  double uniform_open();

  /// Standard normal variate by inverse-CDF transform of uniform_open().
  double normal();

 private:
  std::uint64_t s_[4];
};

}  // namespace safefirst
