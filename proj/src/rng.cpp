#include "safefirst/rng.hpp"

#include "safefirst/numeric.hpp"

namespace safefirst {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Xoshiro256::Xoshiro256(std::uint64_t seed) {
  std::uint64_t state = seed;
  for (auto& word : s_) word = splitmix64(state);
}

Xoshiro256 Xoshiro256::substream(std::uint64_t seed, std::uint64_t index) {
  // Hash the pair so neighbouring indices start far apart.
  std::uint64_t state = seed;
  const std::uint64_t base = splitmix64(state);
  std::uint64_t mixed = base ^ (index * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
  return Xoshiro256(splitmix64(mixed));
}

Xoshiro256::result_type Xoshiro256::operator()() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Xoshiro256::uniform_open() {
  constexpr double two_pow_minus_53 = 1.0 / 9007199254740992.0;
  return (static_cast<double>((*this)() >> 11) + 0.5) * two_pow_minus_53;
}

double Xoshiro256::normal() { return normal_quantile(uniform_open()); }

}  // namespace safefirst
