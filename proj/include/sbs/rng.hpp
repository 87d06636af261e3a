#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace sbs {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic child seed: split_seed(base, i) = mix64(base ^ mix64(i)).
/// Used for replication r (split_seed(base_seed, r)) and for per-agent streams.
constexpr std::uint64_t split_seed(std::uint64_t base, std::uint64_t index) {
  return mix64(base ^ mix64(index));
}

/// Stream tags under a run seed. Agent i draws from
/// split_seed(split_seed(seed, kAgentStreams), i); the initial condition draws
/// from split_seed(seed, kInitStream).
inline constexpr std::uint64_t kInitStream = 0x696e6974ULL;    // "init"
inline constexpr std::uint64_t kAgentStreams = 0x6167656eULL;  // "agen"

/// xoshiro256** seeded through SplitMix64. Satisfies
/// UniformRandomBitGenerator; the floating conversions below are fixed so
/// output does not depend on the standard library's distributions.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) {
      s += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = s;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      word = z ^ (z >> 31);
    }
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform index in [0, n); multiply-shift, bias below 2^-64 * n.
  std::uint64_t uniform_index(std::uint64_t n) {
    __extension__ using wide = unsigned __int128;
    return static_cast<std::uint64_t>((static_cast<wide>((*this)()) * n) >> 64);
  }

  double exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t state_[4];
};

inline Rng agent_stream(std::uint64_t seed, std::uint64_t agent) {
  return Rng(split_seed(split_seed(seed, kAgentStreams), agent));
}

inline Rng init_stream(std::uint64_t seed) { return Rng(split_seed(seed, kInitStream)); }

}  // namespace sbs
