// SPDX-License-Identifier: Apache-2.0
//
// Platform-independent random streams. Standard library distributions are
// implementation-defined, so every draw used by the generator is derived here
// from raw 64-bit outputs.
//
//   engine:        xoshiro256** 1.0, state seeded by four SplitMix64 outputs
//   child streams: childSeed(master, i) = SplitMix64 output after seeding
//                  with master + (i + 1) * 0x9E3779B97F4A7C15 (mod 2^64)
//   uniform(b):    Lemire's nearly-divisionless bounded integer
//   real01():      top 53 bits scaled by 2^-53, in [0, 1)

#pragma once

#include <array>
#include <cstdint>

namespace satprobe {

inline std::uint64_t splitMix64(std::uint64_t &state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t childSeed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t state = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
  return splitMix64(state);
}

class Rng {
public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto &word : state_)
      word = splitMix64(sm);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() { return next(); }

  std::uint64_t next() {
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

  /// Uniform integer in [0, bound); bound must be positive.
  std::uint64_t uniform(std::uint64_t bound) {
    unsigned __int128 product =
        static_cast<unsigned __int128>(next()) * bound;
    auto low = static_cast<std::uint64_t>(product);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        product = static_cast<unsigned __int128>(next()) * bound;
        low = static_cast<std::uint64_t>(product);
      }
    }
    return static_cast<std::uint64_t>(product >> 64);
  }

  double real01() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  bool coin() { return (next() >> 63) != 0; }

  /// Trials up to and including the first success; support {1, 2, ...}.
  std::uint64_t geometric(double p) {
    std::uint64_t trials = 1;
    while (!(real01() < p))
      ++trials;
    return trials;
  }

private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
};

} // namespace satprobe
