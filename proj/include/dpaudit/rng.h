//
// Copyright 2026 The dpaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef DPAUDIT_RNG_H_
#define DPAUDIT_RNG_H_

#include <array>
#include <cmath>
#include <cstdint>

namespace dpaudit {

// Deterministic RNG used for every random draw in the library (noise,
// initialization, shuffles, synthetic data). The generator is pinned to
// xoshiro256++ seeded through SplitMix64 so that campaigns replay bit-for-bit
// on any platform; std::random distributions are deliberately not used since
// their output is implementation-defined.
//
// This is a statistical generator. It is fine for auditing experiments but
// must not be used as the noise source of a production DP deployment.

// SplitMix64 finalizer. Bijective on 64-bit words.
inline uint64_t MixBits(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Derives an independent child seed from a base seed and a tag. Chain calls to
// build hierarchical streams, e.g. DeriveSeed(master, world, run).
inline uint64_t DeriveSeed(uint64_t base, uint64_t tag) {
  return MixBits(base + 0x9E3779B97F4A7C15ULL * (tag + 1));
}

template <typename... Tags>
uint64_t DeriveSeed(uint64_t base, uint64_t tag, Tags... rest) {
  return DeriveSeed(DeriveSeed(base, tag), rest...);
}

// Top-level stream tags. Every module that forks a stream from a user seed
// does it through one of these so streams never collide.
enum SeedDomain : uint64_t {
  kSeedXavier = 0x11,
  kSeedShuffle = 0x12,
  kSeedNoise = 0x13,
  kSeedBlobMeans = 0x14,
  kSeedBlobNoise = 0x15,
  kSeedSplit = 0x16,
  kSeedWorld = 0x17,
  kSeedData = 0x18,
  kSeedInit = 0x19,
  kSeedAudit = 0x1A,
};

class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t s = seed;
    for (auto& word : state_) {
      s += 0x9E3779B97F4A7C15ULL;
      word = MixBits(s);
    }
  }

  // xoshiro256++ (Blackman & Vigna).
  uint64_t NextU64() {
    const uint64_t result = Rotl(state_[0] + state_[3], 23) + state_[0];
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = Rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1), 53 bits of mantissa.
  double NextUnit() { return static_cast<double>(NextU64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; one spare is cached.
  double NextGaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - NextUnit();  // (0, 1]
    const double u2 = NextUnit();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * kPi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  // Uniform integer in [0, bound). bound must be positive.
  uint64_t NextBelow(uint64_t bound) {
    const uint64_t threshold = (-bound) % bound;  // reject below to kill modulo bias
    uint64_t value = NextU64();
    while (value < threshold) value = NextU64();
    return value % bound;
  }

 private:
  static constexpr double kPi = 3.14159265358979323846;
  static uint64_t Rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::array<uint64_t, 4> state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace dpaudit

#endif  // DPAUDIT_RNG_H_
