// Seeded, splittable random generator.
//
// Substreams are derived from the construction seed alone (never from the
// stream position), so work split across threads by task index produces the
// same numbers regardless of thread count. Distributions are implemented
// directly on top of the raw 64-bit stream to keep outputs identical across
// standard-library versions.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace qds {

class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), gen_(mix(seed)) {}

  uint64_t seed() const { return seed_; }

  // Independent substream: a pure function of (seed, key).
  Rng substream(uint64_t key) const {
    return Rng(mix(seed_ + 0x9e3779b97f4a7c15ull * (key + 1)));
  }

  uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe as a log() argument.
  double uniform_pos() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Unbiased uniform integer in [0, n).
  uint64_t below(uint64_t n) {
    uint64_t threshold = (0 - n) % n;
    for (;;) {
      uint64_t x = next_u64();
      if (x >= threshold) return x % n;
    }
  }

  // Standard normal via Box-Muller; the paired value is cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform_pos();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  // Standard Cauchy.
  double cauchy() {
    return std::tan(std::numbers::pi * (uniform() - 0.5));
  }

 private:
  // splitmix64 finalizer.
  static uint64_t mix(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  uint64_t seed_;
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace qds
