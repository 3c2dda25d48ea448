#pragma once

#include <cmath>
#include <cstdint>

namespace plcurate {

// SplitMix64 (Steele, Lea & Flood 2014). Used everywhere a seeded stream is
// needed so that results are bit-identical across platforms and compilers;
// std::mt19937 + std::uniform_*_distribution are not portable that way.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Unbiased integer in [0, n) via rejection sampling.
  std::uint64_t bounded(std::uint64_t n) {
    if (n < 2) return 0;
    const std::uint64_t min = (0ULL - n) % n;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= min) return r % n;
    }
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  std::uint64_t state_;
};

}  // namespace plcurate
