#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace bamsim {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent substream seed from a base seed and up to two tags.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a,
                              std::uint64_t b = 0) {
  return splitmix64(seed ^ splitmix64(a + splitmix64(b + 0x517cc1b727220a95ULL)));
}

// Deterministic generator: mt19937_64 output is fixed by the standard and the
// samplers below avoid library distributions, so identical seeds give
// identical streams on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits.
  double next_unit() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Inverse-CDF exponential sample with the given rate (> 0).
  double exponential(double rate) {
    return -std::log1p(-next_unit()) / rate;
  }

  // Index into a cumulative-weight table (last entry is the total weight).
  std::size_t pick(const std::vector<double>& cumulative) {
    const double u = next_unit() * cumulative.back();
    for (std::size_t i = 0; i + 1 < cumulative.size(); ++i) {
      if (u < cumulative[i]) return i;
    }
    return cumulative.size() - 1;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace bamsim
