#pragma once

#include <cstdint>

namespace recnet {

// xoshiro256** (Blackman & Vigna) seeded through splitmix64. Everything that
// needs randomness goes through this type so runs are reproducible bit for bit
// across compilers and standard libraries.
//
//   splitmix64:  x += 0x9E3779B97F4A7C15;
//                z = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9;
//                z = (z ^ (z >> 27)) * 0x94D049BB133111EB;
//                return z ^ (z >> 31);
//   xoshiro256**: result = rotl(s1 * 5, 7) * 9, then the standard
//                 shift/xor/rotl(45) state update.
//
// Doubles use the top 53 bits; normals use Box-Muller with one cached value.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  // Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi);
  // Uniform integer in [0, n), n > 0. Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t n);
  double normal();
  // Independent child stream; advances this generator once.
  Rng split();

 private:
  std::uint64_t s_[4];
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace recnet
