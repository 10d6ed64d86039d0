#pragma once
// Counter-based deterministic RNG. Every draw is a pure function of
// (seed, stream, index), so noise realizations are reproducible across
// runs and thread counts.

#include <cstdint>

#include "mtfa/common.hpp"

namespace mtfa {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline uint64_t hash3(uint64_t seed, uint64_t stream, uint64_t index) {
  return splitmix64(seed ^ splitmix64(stream ^ splitmix64(index)));
}

// Uniform in (0, 1]; never returns 0 so it is safe inside log().
inline double u01(uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

inline double uniform(uint64_t seed, uint64_t stream, uint64_t index) {
  return u01(hash3(seed, stream, index));
}

// Uniform in [lo, hi).
inline double uniform_in(double lo, double hi, uint64_t seed, uint64_t stream,
                         uint64_t index) {
  return lo + (hi - lo) * uniform(seed, stream, index);
}

// One standard normal pair via Box-Muller.
inline void gauss_pair(uint64_t seed, uint64_t stream, uint64_t index, double& g1,
                       double& g2) {
  double r1 = uniform(seed, stream, 2 * index);
  double r2 = uniform(seed, stream, 2 * index + 1);
  double rad = std::sqrt(-2.0 * std::log(r1));
  g1 = rad * std::cos(2.0 * kPi * r2);
  g2 = rad * std::sin(2.0 * kPi * r2);
}

inline double gauss(uint64_t seed, uint64_t stream, uint64_t index) {
  double g1, g2;
  gauss_pair(seed, stream, index, g1, g2);
  return g1;
}

// Circular complex normal with E|z|^2 = 1.
inline cplx cgauss(uint64_t seed, uint64_t stream, uint64_t index) {
  double g1, g2;
  gauss_pair(seed, stream, index, g1, g2);
  return cplx(g1, g2) / std::sqrt(2.0);
}

}  // namespace mtfa
