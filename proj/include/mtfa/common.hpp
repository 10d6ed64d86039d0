#pragma once
// Shared scalar types, error taxonomy and small numeric helpers.

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mtfa {

using cplx = std::complex<double>;
using std::size_t;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr cplx kI{0.0, 1.0};

// Input / configuration problems. CLI maps these to exit code 2.
struct validation_error : std::runtime_error {
  explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

// Runtime numerical failures (degenerate data, overflow, rank loss).
// CLI maps these to exit code 3.
struct numerical_error : std::runtime_error {
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

inline cplx unit_phase(double theta) { return {std::cos(theta), std::sin(theta)}; }

// Principal square root of -x for real x; x > 0 lands on the positive
// imaginary axis, e.g. sqrt_neg(1) = i.
inline cplx sqrt_neg(double x) { return std::sqrt(cplx(-x, 0.0)); }

inline double sqr(double x) { return x * x; }

inline double norm_l2(const std::vector<cplx>& v) {
  double s = 0.0;
  for (const cplx& z : v) s += std::norm(z);
  return std::sqrt(s);
}

inline cplx inner(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  if (a.size() != b.size()) throw validation_error("inner: size mismatch");
  cplx s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * std::conj(b[i]);
  return s;
}

// Relative l2 distance with an absolute floor so that comparing two
// zero vectors is well defined.
inline double rel_l2(const std::vector<cplx>& a, const std::vector<cplx>& b,
                     double floor = 1e-12) {
  if (a.size() != b.size()) throw validation_error("rel_l2: size mismatch");
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  return std::sqrt(num) / std::max(std::sqrt(den), floor);
}

// Unimodular constant c (|c| = 1) minimizing ||a - c b||_2.
inline cplx align_phase(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  cplx ip = inner(a, b);
  double m = std::abs(ip);
  return m > 0.0 ? ip / m : cplx(1.0, 0.0);
}

// rel_l2 after optimal unimodular alignment of b to a.
struct Aligned {
  double residual;
  cplx phase;
};

inline Aligned aligned_rel_l2(const std::vector<cplx>& a, const std::vector<cplx>& b,
                              double floor = 1e-12) {
  cplx c = align_phase(a, b);
  std::vector<cplx> cb(b.size());
  for (size_t i = 0; i < b.size(); ++i) cb[i] = c * b[i];
  return {rel_l2(a, cb, floor), c};
}

}  // namespace mtfa
