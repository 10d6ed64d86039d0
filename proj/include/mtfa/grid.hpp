#pragma once
// Uniform sampling grids for signals and time-frequency fields.

#include <cmath>
#include <cstddef>

#include "mtfa/common.hpp"

namespace mtfa {

struct Grid1 {
  double start = 0.0;
  double step = 1.0;
  int count = 0;

  double value(int i) const { return start + step * i; }
  double back() const { return value(count - 1); }
  double span() const { return step * count; }
  // Fractional index of x; integer values land on nodes.
  double frac_index(double x) const { return (x - start) / step; }

  bool operator==(const Grid1&) const = default;
};

inline Grid1 make_grid(double start, double step, int count) {
  if (count <= 0 || step <= 0.0 || !std::isfinite(start) || !std::isfinite(step))
    throw validation_error("grid: count and step must be positive and finite");
  return {start, step, count};
}

// n samples with spacing `step`, node 0 at index n/2.
inline Grid1 centered_grid(int n, double step) {
  return make_grid(-step * (n / 2), step, n);
}

// Centered grid covering [lo, lo + span) with n samples.
inline Grid1 span_grid(double lo, double hi, int n) {
  if (!(hi > lo)) throw validation_error("grid: empty span");
  return make_grid(lo, (hi - lo) / n, n);
}

// Index of the node exactly at 0; grids used by transform kernels are
// required to contain it.
inline int zero_index(const Grid1& g) {
  double fi = g.frac_index(0.0);
  int i = static_cast<int>(std::lround(fi));
  if (i < 0 || i >= g.count || std::abs(fi - i) > 1e-9 * g.count)
    throw validation_error("grid: node 0 not on grid");
  return i;
}

inline bool has_zero(const Grid1& g) {
  double fi = g.frac_index(0.0);
  int i = static_cast<int>(std::lround(fi));
  return i >= 0 && i < g.count && std::abs(fi - i) <= 1e-9 * g.count;
}

// Frequency grid conjugate to g under the DFT: same count, spacing
// 1/(n*step), node 0 at index n/2.
inline Grid1 fft_conjugate(const Grid1& g) {
  return centered_grid(g.count, 1.0 / (g.step * g.count));
}

// Nodes {scale * g_k} reordered to ascending when scale < 0.
inline Grid1 scaled_grid(const Grid1& g, double scale) {
  if (scale == 0.0) throw validation_error("grid: zero scale");
  if (scale > 0.0) return {g.start * scale, g.step * scale, g.count};
  return {g.back() * scale, -g.step * scale, g.count};
}

inline bool approx_same(const Grid1& a, const Grid1& b, double tol = 1e-9) {
  return a.count == b.count && std::abs(a.start - b.start) <= tol * std::max(1.0, std::abs(a.start)) &&
         std::abs(a.step - b.step) <= tol * a.step;
}

struct Grid2 {
  Grid1 x;  // first axis (time-like)
  Grid1 u;  // second axis (frequency-like)

  size_t size() const { return static_cast<size_t>(x.count) * u.count; }
  size_t idx(int i, int j) const { return static_cast<size_t>(i) * u.count + j; }
  double cell() const { return x.step * u.step; }

  bool operator==(const Grid2&) const = default;
};

}  // namespace mtfa
