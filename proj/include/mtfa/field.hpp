#pragma once
// Complex 2-D fields sampled on Grid2 (time-frequency distributions,
// ambiguity kernels, filters).

#include <vector>

#include "mtfa/common.hpp"
#include "mtfa/grid.hpp"

namespace mtfa {

struct Field2 {
  Grid2 g;
  std::vector<cplx> v;

  Field2() = default;
  explicit Field2(const Grid2& grid) : g(grid), v(grid.size(), cplx(0.0)) {}
  Field2(const Grid2& grid, std::vector<cplx> vals) : g(grid), v(std::move(vals)) {
    if (v.size() != g.size()) throw validation_error("field: value count does not match grid");
  }

  cplx& at(int i, int j) { return v[g.idx(i, j)]; }
  const cplx& at(int i, int j) const { return v[g.idx(i, j)]; }

  // Bilinear interpolation with zero extension outside the grid.
  cplx sample(double x, double u) const;

  double energy() const;     // sum |v|^2 * cell
  double mean_abs2() const;  // mean of |v|^2
};

// sqrt(|det S|) * F((x,u) S) for a row vector (x,u) and 2x2 S, sampled
// back onto F's own grid.
Field2 coordinate_transform(const Field2& f, const double S[2][2]);

// Pointwise binary ops used by filters and tests.
Field2 operator-(const Field2& a, const Field2& b);
Field2 operator+(const Field2& a, const Field2& b);
Field2 operator*(const cplx& c, const Field2& a);

double field_rel_l2(const Field2& a, const Field2& b, double floor = 1e-12);

// Outer product F1(x_i) * conj(F2(y_j)) on g = {gx, gy}.
Field2 outer_conj(const std::vector<cplx>& f1, const Grid1& gx,
                  const std::vector<cplx>& f2, const Grid1& gy);

// Row-major "x,u,re,im" rows with a header line.
void write_field_csv(const std::string& path, const Field2& f);

}  // namespace mtfa
