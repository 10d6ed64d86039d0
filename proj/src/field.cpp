#include "mtfa/field.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace mtfa {

cplx Field2::sample(double x, double u) const {
  double fi = g.x.frac_index(x);
  double fj = g.u.frac_index(u);
  if (fi < 0.0 || fj < 0.0 || fi > g.x.count - 1 || fj > g.u.count - 1) return 0.0;
  int i0 = static_cast<int>(fi), j0 = static_cast<int>(fj);
  int i1 = std::min(i0 + 1, g.x.count - 1);
  int j1 = std::min(j0 + 1, g.u.count - 1);
  double wx = fi - i0, wu = fj - j0;
  return (1 - wx) * (1 - wu) * at(i0, j0) + wx * (1 - wu) * at(i1, j0) +
         (1 - wx) * wu * at(i0, j1) + wx * wu * at(i1, j1);
}

double Field2::energy() const {
  double s = 0.0;
  for (const cplx& z : v) s += std::norm(z);
  return s * g.cell();
}

double Field2::mean_abs2() const {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (const cplx& z : v) s += std::norm(z);
  return s / v.size();
}

Field2 coordinate_transform(const Field2& f, const double S[2][2]) {
  double det = S[0][0] * S[1][1] - S[0][1] * S[1][0];
  double amp = std::sqrt(std::abs(det));
  Field2 out(f.g);
  for (int i = 0; i < f.g.x.count; ++i) {
    double x = f.g.x.value(i);
    for (int j = 0; j < f.g.u.count; ++j) {
      double y = f.g.u.value(j);
      out.at(i, j) = amp * f.sample(x * S[0][0] + y * S[1][0], x * S[0][1] + y * S[1][1]);
    }
  }
  return out;
}

Field2 operator-(const Field2& a, const Field2& b) {
  if (!(a.g == b.g)) throw validation_error("field: grid mismatch");
  Field2 out(a.g);
  for (size_t k = 0; k < a.v.size(); ++k) out.v[k] = a.v[k] - b.v[k];
  return out;
}

Field2 operator+(const Field2& a, const Field2& b) {
  if (!(a.g == b.g)) throw validation_error("field: grid mismatch");
  Field2 out(a.g);
  for (size_t k = 0; k < a.v.size(); ++k) out.v[k] = a.v[k] + b.v[k];
  return out;
}

Field2 operator*(const cplx& c, const Field2& a) {
  Field2 out(a.g);
  for (size_t k = 0; k < a.v.size(); ++k) out.v[k] = c * a.v[k];
  return out;
}

double field_rel_l2(const Field2& a, const Field2& b, double floor) {
  if (!(a.g == b.g)) throw validation_error("field: grid mismatch");
  return rel_l2(a.v, b.v, floor);
}

Field2 outer_conj(const std::vector<cplx>& f1, const Grid1& gx,
                  const std::vector<cplx>& f2, const Grid1& gy) {
  if (static_cast<int>(f1.size()) != gx.count || static_cast<int>(f2.size()) != gy.count)
    throw validation_error("outer_conj: size mismatch");
  Field2 out({gx, gy});
  for (int i = 0; i < gx.count; ++i)
    for (int j = 0; j < gy.count; ++j) out.at(i, j) = f1[i] * std::conj(f2[j]);
  return out;
}

void write_field_csv(const std::string& path, const Field2& f) {
  std::ofstream out(path);
  if (!out) throw validation_error("cannot open for writing: " + path);
  out << "x,u,re,im\n";
  char line[160];
  for (int i = 0; i < f.g.x.count; ++i)
    for (int j = 0; j < f.g.u.count; ++j) {
      const cplx& z = f.at(i, j);
      std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g\n", f.g.x.value(i),
                    f.g.u.value(j), z.real(), z.imag());
      out << line;
    }
}

}  // namespace mtfa
