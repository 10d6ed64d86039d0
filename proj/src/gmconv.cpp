#include "mtfa/gmconv.hpp"

#include <cmath>

#include "mtfa/fft.hpp"

namespace mtfa {
namespace {

inline double qform(const Eigen::Matrix2d& Q, double z1, double z2) {
  return z1 * (Q(0, 0) * z1 + Q(0, 1) * z2) + z2 * (Q(1, 0) * z1 + Q(1, 1) * z2);
}

void require_invertible_b(const SpMat& m, const char* name) {
  if (std::abs(m.B().determinant()) < 1e-12)
    throw validation_error(std::string("gmc: singular B block in ") + name);
}

// Multiply field samples by exp(s * pi * i * z F z^T).
std::vector<cplx> chirped(const Field2& f, const Eigen::Matrix2d& F, double s) {
  std::vector<cplx> out(f.v.size());
  for (int i = 0; i < f.g.x.count; ++i) {
    double x = f.g.x.value(i);
    for (int j = 0; j < f.g.u.count; ++j)
      out[f.g.idx(i, j)] =
          f.at(i, j) * unit_phase(s * kPi * qform(F, x, f.g.u.value(j)));
  }
  return out;
}

}  // namespace

GmcTriple::GmcTriple(const SpMat& m4, const SpMat& m5, const SpMat& m6)
    : M4(m4), M5(m5), M6(m6) {
  if (M4.n() != 2 || M5.n() != 2 || M6.n() != 2)
    throw validation_error("gmc: matrices must be 4x4");
  require_invertible_b(M4, "M4");
  require_invertible_b(M5, "M5");
  require_invertible_b(M6, "M6");
}

Eigen::Matrix2d GmcTriple::F4() const {
  return Eigen::Matrix2d(M4.B().inverse() * M4.A());
}
Eigen::Matrix2d GmcTriple::F5() const {
  return Eigen::Matrix2d(M5.B().inverse() * M5.A());
}
Eigen::Matrix2d GmcTriple::F6() const {
  return Eigen::Matrix2d(M6.B().inverse() * M6.A());
}

GmcTriple GmcTriple::all_fourier() {
  SpMat j = sp_fourier(2);
  return GmcTriple(j, j, j);
}

GmcTriple gmc_family(GmcFamily kind, const SpMat& M4) {
  if (M4.n() != 2) throw validation_error("gmc_family: M4 must be 4x4");
  SpMat j = sp_fourier(2);
  switch (kind) {
    case GmcFamily::Conventional:
      return GmcTriple(j, j, j);
    case GmcFamily::TypeI:
      return GmcTriple(M4, j, M4);
    case GmcFamily::TypeII:
      return GmcTriple(M4, M4, M4);
    case GmcFamily::TypeIV: {
      const double r = std::sqrt(2.0);
      Eigen::MatrixXd m(4, 4);
      m.topLeftCorner(2, 2) = M4.A() / r;
      m.topRightCorner(2, 2) = M4.B() * r;
      m.bottomLeftCorner(2, 2) = M4.C() / r;
      m.bottomRightCorner(2, 2) = M4.D() * r;
      return GmcTriple(M4, M4, SpMat::from_matrix(m));
    }
  }
  throw validation_error("gmc_family: unknown kind");
}

cplx epsilon_factor(const GmcTriple& t, double u1, double u2) {
  Eigen::Matrix2d B4 = t.M4.B(), B5 = t.M5.B(), B6 = t.M6.B();
  Eigen::Matrix2d B6i = B6.inverse();
  Eigen::Matrix2d P6 = t.M6.D() * B6i;
  Eigen::Matrix2d P4 = B6i.transpose() * B4.transpose() * t.M4.D() * B6i;
  Eigen::Matrix2d P5 = B6i.transpose() * B5.transpose() * t.M5.D() * B6i;
  cplx c = sqrt_neg(B4.determinant()) * sqrt_neg(B5.determinant()) /
           sqrt_neg(B6.determinant());
  return c * unit_phase(kPi * (qform(P6, u1, u2) - qform(P4, u1, u2) - qform(P5, u1, u2)));
}

Field2 convolve_direct(const Field2& f, const Field2& g, const GmcTriple& t,
                       ExecPolicy pol, bool use_fft) {
  if (!(f.g == g.g)) throw validation_error("gmc: operands on different grids");
  const Grid2& gr = f.g;
  const int nx = gr.x.count, nu = gr.u.count;
  const int zx = zero_index(gr.x), zu = zero_index(gr.u);
  std::vector<cplx> fc = chirped(f, t.F4(), +1.0);
  std::vector<cplx> gc = chirped(g, t.F5(), +1.0);
  const double cell = gr.cell();
  Field2 out(gr);

  if (use_fft) {
    const int px = 2 * nx, pu = 2 * nu;
    std::vector<cplx> fp(static_cast<size_t>(px) * pu, 0.0), gp(fp.size(), 0.0);
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < nu; ++j) {
        fp[static_cast<size_t>(i) * pu + j] = fc[gr.idx(i, j)];
        gp[static_cast<size_t>(i) * pu + j] = gc[gr.idx(i, j)];
      }
    fft::transform2d(fp.data(), px, pu, -1);
    fft::transform2d(gp.data(), px, pu, -1);
    for (size_t k = 0; k < fp.size(); ++k) fp[k] *= gp[k];
    fft::transform2d(fp.data(), px, pu, +1);
    const double inv = 1.0 / (static_cast<double>(px) * pu);
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < nu; ++j)
        out.at(i, j) = fp[static_cast<size_t>(i + zx) * pu + (j + zu)] * inv * cell;
  } else {
    const int nthreads = thread_count(pol);
#pragma omp parallel for num_threads(nthreads) schedule(static)
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < nu; ++j) {
        cplx acc = 0.0;
        for (int k = 0; k < nx; ++k) {
          int i2 = i - k + zx;
          if (i2 < 0 || i2 >= nx) continue;
          for (int l = 0; l < nu; ++l) {
            int j2 = j - l + zu;
            if (j2 < 0 || j2 >= nu) continue;
            acc += fc[gr.idx(k, l)] * gc[gr.idx(i2, j2)];
          }
        }
        out.at(i, j) = acc * cell;
      }
  }

  Eigen::Matrix2d F6 = t.F6();
  for (int i = 0; i < nx; ++i) {
    double x = gr.x.value(i);
    for (int j = 0; j < nu; ++j)
      out.at(i, j) *= unit_phase(-kPi * qform(F6, x, gr.u.value(j)));
  }
  return out;
}

Field2 convolve_spectral(const Field2& f, const Field2& g, const GmcTriple& t,
                         ExecPolicy pol) {
  if (!(f.g == g.g)) throw validation_error("gmc: operands on different grids");
  std::vector<cplx> s4 = mu2d_spectrum(t.M4, f, pol);
  std::vector<cplx> s5 = mu2d_spectrum(t.M5, g, pol);
  Grid1 gnu1 = fft_conjugate(f.g.x), gnu2 = fft_conjugate(f.g.u);
  Eigen::Matrix2d B4 = t.M4.B(), B5 = t.M5.B(), B6 = t.M6.B();
  // eps(u B6^T) expressed in nu: the three quadratic forms collapse to
  // nu (B6^T D6 - B4^T D4 - B5^T D5) nu^T.
  Eigen::Matrix2d Q = B6.transpose() * t.M6.D() - B4.transpose() * t.M4.D() -
                      B5.transpose() * t.M5.D();
  cplx c = sqrt_neg(B4.determinant()) * sqrt_neg(B5.determinant()) /
           sqrt_neg(B6.determinant());
  std::vector<cplx> prod(s4.size());
  for (int k1 = 0; k1 < gnu1.count; ++k1) {
    double nu1 = gnu1.value(k1);
    for (int k2 = 0; k2 < gnu2.count; ++k2) {
      size_t k = static_cast<size_t>(k1) * gnu2.count + k2;
      prod[k] = c * unit_phase(kPi * qform(Q, nu1, gnu2.value(k2))) * s4[k] * s5[k];
    }
  }
  return mu2d_from_spectrum(t.M6, prod, f.g, pol);
}

Field2 convolve(const Field2& f, const Field2& g, const GmcTriple& t,
                ConvMethod method, ExecPolicy pol) {
  return method == ConvMethod::Direct ? convolve_direct(f, g, t, pol)
                                      : convolve_spectral(f, g, t, pol);
}

}  // namespace mtfa
