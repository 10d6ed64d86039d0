#include "mtfa/metaplectic.hpp"

#include <cmath>

#include "mtfa/fft.hpp"

namespace mtfa {
namespace {

constexpr double kZeroBlock = 1e-12;

struct Abcd {
  double a, b, c, d;
};

Abcd blocks2(const SpMat& M) {
  if (M.n() != 1) throw validation_error("metaplectic: expected a 2x2 matrix");
  return {M.a(), M.b(), M.c(), M.d()};
}

Abcd axis_blocks(const SpMat& M4, int axis) {
  const Eigen::MatrixXd& m = M4.matrix();
  return {m(axis, axis), m(axis, axis + 2), m(axis + 2, axis), m(axis + 2, axis + 2)};
}

bool singular_b(double b) { return std::abs(b) < kZeroBlock; }

cplx kernel_scalar(const Abcd& m, double u, double x) {
  return (cplx(1.0) / sqrt_neg(m.b)) *
         unit_phase(kPi * ((m.d / m.b) * u * u + (m.a / m.b) * x * x) -
                    2.0 * kPi * x * u / m.b);
}

// Core of the chirp-FFT factorization, indexed by the conjugate node
// nu_k (no branch constant, no quadrature weight):
//   S_k = exp(i*pi*d*b*nu_k^2) * sum_j f_j exp(i*pi*(a/b)*x_j^2)
//         * exp(-2*pi*i*x_j*nu_k)
std::vector<cplx> chirp_core(const Abcd& m, const std::vector<cplx>& f,
                             const Grid1& gx, const Grid1& gnu) {
  std::vector<cplx> buf(f);
  const double ab = m.a / m.b;
  for (int j = 0; j < gx.count; ++j) buf[j] *= unit_phase(kPi * ab * sqr(gx.value(j)));
  buf = cdft(buf, gx, gnu, -1);
  const double db = m.d * m.b;
  for (int k = 0; k < gnu.count; ++k) buf[k] *= unit_phase(kPi * db * sqr(gnu.value(k)));
  return buf;
}

std::vector<cplx> chirp_core_adjoint(const Abcd& m, const std::vector<cplx>& S,
                                     const Grid1& gnu, const Grid1& gx) {
  std::vector<cplx> buf(S);
  const double db = m.d * m.b;
  for (int k = 0; k < gnu.count; ++k) buf[k] *= unit_phase(-kPi * db * sqr(gnu.value(k)));
  buf = cdft(buf, gnu, gx, +1);
  const double ab = m.a / m.b;
  for (int j = 0; j < gx.count; ++j) buf[j] *= unit_phase(-kPi * ab * sqr(gx.value(j)));
  return buf;
}

// Off-node reads for the B = 0 branches. Tensor lattices land between
// nodes (half-grid shifts), where linear interpolation leaves a Nyquist
// modulated residue; reads therefore go through the trigonometric
// interpolant of the sample set. Exact at the nodes, band limited in
// between, zero outside the sampled window.
struct DirichletReader {
  Grid1 g;
  Grid1 gnu;
  std::vector<cplx> spec;
  DirichletReader(const std::vector<cplx>& v, const Grid1& grid)
      : g(grid), gnu(fft_conjugate(grid)), spec(cdft(v, grid, gnu, -1)) {}
  cplx at(double x) const {
    double fi = g.frac_index(x);
    if (fi < 0.0 || fi > g.count - 1) return 0.0;
    cplx acc = 0.0;
    for (int k = 0; k < gnu.count; ++k)
      acc += spec[k] * unit_phase(2.0 * kPi * gnu.value(k) * x);
    return acc / static_cast<double>(g.count);
  }
};

}  // namespace

cplx mt_kernel(const SpMat& M, double u, double x) {
  Abcd m = blocks2(M);
  if (singular_b(m.b)) throw validation_error("mt_kernel: B block is singular");
  return kernel_scalar(m, u, x);
}

Grid1 natural_grid(const SpMat& M, const Grid1& gin) {
  Abcd m = blocks2(M);
  if (singular_b(m.b)) throw validation_error("natural_grid: B block is singular");
  return scaled_grid(fft_conjugate(gin), m.b);
}

Signal mt_to_grid(const SpMat& M, const Signal& f, const Grid1& gout, ExecPolicy pol) {
  Abcd m = blocks2(M);
  Signal out(gout);
  if (singular_b(m.b)) {
    cplx amp = std::sqrt(cplx(m.d, 0.0));
    DirichletReader rd(f.v, f.g);
    for (int k = 0; k < gout.count; ++k) {
      double u = gout.value(k);
      out.v[k] = amp * unit_phase(kPi * m.c * m.d * u * u) * rd.at(u * m.d);
    }
    return out;
  }
  const cplx c0 = cplx(1.0) / sqrt_neg(m.b);
  const double dx = f.g.step;
  const int nthreads = thread_count(pol);
#pragma omp parallel for num_threads(nthreads) schedule(static)
  for (int k = 0; k < gout.count; ++k) {
    double u = gout.value(k);
    cplx acc = 0.0;
    for (int j = 0; j < f.g.count; ++j) {
      double x = f.g.value(j);
      acc += f.v[j] * unit_phase(kPi * ((m.d / m.b) * u * u + (m.a / m.b) * x * x) -
                                 2.0 * kPi * x * u / m.b);
    }
    out.v[k] = c0 * acc * dx;
  }
  return out;
}

Signal mt(const SpMat& M, const Signal& f, MtMethod method, ExecPolicy pol) {
  Abcd m = blocks2(M);
  if (singular_b(m.b)) return mt_to_grid(M, f, f.g, pol);
  if (method == MtMethod::Direct) return mt_to_grid(M, f, natural_grid(M, f.g), pol);
  Grid1 gnu = fft_conjugate(f.g);
  std::vector<cplx> S = chirp_core(m, f.v, f.g, gnu);
  Grid1 gout = scaled_grid(gnu, m.b);
  Signal out(gout);
  const cplx scale = (cplx(1.0) / sqrt_neg(m.b)) * f.g.step;
  const int n = gnu.count;
  for (int k = 0; k < n; ++k) out.v[k] = scale * S[m.b > 0 ? k : n - 1 - k];
  return out;
}

std::vector<cplx> mt_at(const SpMat& M, const Signal& f, const std::vector<double>& pts) {
  Abcd m = blocks2(M);
  std::vector<cplx> out(pts.size());
  if (singular_b(m.b)) {
    cplx amp = std::sqrt(cplx(m.d, 0.0));
    DirichletReader rd(f.v, f.g);
    for (size_t k = 0; k < pts.size(); ++k) {
      double u = pts[k];
      out[k] = amp * unit_phase(kPi * m.c * m.d * u * u) * rd.at(u * m.d);
    }
    return out;
  }
  const cplx c0 = cplx(1.0) / sqrt_neg(m.b);
  for (size_t k = 0; k < pts.size(); ++k) {
    double u = pts[k];
    cplx acc = 0.0;
    for (int j = 0; j < f.g.count; ++j) {
      double x = f.g.value(j);
      acc += f.v[j] * unit_phase(kPi * ((m.d / m.b) * u * u + (m.a / m.b) * x * x) -
                                 2.0 * kPi * x * u / m.b);
    }
    out[k] = c0 * acc * f.g.step;
  }
  return out;
}

Signal mt_adjoint(const SpMat& M, const Signal& P, const Grid1& gout, MtMethod method,
                  ExecPolicy pol) {
  Abcd m = blocks2(M);
  if (singular_b(m.b)) {
    // Inverse of the B = 0 branch: f(x) = P(x/d) exp(-i*pi*c*x^2/d) / sqrt(d).
    Signal out(gout);
    cplx amp = cplx(1.0) / std::sqrt(cplx(m.d, 0.0));
    DirichletReader rd(P.v, P.g);
    for (int j = 0; j < gout.count; ++j) {
      double x = gout.value(j);
      double u = x / m.d;
      out.v[j] = amp * unit_phase(-kPi * m.c * m.d * u * u) * rd.at(u);
    }
    return out;
  }
  Grid1 gnat = natural_grid(M, gout);
  if (approx_same(P.g, gnat) && method != MtMethod::Direct) {
    Grid1 gnu = fft_conjugate(gout);
    const int n = gnu.count;
    std::vector<cplx> S(n);
    for (int k = 0; k < n; ++k) S[k] = P.v[m.b > 0 ? k : n - 1 - k];
    std::vector<cplx> f = chirp_core_adjoint(m, S, gnu, gout);
    Signal out(gout);
    const cplx scale = std::conj(cplx(1.0) / sqrt_neg(m.b)) * std::abs(m.b) * gnu.step;
    for (int j = 0; j < gout.count; ++j) out.v[j] = scale * f[j];
    return out;
  }
  const cplx c0c = std::conj(cplx(1.0) / sqrt_neg(m.b));
  const double du = P.g.step;
  if (method == MtMethod::Direct) {
    Signal out(gout);
    const int nthreads = thread_count(pol);
#pragma omp parallel for num_threads(nthreads) schedule(static)
    for (int j = 0; j < gout.count; ++j) {
      double x = gout.value(j);
      cplx acc = 0.0;
      for (int k = 0; k < P.g.count; ++k) {
        double u = P.g.value(k);
        acc += P.v[k] * unit_phase(-kPi * ((m.d / m.b) * u * u + (m.a / m.b) * x * x) +
                                   2.0 * kPi * x * u / m.b);
      }
      out.v[j] = c0c * acc * du;
    }
    return out;
  }
  // Same adjoint sum on an arbitrary uniform grid, as a chirped Fourier sum.
  std::vector<cplx> q(P.g.count);
  for (int k = 0; k < P.g.count; ++k) {
    double u = P.g.value(k);
    q[k] = P.v[k] * unit_phase(-kPi * (m.d / m.b) * u * u);
  }
  Grid1 gsc = scaled_grid(gout, 1.0 / m.b);
  std::vector<cplx> S = cdft(q, P.g, gsc, +1);
  Signal out(gout);
  const int n = gout.count;
  for (int j = 0; j < n; ++j) {
    double x = gout.value(j);
    out.v[j] = c0c * du * unit_phase(-kPi * (m.a / m.b) * x * x) * S[m.b > 0 ? j : n - 1 - j];
  }
  return out;
}

Field2 partial_mt2(const SpMat& M, const Field2& F, MtMethod method, ExecPolicy pol) {
  Abcd m = blocks2(M);
  if (singular_b(m.b)) return partial_mt2_to(M, F, F.g.u, pol);
  Grid1 gnu = fft_conjugate(F.g.u);
  Grid1 uout = scaled_grid(gnu, m.b);
  if (method == MtMethod::Direct) return partial_mt2_to(M, F, uout, pol);
  const int nx = F.g.x.count, n = gnu.count;
  Field2 out({F.g.x, uout});
  const cplx scale = (cplx(1.0) / sqrt_neg(m.b)) * F.g.u.step;
  const int nthreads = thread_count(pol);
#pragma omp parallel for num_threads(nthreads) schedule(static)
  for (int i = 0; i < nx; ++i) {
    std::vector<cplx> row(F.v.begin() + static_cast<size_t>(i) * n,
                          F.v.begin() + static_cast<size_t>(i + 1) * n);
    std::vector<cplx> S = chirp_core(m, row, F.g.u, gnu);
    for (int k = 0; k < n; ++k) out.at(i, k) = scale * S[m.b > 0 ? k : n - 1 - k];
  }
  return out;
}

Field2 partial_mt2_to(const SpMat& M, const Field2& F, const Grid1& uout, ExecPolicy pol) {
  Abcd m = blocks2(M);
  const int nx = F.g.x.count, ny = F.g.u.count;
  Field2 out({F.g.x, uout});
  const int nthreads = thread_count(pol);
  if (singular_b(m.b)) {
    cplx amp = std::sqrt(cplx(m.d, 0.0));
#pragma omp parallel for num_threads(nthreads) schedule(static)
    for (int i = 0; i < nx; ++i) {
      std::vector<cplx> row(F.v.begin() + static_cast<size_t>(i) * ny,
                            F.v.begin() + static_cast<size_t>(i + 1) * ny);
      DirichletReader rd(row, F.g.u);
      for (int k = 0; k < uout.count; ++k) {
        double u = uout.value(k);
        out.at(i, k) = amp * unit_phase(kPi * m.c * m.d * u * u) * rd.at(u * m.d);
      }
    }
    return out;
  }
  // Bluestein evaluation at arbitrary uniform output nodes u_k = b * nu
  // with nu on a uniform (possibly non-conjugate) grid.
  Grid1 geff = m.b > 0 ? Grid1{uout.start / m.b, uout.step / m.b, uout.count}
                       : Grid1{uout.back() / m.b, uout.step / -m.b, uout.count};
  const cplx scale = (cplx(1.0) / sqrt_neg(m.b)) * F.g.u.step;
  const double db = m.d / m.b;
#pragma omp parallel for num_threads(nthreads) schedule(static)
  for (int i = 0; i < nx; ++i) {
    std::vector<cplx> row(F.v.begin() + static_cast<size_t>(i) * ny,
                          F.v.begin() + static_cast<size_t>(i + 1) * ny);
    const double ab = m.a / m.b;
    for (int j = 0; j < ny; ++j) row[j] *= unit_phase(kPi * ab * sqr(F.g.u.value(j)));
    std::vector<cplx> T = cdft(row, F.g.u, geff, -1);
    for (int k = 0; k < uout.count; ++k) {
      double u = uout.value(k);
      int src = m.b > 0 ? k : uout.count - 1 - k;
      out.at(i, k) = scale * unit_phase(kPi * db * u * u) * T[src];
    }
  }
  return out;
}

bool separable_blocks(const SpMat& M4) {
  if (M4.n() != 2) return false;
  const Eigen::MatrixXd& m = M4.matrix();
  for (int bi = 0; bi < 2; ++bi)
    for (int bj = 0; bj < 2; ++bj) {
      // off-diagonal entries of block (bi, bj)
      if (std::abs(m(2 * bi + 0, 2 * bj + 1)) > 1e-13 ||
          std::abs(m(2 * bi + 1, 2 * bj + 0)) > 1e-13)
        return false;
    }
  return true;
}

namespace {

void require_4x4(const SpMat& M4) {
  if (M4.n() != 2) throw validation_error("mu2d: expected a 4x4 matrix");
}

// Apply chirp_core along axis 1 (columns) in place of a nu1 x n2 layout.
void axis1_forward(const Abcd& m, std::vector<cplx>& v, const Grid1& gx,
                   const Grid1& gnu, int n2, ExecPolicy pol) {
  const int n1 = gx.count;
  const int nthreads = thread_count(pol);
#pragma omp parallel for num_threads(nthreads) schedule(static)
  for (int j = 0; j < n2; ++j) {
    std::vector<cplx> col(n1);
    for (int i = 0; i < n1; ++i) col[i] = v[static_cast<size_t>(i) * n2 + j];
    std::vector<cplx> S = chirp_core(m, col, gx, gnu);
    for (int i = 0; i < n1; ++i) v[static_cast<size_t>(i) * n2 + j] = S[i];
  }
}

void axis1_adjoint(const Abcd& m, std::vector<cplx>& v, const Grid1& gnu,
                   const Grid1& gx, int n2, ExecPolicy pol) {
  const int n1 = gnu.count;
  const int nthreads = thread_count(pol);
#pragma omp parallel for num_threads(nthreads) schedule(static)
  for (int j = 0; j < n2; ++j) {
    std::vector<cplx> col(n1);
    for (int i = 0; i < n1; ++i) col[i] = v[static_cast<size_t>(i) * n2 + j];
    std::vector<cplx> S = chirp_core_adjoint(m, col, gnu, gx);
    for (int i = 0; i < n1; ++i) v[static_cast<size_t>(i) * n2 + j] = S[i];
  }
}

double det_b(const SpMat& M4) {
  Eigen::Matrix2d B = M4.B();
  return B.determinant();
}

// Quadratic form z Q z^T for row vector z.
inline double qform(const Eigen::Matrix2d& Q, double z1, double z2) {
  return z1 * (Q(0, 0) * z1 + Q(0, 1) * z2) + z2 * (Q(1, 0) * z1 + Q(1, 1) * z2);
}

}  // namespace

std::vector<cplx> mu2d_spectrum(const SpMat& M4, const Field2& F, ExecPolicy pol) {
  require_4x4(M4);
  const double detB = det_b(M4);
  if (std::abs(detB) < kZeroBlock) throw validation_error("mu2d_spectrum: singular B block");
  Grid1 gnu1 = fft_conjugate(F.g.x), gnu2 = fft_conjugate(F.g.u);
  if (separable_blocks(M4)) {
    Abcd m1 = axis_blocks(M4, 0), m2 = axis_blocks(M4, 1);
    const int n1 = F.g.x.count, n2 = F.g.u.count;
    std::vector<cplx> work = F.v;
    const int nthreads = thread_count(pol);
#pragma omp parallel for num_threads(nthreads) schedule(static)
    for (int i = 0; i < n1; ++i) {
      std::vector<cplx> row(work.begin() + static_cast<size_t>(i) * n2,
                            work.begin() + static_cast<size_t>(i + 1) * n2);
      std::vector<cplx> S = chirp_core(m2, row, F.g.u, gnu2);
      std::copy(S.begin(), S.end(), work.begin() + static_cast<size_t>(i) * n2);
    }
    axis1_forward(m1, work, F.g.x, gnu1, n2, pol);
    const cplx scale = (cplx(1.0) / sqrt_neg(detB)) * F.g.cell();
    for (cplx& z : work) z *= scale;
    return work;
  }
  // General blocks: since (x,u) Binv maps against w = B nu, the cross
  // phase collapses to the plain Fourier kernel in (nu1, nu2), so the
  // quadrature is a chirp, a separable Fourier sum, and a chirp.
  Eigen::Matrix2d B = M4.B(), Binv = B.inverse();
  Eigen::Matrix2d DBi = M4.D() * Binv, BiA = Binv * M4.A();
  const cplx c0 = cplx(1.0) / sqrt_neg(detB);
  const int n1 = F.g.x.count, n2 = F.g.u.count;
  std::vector<cplx> work(F.v.size());
  for (int i = 0; i < n1; ++i) {
    double x = F.g.x.value(i);
    for (int j = 0; j < n2; ++j) {
      double u = F.g.u.value(j);
      work[static_cast<size_t>(i) * n2 + j] =
          F.at(i, j) * unit_phase(kPi * qform(BiA, x, u));
    }
  }
  std::vector<cplx> out = cdft2(work, F.g, {gnu1, gnu2}, -1);
  const cplx scale = c0 * F.g.cell();
  for (int k1 = 0; k1 < n1; ++k1) {
    double nu1 = gnu1.value(k1);
    for (int k2 = 0; k2 < n2; ++k2) {
      double nu2 = gnu2.value(k2);
      double w1 = B(0, 0) * nu1 + B(0, 1) * nu2;
      double w2 = B(1, 0) * nu1 + B(1, 1) * nu2;
      out[static_cast<size_t>(k1) * n2 + k2] *=
          scale * unit_phase(kPi * qform(DBi, w1, w2));
    }
  }
  return out;
}

Field2 mu2d_from_spectrum(const SpMat& M4, const std::vector<cplx>& spec,
                          const Grid2& zgrid, ExecPolicy pol) {
  require_4x4(M4);
  const double detB = det_b(M4);
  if (std::abs(detB) < kZeroBlock)
    throw validation_error("mu2d_from_spectrum: singular B block");
  Grid1 gnu1 = fft_conjugate(zgrid.x), gnu2 = fft_conjugate(zgrid.u);
  if (spec.size() != zgrid.size())
    throw validation_error("mu2d_from_spectrum: spectrum size mismatch");
  const int n1 = zgrid.x.count, n2 = zgrid.u.count;
  const double measure = std::abs(detB) * gnu1.step * gnu2.step;
  if (separable_blocks(M4)) {
    Abcd m1 = axis_blocks(M4, 0), m2 = axis_blocks(M4, 1);
    std::vector<cplx> work = spec;
    axis1_adjoint(m1, work, gnu1, zgrid.x, n2, pol);
    const int nthreads = thread_count(pol);
#pragma omp parallel for num_threads(nthreads) schedule(static)
    for (int i = 0; i < n1; ++i) {
      std::vector<cplx> row(work.begin() + static_cast<size_t>(i) * n2,
                            work.begin() + static_cast<size_t>(i + 1) * n2);
      std::vector<cplx> S = chirp_core_adjoint(m2, row, gnu2, zgrid.u);
      std::copy(S.begin(), S.end(), work.begin() + static_cast<size_t>(i) * n2);
    }
    const cplx scale = std::conj(cplx(1.0) / sqrt_neg(detB)) * measure;
    Field2 out(zgrid);
    for (size_t k = 0; k < out.v.size(); ++k) out.v[k] = scale * work[k];
    return out;
  }
  // Mirror of the forward factorization with conjugated chirps.
  Eigen::Matrix2d B = M4.B(), Binv = B.inverse();
  Eigen::Matrix2d DBi = M4.D() * Binv, BiA = Binv * M4.A();
  const cplx c0c = std::conj(cplx(1.0) / sqrt_neg(detB));
  std::vector<cplx> work(spec.size());
  for (int k1 = 0; k1 < n1; ++k1) {
    double nu1 = gnu1.value(k1);
    for (int k2 = 0; k2 < n2; ++k2) {
      double nu2 = gnu2.value(k2);
      double w1 = B(0, 0) * nu1 + B(0, 1) * nu2;
      double w2 = B(1, 0) * nu1 + B(1, 1) * nu2;
      work[static_cast<size_t>(k1) * n2 + k2] =
          spec[static_cast<size_t>(k1) * n2 + k2] *
          unit_phase(-kPi * qform(DBi, w1, w2));
    }
  }
  std::vector<cplx> vals = cdft2(work, {gnu1, gnu2}, zgrid, +1);
  Field2 out(zgrid);
  const cplx scale = c0c * measure;
  for (int i = 0; i < n1; ++i) {
    double x = zgrid.x.value(i);
    for (int j = 0; j < n2; ++j) {
      double u = zgrid.u.value(j);
      out.at(i, j) = scale * vals[static_cast<size_t>(i) * n2 + j] *
                     unit_phase(-kPi * qform(BiA, x, u));
    }
  }
  return out;
}

Field2 mu2d(const SpMat& M4, const Field2& F, MtMethod method, ExecPolicy pol) {
  require_4x4(M4);
  Eigen::Matrix2d B = M4.B();
  if (B.cwiseAbs().maxCoeff() < kZeroBlock) {
    // B = 0 branch: sqrt(det D) * exp(i*pi*z C D^T z^T) * F(z D).
    Eigen::Matrix2d D = M4.D(), C = M4.C();
    Eigen::Matrix2d Q = C * D.transpose();
    cplx amp = std::sqrt(cplx(D.determinant(), 0.0));
    Field2 out(F.g);
    for (int i = 0; i < F.g.x.count; ++i)
      for (int j = 0; j < F.g.u.count; ++j) {
        double z1 = F.g.x.value(i), z2 = F.g.u.value(j);
        double y1 = z1 * D(0, 0) + z2 * D(1, 0);
        double y2 = z1 * D(0, 1) + z2 * D(1, 1);
        out.at(i, j) = amp * unit_phase(kPi * qform(Q, z1, z2)) * F.sample(y1, y2);
      }
    return out;
  }
  if (std::abs(det_b(M4)) < kZeroBlock)
    throw validation_error("mu2d: B block neither invertible nor zero");
  if (!separable_blocks(M4) || method == MtMethod::Direct) {
    if (separable_blocks(M4) && method == MtMethod::Direct) {
      Abcd m1 = axis_blocks(M4, 0), m2 = axis_blocks(M4, 1);
      Grid2 gout{scaled_grid(fft_conjugate(F.g.x), m1.b),
                 scaled_grid(fft_conjugate(F.g.u), m2.b)};
      return mu2d_to_grid(M4, F, gout, pol);
    }
    return mu2d_to_grid(M4, F, F.g, pol);
  }
  std::vector<cplx> spec = mu2d_spectrum(M4, F, pol);
  Abcd m1 = axis_blocks(M4, 0), m2 = axis_blocks(M4, 1);
  Grid1 gnu1 = fft_conjugate(F.g.x), gnu2 = fft_conjugate(F.g.u);
  Grid2 gout{scaled_grid(gnu1, m1.b), scaled_grid(gnu2, m2.b)};
  const int n1 = gnu1.count, n2 = gnu2.count;
  Field2 out(gout);
  for (int i = 0; i < n1; ++i) {
    int s1 = m1.b > 0 ? i : n1 - 1 - i;
    for (int j = 0; j < n2; ++j) {
      int s2 = m2.b > 0 ? j : n2 - 1 - j;
      out.at(i, j) = spec[static_cast<size_t>(s1) * n2 + s2];
    }
  }
  return out;
}

Field2 mu2d_to_grid(const SpMat& M4, const Field2& F, const Grid2& gout, ExecPolicy pol) {
  require_4x4(M4);
  const double detB = det_b(M4);
  if (std::abs(detB) < kZeroBlock) throw validation_error("mu2d_to_grid: singular B block");
  Eigen::Matrix2d B = M4.B(), Binv = B.inverse();
  Eigen::Matrix2d DBi = M4.D() * Binv, BiA = Binv * M4.A();
  const cplx c0 = cplx(1.0) / sqrt_neg(detB);
  Field2 out(gout);
  const int nthreads = thread_count(pol);
#pragma omp parallel for num_threads(nthreads) schedule(static)
  for (int k1 = 0; k1 < gout.x.count; ++k1) {
    for (int k2 = 0; k2 < gout.u.count; ++k2) {
      double w1 = gout.x.value(k1), w2 = gout.u.value(k2);
      double phw = qform(DBi, w1, w2);
      cplx acc = 0.0;
      for (int i = 0; i < F.g.x.count; ++i) {
        double x = F.g.x.value(i);
        for (int j = 0; j < F.g.u.count; ++j) {
          double u = F.g.u.value(j);
          double cross = (x * Binv(0, 0) + u * Binv(1, 0)) * w1 +
                         (x * Binv(0, 1) + u * Binv(1, 1)) * w2;
          acc += F.at(i, j) * unit_phase(kPi * (phw + qform(BiA, x, u)) - 2.0 * kPi * cross);
        }
      }
      out.at(k1, k2) = c0 * acc * F.g.cell();
    }
  }
  return out;
}

}  // namespace mtfa
