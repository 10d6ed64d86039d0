#include "mtfa/lsfilter.hpp"

#include <algorithm>
#include <cmath>

namespace mtfa {
namespace {

constexpr double kPinvThreshold = 1e-3;  // rank cut for stage pseudo-inverses
constexpr double kChainReg = 1e-3;       // anchor-chain averaging regularizer

double qform(const Eigen::Matrix2d& Q, double z1, double z2) {
  return z1 * (Q(0, 0) * z1 + Q(0, 1) * z2) + z2 * (Q(1, 0) * z1 + Q(1, 1) * z2);
}

void require_same_lattice(const Grid2& a, const Grid2& b, const char* who) {
  if (!(approx_same(a.x, b.x) && approx_same(a.u, b.u)))
    throw validation_error(std::string(who) + ": fields must share a lattice");
}

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

CMat pseudo_inverse(const CMat& A, double threshold) {
  Eigen::CompleteOrthogonalDecomposition<CMat> cod;
  cod.setThreshold(threshold);
  cod.compute(A);
  return cod.pseudoInverse();
}

}  // namespace

FilterDesign design_lsaf(const Field2& w_obs, const Field2& w_target,
                         const GmcTriple& t, double eps, ExecPolicy pol) {
  require_same_lattice(w_obs.g, w_target.g, "design_lsaf");
  if (!(eps >= 0.0) || !std::isfinite(eps))
    throw validation_error("design_lsaf: eps must be finite and nonnegative");
  std::vector<cplx> s4 = mu2d_spectrum(t.M4, w_obs, pol);
  std::vector<cplx> s6 = mu2d_spectrum(t.M6, w_target, pol);

  double maxp = 0.0;
  for (const cplx& z : s4) maxp = std::max(maxp, std::norm(z));
  if (maxp <= 0.0) throw numerical_error("design_lsaf: observed spectrum vanishes");
  const double reg = eps * maxp;

  // Inverse of the spectral composition rule: the composed spectrum is
  // c * exp(i*pi*q(Qc, nu)) * s4 * s5, so the transfer divides those off.
  Eigen::Matrix2d Qd = t.M4.B().transpose() * t.M4.D() +
                       t.M5.B().transpose() * t.M5.D() -
                       t.M6.B().transpose() * t.M6.D();
  const cplx inv_c = sqrt_neg(t.M6.B().determinant()) /
                     (sqrt_neg(t.M4.B().determinant()) * sqrt_neg(t.M5.B().determinant()));

  Field2 transfer({fft_conjugate(w_obs.g.x), fft_conjugate(w_obs.g.u)});
  const int n1 = transfer.g.x.count, n2 = transfer.g.u.count;
  for (int i = 0; i < n1; ++i) {
    double nu1 = transfer.g.x.value(i);
    for (int k = 0; k < n2; ++k) {
      double nu2 = transfer.g.u.value(k);
      const cplx a = s4[transfer.g.idx(i, k)];
      transfer.at(i, k) = inv_c * unit_phase(kPi * qform(Qd, nu1, nu2)) *
                          s6[transfer.g.idx(i, k)] * std::conj(a) /
                          (std::norm(a) + reg);
    }
  }
  Field2 h = mu2d_from_spectrum(t.M5, transfer.v, w_obs.g, pol);
  return {h, transfer, eps};
}

Field2 apply_filter(const Field2& w, const FilterDesign& d, const GmcTriple& t,
                    ConvMethod method, ExecPolicy pol) {
  require_same_lattice(w.g, d.h.g, "apply_filter");
  return convolve(w, d.h, t, method, pol);
}

double wigner_mse(const Field2& a, const Field2& b) {
  require_same_lattice(a.g, b.g, "wigner_mse");
  double s = 0.0;
  for (size_t k = 0; k < a.v.size(); ++k) s += std::norm(a.v[k] - b.v[k]);
  return s / static_cast<double>(a.v.size());
}

double orthogonality_residual(const Field2& w_est, const Field2& w_target,
                              const Field2& w_obs, const GmcTriple& t) {
  require_same_lattice(w_est.g, w_target.g, "orthogonality_residual");
  require_same_lattice(w_est.g, w_obs.g, "orthogonality_residual");
  const Grid2& g = w_est.g;
  const int nx = g.x.count, nu = g.u.count;
  const int iz = zero_index(g.x), jz = zero_index(g.u);
  const size_t N = g.size();

  Eigen::Matrix2d F4 = t.F4(), F6 = t.F6();
  std::vector<cplx> E(N), Wo(N);
  double e2 = 0.0, w2 = 0.0;
  for (int i = 0; i < nx; ++i) {
    double x = g.x.value(i);
    for (int j = 0; j < nu; ++j) {
      double u = g.u.value(j);
      size_t k = g.idx(i, j);
      E[k] = (w_est.v[k] - w_target.v[k]) * unit_phase(kPi * qform(F6, x, u));
      Wo[k] = w_obs.v[k] * unit_phase(kPi * qform(F4, x, u));
      e2 += std::norm(E[k]);
      w2 += std::norm(Wo[k]);
    }
  }
  if (e2 <= 0.0 || w2 <= 0.0) return 0.0;

  double c2 = 0.0;
  for (int qi = 0; qi < nx; ++qi)
    for (int qj = 0; qj < nu; ++qj) {
      cplx acc = 0.0;
      for (int i = 0; i < nx; ++i) {
        int di = i - qi + iz;
        if (di < 0 || di >= nx) continue;
        for (int j = 0; j < nu; ++j) {
          int dj = j - qj + jz;
          if (dj < 0 || dj >= nu) continue;
          acc += E[g.idx(i, j)] * std::conj(Wo[g.idx(di, dj)]);
        }
      }
      c2 += std::norm(acc / static_cast<double>(N));
    }
  return std::sqrt(c2 / static_cast<double>(N)) /
         (std::sqrt(e2 / static_cast<double>(N)) * std::sqrt(w2 / static_cast<double>(N)));
}

WienerHopfResult wiener_hopf_numeric(const WienerHopfInput& in, const GmcTriple& t,
                                     double rcond, ExecPolicy pol) {
  const int nx = in.g.x.count, nu = in.g.u.count;
  if (nx > 24 || nu > 24)
    throw validation_error(
        "wiener_hopf: grid too large, the dense normal equations are capped at 24x24");
  const int N = nx * nu;
  if (in.auto_corr.rows() != N || in.auto_corr.cols() != N ||
      in.cross_corr.rows() != N || in.cross_corr.cols() != N)
    throw validation_error("wiener_hopf: correlation matrices must be NxN over the lattice");
  const int iz = zero_index(in.g.x), jz = zero_index(in.g.u);
  const double dA = in.g.cell();

  auto fill_block = [&](int zp, CMat& A) {
    for (int i1 = 0; i1 < nx; ++i1)
      for (int j1 = 0; j1 < nu; ++j1) {
        int z = i1 * nu + j1;
        for (int i2 = 0; i2 < nx; ++i2) {
          int di = i1 - i2 + iz;
          bool xout = di < 0 || di >= nx;
          for (int j2 = 0; j2 < nu; ++j2) {
            int dj = j1 - j2 + jz;
            A(z, i2 * nu + j2) = (xout || dj < 0 || dj >= nu)
                                     ? cplx(0.0)
                                     : dA * in.auto_corr(di * nu + dj, zp);
          }
        }
      }
  };

  CMat G = CMat::Zero(N, N);
  CVec rhs = CVec::Zero(N);
  CMat A(N, N);
  for (int zp = 0; zp < N; ++zp) {
    fill_block(zp, A);
    G.selfadjointView<Eigen::Lower>().rankUpdate(A.adjoint());
    rhs.noalias() += A.adjoint() * in.cross_corr.col(zp);
  }
  G = G.selfadjointView<Eigen::Lower>();

  Eigen::CompleteOrthogonalDecomposition<CMat> cod;
  cod.setThreshold(rcond);
  cod.compute(G);
  CVec h = cod.solve(rhs);
  const int rank = static_cast<int>(cod.rank());

  double rnum = 0.0, rden = 0.0;
  for (int zp = 0; zp < N; ++zp) {
    fill_block(zp, A);
    rnum += (A * h - in.cross_corr.col(zp)).squaredNorm();
    rden += in.cross_corr.col(zp).squaredNorm();
  }

  Eigen::Matrix2d F5 = t.F5();
  WienerHopfResult out{Field2(in.g), rden > 0.0 ? std::sqrt(rnum / rden) : 0.0, rank,
                       rank < N};
  for (int i = 0; i < nx; ++i) {
    double x = in.g.x.value(i);
    for (int j = 0; j < nu; ++j) {
      double u = in.g.u.value(j);
      out.h.at(i, j) = h[i * nu + j] * unit_phase(-kPi * qform(F5, x, u));
    }
  }
  (void)pol;
  return out;
}

MwdInverter::MwdInverter(const MWDConfig& cfg, const Grid1& tgrid, const Grid1& ugrid)
    : cfg_(cfg), tgrid_(tgrid), ugrid_(ugrid),
      plan_(plan_tensor_lattice(cfg, tgrid, tgrid)) {
  if ((cfg.M1.matrix() - cfg.M2.matrix()).cwiseAbs().maxCoeff() > 1e-12)
    throw validation_error("mwd inverter: component matrices must match");
  if (!plan_.exact)
    throw validation_error("mwd inverter: coordinate matrix is not lattice-compatible");
  i00_ = zero_index(tgrid);
  j00_ = zero_index(tgrid);
  shift12_ = std::lround((plan_.fine2.start - plan_.fine1.start) / plan_.fine1.step);

  const int n = tgrid.count;
  const double b = cfg.M.b();
  if (std::abs(b) <= 1e-12) {
    row_exact_ = true;  // inverse-map branch of the adjoint is the exact inverse
  } else {
    double ratio = tgrid.step * ugrid.step * ugrid.count / std::abs(b);
    row_exact_ = ugrid.count == n && std::abs(ratio - 1.0) < 1e-9;
  }
  if (!row_exact_) {
    // Forward row map from one partial transform of the identity field.
    Field2 eye({tgrid, tgrid});
    for (int j = 0; j < n; ++j) eye.at(j, j) = 1.0;
    Field2 resp = partial_mt2_to(cfg.M, eye, ugrid, ExecPolicy::Serial);
    CMat R(ugrid.count, n);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < ugrid.count; ++k) R(k, j) = resp.at(j, k);
    row_pinv_ = pseudo_inverse(R, kPinvThreshold);
  }

  // Component stage: the same map mwd_to uses for the lattice tensor.
  const int nf = plan_.fine1.count;
  CMat A(nf, n);
  if (std::abs(cfg.M1.b()) > 1e-12) {
    for (int j = 0; j < n; ++j) {
      double x = tgrid.value(j);
      for (int k = 0; k < nf; ++k)
        A(k, j) = mt_kernel(cfg.M1, plan_.fine1.value(k), x) * tgrid.step;
    }
  } else {
    Signal e(tgrid);
    for (int j = 0; j < n; ++j) {
      std::fill(e.v.begin(), e.v.end(), cplx(0.0));
      e.v[j] = 1.0;
      Signal col = mt_to_grid(cfg.M1, e, plan_.fine1, ExecPolicy::Serial);
      for (int k = 0; k < nf; ++k) A(k, j) = col.v[k];
    }
  }

  // Structural coverage of the anchored chain: nodes read off the base
  // line seed the reference values for every other line.
  const long k2zero = plan_.index2(i00_, j00_);
  std::vector<char> known(nf, 0), covered(nf, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (plan_.index2(i, j) == k2zero) known[plan_.index1(i, j)] = 1;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      long kc = plan_.index2(i, j) + shift12_;
      if (kc >= 0 && kc < nf && known[kc]) covered[plan_.index1(i, j)] = 1;
    }
  // The tensor path zeroes component reads outside the signal window, so
  // only in-window nodes carry values the kernel model predicts.
  const double wlo = tgrid.start - 0.5 * tgrid.step;
  const double whi = tgrid.back() + 0.5 * tgrid.step;
  for (long k = 0; k < nf; ++k) {
    double p = plan_.fine1.value(k);
    if (covered[k] && p >= wlo && p <= whi) rows_.push_back(k);
  }
  if (rows_.empty()) throw numerical_error("mwd inverter: empty anchor coverage");

  CMat Ak(rows_.size(), n);
  for (size_t r = 0; r < rows_.size(); ++r) Ak.row(r) = A.row(rows_[r]);
  comp_pinv_ = pseudo_inverse(Ak, kPinvThreshold);
}

Signal MwdInverter::invert(const Field2& w, ExecPolicy pol) const {
  if (!(approx_same(w.g.x, tgrid_) && approx_same(w.g.u, ugrid_)))
    throw validation_error("mwd inverter: field is not on the configured lattice");
  const int n = tgrid_.count, nu = ugrid_.count;

  Field2 T({tgrid_, tgrid_});
  if (row_exact_) {
    const int nthreads = thread_count(pol);
#pragma omp parallel for num_threads(nthreads) schedule(static)
    for (int i = 0; i < n; ++i) {
      Signal row(ugrid_);
      std::copy(w.v.begin() + static_cast<size_t>(i) * nu,
                w.v.begin() + static_cast<size_t>(i + 1) * nu, row.v.begin());
      Signal tr = mt_adjoint(cfg_.M, row, tgrid_, MtMethod::Auto, ExecPolicy::Serial);
      std::copy(tr.v.begin(), tr.v.end(), T.v.begin() + static_cast<size_t>(i) * n);
    }
  } else {
    Eigen::Map<const RowMat> Wm(w.v.data(), n, nu);
    Eigen::Map<RowMat> Tm(T.v.data(), n, n);
    Tm.noalias() = Wm * row_pinv_.transpose();
  }

  const double a0 = std::sqrt(std::abs(T.at(i00_, j00_)));
  if (!(a0 > 1e-12 * std::sqrt(std::sqrt(T.mean_abs2()))))
    throw numerical_error("mwd inverter: degenerate anchor");

  const int nf = plan_.fine1.count;
  const long k2zero = plan_.index2(i00_, j00_);
  std::vector<cplx> g0(nf, 0.0);
  std::vector<int> cnt(nf, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (plan_.index2(i, j) == k2zero) {
        g0[plan_.index1(i, j)] += T.at(i, j);
        ++cnt[plan_.index1(i, j)];
      }
  for (int k = 0; k < nf; ++k)
    if (cnt[k]) g0[k] /= a0 * static_cast<double>(cnt[k]);

  std::vector<cplx> num(nf, 0.0);
  std::vector<double> den(nf, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      long kc = plan_.index2(i, j) + shift12_;
      if (kc < 0 || kc >= nf || !cnt[kc]) continue;
      long k1 = plan_.index1(i, j);
      num[k1] += T.at(i, j) * g0[kc];
      den[k1] += std::norm(g0[kc]);
    }
  double dmax = 0.0;
  for (double d : den) dmax = std::max(dmax, d);
  if (dmax <= 0.0) throw numerical_error("mwd inverter: degenerate anchor");
  const double tau = kChainReg * dmax;

  CVec gk(rows_.size());
  for (size_t r = 0; r < rows_.size(); ++r) {
    long k = rows_[r];
    gk[r] = num[k] / (den[k] + tau);
  }
  CVec fv = comp_pinv_ * gk;
  Signal out(tgrid_);
  for (int j = 0; j < n; ++j) out.v[j] = fv[j];
  return out;
}

}  // namespace mtfa
