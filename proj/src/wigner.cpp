#include "mtfa/wigner.hpp"

#include <algorithm>
#include <cmath>

namespace mtfa {
namespace {

bool is_fourier(const SpMat& M) {
  return (M.matrix() - j_matrix(M.n())).cwiseAbs().maxCoeff() <= 1e-12;
}

// Coordinate matrix S = M3 * [[0,1],[1,0]] (columns of M3 swapped);
// the tensor is sampled at (x,y) S.
void m3_coords(const SpMat& M3, double S[2][2]) {
  S[0][0] = M3.b();
  S[0][1] = M3.a();
  S[1][0] = M3.d();
  S[1][1] = M3.c();
}

}  // namespace

TensorLattice plan_tensor_lattice(const MWDConfig& cfg, const Grid1& xgrid,
                                  const Grid1& ygrid, int max_refine) {
  TensorLattice lat;
  if (std::abs(xgrid.step - ygrid.step) > 1e-12 * xgrid.step) return lat;
  double S[2][2];
  m3_coords(cfg.M3, S);
  int r = 0;
  for (int cand = 1; cand <= max_refine && r == 0; ++cand) {
    bool ok = true;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        double v = S[a][b] * cand;
        if (std::abs(v - std::lround(v)) > 1e-9) ok = false;
      }
    if (ok) r = cand;
  }
  if (r == 0) return lat;
  const double delta = xgrid.step / r;
  const long cx[2] = {std::lround(S[0][0] * r), std::lround(S[0][1] * r)};
  const long cy[2] = {std::lround(S[1][0] * r), std::lround(S[1][1] * r)};
  for (int a = 0; a < 2; ++a) {
    long kmin = 0, kmax = 0;
    for (int ci = 0; ci < 2; ++ci)
      for (int cj = 0; cj < 2; ++cj) {
        long k = cx[a] * (ci ? xgrid.count - 1 : 0) + cy[a] * (cj ? ygrid.count - 1 : 0);
        kmin = std::min(kmin, k);
        kmax = std::max(kmax, k);
      }
    double base = xgrid.start * S[0][a] + ygrid.start * S[1][a];
    Grid1 fine = make_grid(base + delta * kmin, delta, static_cast<int>(kmax - kmin + 1));
    if (a == 0) {
      lat.fine1 = fine;
      lat.c1x = cx[0];
      lat.c1y = cy[0];
      lat.off1 = -kmin;
    } else {
      lat.fine2 = fine;
      lat.c2x = cx[1];
      lat.c2y = cy[1];
      lat.off2 = -kmin;
    }
  }
  lat.exact = true;
  lat.refine = r;
  return lat;
}

MWDConfig MWDConfig::classical() {
  return MWDConfig(sp_fourier(1), sp_identity(1), sp_identity(1), sp_pi(1), true);
}

MWDConfig MWDConfig::tau_wigner(double tau) {
  return MWDConfig(sp_fourier(1), sp_identity(1), sp_identity(1), sp_tau_wigner(tau, 1), true);
}

MWDConfig MWDConfig::stft_like() {
  return MWDConfig(sp_fourier(1), sp_identity(1), sp_identity(1), sp_stft(1), true);
}

Field2 mwd(const Signal& f, const MWDConfig& cfg, ExecPolicy pol) {
  Signal f1 = mt_to_grid(cfg.M1, f, f.g, pol);
  Signal f2 = mt_to_grid(cfg.M2, f, f.g, pol);
  Field2 tensor = outer_conj(f1.v, f.g, f2.v, f.g);
  double S[2][2];
  m3_coords(cfg.M3, S);
  Field2 twisted = coordinate_transform(tensor, S);
  Field2 W = partial_mt2(cfg.M, twisted, MtMethod::ChirpFft, pol);
  if (cfg.fourier_normalized && is_fourier(cfg.M)) W = cplx(0.0, 1.0) * W;
  return W;
}

Field2 mwd_to(const Signal& f, const MWDConfig& cfg, const Grid1& xout,
              const Grid1& uout, bool analytic_tensor, ExecPolicy pol) {
  double S[2][2];
  m3_coords(cfg.M3, S);
  Field2 twisted({xout, f.g});
  // Transform values are only resolvable inside the signal window; outside
  // it the quadrature returns alias noise while the true value is below the
  // noise floor, so reads there are clamped to zero (the sampled path's zero
  // extension does the same).
  const double wlo = f.g.start - 0.5 * f.g.step;
  const double whi = f.g.back() + 0.5 * f.g.step;
  if (analytic_tensor) {
    const int nx = xout.count, ny = f.g.count;
    TensorLattice lat = plan_tensor_lattice(cfg, xout, f.g);
    if (lat.exact) {
      // All warped coordinates land on the refined lattices: two grid
      // transforms and integer lookups.
      Signal g1 = mt_to_grid(cfg.M1, f, lat.fine1, pol);
      Signal g2 = mt_to_grid(cfg.M2, f, lat.fine2, pol);
      for (int k = 0; k < lat.fine1.count; ++k) {
        double p = lat.fine1.value(k);
        if (p < wlo || p > whi) g1.v[k] = 0.0;
      }
      for (int k = 0; k < lat.fine2.count; ++k) {
        double p = lat.fine2.value(k);
        if (p < wlo || p > whi) g2.v[k] = 0.0;
      }
      for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
          twisted.at(i, j) = g1.v[lat.index1(i, j)] * std::conj(g2.v[lat.index2(i, j)]);
    } else {
      // Exact pointwise transforms at the warped coordinates.
      std::vector<double> p1(static_cast<size_t>(nx) * ny), p2(p1.size());
      for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
          double x = xout.value(i), y = f.g.value(j);
          p1[static_cast<size_t>(i) * ny + j] = x * S[0][0] + y * S[1][0];
          p2[static_cast<size_t>(i) * ny + j] = x * S[0][1] + y * S[1][1];
        }
      std::vector<cplx> v1 = mt_at(cfg.M1, f, p1);
      std::vector<cplx> v2 = mt_at(cfg.M2, f, p2);
      for (size_t k = 0; k < twisted.v.size(); ++k) {
        bool in = p1[k] >= wlo && p1[k] <= whi && p2[k] >= wlo && p2[k] <= whi;
        twisted.v[k] = in ? v1[k] * std::conj(v2[k]) : cplx(0.0);
      }
    }
  } else {
    Signal f1 = mt_to_grid(cfg.M1, f, f.g, pol);
    Signal f2 = mt_to_grid(cfg.M2, f, f.g, pol);
    Field2 tensor = outer_conj(f1.v, f.g, f2.v, f.g);
    for (int i = 0; i < xout.count; ++i) {
      double x = xout.value(i);
      for (int j = 0; j < f.g.count; ++j) {
        double y = f.g.value(j);
        twisted.at(i, j) = tensor.sample(x * S[0][0] + y * S[1][0], x * S[0][1] + y * S[1][1]);
      }
    }
  }
  Field2 W = partial_mt2_to(cfg.M, twisted, uout, pol);
  if (cfg.fourier_normalized && is_fourier(cfg.M)) W = cplx(0.0, 1.0) * W;
  return W;
}

Field2 classical_wd(const Signal& f, ExecPolicy pol) {
  return mwd(f, MWDConfig::classical(), pol);
}

Field2 classical_wd_to(const Signal& f, const Grid1& uout, ExecPolicy pol) {
  return mwd_to(f, MWDConfig::classical(), f.g, uout, true, pol);
}

Signal wd_invert(const Field2& W, const InvertOptions& opt) {
  const Grid1& gt = W.g.x;
  const Grid1& gu = W.g.u;
  const int n = gt.count, nu = gu.count;
  const double du = gu.step;

  std::vector<cplx> diag(n, 0.0);
  for (int i = 0; i < n; ++i) {
    cplx s = 0.0;
    for (int j = 0; j < nu; ++j) s += W.at(i, j);
    diag[i] = s * du;
  }
  int ia = opt.anchor_index;
  double best = -1.0;
  if (ia < 0) {
    for (int i = 0; i < n; ++i)
      if (std::abs(diag[i]) > best) {
        best = std::abs(diag[i]);
        ia = i;
      }
  } else if (ia >= n) {
    throw validation_error("wd_invert: anchor index out of range");
  }
  double field_scale = std::sqrt(W.mean_abs2()) * gu.span();
  if (std::abs(diag[ia]) <= 1e-12 * std::max(field_scale, 1e-30) ||
      std::abs(diag[ia]) == 0.0)
    throw numerical_error("wd_invert: degenerate anchor, field has no usable energy");

  const double ta = gt.value(ia);
  cplx denom = std::sqrt(diag[ia]);
  Signal out(gt);
  for (int i = 0; i < n; ++i) {
    // Column of W at the midpoint (t_i + t_a) / 2; average the two
    // neighbors when the midpoint falls between nodes.
    int s = i + ia;
    cplx r = 0.0;
    double dt = gt.value(i) - ta;
    if (s % 2 == 0) {
      int mid = s / 2;
      for (int j = 0; j < nu; ++j)
        r += W.at(mid, j) * unit_phase(2.0 * kPi * gu.value(j) * dt);
    } else {
      int lo = s / 2, hi = lo + 1;
      for (int j = 0; j < nu; ++j) {
        cplx wmid = 0.5 * (W.at(lo, j) + (hi < n ? W.at(hi, j) : cplx(0.0)));
        r += wmid * unit_phase(2.0 * kPi * gu.value(j) * dt);
      }
    }
    out.v[i] = r * du / denom;
  }
  return out;
}

}  // namespace mtfa
