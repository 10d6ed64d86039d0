#include "mtfa/properties.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <utility>

#include <Eigen/Dense>

#include "mtfa/cohen.hpp"
#include "mtfa/field.hpp"
#include "mtfa/gmconv.hpp"
#include "mtfa/grid.hpp"
#include "mtfa/metaplectic.hpp"
#include "mtfa/rng.hpp"
#include "mtfa/signal.hpp"
#include "mtfa/symplectic.hpp"
#include "mtfa/wigner.hpp"

namespace mtfa {
namespace {

// ---- grids -----------------------------------------------------------
//
// The signal lives on 128 nodes over [-5, 5). The distribution axes use
// 64 nodes each; the frequency step 0.2 makes du * dy * 64 = 1 exactly,
// so sums over the frequency axis collapse to lattice deltas in the
// tensor variable (the single alias sits at the y = -5 edge node where
// the tensor has already decayed).

Grid1 sig_grid() { return make_grid(-5.0, 10.0 / 128, 128); }
Grid1 dist_xgrid() { return make_grid(-5.0, 10.0 / 64, 64); }
Grid1 dist_ugrid() { return make_grid(-6.4, 0.2, 64); }

// Wide refined sampling for reference transform evaluations; its alias
// spacing 1/step = 32 keeps the quadrature clean even for composed
// window matrices whose chirp rate the 128-point grid cannot carry.
Grid1 ref_grid() { return make_grid(-10.0, 20.0 / 640, 640); }

// ---- deterministic draws ---------------------------------------------

struct Draw {
  uint64_t seed, stream;
  long ctr = 0;
  double in(double lo, double hi) { return uniform_in(lo, hi, seed, stream, uint64_t(ctr++)); }
  double sgn() { return in(0.0, 1.0) < 0.5 ? -1.0 : 1.0; }
  double mag(double lo, double hi) { return sgn() * in(lo, hi); }
};

// Window matrix with |b| well off zero and chirp rate a/b capped, so
// mu(M) of a windowed chirp is resolvable across the evaluation range.
SpMat draw_safe(Draw& d) {
  double b = d.sgn() * d.in(0.75, 1.05);
  double sa = d.sgn();
  double a = sa * d.in(0.35, 0.8 * std::abs(b));
  double de = sa * d.in(0.7, 1.2);  // same sign keeps a*d in (0, 1.01]
  double c = (a * de - 1.0) / b;
  return sp2(a, b, c, de);
}

bool mt_tame(const SpMat& M, double bmin, double ratio) {
  return std::abs(M.b()) >= bmin && std::abs(M.a()) <= ratio * std::abs(M.b());
}

// Coordinate matrices need |c3| and |d3| bounded below so the tensor
// decays in the integrated variable before the grid edge.
SpMat draw_m3_general(uint64_t seed, uint64_t stream, double blo = 0.4,
                      double bhi = 1.15, double dhi = 1.5) {
  Draw d{seed, stream};
  for (int k = 0; k < 500; ++k) {
    double s1 = d.sgn();
    double a3 = s1 * d.in(0.9, 1.3);
    double d3 = s1 * d.in(1.0, dhi);
    double c3 = d.sgn() * d.in(0.8, 1.15);
    double b3 = (a3 * d3 - 1.0) / c3;
    if (std::abs(b3) >= blo && std::abs(b3) <= bhi) return sp2(a3, b3, c3, d3);
  }
  throw numerical_error("property draw: coordinate matrix");
}

SpMat draw_m3_equal_ab(uint64_t seed, uint64_t stream) {
  Draw d{seed, stream};
  double a3 = d.sgn() * d.in(0.7, 1.1);
  double c3 = (a3 > 0 ? 1.0 : -1.0) * d.in(0.85, 1.1);
  double d3 = c3 + 1.0 / a3;  // matching signs keep |d3| >= 1.75
  return sp2(a3, a3, c3, d3);
}

SpMat draw_m3_equal_cd(uint64_t seed, uint64_t stream) {
  Draw d{seed, stream};
  double c3 = d.sgn() * d.in(1.0, 1.3);
  double a3 = d.sgn() * d.in(0.9, 1.3);
  double b3 = a3 - 1.0 / c3;
  return sp2(a3, b3, c3, c3);
}

SpMat draw_m3_zero_a(uint64_t seed, uint64_t stream) {
  Draw d{seed, stream};
  double b3 = d.sgn() * d.in(1.0, 1.1);
  double d3 = d.sgn() * d.in(0.95, 1.1);
  return sp2(0.0, b3, -1.0 / b3, d3);
}

SpMat sp_quad2(double f11, double f12, double f22) {
  Eigen::MatrixXd F(2, 2);
  F << f11, f12, f12, f22;
  return sp_from_quadratic(F);
}

SpMat draw_quad(Draw& d, double amp = 0.3) {
  double f11 = d.in(-amp, amp), f12 = d.in(-amp, amp), f22 = d.in(-amp, amp);
  return sp_quad2(f11, f12, f22);
}

GmcTriple draw_triple(uint64_t seed, uint64_t stream) {
  Draw d{seed, stream};
  SpMat m4 = draw_quad(d);
  SpMat m5 = draw_quad(d);
  SpMat m6 = draw_quad(d);
  return GmcTriple(m4, m5, m6);
}

double qform(const Eigen::Matrix2d& F, double x, double u) {
  return F(0, 0) * x * x + 2.0 * F(0, 1) * x * u + F(1, 1) * u * u;
}

// ---- signals -----------------------------------------------------------

struct PropSignal {
  Generator gen;
  Signal s;
  double norm2 = 0.0;  // sum |f|^2 dx
};

Generator draw_chirp(uint64_t seed, uint64_t stream) {
  Draw d{seed, stream};
  double al = d.in(1.4, 2.2);
  double x0 = d.in(-0.4, 0.4);
  double be = d.in(-0.8, 0.8);
  double ga = d.in(-0.15, 0.15);
  return gen_gauss_chirp(al, x0, be, ga);
}

PropSignal make_prop_signal(uint64_t seed, int which) {
  Generator g;
  if (which == 0) {
    g = draw_chirp(seed, 901);
  } else {
    Generator g1 = draw_chirp(seed, 902);
    Generator g2 = draw_chirp(seed, 903);
    Draw d{seed, 904};
    cplx w = d.in(0.5, 0.9) * unit_phase(d.in(0.0, 2.0 * kPi));
    g = [g1, g2, w](double x) { return g1(x) + w * g2(x); };
  }
  PropSignal ps;
  ps.gen = g;
  ps.s = sample(g, sig_grid());
  double e = 0.0;
  for (const cplx& z : ps.s.v) e += std::norm(z);
  ps.norm2 = e * ps.s.g.step;
  return ps;
}

// ---- kernels -----------------------------------------------------------

KernelSpec spec_of(KernelKind k) { return KernelSpec{k, 1.0, 0.5, {}}; }

// Marginal identities need phi(v, 0) = phi(0, z) = 1 plus column sums of
// the kernel field that settle inside the window. The point kernel is
// exact and the symmetric two-sided phase kernel cancels its own
// truncation; one-sided phase kernels do not and are left to the
// reconstruction and benchmark paths.
KernelSpec marginal_kernel(uint64_t n) {
  return n % 2 == 0 ? KernelSpec::wigner() : spec_of(KernelKind::MargenauHill);
}

// Covariance identities hold for any kernel; rotate through the stock.
KernelSpec covariant_kernel(uint64_t n) {
  switch (n % 6) {
    case 0: return KernelSpec::wigner();
    case 1: return KernelSpec::choi_williams(2.0);
    case 2: return spec_of(KernelKind::MargenauHill);
    case 3: return spec_of(KernelKind::BornJordan);
    case 4: return spec_of(KernelKind::Page);
    default: return spec_of(KernelKind::Zam);
  }
}

CMCDConfig make_cfg(const SpMat& M, const SpMat& M1, const SpMat& M2,
                    const SpMat& M3, const GmcTriple& t, const KernelSpec& k) {
  return CMCDConfig{MWDConfig(M, M1, M2, M3), t, k, ConvMethod::Direct, true};
}

// ---- reference transform evaluation ------------------------------------
//
// mu(M) f at scattered points from a wide refined sampling of the
// generator. window = true zeroes points outside the test signal's
// span, matching the truncation the pipeline applies to its own tensor
// reads; window = false is for composed-output evaluations where the
// point is an output coordinate, not a tensor read.
std::vector<cplx> ref_mu_at(const SpMat& M, const Generator& gen,
                            const std::vector<double>& pts, bool window) {
  Signal wide = sample(gen, ref_grid());
  std::vector<cplx> out(pts.size(), cplx(0.0));
  if (window) {
    Grid1 win = sig_grid();
    const double lo = win.start - 0.5 * win.step;
    const double hi = win.back() + 0.5 * win.step;
    std::vector<double> in;
    std::vector<size_t> where;
    for (size_t k = 0; k < pts.size(); ++k)
      if (pts[k] >= lo && pts[k] <= hi) {
        where.push_back(k);
        in.push_back(pts[k]);
      }
    if (!in.empty()) {
      std::vector<cplx> vals = mt_at(M, wide, in);
      for (size_t k = 0; k < in.size(); ++k) out[where[k]] = vals[k];
    }
  } else {
    out = mt_at(M, wide, pts);
  }
  return out;
}

// Hand-built analytic-tensor distribution: component transforms from the
// reference sampling at the exact warped coordinates (window-truncated
// like the pipeline), then the kernel stage row by row.
Field2 hand_tensor_w(const MWDConfig& cfg, const Generator& gen,
                     const Grid1& xout, const Grid1& uout, ExecPolicy pol) {
  const Grid1 yg = sig_grid();
  const double a3 = cfg.M3.a(), b3 = cfg.M3.b(), c3 = cfg.M3.c(), d3 = cfg.M3.d();
  std::vector<double> p1(size_t(xout.count) * yg.count);
  std::vector<double> p2(p1.size());
  for (int i = 0; i < xout.count; ++i)
    for (int j = 0; j < yg.count; ++j) {
      size_t k = size_t(i) * yg.count + j;
      p1[k] = xout.value(i) * b3 + yg.value(j) * d3;
      p2[k] = xout.value(i) * a3 + yg.value(j) * c3;
    }
  std::vector<cplx> v1 = ref_mu_at(cfg.M1, gen, p1, true);
  std::vector<cplx> v2 = ref_mu_at(cfg.M2, gen, p2, true);
  Field2 W(Grid2{xout, uout});
  for (int i = 0; i < xout.count; ++i) {
    Signal row(yg);
    for (int j = 0; j < yg.count; ++j) {
      size_t k = size_t(i) * yg.count + j;
      row.v[j] = v1[k] * std::conj(v2[k]);
    }
    Signal wr = mt_to_grid(cfg.M, row, uout, pol);
    for (int j = 0; j < uout.count; ++j) W.at(i, j) = wr.v[j];
  }
  return W;
}

PropertyCheck field_check(const Field2& L, const Field2& R, std::string note = "") {
  Aligned al = aligned_rel_l2(L.v, R.v);
  return {al.residual, al.phase, std::move(note)};
}

PropertyCheck scalar_check(cplx lhs, cplx rhs, std::string note = "") {
  std::vector<cplx> a{lhs}, b{rhs};
  Aligned al = aligned_rel_l2(a, b);
  return {al.residual, al.phase, std::move(note)};
}

SpMat hat2(const SpMat& m) { return sp2(m.a(), -m.b(), -m.c(), m.d()); }

SpMat hat4(const SpMat& m) {
  Eigen::MatrixXd h = m.matrix();
  h.topRightCorner(2, 2) *= -1.0;
  h.bottomLeftCorner(2, 2) *= -1.0;
  return SpMat::from_matrix(h);
}

// ---- the fifteen identities --------------------------------------------

// Integrating the distribution over frequency (after removing the outer
// chirp) collapses the kernel stage and the convolution, leaving the two
// component transforms sampled along the time diagonal.
PropertyCheck check_time_marginal(uint64_t seed, int sig, const PropSignal& f,
                                  ExecPolicy pol) {
  Draw dm{seed, 11};
  SpMat M = sp_fourier(1);
  SpMat M1 = draw_safe(dm);
  SpMat M2 = draw_safe(dm);
  SpMat M3 = draw_m3_general(seed, 12);
  double alpha = dm.mag(0.15, 0.4);
  double beta = dm.mag(0.15, 0.4);
  GmcTriple t(sp_quad2(alpha, 0.0, 0.0), sp_quad2(beta, 0.0, 0.0),
              sp_quad2(dm.in(-0.3, 0.3), dm.in(-0.3, 0.3), dm.in(-0.3, 0.3)));
  KernelSpec k = marginal_kernel(seed + uint64_t(sig));
  Grid1 xg = dist_xgrid(), ug = dist_ugrid();
  Field2 C = cmcd_to(f.s, make_cfg(M, M1, M2, M3, t, k), xg, ug, pol);
  Eigen::Matrix2d F6 = t.F6();

  std::vector<double> px(xg.count), qx(xg.count);
  for (int i = 0; i < xg.count; ++i) {
    px[i] = xg.value(i) * M3.b();
    qx[i] = xg.value(i) * M3.a();
  }
  std::vector<cplx> v1 = ref_mu_at(M1, f.gen, px, true);
  std::vector<cplx> v2 = ref_mu_at(M2, f.gen, qx, true);
  cplx c0 = 1.0 / sqrt_neg(M.b());

  std::vector<cplx> lhs(xg.count), rhs(xg.count);
  for (int i = 0; i < xg.count; ++i) {
    double x = xg.value(i);
    cplx acc = 0.0;
    for (int j = 0; j < ug.count; ++j)
      acc += C.at(i, j) * unit_phase(kPi * qform(F6, x, ug.value(j)));
    lhs[i] = acc * ug.step;
    rhs[i] = c0 * unit_phase(kPi * alpha * x * x) * v1[i] * std::conj(v2[i]);
  }
  Aligned al = aligned_rel_l2(lhs, rhs);
  return {al.residual, al.phase, ""};
}

// Shared body of the frequency marginal and its energy form. The time
// integral composes each window matrix with a frequency-side companion;
// the second chirp matrix of the triple is taken at its zero-phase
// limit, which the note records.
PropertyCheck check_freq_marginal(uint64_t seed, int sig, const PropSignal& f,
                                  ExecPolicy pol, bool energy) {
  Draw dm{seed, energy ? uint64_t(61) : uint64_t(21)};
  double b = dm.sgn() * dm.in(0.75, 1.05);
  double de = dm.in(-0.6, 0.6);
  SpMat M = sp2(0.0, b, -1.0 / b, de);
  double f44 = dm.mag(0.15, 0.4);

  SpMat M3 = draw_m3_general(seed, energy ? 62 : 22, 0.8, 1.3, 1.6);
  double a3 = M3.a(), b3 = M3.b();
  if (energy) {
    // the induced second window needs |b| large enough for the pipeline
    for (int k = 0; k < 500 && std::abs(a3 / b3) < 0.78; ++k) {
      M3 = draw_m3_general(seed, (energy ? 62 : 22) + 1000 + uint64_t(k), 0.8, 1.3, 1.6);
      a3 = M3.a();
      b3 = M3.b();
    }
  }
  SpMat Ma = sp2(0.0, b / a3, -a3 / b, 1.0);
  SpMat Mb = sp2(0.0, b / b3, -b3 / b, a3 / b3);

  SpMat M1 = draw_safe(dm);
  SpMat M2 = draw_safe(dm);
  if (energy) {
    M2 = Mb.inverse().compose(Ma).compose(M1);
    for (int k = 0; k < 500 && !mt_tame(M2, 0.78, 0.85); ++k) {
      M1 = draw_safe(dm);
      M2 = Mb.inverse().compose(Ma).compose(M1);
    }
  }

  GmcTriple t(sp_quad2(0.0, 0.0, f44), sp_fourier(2),
              sp_quad2(dm.in(-0.3, 0.3), dm.in(-0.3, 0.3), dm.in(-0.3, 0.3)));
  KernelSpec k = marginal_kernel(seed + uint64_t(sig) + 1);
  Grid1 xg = dist_xgrid(), ug = dist_ugrid();
  Field2 C = cmcd_to(f.s, make_cfg(M, M1, M2, M3, t, k), xg, ug, pol);
  Eigen::Matrix2d F6 = t.F6();

  cplx c0 = (1.0 / sqrt_neg(b)) * sqrt_neg(b / a3) * std::conj(sqrt_neg(b / b3));
  const std::string note = "companion chirp matrix at its zero-phase limit";

  if (!energy) {
    std::vector<double> upts(ug.count);
    for (int j = 0; j < ug.count; ++j) upts[j] = ug.value(j);
    std::vector<cplx> vA = ref_mu_at(Ma.compose(M1), f.gen, upts, false);
    std::vector<cplx> vB = ref_mu_at(Mb.compose(M2), f.gen, upts, false);
    std::vector<cplx> lhs(ug.count), rhs(ug.count);
    for (int j = 0; j < ug.count; ++j) {
      double u = ug.value(j);
      cplx acc = 0.0;
      for (int i = 0; i < xg.count; ++i)
        acc += C.at(i, j) * unit_phase(kPi * qform(F6, xg.value(i), u));
      lhs[j] = acc * xg.step;
      rhs[j] = c0 * unit_phase(kPi * (de / b + f44) * u * u) * vA[j] * std::conj(vB[j]);
    }
    Aligned al = aligned_rel_l2(lhs, rhs);
    return {al.residual, al.phase, note};
  }

  cplx lhs = 0.0;
  for (int j = 0; j < ug.count; ++j) {
    double u = ug.value(j);
    cplx acc = 0.0;
    for (int i = 0; i < xg.count; ++i)
      acc += C.at(i, j) * unit_phase(kPi * qform(F6, xg.value(i), u));
    lhs += acc * xg.step * unit_phase(-kPi * (de / b + f44) * u * u);
  }
  lhs *= ug.step;
  cplx rhs = c0 * f.norm2;
  return scalar_check(lhs, rhs, note);
}

// Shared body of the two mid-pipeline marginals: the zero row (or
// column) of the pipeline output against an independent re-derivation
// of tensor, kernel stage and convolution sum.
PropertyCheck check_delay_marginal(uint64_t seed, int sig, const PropSignal& f,
                                   ExecPolicy pol, bool freq_shift) {
  Draw dm{seed, freq_shift ? uint64_t(26) : uint64_t(25)};
  SpMat M = draw_safe(dm);
  SpMat M1 = draw_safe(dm);
  SpMat M2 = draw_safe(dm);
  SpMat M3 = draw_m3_general(seed, freq_shift ? 28 : 27);
  GmcTriple t = draw_triple(seed, freq_shift ? 30 : 29);
  KernelSpec k = marginal_kernel(seed + uint64_t(sig) + 2);
  Grid1 xg = dist_xgrid(), ug = dist_ugrid();
  CMCDConfig cfg = make_cfg(M, M1, M2, M3, t, k);
  Field2 C = cmcd_to(f.s, cfg, xg, ug, pol);

  Field2 W = hand_tensor_w(cfg.mwd, f.gen, xg, ug, pol);
  Field2 Pi = make_pi(k, Grid2{xg, ug});
  Eigen::Matrix2d F4 = t.F4(), F5 = t.F5(), F6 = t.F6();
  const int izx = zero_index(xg), izu = zero_index(ug);
  const double cell = xg.step * ug.step;

  if (!freq_shift) {
    std::vector<cplx> lhs(ug.count), rhs(ug.count);
    for (int j = 0; j < ug.count; ++j) {
      lhs[j] = C.at(izx, j);
      double uj = ug.value(j);
      cplx acc = 0.0;
      for (int p = 0; p < xg.count; ++p) {
        int ip = 2 * izx - p;  // index of -x_p
        if (ip < 0 || ip >= xg.count) continue;
        double xp = xg.value(p);
        for (int q = 0; q < ug.count; ++q) {
          int iq = j - q + izu;  // index of u_j - u_q
          if (iq < 0 || iq >= ug.count) continue;
          double uq = ug.value(q);
          acc += W.at(p, q) * unit_phase(kPi * qform(F4, xp, uq)) *
                 Pi.at(ip, iq) * unit_phase(kPi * qform(F5, -xp, uj - uq));
        }
      }
      rhs[j] = unit_phase(-kPi * qform(F6, 0.0, uj)) * acc * cell;
    }
    Aligned al = aligned_rel_l2(lhs, rhs);
    return {al.residual, al.phase, ""};
  }

  std::vector<cplx> lhs(xg.count), rhs(xg.count);
  for (int i = 0; i < xg.count; ++i) {
    lhs[i] = C.at(i, izu);
    double xi = xg.value(i);
    cplx acc = 0.0;
    for (int p = 0; p < xg.count; ++p) {
      int ip = i - p + izx;  // index of x_i - x_p
      if (ip < 0 || ip >= xg.count) continue;
      double xp = xg.value(p);
      for (int q = 0; q < ug.count; ++q) {
        int iq = 2 * izu - q;  // index of -u_q
        if (iq < 0 || iq >= ug.count) continue;
        double uq = ug.value(q);
        acc += W.at(p, q) * unit_phase(kPi * qform(F4, xp, uq)) *
               Pi.at(ip, iq) * unit_phase(kPi * qform(F5, xi - xp, -uq));
      }
    }
    rhs[i] = unit_phase(-kPi * qform(F6, xi, 0.0)) * acc * cell;
  }
  Aligned al = aligned_rel_l2(lhs, rhs);
  return {al.residual, al.phase, ""};
}

// Double integral of the time marginal with equal diagonal entries of
// the coordinate matrix: the component transforms pair up into the
// signal energy.
PropertyCheck check_energy_time(uint64_t seed, int sig, const PropSignal& f,
                                ExecPolicy pol) {
  Draw dm{seed, 66};
  SpMat M = sp_fourier(1);
  SpMat M1 = draw_safe(dm);
  SpMat M2 = M1;
  SpMat M3 = draw_m3_equal_ab(seed, 67);
  double alpha = dm.mag(0.15, 0.4);
  double beta = dm.mag(0.15, 0.4);
  GmcTriple t(sp_quad2(alpha, 0.0, 0.0), sp_quad2(beta, 0.0, 0.0),
              sp_quad2(dm.in(-0.3, 0.3), dm.in(-0.3, 0.3), dm.in(-0.3, 0.3)));
  KernelSpec k = marginal_kernel(seed + uint64_t(sig) + 3);
  Grid1 xg = dist_xgrid(), ug = dist_ugrid();
  Field2 C = cmcd_to(f.s, make_cfg(M, M1, M2, M3, t, k), xg, ug, pol);
  Eigen::Matrix2d F6 = t.F6();

  cplx lhs = 0.0;
  for (int i = 0; i < xg.count; ++i) {
    double x = xg.value(i);
    cplx acc = 0.0;
    for (int j = 0; j < ug.count; ++j)
      acc += C.at(i, j) * unit_phase(kPi * qform(F6, x, ug.value(j)));
    lhs += acc * ug.step * unit_phase(-kPi * alpha * x * x);
  }
  lhs *= xg.step;
  cplx rhs = (1.0 / sqrt_neg(M.b())) * f.norm2 / std::abs(M3.b());
  return scalar_check(lhs, rhs);
}

// Pipeline value at the origin for equal off-diagonal coordinate rows;
// the kernel matrix is pinned to b = -1 so its principal root is 1 and
// the constant is real.
PropertyCheck check_energy_delay(uint64_t seed, int sig, const PropSignal& f,
                                 ExecPolicy pol) {
  Draw dm{seed, 71};
  double de = dm.in(-0.6, 0.6);
  SpMat M = sp2(0.0, -1.0, 1.0, de);
  SpMat M1 = draw_safe(dm);
  SpMat M2 = M1;
  SpMat M3 = draw_m3_equal_cd(seed, 72);
  GmcTriple t = draw_triple(seed, 73);
  Grid1 xg = dist_xgrid(), ug = dist_ugrid();
  Field2 C = cmcd_to(f.s, make_cfg(M, M1, M2, M3, t, KernelSpec::wigner()), xg, ug, pol);
  cplx lhs = C.at(zero_index(xg), zero_index(ug));
  cplx rhs = f.norm2 / std::abs(M3.c());
  return scalar_check(lhs, rhs);
}

// Inversion of the convolution and tensor stages recovers the signal up
// to the conjugated second component at zero and a unimodular constant.
PropertyCheck check_reconstruction(uint64_t seed, int sig, const PropSignal& f,
                                   ExecPolicy pol) {
  Draw dm{seed, 31};
  SpMat M = draw_safe(dm);
  for (int tries = 0; tries < 200; ++tries) {
    if (std::abs(M.b()) >= 0.95 && std::abs(M.a()) <= 0.5 * std::abs(M.b())) break;
    M = draw_safe(dm);
  }
  SpMat M1 = draw_safe(dm);
  for (int tries = 0; tries < 200; ++tries) {
    if (std::abs(M1.b()) >= 0.85 && std::abs(M1.a()) <= 0.6 * std::abs(M1.b())) break;
    M1 = draw_safe(dm);
  }
  SpMat M3 = draw_m3_zero_a(seed, 32);
  GmcTriple t = draw_triple(seed, 33);
  KernelSpec k = (seed + uint64_t(sig)) % 2 == 0
                     ? KernelSpec::delta()
                     : spec_of(KernelKind::KirkwoodRihaczek);
  SpMat M2 = draw_safe(dm);
  cplx m20 = ref_mu_at(M2, f.gen, {0.0}, true)[0];
  std::string note;
  for (int tries = 0; tries < 60 && std::abs(m20) < 0.25; ++tries) {
    M2 = draw_safe(dm);
    m20 = ref_mu_at(M2, f.gen, {0.0}, true)[0];
  }
  if (std::abs(m20) < 0.25) note = "weak anchor value";

  // Recovery sums the whole spread axis. On a u lattice conjugate to the
  // signal grid (du * dy * n = |b|) that sum is an exact discrete collapse
  // onto the central tensor node, so the u grid is derived from the draw.
  // The x grid keeps the signal step: the recovered scaled samples feed the
  // closing adjoint, which needs the full signal resolution.
  const double du = std::abs(M.b()) / (f.s.g.step * f.s.g.count);
  Grid1 xg = sig_grid(), ug = make_grid(-(f.s.g.count / 2) * du, du, f.s.g.count);
  // The smearing must be undone by the inverse of the discrete model that
  // applied it: the spread kernel goes through the spectral route, whose
  // factorization is node exact; the point kernel stays on the direct one.
  ConvMethod method = k.kind == KernelKind::Delta ? ConvMethod::Direct
                                                  : ConvMethod::Spectral;
  CMCDConfig cfg{MWDConfig(M, M1, M2, M3), t, k, method, true};
  Field2 C = cmcd_to(f.s, cfg, xg, ug, pol);
  Signal rec = cmcd_reconstruct(C, cfg, sig_grid(), 1e-6, pol);
  std::vector<cplx> fhat(rec.v.size());
  for (size_t i = 0; i < rec.v.size(); ++i) fhat[i] = rec.v[i] / std::conj(m20);
  Aligned al = aligned_rel_l2(fhat, f.s.v);
  return {al.residual, al.phase, std::move(note)};
}

// Inner product of two pipeline outputs against |det B5| times the
// squared signal inner product; the convolving field comes from a custom
// unimodular spectrum so the fifth matrix genuinely enters.
PropertyCheck check_moyal(uint64_t seed, int sig, const PropSignal& f,
                          ExecPolicy pol) {
  PropSignal g2 = make_prop_signal(seed + 101, sig);
  Draw dm{seed, 41};
  SpMat M = draw_safe(dm);
  SpMat M1 = draw_safe(dm);
  SpMat M2 = draw_safe(dm);
  SpMat M3 = draw_m3_general(seed, 42);
  double s1 = dm.in(0.85, 1.25), s2 = dm.in(0.85, 1.25);
  Eigen::MatrixXd m5 = Eigen::MatrixXd::Zero(4, 4);
  m5(0, 2) = s1;
  m5(1, 3) = s2;
  m5(2, 0) = -1.0 / s1;
  m5(3, 1) = -1.0 / s2;
  SpMat M5 = SpMat::from_matrix(m5);
  SpMat M4 = draw_quad(dm);
  SpMat M6 = draw_quad(dm);
  GmcTriple t(M4, M5, M6);

  Grid1 xg = dist_xgrid(), ug = dist_ugrid();
  Grid2 zg{xg, ug};
  Grid1 n1 = fft_conjugate(xg), n2 = fft_conjugate(ug);
  double q1 = dm.in(-0.3, 0.3), q2 = dm.in(-0.3, 0.3);
  double r1 = dm.in(-0.2, 0.2), r2 = dm.in(-0.2, 0.2);
  std::vector<cplx> spec(size_t(n1.count) * n2.count);
  for (int i = 0; i < n1.count; ++i)
    for (int j = 0; j < n2.count; ++j) {
      double v1 = n1.value(i), v2 = n2.value(j);
      spec[size_t(i) * n2.count + j] =
          unit_phase(2.0 * kPi * (q1 * v1 + q2 * v2) + kPi * (r1 * v1 * v1 + r2 * v2 * v2));
    }
  Field2 Pi = mu2d_from_spectrum(M5, spec, zg, pol);

  MWDConfig wcfg(M, M1, M2, M3);
  Field2 Wf = mwd_to(f.s, wcfg, xg, ug, true, pol);
  Field2 Wg = mwd_to(g2.s, wcfg, xg, ug, true, pol);
  Field2 Cf = convolve(Wf, Pi, t, ConvMethod::Spectral, pol);
  Field2 Cg = convolve(Wg, Pi, t, ConvMethod::Spectral, pol);

  cplx lhs = 0.0;
  for (size_t k = 0; k < Cf.v.size(); ++k) lhs += Cf.v[k] * std::conj(Cg.v[k]);
  lhs *= zg.cell();
  cplx ip = 0.0;
  for (size_t i = 0; i < f.s.v.size(); ++i) ip += f.s.v[i] * std::conj(g2.s.v[i]);
  ip *= f.s.g.step;
  cplx rhs = s1 * s2 * std::norm(ip);
  return scalar_check(lhs, rhs, "unimodular custom spectrum");
}

// Conjugating the signal equals conjugating the output after flipping
// the sign of every off-diagonal block (coordinate matrix excepted).
PropertyCheck check_conj_sym(uint64_t seed, int sig, const PropSignal& f,
                             ExecPolicy pol) {
  Draw dm{seed, 51};
  SpMat M = draw_safe(dm);
  SpMat M1 = draw_safe(dm);
  SpMat M2 = draw_safe(dm);
  SpMat M3 = draw_m3_general(seed, 52);
  Draw dt{seed, 53};
  SpMat m4 = draw_quad(dt), m5 = draw_quad(dt), m6 = draw_quad(dt);
  GmcTriple t(m4, m5, m6);
  GmcTriple th(hat4(m4), hat4(m5), hat4(m6));
  KernelSpec k = (seed + uint64_t(sig)) % 2 == 0 ? KernelSpec::wigner()
                                                 : KernelSpec::choi_williams(2.0);
  Grid1 xg = dist_xgrid(), ug = dist_ugrid();
  Signal fc = f.s;
  for (cplx& z : fc.v) z = std::conj(z);
  Field2 L = cmcd_to(fc, make_cfg(M, M1, M2, M3, t, k), xg, ug, pol);
  Field2 R = cmcd_to(f.s, make_cfg(hat2(M), hat2(M1), hat2(M2), M3, th, k), xg, ug, pol);
  // The principal root of -B flips branch under conjugation, leaving one
  // fixed factor -i; the two window quadratures cancel inside the tensor.
  for (cplx& z : R.v) z = cplx(0.0, -1.0) * std::conj(z);
  return field_check(L, R);
}

// Reversing time equals negating both window matrices.
PropertyCheck check_time_reversal(uint64_t seed, int sig, const PropSignal& f,
                                  ExecPolicy pol) {
  const bool exact = (seed == 1 && sig == 0);
  Draw dm{seed, 55};
  SpMat M = draw_safe(dm);
  SpMat M1 = draw_safe(dm);
  SpMat M2 = exact ? M1 : draw_safe(dm);
  SpMat M3 = draw_m3_general(seed, 56);
  GmcTriple t = draw_triple(seed, 57);
  KernelSpec k = covariant_kernel(seed + uint64_t(sig));

  Generator gen = exact ? gen_gauss() : f.gen;
  Signal base = exact ? sample(gen, sig_grid()) : f.s;
  Signal rev(sig_grid());
  for (int i = 0; i < rev.g.count; ++i) rev.v[i] = gen(-rev.g.value(i));

  Grid1 xg = dist_xgrid(), ug = dist_ugrid();
  Field2 L = cmcd_to(rev, make_cfg(M, M1, M2, M3, t, k), xg, ug, pol);
  SpMat M1n = SpMat::from_matrix(-M1.matrix());
  SpMat M2n = SpMat::from_matrix(-M2.matrix());
  Field2 R = cmcd_to(base, make_cfg(M, M1n, M2n, M3, t, k), xg, ug, pol);
  return field_check(L, R, exact ? "even signal exact case" : "");
}

// Dilating the signal equals composing the window matrices with the
// scaling matrix, at the cost of one power of sigma.
PropertyCheck check_scaling(uint64_t seed, int sig, const PropSignal& f,
                            ExecPolicy pol) {
  const bool exact = (seed == 1 && sig == 0);
  const double sigma = exact ? 1.0 : ((seed + uint64_t(sig)) % 2 == 0 ? 2.0 : 0.5);
  Draw dm{seed, 58};
  SpMat M = draw_safe(dm);
  SpMat M1 = draw_safe(dm);
  SpMat M2 = draw_safe(dm);
  SpMat M3 = draw_m3_general(seed, 59);
  GmcTriple t = draw_triple(seed, 63);
  KernelSpec k = covariant_kernel(seed + uint64_t(sig) + 2);
  Grid1 xg = dist_xgrid(), ug = dist_ugrid();

  Signal fs(sig_grid());
  for (int i = 0; i < fs.g.count; ++i) fs.v[i] = f.gen(sigma * fs.g.value(i));
  Field2 L = cmcd_to(fs, make_cfg(M, M1, M2, M3, t, k), xg, ug, pol);

  SpMat Ss = sp2(1.0 / sigma, 0.0, 0.0, sigma);
  SpMat M1s = M1.compose(Ss);
  SpMat M2s = M2.compose(Ss);
  char note[32];
  std::snprintf(note, sizeof note, "sigma=%g%s", sigma, exact ? " exact" : "");

  if (exact) {
    Field2 R = cmcd_to(f.s, make_cfg(M, M1s, M2s, M3, t, k), xg, ug, pol);
    return field_check(L, R, note);
  }
  // composed window matrices can out-chirp the native sampling, so the
  // reference tensor is built from the wide refined quadrature
  MWDConfig wcfg(M, M1s, M2s, M3);
  Field2 W = hand_tensor_w(wcfg, f.gen, xg, ug, pol);
  Field2 Pi = make_pi(k, Grid2{xg, ug});
  Field2 R = convolve(W, Pi, t, ConvMethod::Direct, pol);
  R = cplx(1.0 / sigma, 0.0) * R;
  return field_check(L, R, note);
}

// Translating the signal shifts the distribution along both axes and
// twists it by explicit chirp factors once the window matrices share
// their first entry and satisfy one cross condition with the coordinate
// matrix.
// Shifting or modulating the signal translates the distribution by a
// symplectic image of the shift and twists it by linear and constant
// phases. A shift tau in time turns each window output g_i into
// exp(i pi c_i tau (2t - a_i tau)) g_i(t - a_i tau), a modulation w into
// exp(i pi d_i w (2t - b_i w)) g_i(t - b_i w); pushing that through the
// tensor warp and the outer quadrature gives the constants below with no
// constraint on any of the matrices.
PropertyCheck check_heisenberg_cov(uint64_t seed, int sig, const PropSignal& f,
                                   bool modulation, ExecPolicy pol) {
  Draw dm{seed, modulation ? uint64_t(91) : uint64_t(81)};
  SpMat M = draw_safe(dm);
  SpMat M1 = draw_safe(dm);
  SpMat M2 = draw_safe(dm);
  SpMat M3 = draw_m3_general(seed, modulation ? 92 : 82);
  double tau = dm.sgn() * dm.in(0.3, modulation ? 0.7 : 0.6);
  // Two read truncations matter: the realized distribution shifts push the
  // shifted output windows into the signal tails, and the shifted transform
  // arguments clamp a displaced window on one side only. Resample the
  // window matrices and damp tau until both stay moderate.
  for (int tries = 0; tries < 400; ++tries) {
    double g1 = modulation ? M1.b() : M1.a();
    double g2 = modulation ? M2.b() : M2.a();
    double sy = tau * (g1 * M3.a() - g2 * M3.b());
    double sx = tau * (g2 * M3.d() - g1 * M3.c());
    if (std::abs(g1 * tau) <= 0.35 && std::abs(g2 * tau) <= 0.35 &&
        std::abs(sy) <= 0.7 && std::abs(sx) <= 1.4)
      break;
    if (tries % 2 == 0) M2 = draw_safe(dm);
    else M1 = draw_safe(dm);
    if (tries % 50 == 49) tau *= 0.75;
  }
  GmcTriple t = draw_triple(seed, modulation ? 93 : 83);
  KernelSpec k = covariant_kernel(seed + uint64_t(sig) + (modulation ? 4 : 3));
  Grid1 xg = dist_xgrid(), ug = dist_ugrid();
  CMCDConfig cfg = make_cfg(M, M1, M2, M3, t, k);

  Signal fs(sig_grid());
  if (modulation)
    for (int i = 0; i < fs.g.count; ++i) {
      double x = fs.g.value(i);
      fs.v[i] = f.gen(x) * unit_phase(2.0 * kPi * tau * x);
    }
  else
    for (int i = 0; i < fs.g.count; ++i) fs.v[i] = f.gen(fs.g.value(i) - tau);
  Field2 L = cmcd_to(fs, cfg, xg, ug, pol);

  const double a3 = M3.a(), b3 = M3.b(), c3 = M3.c(), d3 = M3.d();
  const double a = M.a(), b = M.b(), d = M.d();
  double Sx, Sy, kap, lam, thc;
  if (modulation) {
    Sx = tau * (M2.b() * d3 - M1.b() * c3);
    Sy = tau * (M1.b() * a3 - M2.b() * b3);
    kap = tau * (M1.d() * d3 - M2.d() * c3);
    lam = tau * (M1.d() * b3 - M2.d() * a3);
    thc = -kPi * tau * tau * (M1.d() * M1.b() - M2.d() * M2.b());
  } else {
    Sx = tau * (M2.a() * d3 - M1.a() * c3);
    Sy = tau * (M1.a() * a3 - M2.a() * b3);
    kap = tau * (M1.c() * d3 - M2.c() * c3);
    lam = tau * (M1.c() * b3 - M2.c() * a3);
    thc = -kPi * tau * tau * (M1.c() * M1.a() - M2.c() * M2.a());
  }
  const double Su = a * Sy + b * kap;
  const double nu = (d * Su - Sy) / b;
  const double th0 =
      kPi * (2.0 * Sy * Su - a * Sy * Sy - d * Su * Su) / b + thc;

  Grid1 xsh = make_grid(xg.start - Sx, xg.step, xg.count);
  Grid1 ush = make_grid(ug.start - Su, ug.step, ug.count);
  Field2 Wsh = mwd_to(f.s, cfg.mwd, xsh, ush, true, pol);
  Field2 A(Grid2{xg, ug});
  for (int i = 0; i < xg.count; ++i)
    for (int j = 0; j < ug.count; ++j)
      A.at(i, j) = Wsh.at(i, j) *
                   unit_phase(2.0 * kPi * (lam * xg.value(i) + nu * ug.value(j)));
  Field2 R = convolve(A, make_pi(k, A.g), t, ConvMethod::Direct, pol);
  R = unit_phase(th0) * R;
  return field_check(L, R);
}

// Pre-transforming the signal equals composing both window matrices with
// the same symplectic element.
PropertyCheck check_metaplectic_invariance(uint64_t seed, int sig,
                                           const PropSignal& f, ExecPolicy pol) {
  const bool exact = (seed == 1 && sig == 0);
  Draw dm{seed, 96};
  SpMat M = draw_safe(dm);
  SpMat M1 = draw_safe(dm);
  SpMat M2 = draw_safe(dm);
  SpMat M3 = draw_m3_general(seed, 97);
  GmcTriple t = draw_triple(seed, 98);
  KernelSpec k = covariant_kernel(seed + uint64_t(sig) + 5);
  Grid1 xg = dist_xgrid(), ug = dist_ugrid();

  if (exact) {
    Field2 L = cmcd_to(f.s, make_cfg(M, M1, M2, M3, t, k), xg, ug, pol);
    SpMat I = sp_identity(1);
    Field2 R = cmcd_to(f.s, make_cfg(M, M1.compose(I), M2.compose(I), M3, t, k),
                       xg, ug, pol);
    return field_check(L, R, "identity element exact case");
  }

  SpMat M0 = sp_identity(1);
  bool ok = false;
  for (int tries = 0; tries < 800 && !ok; ++tries) {
    std::vector<double> p = {dm.in(-0.35, 0.35), dm.in(-0.35, 0.35), dm.in(-0.35, 0.35)};
    SpMat cand = exp_param(p, 1);
    if (mt_tame(M1.compose(cand), 0.8, 0.6) && mt_tame(M2.compose(cand), 0.8, 0.6)) {
      M0 = cand;
      ok = true;
    }
  }
  if (!ok) throw numerical_error("property draw: invariance element");

  // mu(M0) for a near-identity element has a tiny b entry, which no
  // direct quadrature resolves; route through the Fourier factor where
  // both stages are tame. The tensor cancels the resulting global phase.
  Grid1 mid = make_grid(-6.4, 0.1, 128);
  Signal s1 = mt_to_grid(sp_fourier(1), f.s, mid, pol);
  SpMat MJi = M0.compose(sp_fourier(1).inverse());
  Signal g0 = mt_to_grid(MJi, s1, sig_grid(), pol);

  Field2 L = cmcd_to(g0, make_cfg(M, M1, M2, M3, t, k), xg, ug, pol);
  Field2 R = cmcd_to(f.s, make_cfg(M, M1.compose(M0), M2.compose(M0), M3, t, k),
                     xg, ug, pol);
  return field_check(L, R);
}

}  // namespace

const char* property_name(PropertyId id) {
  switch (id) {
    case PropertyId::TimeMarginal: return "time-marginal";
    case PropertyId::FreqMarginal: return "freq-marginal";
    case PropertyId::TimeDelayMarginal: return "time-delay-marginal";
    case PropertyId::FreqShiftMarginal: return "freq-shift-marginal";
    case PropertyId::EnergyTime: return "energy-time";
    case PropertyId::EnergyFreq: return "energy-freq";
    case PropertyId::EnergyDelay: return "energy-delay";
    case PropertyId::Reconstruction: return "reconstruction";
    case PropertyId::Moyal: return "moyal";
    case PropertyId::ConjSym: return "conj-sym";
    case PropertyId::TimeReversal: return "time-reversal";
    case PropertyId::Scaling: return "scaling";
    case PropertyId::TimeTranslation: return "time-translation";
    case PropertyId::FreqModulation: return "freq-modulation";
    case PropertyId::MetaplecticInvariance: return "metaplectic-invariance";
  }
  throw validation_error("property: unknown id");
}

const std::vector<PropertyId>& all_properties() {
  static const std::vector<PropertyId> ids = {
      PropertyId::TimeMarginal,        PropertyId::FreqMarginal,
      PropertyId::TimeDelayMarginal,   PropertyId::FreqShiftMarginal,
      PropertyId::EnergyTime,          PropertyId::EnergyFreq,
      PropertyId::EnergyDelay,         PropertyId::Reconstruction,
      PropertyId::Moyal,               PropertyId::ConjSym,
      PropertyId::TimeReversal,        PropertyId::Scaling,
      PropertyId::TimeTranslation,     PropertyId::FreqModulation,
      PropertyId::MetaplecticInvariance,
  };
  return ids;
}

PropertyId property_from_name(const std::string& name) {
  for (PropertyId id : all_properties())
    if (name == property_name(id)) return id;
  throw validation_error("property: unknown name '" + name + "'");
}

PropertyCheck check_property(PropertyId id, uint64_t seed, int signal_index,
                             ExecPolicy pol) {
  if (seed == 0) throw validation_error("property: seed must be positive");
  if (signal_index != 0 && signal_index != 1)
    throw validation_error("property: signal index must be 0 or 1");
  PropSignal f = make_prop_signal(seed, signal_index);
  switch (id) {
    case PropertyId::TimeMarginal:
      return check_time_marginal(seed, signal_index, f, pol);
    case PropertyId::FreqMarginal:
      return check_freq_marginal(seed, signal_index, f, pol, false);
    case PropertyId::TimeDelayMarginal:
      return check_delay_marginal(seed, signal_index, f, pol, false);
    case PropertyId::FreqShiftMarginal:
      return check_delay_marginal(seed, signal_index, f, pol, true);
    case PropertyId::EnergyTime:
      return check_energy_time(seed, signal_index, f, pol);
    case PropertyId::EnergyFreq:
      return check_freq_marginal(seed, signal_index, f, pol, true);
    case PropertyId::EnergyDelay:
      return check_energy_delay(seed, signal_index, f, pol);
    case PropertyId::Reconstruction:
      return check_reconstruction(seed, signal_index, f, pol);
    case PropertyId::Moyal:
      return check_moyal(seed, signal_index, f, pol);
    case PropertyId::ConjSym:
      return check_conj_sym(seed, signal_index, f, pol);
    case PropertyId::TimeReversal:
      return check_time_reversal(seed, signal_index, f, pol);
    case PropertyId::Scaling:
      return check_scaling(seed, signal_index, f, pol);
    case PropertyId::TimeTranslation:
      return check_heisenberg_cov(seed, signal_index, f, false, pol);
    case PropertyId::FreqModulation:
      return check_heisenberg_cov(seed, signal_index, f, true, pol);
    case PropertyId::MetaplecticInvariance:
      return check_metaplectic_invariance(seed, signal_index, f, pol);
  }
  throw validation_error("property: unknown id");
}

std::vector<PropertySample> run_property_suite(const std::vector<PropertyId>& ids,
                                               int nseeds, ExecPolicy pol) {
  if (nseeds < 1) throw validation_error("properties: nseeds must be positive");
  std::vector<PropertySample> out;
  out.reserve(size_t(ids.size()) * nseeds * 2);
  for (PropertyId id : ids)
    for (int s = 1; s <= nseeds; ++s)
      for (int w = 0; w < 2; ++w) {
        PropertyCheck c = check_property(id, uint64_t(s), w, pol);
        out.push_back({id, s, w, c.residual, c.alignment, c.note});
      }
  return out;
}

void write_property_csv(const std::string& path,
                        const std::vector<PropertySample>& rows) {
  std::ofstream out(path);
  if (!out) throw validation_error("properties: cannot open " + path);
  out << "property,seed,signal,residual,alignment_phase\n";
  char line[160];
  for (const PropertySample& r : rows) {
    std::snprintf(line, sizeof line, "%s,%d,%d,%.6e,%.6f%+.6fi\n",
                  property_name(r.id), r.seed, r.signal, r.residual,
                  r.alignment.real(), r.alignment.imag());
    out << line;
  }
  if (!out) throw numerical_error("properties: write failed: " + path);
}

}  // namespace mtfa
