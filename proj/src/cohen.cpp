#include "mtfa/cohen.hpp"

#include <cmath>

#include "json.hpp"
#include "mtfa/fft.hpp"

namespace mtfa {
namespace {

inline double qform(const Eigen::Matrix2d& Q, double z1, double z2) {
  return z1 * (Q(0, 0) * z1 + Q(0, 1) * z2) + z2 * (Q(1, 0) * z1 + Q(1, 1) * z2);
}

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

// Band limited read of a sample set. The half shifted products below land
// between nodes, where linear interpolation would bias the whole field.
struct SpectralReader {
  Grid1 g;
  Grid1 gnu;
  std::vector<cplx> spec;
  explicit SpectralReader(const Signal& s)
      : g(s.g), gnu(fft_conjugate(s.g)), spec(cdft(s.v, s.g, gnu, -1)) {}
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

std::string kernel_name(KernelKind kind) {
  switch (kind) {
    case KernelKind::Wigner: return "wigner";
    case KernelKind::ChoiWilliams: return "choi-williams";
    case KernelKind::KirkwoodRihaczek: return "kirkwood-rihaczek";
    case KernelKind::BornJordan: return "born-jordan";
    case KernelKind::Zam: return "zam";
    case KernelKind::MargenauHill: return "margenau-hill";
    case KernelKind::Page: return "page";
    case KernelKind::Delta: return "delta";
    case KernelKind::Custom: return "custom";
  }
  return "unknown";
}

KernelSpec KernelSpec::named(const std::string& name) {
  KernelSpec s;
  if (name == "wigner") s.kind = KernelKind::Wigner;
  else if (name == "choi-williams") s.kind = KernelKind::ChoiWilliams;
  else if (name == "kirkwood-rihaczek") s.kind = KernelKind::KirkwoodRihaczek;
  else if (name == "born-jordan") s.kind = KernelKind::BornJordan;
  else if (name == "zam") s.kind = KernelKind::Zam;
  else if (name == "margenau-hill") s.kind = KernelKind::MargenauHill;
  else if (name == "page") s.kind = KernelKind::Page;
  else if (name == "delta") s.kind = KernelKind::Delta;
  else throw validation_error("kernel: unknown name: " + name);
  return s;
}

KernelSpec KernelSpec::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw validation_error(std::string("kernel json: parse error: ") + e.what());
  }
  if (!j.contains("kind")) throw validation_error("kernel json: missing kind");
  std::string kind = j["kind"].get<std::string>();
  if (kind == "custom")
    throw validation_error("kernel json: custom kernels cannot be loaded from JSON");
  KernelSpec s = named(kind);
  if (j.contains("params")) {
    auto p = j["params"];
    if (p.contains("sigma")) s.sigma = p["sigma"].get<double>();
    if (p.contains("kappa")) s.kappa = p["kappa"].get<double>();
  }
  if (s.sigma <= 0.0) throw validation_error("kernel json: sigma must be positive");
  if (s.kappa <= 0.0) throw validation_error("kernel json: kappa must be positive");
  return s;
}

std::string KernelSpec::to_json_text() const {
  nlohmann::json j;
  j["kind"] = kernel_name(kind);
  j["params"] = {{"sigma", sigma}, {"kappa", kappa}};
  return j.dump(2);
}

cplx phi_eval(const KernelSpec& spec, double v, double z) {
  switch (spec.kind) {
    case KernelKind::Wigner:
    case KernelKind::Delta:
      return 1.0;
    case KernelKind::ChoiWilliams:
      return std::exp(-v * v * z * z / spec.sigma);
    case KernelKind::KirkwoodRihaczek:
      return unit_phase(kPi * v * z);
    case KernelKind::BornJordan:
      return sinc(kPi * v * z);
    case KernelKind::Zam:
      return std::abs(z) * sinc(2.0 * kPi * spec.kappa * v * z);
    case KernelKind::MargenauHill:
      return std::cos(kPi * v * z);
    case KernelKind::Page:
      return unit_phase(2.0 * kPi * v * std::abs(z));
    case KernelKind::Custom: {
      if (!spec.custom_phi) throw validation_error("kernel: custom phi not set");
      return spec.custom_phi->sample(v, z);
    }
  }
  throw validation_error("kernel: unknown kind");
}

Field2 make_pi(const KernelSpec& spec, const Grid2& g) {
  Field2 out(g);
  if (spec.kind == KernelKind::Wigner || spec.kind == KernelKind::Delta) {
    out.at(zero_index(g.x), zero_index(g.u)) = 1.0 / g.cell();
    return out;
  }
  Grid2 conj{fft_conjugate(g.x), fft_conjugate(g.u)};
  Field2 phi(conj);
  if (spec.kind == KernelKind::Custom) {
    if (!spec.custom_phi) throw validation_error("kernel: custom phi not set");
    if (!(spec.custom_phi->g == conj))
      throw validation_error("kernel: custom phi grid must be conjugate to the target grid");
    phi = *spec.custom_phi;
  } else {
    for (int i = 0; i < conj.x.count; ++i)
      for (int j = 0; j < conj.u.count; ++j)
        phi.at(i, j) = phi_eval(spec, conj.x.value(i), conj.u.value(j));
  }
  out.v = cdft2(phi.v, conj, g, -1);
  const double w = conj.x.step * conj.u.step;
  for (cplx& z : out.v) z *= w;
  return out;
}

CMCDConfig CMCDConfig::classical(const KernelSpec& k, ConvMethod m) {
  return {MWDConfig::classical(), GmcTriple::all_fourier(), k, m};
}

Field2 cmcd(const Signal& f, const CMCDConfig& cfg, ExecPolicy pol) {
  Field2 W = mwd(f, cfg.mwd, pol);
  Field2 Pi = make_pi(cfg.kernel, W.g);
  return convolve(W, Pi, cfg.gmc, cfg.method, pol);
}

Field2 cmcd_to(const Signal& f, const CMCDConfig& cfg, const Grid1& xout,
               const Grid1& uout, ExecPolicy pol) {
  Field2 W = mwd_to(f, cfg.mwd, xout, uout, cfg.analytic_tensor, pol);
  Field2 Pi = make_pi(cfg.kernel, W.g);
  return convolve(W, Pi, cfg.gmc, cfg.method, pol);
}

Field2 classical_cohen_oracle(const Signal& f, const KernelSpec& spec, const Grid2& g) {
  if (std::abs(g.x.step - f.g.step) > 1e-12 * f.g.step)
    throw validation_error("cohen oracle: x grid step must match the signal grid");
  const Grid1 gz = fft_conjugate(g.u);
  const Grid1 gv = fft_conjugate(g.x);
  const int nx = g.x.count, ny = f.g.count, nz = gz.count, nv = gv.count;
  const double lag0 = g.x.start - f.g.start;

  // Phi(s, z) on the lag lattice s = lag0 + l * dx.
  const int nlag = nx + ny - 1;
  std::vector<cplx> Phi(static_cast<size_t>(nlag) * nz);
  for (int l = 0; l < nlag; ++l) {
    double s = lag0 + (l - (ny - 1)) * g.x.step;
    for (int k = 0; k < nz; ++k) {
      cplx acc = 0.0;
      for (int m = 0; m < nv; ++m)
        acc += phi_eval(spec, gv.value(m), gz.value(k)) *
               unit_phase(-2.0 * kPi * gv.value(m) * s);
      Phi[static_cast<size_t>(l) * nz + k] = acc * gv.step;
    }
  }

  // Half-shifted signal products.
  SpectralReader rd(f);
  std::vector<cplx> prod(static_cast<size_t>(ny) * nz);
  for (int j = 0; j < ny; ++j) {
    double y = f.g.value(j);
    for (int k = 0; k < nz; ++k) {
      double z = gz.value(k);
      prod[static_cast<size_t>(j) * nz + k] =
          rd.at(y + 0.5 * z) * std::conj(rd.at(y - 0.5 * z));
    }
  }

  // A(x, z) = sum_y prod(y, z) Phi(x - y, z) dy, then a z -> w Fourier
  // sum per row.
  Field2 out(g);
  std::vector<cplx> A(nz);
  for (int i = 0; i < nx; ++i) {
    for (int k = 0; k < nz; ++k) {
      cplx acc = 0.0;
      for (int j = 0; j < ny; ++j)
        acc += prod[static_cast<size_t>(j) * nz + k] *
               Phi[static_cast<size_t>(i - j + ny - 1) * nz + k];
      A[k] = acc * f.g.step;
    }
    std::vector<cplx> row = cdft(A, gz, g.u, -1);
    for (int jw = 0; jw < g.u.count; ++jw) out.at(i, jw) = row[jw] * gz.step;
  }
  return out;
}

Signal cmcd_reconstruct(const Field2& C, const CMCDConfig& cfg, const Grid1& ygrid,
                        double eps, ExecPolicy pol) {
  const SpMat& M3 = cfg.mwd.M3;
  if (std::abs(M3.a()) > 1e-10)
    throw validation_error("cmcd_reconstruct: requires the A block of M3 to vanish");
  const double b = cfg.mwd.M.b();
  if (std::abs(b) < 1e-12)
    throw validation_error("cmcd_reconstruct: requires an invertible B block in M");
  const double b3 = M3.b();

  Field2 Pi = make_pi(cfg.kernel, C.g);
  const Grid2& g = C.g;
  const int nx = g.x.count, nu = g.u.count;

  // Undo the smearing with the same discrete model that produced C. The
  // direct method is a chirp-twisted lattice convolution: dividing the
  // grid-pair spectra inverts it, leaving the F4 chirp on the result.
  // The spectral method factors through the 4x4 transforms, whose round
  // trip is node exact, so that branch recovers the distribution itself.
  const bool f4_twisted = cfg.method == ConvMethod::Direct;
  Eigen::Matrix2d F4 = cfg.gmc.F4();
  std::vector<cplx> R;
  if (f4_twisted) {
    Eigen::Matrix2d F5 = cfg.gmc.F5(), F6 = cfg.gmc.F6();
    Grid2 conj{fft_conjugate(g.x), fft_conjugate(g.u)};
    std::vector<cplx> Ct(C.v.size()), Pt(Pi.v.size());
    for (int i = 0; i < nx; ++i) {
      double x = g.x.value(i);
      for (int j = 0; j < nu; ++j) {
        double u = g.u.value(j);
        Ct[g.idx(i, j)] = C.at(i, j) * unit_phase(kPi * qform(F6, x, u));
        Pt[g.idx(i, j)] = Pi.at(i, j) * unit_phase(kPi * qform(F5, x, u));
      }
    }
    std::vector<cplx> Chat = cdft2(Ct, g, conj, -1);
    std::vector<cplx> Phat = cdft2(Pt, g, conj, -1);
    double maxp = 0.0;
    for (const cplx& z : Phat) maxp = std::max(maxp, std::norm(z));
    if (maxp <= 0.0) throw numerical_error("cmcd_reconstruct: kernel spectrum vanishes");
    const double reg = eps * maxp;
    std::vector<cplx> Q(Chat.size());
    for (size_t k = 0; k < Q.size(); ++k)
      Q[k] = Chat[k] * std::conj(Phat[k]) / (std::norm(Phat[k]) + reg);
    R = cdft2(Q, conj, g, +1);
    const double wgt = conj.x.step * conj.u.step;
    for (cplx& z : R) z *= wgt;
  } else {
    std::vector<cplx> s6 = mu2d_spectrum(cfg.gmc.M6, C, pol);
    std::vector<cplx> s5 = mu2d_spectrum(cfg.gmc.M5, Pi, pol);
    Eigen::Matrix2d B4 = cfg.gmc.M4.B(), B5 = cfg.gmc.M5.B(), B6 = cfg.gmc.M6.B();
    Eigen::Matrix2d Q = B6.transpose() * cfg.gmc.M6.D() -
                        B4.transpose() * cfg.gmc.M4.D() -
                        B5.transpose() * cfg.gmc.M5.D();
    cplx c = sqrt_neg(B4.determinant()) * sqrt_neg(B5.determinant()) /
             sqrt_neg(B6.determinant());
    Grid1 gnu1 = fft_conjugate(g.x), gnu2 = fft_conjugate(g.u);
    std::vector<cplx> mult(s5.size());
    double maxp = 0.0;
    for (int k1 = 0; k1 < gnu1.count; ++k1) {
      double nu1 = gnu1.value(k1);
      for (int k2 = 0; k2 < gnu2.count; ++k2) {
        size_t k = static_cast<size_t>(k1) * gnu2.count + k2;
        mult[k] = c * unit_phase(kPi * qform(Q, nu1, gnu2.value(k2))) * s5[k];
        maxp = std::max(maxp, std::norm(mult[k]));
      }
    }
    if (maxp <= 0.0) throw numerical_error("cmcd_reconstruct: kernel spectrum vanishes");
    const double reg = eps * maxp;
    std::vector<cplx> s4(s6.size());
    for (size_t k = 0; k < s4.size(); ++k)
      s4[k] = s6[k] * std::conj(mult[k]) / (std::norm(mult[k]) + reg);
    R = mu2d_from_spectrum(cfg.gmc.M4, s4, g, pol).v;
  }

  // Sum the u axis against the removed chirps. On a u grid conjugate to
  // the sampled spread axis the sum collapses that axis onto its central
  // node at |b| per unit mass; the amplitude divides the |b| back out.
  const double dovb = cfg.mwd.M.d() / b;
  std::vector<cplx> H(nx);
  const cplx amp = sqrt_neg(b) / std::abs(b);
  for (int i = 0; i < nx; ++i) {
    double x = g.x.value(i);
    cplx acc = 0.0;
    for (int j = 0; j < nu; ++j) {
      double u = g.u.value(j);
      double ph = -kPi * dovb * u * u;
      if (f4_twisted) ph -= kPi * qform(F4, x, u);
      acc += R[g.idx(i, j)] * unit_phase(ph);
    }
    H[i] = amp * acc * g.u.step;
  }

  // H(x) = mu(M1) f(x * b3) * const; undo the argument scaling and the
  // first transform.
  Grid1 sgrid = scaled_grid(g.x, b3);
  Signal P(sgrid);
  for (int m = 0; m < nx; ++m) P.v[m] = H[b3 > 0 ? m : nx - 1 - m];
  return mt_adjoint(cfg.mwd.M1, P, ygrid, MtMethod::Auto, pol);
}

}  // namespace mtfa
