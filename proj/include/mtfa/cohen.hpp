#pragma once
// Cohen kernel functions phi(v, z), their 2-D Fourier transforms Pi,
// and the convolution-type distribution built from a metaplectic
// Wigner field: C(f) = W(f) (*) Pi under a GMC triple.

#include <optional>
#include <string>

#include "mtfa/field.hpp"
#include "mtfa/gmconv.hpp"
#include "mtfa/signal.hpp"
#include "mtfa/wigner.hpp"

namespace mtfa {

enum class KernelKind {
  Wigner,            // phi = 1, Pi is the lattice delta
  ChoiWilliams,      // exp(-v^2 z^2 / sigma)
  KirkwoodRihaczek,  // exp(pi*i*v*z)
  BornJordan,        // sin(pi*v*z) / (pi*v*z)
  Zam,               // |z| * sin(2*pi*kappa*v*z) / (2*pi*kappa*v*z)
  MargenauHill,      // cos(pi*v*z)
  Page,              // exp(2*pi*i*v*|z|)
  Delta,             // Pi is the lattice delta (alias of Wigner)
  Custom,            // phi sampled on the conjugate grid
};

struct KernelSpec {
  KernelKind kind = KernelKind::Wigner;
  double sigma = 1.0;   // Choi-Williams spread
  double kappa = 0.5;   // Zam slope
  std::optional<Field2> custom_phi;  // samples on fft-conjugate grids

  static KernelSpec wigner() { return {}; }
  static KernelSpec delta() { return {KernelKind::Delta, 1.0, 0.5, {}}; }
  static KernelSpec choi_williams(double sigma = 1.0) {
    return {KernelKind::ChoiWilliams, sigma, 0.5, {}};
  }
  static KernelSpec named(const std::string& name);

  static KernelSpec from_json_text(const std::string& text);
  std::string to_json_text() const;
};

std::string kernel_name(KernelKind kind);

cplx phi_eval(const KernelSpec& spec, double v, double z);

// Pi(x, w) = sum_{v,z} phi(v, z) exp(-2*pi*i*(v*x + z*w)) dv dz with
// (v, z) on the grids conjugate to (x, w). Wigner/Delta kinds produce
// the exact lattice delta of weight 1/(dx*du) at the origin node.
Field2 make_pi(const KernelSpec& spec, const Grid2& g);

struct CMCDConfig {
  MWDConfig mwd;
  GmcTriple gmc;
  KernelSpec kernel;
  ConvMethod method = ConvMethod::Direct;
  // cmcd_to only: evaluate the distribution tensor at the exact warped
  // coordinates instead of interpolating grid samples. Slower, sharper.
  bool analytic_tensor = false;

  static CMCDConfig classical(const KernelSpec& k, ConvMethod m = ConvMethod::Direct);
};

// Full pipeline on natural grids.
Field2 cmcd(const Signal& f, const CMCDConfig& cfg, ExecPolicy pol = ExecPolicy::Parallel);
// Pipeline with chosen output axes.
Field2 cmcd_to(const Signal& f, const CMCDConfig& cfg, const Grid1& xout,
               const Grid1& uout, ExecPolicy pol = ExecPolicy::Parallel);

// Independent classical Cohen quadrature (dispatch M = J, M1 = M2 = I,
// M3 the classical coordinate matrix, conventional convolution):
//   C(x, w) = sum_{y,z} f(y + z/2) conj(f(y - z/2)) Phi(x - y, z)
//             exp(-2*pi*i*z*w) dy dz,
//   Phi(s, z) = sum_v phi(v, z) exp(-2*pi*i*v*s) dv.
// Used as an oracle against the pipeline above.
Field2 classical_cohen_oracle(const Signal& f, const KernelSpec& spec, const Grid2& g);

// Inversion of the convolution stage and the metaplectic Wigner stage:
// recovers the signal (up to a constant factor conj(mu(M2)f(0)) and a
// unimodular constant) from C(f) when A3 = 0. eps regularizes the
// spectral quotient by Pi.
Signal cmcd_reconstruct(const Field2& C, const CMCDConfig& cfg, const Grid1& ygrid,
                        double eps = 1e-6, ExecPolicy pol = ExecPolicy::Parallel);

}  // namespace mtfa
