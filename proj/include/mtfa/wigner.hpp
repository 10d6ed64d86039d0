#pragma once
// Metaplectic Wigner distributions.
//
// W(f)(x, u) applies, in order: two 1-D metaplectic transforms to f, a
// tensor product with conjugation, a linear coordinate change by
// M3 * [[0, I], [I, 0]] (amplitude sqrt|det|, bilinear interpolation),
// and a partial metaplectic transform in the second variable.

#include "mtfa/field.hpp"
#include "mtfa/metaplectic.hpp"
#include "mtfa/signal.hpp"
#include "mtfa/symplectic.hpp"

namespace mtfa {

struct MWDConfig {
  SpMat M, M1, M2, M3;
  bool fourier_normalized = false;

  MWDConfig(const SpMat& m, const SpMat& m1, const SpMat& m2, const SpMat& m3,
            bool normalized = false)
      : M(m), M1(m1), M2(m2), M3(m3), fourier_normalized(normalized) {
    if (M.n() != 1 || M1.n() != 1 || M2.n() != 1 || M3.n() != 1)
      throw validation_error("mwd: all matrices must be 2x2");
  }

  // Classical Wigner dispatch: (J, I, I, [[1,1],[-1/2,1/2]]), normalized
  // so the result is the textbook Wigner distribution.
  static MWDConfig classical();
  static MWDConfig tau_wigner(double tau);
  static MWDConfig stft_like();
};

// Geometry of the warped tensor arguments on a refined lattice.  When
// every entry of the coordinate matrix is an integer multiple of
// 1/refine (and both tensor axes share one step), the two warped
// arguments of every tensor cell land exactly on lattices of step
// xstep/refine, indexed by integer combinations of the cell indices.
// This gives an exact fast tensor evaluation and is the basis of signal
// recovery from the distribution.
struct TensorLattice {
  bool exact = false;
  int refine = 1;
  Grid1 fine1, fine2;  // lattices carrying the two component transforms
  long c1x = 0, c1y = 0, off1 = 0;
  long c2x = 0, c2y = 0, off2 = 0;
  long index1(int i, int j) const { return c1x * i + c1y * j + off1; }
  long index2(int i, int j) const { return c2x * i + c2y * j + off2; }
};

TensorLattice plan_tensor_lattice(const MWDConfig& cfg, const Grid1& xgrid,
                                  const Grid1& ygrid, int max_refine = 4);

// Natural output: x axis is f's grid, u axis the natural grid of M.
Field2 mwd(const Signal& f, const MWDConfig& cfg,
           ExecPolicy pol = ExecPolicy::Parallel);

// Same pipeline with chosen output axes. The plain path keeps the tensor
// on f's grid in both variables and reads warped points bilinearly;
// xout/uout only select evaluation nodes. analytic_tensor instead
// evaluates the component transforms at the exact warped coordinates
// (through the refined lattice when plan_tensor_lattice applies, else
// pointwise), capturing content that a grid-bound tensor would clip.
Field2 mwd_to(const Signal& f, const MWDConfig& cfg, const Grid1& xout,
              const Grid1& uout, bool analytic_tensor = false,
              ExecPolicy pol = ExecPolicy::Parallel);

Field2 classical_wd(const Signal& f, ExecPolicy pol = ExecPolicy::Parallel);
Field2 classical_wd_to(const Signal& f, const Grid1& uout,
                       ExecPolicy pol = ExecPolicy::Parallel);

// Signal recovery from a (filtered) Wigner-type field:
//   r(t, t') = integral W((t + t')/2, u) exp(2*pi*i*u*(t - t')) du,
//   f(t) = r(t, t_a) / sqrt(r(t_a, t_a))
// with the anchor t_a chosen at the largest diagonal magnitude (or
// fixed by index). The phase convention makes f(t_a) real positive.
struct InvertOptions {
  int anchor_index = -1;  // -1: maximum-energy anchor
};
Signal wd_invert(const Field2& W, const InvertOptions& opt = {});

}  // namespace mtfa
