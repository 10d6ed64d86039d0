#pragma once
// Metaplectic transforms in the row-vector convention.
//
// For M = [[A, B], [C, D]] with det B != 0 the transform is
//   mu(M) f(u) = (1/sqrt(-det B)) * integral f(x)
//                exp(pi*i*(u D B^{-1} u^T + x B^{-1} A x^T)
//                    - 2*pi*i * x B^{-1} u^T) dx
// with the principal square root; mu(J) = -i * Fourier. For B = 0,
//   mu(M) f(u) = sqrt(det D) * exp(pi*i * u C D^T u^T) * f(u D)
// with linear interpolation of samples and zero extension.
//
// The inverse used throughout is the quadrature adjoint
//   f(x) = sum_k P(u_k) conj(K_M(u_k, x)) du,
// which inverts the forward sum exactly on FFT-conjugate grids and
// differs from mu(M^{-1}) only by a unimodular constant.

#include <vector>

#include "mtfa/common.hpp"
#include "mtfa/field.hpp"
#include "mtfa/grid.hpp"
#include "mtfa/parallel.hpp"
#include "mtfa/signal.hpp"
#include "mtfa/symplectic.hpp"

namespace mtfa {

enum class MtMethod { Auto, Direct, ChirpFft };

cplx mt_kernel(const SpMat& M, double u, double x);

// Output nodes {b * nu_k} of the chirp-FFT path, ascending.
Grid1 natural_grid(const SpMat& M, const Grid1& gin);

// Forward transform. ChirpFft lands on the natural grid; Direct and the
// B = 0 branch reuse the input grid. Auto picks ChirpFft when B is
// invertible.
Signal mt(const SpMat& M, const Signal& f, MtMethod method = MtMethod::Auto,
          ExecPolicy pol = ExecPolicy::Parallel);

// Direct quadrature onto an arbitrary output grid.
Signal mt_to_grid(const SpMat& M, const Signal& f, const Grid1& gout,
                  ExecPolicy pol = ExecPolicy::Parallel);

// Pointwise evaluation at scattered output points.
std::vector<cplx> mt_at(const SpMat& M, const Signal& f, const std::vector<double>& pts);

// Adjoint (inverse) transform of samples P living on grid P.g back onto
// gout. Auto uses the fast path when P.g is the natural grid of gout.
Signal mt_adjoint(const SpMat& M, const Signal& P, const Grid1& gout,
                  MtMethod method = MtMethod::Auto,
                  ExecPolicy pol = ExecPolicy::Parallel);

// Partial transform along the second axis of a field: every row
// F(x_i, .) is transformed by mu(M). ChirpFft output is the natural
// grid of F.g.u.
Field2 partial_mt2(const SpMat& M, const Field2& F,
                   MtMethod method = MtMethod::ChirpFft,
                   ExecPolicy pol = ExecPolicy::Parallel);

// Partial transform onto an arbitrary uniform output grid (Bluestein).
Field2 partial_mt2_to(const SpMat& M, const Field2& F, const Grid1& uout,
                      ExecPolicy pol = ExecPolicy::Parallel);

// ---- 4x4 transforms of 2-D fields, z = (x, u) row vectors ----

// True when all four blocks are diagonal so the transform factorizes
// per axis.
bool separable_blocks(const SpMat& M4);

// Forward values indexed by the FFT-conjugate node pair
// nu = (nu1, nu2) in fft_conjugate(g.x) x fft_conjugate(g.u); entry k is
// mu(M4)F evaluated at w = nu B^T. Includes the quadrature weight
// dx * du. Requires det B != 0.
std::vector<cplx> mu2d_spectrum(const SpMat& M4, const Field2& F,
                                ExecPolicy pol = ExecPolicy::Parallel);

// Adjoint of mu2d_spectrum: reconstructs a field on zgrid from spectrum
// values with measure |det B| * dnu1 * dnu2.
Field2 mu2d_from_spectrum(const SpMat& M4, const std::vector<cplx>& spec,
                          const Grid2& zgrid, ExecPolicy pol = ExecPolicy::Parallel);

// Full transform with an ascending output grid (natural grids per axis
// when separable; direct quadrature otherwise keeps the input grid).
// Handles B = 0 (and per-axis singular blocks in the separable case).
Field2 mu2d(const SpMat& M4, const Field2& F, MtMethod method = MtMethod::Auto,
            ExecPolicy pol = ExecPolicy::Parallel);

// Direct quadrature onto a chosen grid (det B != 0).
Field2 mu2d_to_grid(const SpMat& M4, const Field2& F, const Grid2& gout,
                    ExecPolicy pol = ExecPolicy::Parallel);

}  // namespace mtfa
