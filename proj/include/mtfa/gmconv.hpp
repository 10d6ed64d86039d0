#pragma once
// Generalized metaplectic convolution of 2-D fields.
//
// With F_j = B_j^{-1} A_j for a triple (M4, M5, M6) of 4x4 symplectic
// matrices with invertible B blocks, the convolution of fields f, g on
// a common grid is
//   (f (*) g)(z) = exp(-pi*i*z F6 z^T) *
//                  [ (f exp(pi*i*z F4 z^T)) conv (g exp(pi*i*z F5 z^T)) ](z)
// where conv is the plain 2-D linear convolution. The spectral form is
//   mu(M6)(f (*) g)(u) = eps(u) mu(M4)f(u B6^{-T} B4^T) mu(M5)g(u B6^{-T} B5^T).

#include <Eigen/Dense>

#include "mtfa/field.hpp"
#include "mtfa/metaplectic.hpp"
#include "mtfa/symplectic.hpp"

namespace mtfa {

struct GmcTriple {
  SpMat M4, M5, M6;

  GmcTriple(const SpMat& m4, const SpMat& m5, const SpMat& m6);

  Eigen::Matrix2d F4() const;  // B4^{-1} A4
  Eigen::Matrix2d F5() const;
  Eigen::Matrix2d F6() const;

  static GmcTriple all_fourier();  // (J, J, J) in dimension 4
};

enum class ConvMethod { Direct, Spectral };

enum class GmcFamily { Conventional, TypeI, TypeII, TypeIV };
GmcTriple gmc_family(GmcFamily kind, const SpMat& M4);

// Spectral weight eps at u = (u1, u2).
cplx epsilon_factor(const GmcTriple& t, double u1, double u2);

// Chirped linear convolution with zero extension. use_fft switches the
// inner convolution between an FFT evaluation and the literal O(n^4)
// lattice sum (identical results up to roundoff).
Field2 convolve_direct(const Field2& f, const Field2& g, const GmcTriple& t,
                       ExecPolicy pol = ExecPolicy::Parallel, bool use_fft = true);

// Product of forward spectra weighted by eps, inverted through M6.
Field2 convolve_spectral(const Field2& f, const Field2& g, const GmcTriple& t,
                         ExecPolicy pol = ExecPolicy::Parallel);

Field2 convolve(const Field2& f, const Field2& g, const GmcTriple& t,
                ConvMethod method, ExecPolicy pol = ExecPolicy::Parallel);

}  // namespace mtfa
