#pragma once
// Thin FFTW wrapper plus grid-aware discrete Fourier sums.
//
// cdft computes out[k] = sum_j f[j] * exp(sign * 2*pi*i * x_j * nu_k)
// for uniform input nodes x_j and uniform output nodes nu_k. When the
// output grid is FFT-conjugate to the input it reduces to one FFT with
// boundary phases; any other uniform output grid goes through a
// Bluestein chirp convolution. No quadrature weight is applied.

#include <vector>

#include "mtfa/common.hpp"
#include "mtfa/grid.hpp"

namespace mtfa {
namespace fft {

// In-place unnormalized transforms; sign -1 is the forward exponent.
void transform(cplx* data, int n, int sign);
void transform2d(cplx* data, int nx, int ny, int sign);
// Batch of nrows contiguous rows of length n.
void rows(cplx* data, int nrows, int n, int sign);

}  // namespace fft

std::vector<cplx> cdft(const std::vector<cplx>& f, const Grid1& gin,
                       const Grid1& gout, int sign);

// Separable 2-D Fourier sum between a grid pair and another grid pair;
// rows first, then columns. No quadrature weight.
std::vector<cplx> cdft2(const std::vector<cplx>& f, const Grid2& gin,
                        const Grid2& gout, int sign);

}  // namespace mtfa
