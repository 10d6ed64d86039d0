#pragma once
// 1-D complex test signals: analytic generators, sampling, additive
// white Gaussian noise and error metrics.

#include <functional>
#include <string>
#include <vector>

#include "mtfa/common.hpp"
#include "mtfa/grid.hpp"

namespace mtfa {

struct Signal {
  Grid1 g;
  std::vector<cplx> v;

  Signal() = default;
  explicit Signal(const Grid1& grid) : g(grid), v(grid.count, cplx(0.0)) {}
  Signal(const Grid1& grid, std::vector<cplx> vals) : g(grid), v(std::move(vals)) {
    if (static_cast<int>(v.size()) != g.count)
      throw validation_error("signal: value count does not match grid");
  }
};

// Analytic signal models; closures let transforms and oracles evaluate
// off-grid points exactly.
using Generator = std::function<cplx(double)>;

Generator gen_lfm();                       // exp(2*pi*i*(x + x^2/2))
Generator gen_gauss_lfm();                 // exp(-(x+1)^2/8) * exp(2*pi*i*x^2)
Generator gen_cexp();                      // exp(pi*i*x)
Generator gen_gauss(double alpha = kPi);   // exp(-alpha*x^2)
// exp(-alpha*(x-x0)^2) * exp(2*pi*i*(beta*x + 0.5*gamma*x^2))
Generator gen_gauss_chirp(double alpha, double x0, double beta, double gamma);

inline Signal sample(const Generator& f, const Grid1& g) {
  Signal s(g);
  for (int i = 0; i < g.count; ++i) s.v[i] = f(g.value(i));
  return s;
}

// Additive circular complex white noise at the given SNR (dB relative
// to the mean sample power). +infinity returns the signal unchanged.
Signal add_awgn(const Signal& f, double snr_db, uint64_t seed, uint64_t stream = 0);

struct Metrics {
  double mse;
  double psnr_db;
};

// MSE is the mean squared complex deviation; PSNR averages the real and
// imaginary part ratios peak^2 / part-MSE in dB.
Metrics metrics(const Signal& est, const Signal& ref);

void write_signal_csv(const std::string& path, const Signal& s);
Signal read_signal_csv(const std::string& path);

}  // namespace mtfa
