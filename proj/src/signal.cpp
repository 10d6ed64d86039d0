#include "mtfa/signal.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "mtfa/rng.hpp"

namespace mtfa {

Generator gen_lfm() {
  return [](double x) { return unit_phase(2.0 * kPi * (x + 0.5 * x * x)); };
}

Generator gen_gauss_lfm() {
  return [](double x) {
    return std::exp(-(x + 1.0) * (x + 1.0) / 8.0) * unit_phase(2.0 * kPi * x * x);
  };
}

Generator gen_cexp() {
  return [](double x) { return unit_phase(kPi * x); };
}

Generator gen_gauss(double alpha) {
  return [alpha](double x) { return cplx(std::exp(-alpha * x * x), 0.0); };
}

Generator gen_gauss_chirp(double alpha, double x0, double beta, double gamma) {
  return [=](double x) {
    double d = x - x0;
    return std::exp(-alpha * d * d) * unit_phase(2.0 * kPi * (beta * x + 0.5 * gamma * x * x));
  };
}

Signal add_awgn(const Signal& f, double snr_db, uint64_t seed, uint64_t stream) {
  if (std::isinf(snr_db) && snr_db > 0) return f;
  double power = 0.0;
  for (const cplx& z : f.v) power += std::norm(z);
  power /= std::max<size_t>(f.v.size(), 1);
  if (power <= 0.0) throw numerical_error("add_awgn: zero signal has no SNR scale");
  double sigma = std::sqrt(power * std::pow(10.0, -snr_db / 10.0));
  Signal out = f;
  for (size_t i = 0; i < out.v.size(); ++i)
    out.v[i] += sigma * cgauss(seed, stream, i);
  return out;
}

Metrics metrics(const Signal& est, const Signal& ref) {
  if (!(est.g == ref.g)) throw validation_error("metrics: grid mismatch");
  const double inf = std::numeric_limits<double>::infinity();
  double mse = 0.0, mse_re = 0.0, mse_im = 0.0, peak_re = 0.0, peak_im = 0.0;
  for (int i = 0; i < ref.g.count; ++i) {
    cplx d = est.v[i] - ref.v[i];
    mse += std::norm(d);
    mse_re += sqr(d.real());
    mse_im += sqr(d.imag());
    peak_re = std::max(peak_re, std::abs(ref.v[i].real()));
    peak_im = std::max(peak_im, std::abs(ref.v[i].imag()));
  }
  int n = std::max(ref.g.count, 1);
  mse /= n;
  mse_re /= n;
  mse_im /= n;

  auto part_psnr = [&](double peak, double m) {
    return m > 0.0 ? 10.0 * std::log10(peak * peak / m) : inf;
  };
  double p_re = part_psnr(peak_re, mse_re);
  double p_im = part_psnr(peak_im, mse_im);
  double psnr;
  if (peak_re == 0.0 && peak_im == 0.0)
    psnr = mse > 0.0 ? -inf : inf;
  else if (peak_re == 0.0)
    psnr = p_im;
  else if (peak_im == 0.0)
    psnr = p_re;
  else if (std::isinf(p_re) || std::isinf(p_im))
    psnr = inf;
  else
    psnr = 0.5 * (p_re + p_im);
  return {mse, psnr};
}

void write_signal_csv(const std::string& path, const Signal& s) {
  std::ofstream out(path);
  if (!out) throw validation_error("cannot open for writing: " + path);
  out << "t,re,im\n";
  char line[128];
  for (int i = 0; i < s.g.count; ++i) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", s.g.value(i),
                  s.v[i].real(), s.v[i].imag());
    out << line;
  }
}

Signal read_signal_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open: " + path);
  std::vector<double> ts;
  std::vector<cplx> vs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string a, b, c;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c))
      throw validation_error("signal csv: malformed line: " + line);
    try {
      double t = std::stod(a), re = std::stod(b), im = std::stod(c);
      ts.push_back(t);
      vs.emplace_back(re, im);
    } catch (const std::exception&) {
      if (ts.empty()) continue;  // header row
      throw validation_error("signal csv: malformed line: " + line);
    }
  }
  if (ts.size() < 2) throw validation_error("signal csv: need at least two samples");
  double step = ts[1] - ts[0];
  for (size_t i = 1; i < ts.size(); ++i)
    if (std::abs(ts[i] - ts[i - 1] - step) > 1e-6 * std::abs(step))
      throw validation_error("signal csv: nonuniform time axis");
  return Signal(make_grid(ts[0], step, static_cast<int>(ts.size())), std::move(vs));
}

}  // namespace mtfa
