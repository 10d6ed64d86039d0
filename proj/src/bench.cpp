#include "mtfa/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

#include "mtfa/fft.hpp"

namespace mtfa {

namespace {

struct MethodRow {
  BenchMethod m;
  const char* name;
};

constexpr MethodRow kMethodRows[] = {
    {BenchMethod::MargenauHill, "margenau-hill"},
    {BenchMethod::KirkwoodRihaczek, "kirkwood-rihaczek"},
    {BenchMethod::BornJordan, "born-jordan"},
    {BenchMethod::Page, "page"},
    {BenchMethod::Wiener, "wiener"},
    {BenchMethod::AdaptiveCd, "adaptive-cd"},
    {BenchMethod::AdaptiveMwdCd, "adaptive-mwd-cd"},
    {BenchMethod::AdaptiveGmcCd, "adaptive-gmc-cd"},
    {BenchMethod::AdaptiveCmcd, "adaptive-cmcd"},
};

// u lattice conjugate to the time grid under the spread parameter b:
// du * dt * n = |b|, zero node at index n / 2. Makes the final transform
// stage of the distribution exactly invertible and tiles its alias period.
Grid1 conjugate_ugrid(const Grid1& tgrid, double b) {
  double du = std::abs(b) / (tgrid.step * tgrid.count);
  return make_grid(-(tgrid.count / 2) * du, du, tgrid.count);
}

KernelKind fixed_kernel(BenchMethod m) {
  switch (m) {
    case BenchMethod::MargenauHill: return KernelKind::MargenauHill;
    case BenchMethod::KirkwoodRihaczek: return KernelKind::KirkwoodRihaczek;
    case BenchMethod::BornJordan: return KernelKind::BornJordan;
    case BenchMethod::Page: return KernelKind::Page;
    default: throw validation_error("bench: not a fixed-kernel method");
  }
}

bool uses_example_domain(BenchMethod m) {
  return m == BenchMethod::AdaptiveMwdCd || m == BenchMethod::AdaptiveCmcd;
}

bool uses_example_triple(BenchMethod m) {
  return m == BenchMethod::AdaptiveGmcCd || m == BenchMethod::AdaptiveCmcd;
}

bool is_adaptive(BenchMethod m) {
  return m == BenchMethod::AdaptiveCd || m == BenchMethod::AdaptiveMwdCd ||
         m == BenchMethod::AdaptiveGmcCd || m == BenchMethod::AdaptiveCmcd;
}

// Smooth the classical Wigner field with the named kernel, then read the
// result back as if it were a Wigner field. The smoothing bias is the
// price of these baselines; comparing against it is the point.
Signal kernel_denoise(const Signal& noisy, KernelKind kind, ExecPolicy pol) {
  KernelSpec spec{kind, 1.0, 0.5, {}};
  Grid1 ug = conjugate_ugrid(noisy.g, 1.0);
  Field2 W = classical_wd_to(noisy, ug, pol);
  Field2 Pi = make_pi(spec, W.g);
  Field2 Ws = convolve(W, Pi, GmcTriple::all_fourier(), ConvMethod::Direct, pol);
  return wd_invert(Ws);
}

// Oracle per-bin Wiener shrinkage on the discrete Fourier lattice. The
// clean spectrum is known; the noise power follows the same convention
// the noise generator uses (mean sample power scaled by the SNR).
Signal wiener_denoise(const Signal& noisy, const Signal& clean, double snr_db) {
  if (std::isinf(snr_db) && snr_db > 0) return noisy;
  const Grid1& g = clean.g;
  const int n = g.count;
  Grid1 gf = fft_conjugate(g);
  std::vector<cplx> fc = cdft(clean.v, g, gf, -1);
  std::vector<cplx> fn = cdft(noisy.v, g, gf, -1);
  double power = 0.0;
  for (const cplx& z : clean.v) power += std::norm(z);
  power /= std::max(n, 1);
  // unweighted transform: white noise of variance s^2 carries n s^2 per bin
  double nvar = n * power * std::pow(10.0, -snr_db / 10.0);
  for (int k = 0; k < n; ++k) {
    double s = std::norm(fc[k]);
    fn[k] *= s / (s + nvar);
  }
  std::vector<cplx> back = cdft(fn, gf, g, +1);
  Signal out(g);
  for (int i = 0; i < n; ++i) out.v[i] = back[i] / double(n);
  return out;
}

}  // namespace

const char* method_name(BenchMethod m) {
  for (const MethodRow& r : kMethodRows)
    if (r.m == m) return r.name;
  throw validation_error("bench: unknown method enum");
}

BenchMethod method_from_name(const std::string& name) {
  for (const MethodRow& r : kMethodRows)
    if (name == r.name) return r.m;
  throw validation_error("bench: unknown method: " + name);
}

const std::vector<BenchMethod>& all_methods() {
  static const std::vector<BenchMethod> v = [] {
    std::vector<BenchMethod> m;
    for (const MethodRow& r : kMethodRows) m.push_back(r.m);
    return m;
  }();
  return v;
}

ExampleConfig example_config(int id) {
  switch (id) {
    case 1: {
      const double rows[4][4] = {{-5, 0, 1, 0},
                                 {0, 5, 0, 1},
                                 {0, 0, -0.2, 0},
                                 {0, 0, 0, 0.2}};
      SpMat m4 = sp4(rows);
      SpMat m1 = sp2(0, 1, -1, 2);
      return ExampleConfig{1,
                           "lfm",
                           gen_lfm(),
                           make_grid(-5.0, 1.0 / 30.0, 300),
                           sp_fourier(1),
                           m1,
                           m1,
                           sp_pi(1),
                           GmcTriple(m4, m4, m4)};
    }
    case 2: {
      const double rows[4][4] = {{1, 0, 4, 0},
                                 {0, 1, 0, 1},
                                 {1, 0, 5, 0},
                                 {0, 1, 0, 2}};
      SpMat m4 = sp4(rows);
      SpMat m1 = sp2(0, 1, -1, 2.5);
      return ExampleConfig{2,
                           "gauss-lfm",
                           gen_gauss_lfm(),
                           make_grid(-5.0, 0.02, 500),
                           sp_fourier(1),
                           m1,
                           m1,
                           sp_pi(1),
                           GmcTriple(m4, m4, m4)};
    }
    case 3: {
      const double rows[4][4] = {{0, 0, 1, 0},
                                 {0, 3, 0, -2},
                                 {-1, 0, 2, 0},
                                 {0, -1, 0, 1}};
      SpMat m4 = sp4(rows);
      return ExampleConfig{3,
                           "cexp",
                           gen_cexp(),
                           make_grid(-5.0, 0.02, 500),
                           sp2(0, 10.0 / 21.0, -2.1, 10.0 / 7.0),
                           sp_fourier(1),
                           sp_fourier(1),
                           sp_pi(1),
                           GmcTriple(m4, m4, m4)};
    }
    default:
      throw validation_error("bench: example id must be 1, 2 or 3");
  }
}

AdaptiveDomain make_domain(const MWDConfig& mwd, const Signal& clean, ExecPolicy pol) {
  if (std::abs(mwd.M.b()) <= 1e-12)
    throw validation_error("bench domain: distribution matrix needs b != 0");
  Grid1 ug = conjugate_ugrid(clean.g, mwd.M.b());
  Field2 wt = mwd_to(clean, mwd, clean.g, ug, true, pol);
  auto inv = std::make_shared<const MwdInverter>(mwd, clean.g, ug);
  return AdaptiveDomain{mwd, clean.g, ug, std::move(wt), std::move(inv)};
}

Signal adaptive_denoise(const Signal& noisy, const AdaptiveDomain& dom,
                        const GmcTriple& t, double eps, ExecPolicy pol) {
  Field2 wobs = mwd_to(noisy, dom.mwd, dom.tgrid, dom.ugrid, true, pol);
  FilterDesign d = design_lsaf(wobs, dom.w_target, t, eps, pol);
  Field2 west = apply_filter(wobs, d, t, ConvMethod::Spectral, pol);
  return dom.inverter->invert(west, pol);
}

Signal denoise(BenchMethod m, const Signal& noisy, const Signal& clean,
               const ExampleConfig& ex, double snr_db, double eps, ExecPolicy pol) {
  if (!(noisy.g == clean.g))
    throw validation_error("bench: noisy and clean grids differ");
  switch (m) {
    case BenchMethod::MargenauHill:
    case BenchMethod::KirkwoodRihaczek:
    case BenchMethod::BornJordan:
    case BenchMethod::Page:
      return kernel_denoise(noisy, fixed_kernel(m), pol);
    case BenchMethod::Wiener:
      return wiener_denoise(noisy, clean, snr_db);
    default: {
      MWDConfig cfg = uses_example_domain(m)
                          ? MWDConfig(ex.M, ex.M1, ex.M2, ex.M3)
                          : MWDConfig::classical();
      GmcTriple t = uses_example_triple(m) ? ex.gmc : GmcTriple::all_fourier();
      AdaptiveDomain dom = make_domain(cfg, clean, pol);
      return adaptive_denoise(noisy, dom, t, eps, pol);
    }
  }
}

Signal align_to(const Signal& est, const Signal& ref) {
  if (!(est.g == ref.g)) throw validation_error("align: grid mismatch");
  cplx c = align_phase(ref.v, est.v);
  Signal out = est;
  for (cplx& z : out.v) z *= c;
  return out;
}

std::vector<BenchmarkRecord> run_example(int id, const std::vector<double>& snr_db,
                                         int trials, uint64_t seed,
                                         const std::vector<BenchMethod>& methods,
                                         ExecPolicy pol) {
  if (snr_db.empty()) throw validation_error("bench: empty snr list");
  if (trials < 1) throw validation_error("bench: trials must be >= 1");
  if (methods.empty()) throw validation_error("bench: empty method list");

  ExampleConfig ex = example_config(id);
  Signal clean = sample(ex.gen, ex.grid);

  bool need_classical = false, need_example = false;
  for (BenchMethod m : methods) {
    if (m == BenchMethod::AdaptiveCd || m == BenchMethod::AdaptiveGmcCd)
      need_classical = true;
    if (uses_example_domain(m)) need_example = true;
  }
  std::unique_ptr<AdaptiveDomain> dom_classical, dom_example;
  if (need_classical)
    dom_classical = std::make_unique<AdaptiveDomain>(
        make_domain(MWDConfig::classical(), clean, pol));
  if (need_example)
    dom_example = std::make_unique<AdaptiveDomain>(
        make_domain(MWDConfig(ex.M, ex.M1, ex.M2, ex.M3), clean, pol));

  struct Acc {
    double mse = 0.0;
    double psnr = 0.0;
  };
  std::vector<Acc> acc(methods.size() * snr_db.size());

  for (size_t si = 0; si < snr_db.size(); ++si) {
    for (int tr = 0; tr < trials; ++tr) {
      // one draw per (snr, trial), shared by every method; the stream is
      // the trial index so SNR points reuse scaled copies of one draw
      Signal noisy = add_awgn(clean, snr_db[si], seed, uint64_t(tr));
      for (size_t mi = 0; mi < methods.size(); ++mi) {
        BenchMethod m = methods[mi];
        Signal est;
        try {
          if (is_adaptive(m)) {
            const AdaptiveDomain& dom =
                uses_example_domain(m) ? *dom_example : *dom_classical;
            GmcTriple t = uses_example_triple(m) ? ex.gmc : GmcTriple::all_fourier();
            est = adaptive_denoise(noisy, dom, t, 1e-2, pol);
          } else if (m == BenchMethod::Wiener) {
            est = wiener_denoise(noisy, clean, snr_db[si]);
          } else {
            est = kernel_denoise(noisy, fixed_kernel(m), pol);
          }
        } catch (const std::exception& e) {
          char ctx[160];
          std::snprintf(ctx, sizeof ctx, "bench: %s failed at snr=%g trial=%d: ",
                        method_name(m), snr_db[si], tr);
          throw numerical_error(ctx + std::string(e.what()));
        }
        Metrics mm = metrics(align_to(est, clean), clean);
        Acc& a = acc[mi * snr_db.size() + si];
        a.mse += mm.mse;
        a.psnr += mm.psnr_db;
      }
    }
  }

  std::vector<BenchmarkRecord> out;
  out.reserve(acc.size());
  for (size_t mi = 0; mi < methods.size(); ++mi) {
    for (size_t si = 0; si < snr_db.size(); ++si) {
      const Acc& a = acc[mi * snr_db.size() + si];
      BenchmarkRecord r;
      r.example = id;
      r.method = method_name(methods[mi]);
      r.snr_db = snr_db[si];
      r.trials = trials;
      r.log10_mse = std::log10(std::max(a.mse / trials, 1e-300));
      r.psnr_db = a.psnr / trials;
      r.seed = seed;
      out.push_back(std::move(r));
    }
  }
  return out;
}

void write_bench_csv(const std::string& path,
                     const std::vector<BenchmarkRecord>& records) {
  if (records.empty()) throw validation_error("bench csv: no records");
  std::ofstream out(path);
  if (!out) throw validation_error("cannot open for writing: " + path);
  out << "example,method,snr_db,trials,log10_mse,psnr_db,seed\n";
  char line[256];
  for (const BenchmarkRecord& r : records) {
    std::snprintf(line, sizeof line, "%d,%s,%.10g,%d,%.10g,%.10g,%llu\n",
                  r.example, r.method.c_str(), r.snr_db, r.trials, r.log10_mse,
                  r.psnr_db, static_cast<unsigned long long>(r.seed));
    out << line;
  }
  if (!out) throw validation_error("write failed: " + path);
}

namespace {

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> pts;
};

std::vector<Series> collect_series(const std::vector<BenchmarkRecord>& recs,
                                   bool psnr) {
  std::vector<Series> out;
  for (const BenchmarkRecord& r : recs) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const Series& s) { return s.name == r.method; });
    if (it == out.end()) {
      out.push_back({r.method, {}});
      it = out.end() - 1;
    }
    double y = psnr ? r.psnr_db : r.log10_mse;
    if (std::isfinite(y)) it->pts.emplace_back(r.snr_db, y);
  }
  out.erase(std::remove_if(out.begin(), out.end(),
                           [](const Series& s) { return s.pts.empty(); }),
            out.end());
  return out;
}

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22"};

void svg_panel(std::ostream& os, double ox, const char* title,
               const char* ylabel, const std::vector<Series>& series) {
  const double w = 440, h = 330, ml = 64, mt = 36, mr = 14, mb = 42;
  const double pw = w - ml - mr, ph = h - mt - mb;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  bool first = true;
  for (const Series& s : series)
    for (auto [x, y] : s.pts) {
      if (first) {
        x0 = x1 = x;
        y0 = y1 = y;
        first = false;
      }
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  if (x1 - x0 < 1e-12) {
    x0 -= 1.0;
    x1 += 1.0;
  }
  if (y1 - y0 < 1e-12) {
    y0 -= 1.0;
    y1 += 1.0;
  }
  double ypad = 0.06 * (y1 - y0);
  y0 -= ypad;
  y1 += ypad;

  auto px = [&](double x) { return ox + ml + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return mt + (1.0 - (y - y0) / (y1 - y0)) * ph; };
  char buf[256];

  std::snprintf(buf, sizeof buf,
                "<rect x=\"%.6g\" y=\"%.6g\" width=\"%.6g\" height=\"%.6g\" "
                "fill=\"none\" stroke=\"#444\"/>\n",
                ox + ml, mt, pw, ph);
  os << buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.6g\" y=\"%.6g\" font-size=\"14\" "
                "text-anchor=\"middle\">%s</text>\n",
                ox + ml + pw / 2, mt - 12.0, title);
  os << buf;

  for (int k = 0; k < 5; ++k) {
    double fx = x0 + (x1 - x0) * k / 4.0;
    double fy = y0 + (y1 - y0) * k / 4.0;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.6g\" y1=\"%.6g\" x2=\"%.6g\" y2=\"%.6g\" "
                  "stroke=\"#ccc\" stroke-dasharray=\"3,3\"/>\n",
                  px(fx), mt, px(fx), mt + ph);
    os << buf;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.6g\" y1=\"%.6g\" x2=\"%.6g\" y2=\"%.6g\" "
                  "stroke=\"#ccc\" stroke-dasharray=\"3,3\"/>\n",
                  ox + ml, py(fy), ox + ml + pw, py(fy));
    os << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.6g\" y=\"%.6g\" font-size=\"11\" "
                  "text-anchor=\"middle\">%.4g</text>\n",
                  px(fx), mt + ph + 16.0, fx);
    os << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.6g\" y=\"%.6g\" font-size=\"11\" "
                  "text-anchor=\"end\">%.4g</text>\n",
                  ox + ml - 6.0, py(fy) + 4.0, fy);
    os << buf;
  }
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.6g\" y=\"%.6g\" font-size=\"12\" "
                "text-anchor=\"middle\">SNR (dB)</text>\n",
                ox + ml + pw / 2, mt + ph + 34.0);
  os << buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.6g\" y=\"%.6g\" font-size=\"12\" "
                "text-anchor=\"middle\" transform=\"rotate(-90 %.6g %.6g)\">%s</text>\n",
                ox + 16.0, mt + ph / 2, ox + 16.0, mt + ph / 2, ylabel);
  os << buf;

  for (size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % 9];
    os << "<polyline fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"1.6\" points=\"";
    for (auto [x, y] : series[i].pts) {
      std::snprintf(buf, sizeof buf, "%.6g,%.6g ", px(x), py(y));
      os << buf;
    }
    os << "\"/>\n";
    for (auto [x, y] : series[i].pts) {
      std::snprintf(buf, sizeof buf,
                    "<circle cx=\"%.6g\" cy=\"%.6g\" r=\"2.4\" fill=\"%s\"/>\n",
                    px(x), py(y), color);
      os << buf;
    }
  }
}

}  // namespace

void write_bench_svg(const std::string& path,
                     const std::vector<BenchmarkRecord>& records) {
  if (records.empty()) throw validation_error("bench svg: no records");
  std::vector<Series> mse = collect_series(records, false);
  std::vector<Series> psnr = collect_series(records, true);

  std::ofstream out(path);
  if (!out) throw validation_error("cannot open for writing: " + path);
  const double legend_w = 190;
  const double width = 2 * 440 + 24 + legend_w, height = 360;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.6g\" "
                "height=\"%.6g\" font-family=\"sans-serif\">\n",
                width, height);
  out << buf;
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg_panel(out, 0.0, "log10 MSE vs SNR", "log10 MSE", mse);
  svg_panel(out, 440.0 + 24.0, "PSNR vs SNR", "PSNR (dB)", psnr);

  // shared legend keyed by the MSE panel order
  double lx = 2 * 440 + 48, ly = 48;
  for (size_t i = 0; i < mse.size(); ++i) {
    const char* color = kPalette[i % 9];
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.6g\" y1=\"%.6g\" x2=\"%.6g\" y2=\"%.6g\" "
                  "stroke=\"%s\" stroke-width=\"2.4\"/>\n",
                  lx, ly + 26.0 * i, lx + 26.0, ly + 26.0 * i, color);
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.6g\" y=\"%.6g\" font-size=\"12\">%s</text>\n",
                  lx + 32.0, ly + 26.0 * i + 4.0, mse[i].name.c_str());
    out << buf;
  }
  out << "</svg>\n";
  if (!out) throw validation_error("write failed: " + path);
}

}  // namespace mtfa
