#pragma once
// Denoising benchmark: three worked example configurations, nine filtering
// methods, SNR sweeps with common random numbers, CSV/SVG emission.
//
// The four fixed-kernel methods smooth the classical Wigner field of the
// observation with a named kernel and invert the result as if it were a
// Wigner field. The oracle Wiener method shrinks each frequency bin by the
// true signal-to-total power ratio. The four adaptive methods design a
// least-squares filter in one distribution domain against the clean
// reference and invert through that domain; they differ only in which
// matrices shape the domain:
//   adaptive-cd       classical distribution, plain convolution
//   adaptive-mwd-cd   example window/coordinate matrices, plain convolution
//   adaptive-gmc-cd   classical distribution, example convolution triple
//   adaptive-cmcd     example matrices throughout

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mtfa/cohen.hpp"
#include "mtfa/lsfilter.hpp"

namespace mtfa {

enum class BenchMethod {
  MargenauHill,
  KirkwoodRihaczek,
  BornJordan,
  Page,
  Wiener,
  AdaptiveCd,
  AdaptiveMwdCd,
  AdaptiveGmcCd,
  AdaptiveCmcd,
};

const char* method_name(BenchMethod m);
BenchMethod method_from_name(const std::string& name);
const std::vector<BenchMethod>& all_methods();

struct ExampleConfig {
  int id;
  std::string signal;  // generator name: lfm, gauss-lfm, cexp
  Generator gen;
  Grid1 grid;
  SpMat M, M1, M2, M3;
  GmcTriple gmc;
};

// The three published configurations: 1 is the chirp at 30 Hz over
// [-5, 5), 2 and 3 sample at 50 Hz.
ExampleConfig example_config(int id);

struct BenchmarkRecord {
  int example = 1;
  std::string method;
  double snr_db = 0.0;
  int trials = 0;
  double log10_mse = 0.0;  // log10 of the trial-mean signal MSE
  double psnr_db = 0.0;    // trial-mean PSNR
  uint64_t seed = 0;
};

// Cached per-domain machinery for the adaptive methods: the distribution
// of the clean reference and the inverter of the domain map. The u axis
// is the lattice conjugate to the time grid under the distribution
// matrix, which makes the final transform stage exactly invertible.
struct AdaptiveDomain {
  MWDConfig mwd;
  Grid1 tgrid, ugrid;
  Field2 w_target;
  std::shared_ptr<const MwdInverter> inverter;
};

AdaptiveDomain make_domain(const MWDConfig& mwd, const Signal& clean,
                           ExecPolicy pol = ExecPolicy::Parallel);

// Observe in the domain, least-squares match the clean reference under
// the convolution triple, invert the filtered field back to a signal.
Signal adaptive_denoise(const Signal& noisy, const AdaptiveDomain& dom,
                        const GmcTriple& t, double eps = 1e-2,
                        ExecPolicy pol = ExecPolicy::Parallel);

// One-shot dispatch over all nine methods. snr_db is only read by the
// Wiener oracle (noise power); eps only by the adaptive methods.
// Adaptive methods rebuild their domain on every call; sweeps should use
// make_domain + adaptive_denoise to share it across trials.
Signal denoise(BenchMethod m, const Signal& noisy, const Signal& clean,
               const ExampleConfig& ex, double snr_db, double eps = 1e-2,
               ExecPolicy pol = ExecPolicy::Parallel);

// Multiply by the unimodular constant best aligning est to ref. Inversion
// from a bilinear distribution loses the global phase, so every method is
// scored after this alignment.
Signal align_to(const Signal& est, const Signal& ref);

// Full sweep: per (snr, trial) one noisy draw (noise stream = trial index,
// shared by every method and every SNR point), per method one estimate,
// metrics aggregated over trials. Records are grouped by method in the
// given order, SNR points in the given order. Per-trial failures abort
// the sweep; the error names the method, SNR and trial.
std::vector<BenchmarkRecord> run_example(int id, const std::vector<double>& snr_db,
                                         int trials, uint64_t seed,
                                         const std::vector<BenchMethod>& methods,
                                         ExecPolicy pol = ExecPolicy::Parallel);

// Header: example,method,snr_db,trials,log10_mse,psnr_db,seed
void write_bench_csv(const std::string& path,
                     const std::vector<BenchmarkRecord>& records);

// Two line charts (log10 MSE and PSNR against SNR), one polyline per
// method, inline legend. Self-contained SVG.
void write_bench_svg(const std::string& path,
                     const std::vector<BenchmarkRecord>& records);

}  // namespace mtfa
