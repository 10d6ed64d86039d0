#include "mtfa/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace mtfa {
namespace {

// FFTW plan creation is not thread safe; execution on distinct buffers is.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

using PlanKey = std::tuple<int, int, int, int>;  // nx, ny (0 for 1-D), sign, rank

fftw_plan get_plan(int nx, int ny, int sign) {
  static std::map<PlanKey, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(plan_mutex());
  PlanKey key{nx, ny, sign, ny > 0 ? 2 : 1};
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  size_t n = static_cast<size_t>(nx) * (ny > 0 ? ny : 1);
  fftw_complex* scratch = fftw_alloc_complex(n);
  fftw_plan p = ny > 0 ? fftw_plan_dft_2d(nx, ny, scratch, scratch, sign,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED)
                       : fftw_plan_dft_1d(nx, scratch, scratch, sign,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(scratch);
  if (!p) throw numerical_error("fft: plan creation failed");
  cache.emplace(key, p);
  return p;
}

inline fftw_complex* fc(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

namespace fft {

void transform(cplx* data, int n, int sign) {
  fftw_plan p = get_plan(n, 0, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD);
  fftw_execute_dft(p, fc(data), fc(data));
}

void transform2d(cplx* data, int nx, int ny, int sign) {
  fftw_plan p = get_plan(nx, ny, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD);
  fftw_execute_dft(p, fc(data), fc(data));
}

void rows(cplx* data, int nrows, int n, int sign) {
  fftw_plan p = get_plan(n, 0, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD);
  for (int r = 0; r < nrows; ++r) fftw_execute_dft(p, fc(data + static_cast<size_t>(r) * n), fc(data + static_cast<size_t>(r) * n));
}

}  // namespace fft

namespace {

// Conjugate-grid fast path: nu spacing 1/(n dx), equal counts.
std::vector<cplx> cdft_fast(const std::vector<cplx>& f, const Grid1& gin,
                            const Grid1& gout, int sign) {
  const int n = gin.count;
  const double s = sign;
  std::vector<cplx> buf(n);
  for (int j = 0; j < n; ++j)
    buf[j] = f[j] * unit_phase(s * 2.0 * kPi * j * gin.step * gout.start);
  fft::transform(buf.data(), n, sign);
  for (int k = 0; k < n; ++k)
    buf[k] *= unit_phase(s * 2.0 * kPi * gin.start * gout.value(k));
  return buf;
}

struct BluesteinKey {
  int nin, nout, sign;
  double dxdnu;
  bool operator<(const BluesteinKey& o) const {
    return std::tie(nin, nout, sign, dxdnu) < std::tie(o.nin, o.nout, o.sign, o.dxdnu);
  }
};

struct BluesteinCtx {
  int pad = 0;
  std::vector<cplx> chirp;      // exp(i*phi*m^2) for |m| < max(nin, nout)
  std::vector<cplx> kernel_ft;  // FFT of exp(-i*phi*m^2) laid out circularly
};

const BluesteinCtx& bluestein_ctx(const BluesteinKey& key) {
  static std::map<BluesteinKey, BluesteinCtx> cache;
  static std::mutex m;
  std::lock_guard<std::mutex> lock(m);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  BluesteinCtx ctx;
  int need = key.nin + key.nout - 1;
  int pad = 1;
  while (pad < need) pad <<= 1;
  ctx.pad = pad;
  double phi = key.sign * kPi * key.dxdnu;
  int mmax = std::max(key.nin, key.nout);
  ctx.chirp.resize(mmax);
  for (int m = 0; m < mmax; ++m) ctx.chirp[m] = unit_phase(phi * double(m) * double(m));
  ctx.kernel_ft.assign(pad, 0.0);
  for (int m = -(key.nin - 1); m <= key.nout - 1; ++m) {
    int idx = (m % pad + pad) % pad;
    ctx.kernel_ft[idx] = std::conj(ctx.chirp[std::abs(m)]);
  }
  fft::transform(ctx.kernel_ft.data(), pad, -1);
  return cache.emplace(key, std::move(ctx)).first->second;
}

std::vector<cplx> cdft_bluestein(const std::vector<cplx>& f, const Grid1& gin,
                                 const Grid1& gout, int sign) {
  const int nin = gin.count, nout = gout.count;
  const double s = sign;
  BluesteinKey key{nin, nout, sign, gin.step * gout.step};
  const BluesteinCtx& ctx = bluestein_ctx(key);

  std::vector<cplx> a(ctx.pad, 0.0);
  for (int j = 0; j < nin; ++j)
    a[j] = f[j] * unit_phase(s * 2.0 * kPi * j * gin.step * gout.start) * ctx.chirp[j];
  fft::transform(a.data(), ctx.pad, -1);
  for (int m = 0; m < ctx.pad; ++m) a[m] *= ctx.kernel_ft[m];
  fft::transform(a.data(), ctx.pad, +1);

  std::vector<cplx> out(nout);
  const double inv = 1.0 / ctx.pad;
  for (int k = 0; k < nout; ++k)
    out[k] = a[k] * ctx.chirp[k] * inv *
             unit_phase(s * 2.0 * kPi * gin.start * gout.value(k));
  return out;
}

}  // namespace

std::vector<cplx> cdft(const std::vector<cplx>& f, const Grid1& gin,
                       const Grid1& gout, int sign) {
  if (static_cast<int>(f.size()) != gin.count)
    throw validation_error("cdft: sample count does not match grid");
  if (sign != 1 && sign != -1) throw validation_error("cdft: sign must be +1 or -1");
  double ratio = gin.step * gout.step * gin.count;
  if (gout.count == gin.count && std::abs(ratio - 1.0) < 1e-9)
    return cdft_fast(f, gin, gout, sign);
  return cdft_bluestein(f, gin, gout, sign);
}

std::vector<cplx> cdft2(const std::vector<cplx>& f, const Grid2& gin,
                        const Grid2& gout, int sign) {
  const int n1 = gin.x.count, n2 = gin.u.count;
  const int m1 = gout.x.count, m2 = gout.u.count;
  if (f.size() != gin.size())
    throw validation_error("cdft2: sample count does not match grid");
  std::vector<cplx> mid(static_cast<size_t>(n1) * m2);
  for (int i = 0; i < n1; ++i) {
    std::vector<cplx> row(f.begin() + static_cast<size_t>(i) * n2,
                          f.begin() + static_cast<size_t>(i + 1) * n2);
    std::vector<cplx> t = cdft(row, gin.u, gout.u, sign);
    std::copy(t.begin(), t.end(), mid.begin() + static_cast<size_t>(i) * m2);
  }
  std::vector<cplx> out(static_cast<size_t>(m1) * m2);
  std::vector<cplx> col(n1);
  for (int j = 0; j < m2; ++j) {
    for (int i = 0; i < n1; ++i) col[i] = mid[static_cast<size_t>(i) * m2 + j];
    std::vector<cplx> t = cdft(col, gin.x, gout.x, sign);
    for (int i = 0; i < m1; ++i) out[static_cast<size_t>(i) * m2 + j] = t[i];
  }
  return out;
}

}  // namespace mtfa
