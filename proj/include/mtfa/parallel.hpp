#pragma once
// Execution policy for the quadrature kernels. Parallel uses OpenMP when
// compiled in; MTFA_THREADS caps the thread count.

#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mtfa {

enum class ExecPolicy { Serial, Parallel };

inline int thread_count(ExecPolicy pol) {
#ifdef _OPENMP
  if (pol == ExecPolicy::Serial) return 1;
  static int cap = [] {
    const char* env = std::getenv("MTFA_THREADS");
    int n = omp_get_max_threads();
    if (env) {
      int want = std::atoi(env);
      if (want >= 1 && want < n) n = want;
    }
    return n;
  }();
  return cap;
#else
  (void)pol;
  return 1;
#endif
}

}  // namespace mtfa
