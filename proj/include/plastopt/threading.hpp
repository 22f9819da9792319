#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif

namespace plastopt {

// Parallel kernels honor this; the serial path is kept as the reference
// implementation and both must produce bit-identical results.
enum class ExecMode { serial, parallel };

ExecMode exec_mode();
void set_exec_mode(ExecMode mode);

inline int num_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_num_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace plastopt
