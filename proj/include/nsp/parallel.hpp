#pragma once

#include <cstddef>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nsp {

// Worker count for slab/pencil loops. Every parallel loop in the library
// writes disjoint outputs and never reduces across iterations, so results do
// not depend on this value.
inline int& thread_count_storage() {
  static int n = 0;
  return n;
}

inline int hardware_threads() {
#ifdef _OPENMP
  return omp_get_num_procs();
#else
  return 1;
#endif
}

inline void set_threads(int n) {
  if (n < 1) n = hardware_threads();
  thread_count_storage() = n;
#ifdef _OPENMP
  omp_set_num_threads(n);
#endif
}

inline int threads() {
  if (thread_count_storage() == 0) set_threads(hardware_threads());
  return thread_count_storage();
}

/// Thread count from NSP_THREADS, or 0 when unset/invalid.
inline int threads_from_env() {
  const char* s = std::getenv("NSP_THREADS");
  if (!s) return 0;
  try {
    int n = std::stoi(s);
    return n > 0 ? n : 0;
  } catch (...) {
    return 0;
  }
}

template <class F>
void parallel_for(std::size_t n, F&& body) {
#ifdef _OPENMP
  const int nt = threads();
  if (nt > 1 && n > 1) {
    const long long nn = static_cast<long long>(n);
#pragma omp parallel for schedule(static) num_threads(nt)
    for (long long i = 0; i < nn; ++i) body(static_cast<std::size_t>(i));
    return;
  }
#endif
  for (std::size_t i = 0; i < n; ++i) body(i);
}

}  // namespace nsp
