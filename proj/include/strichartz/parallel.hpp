#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace strichartz {

/// Runs fn(i) for i in [begin, end). Each index must write only its own
/// outputs; results are then independent of the thread count.
template <class F>
void parallel_for(std::ptrdiff_t begin, std::ptrdiff_t end, F&& fn) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = begin; i < end; ++i) fn(i);
#else
  for (std::ptrdiff_t i = begin; i < end; ++i) fn(i);
#endif
}

inline void set_thread_count(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

inline int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace strichartz
