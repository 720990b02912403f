#pragma once

#include <cstdint>
#include <exception>
#include <mutex>

#include <omp.h>

namespace etatest::detail {

/// Runs body(i) for i in [0, count) on an OpenMP team. Exceptions are caught
/// per iteration and the one from the lowest index is rethrown afterwards,
/// so failures do not depend on scheduling.
template <typename Body>
void parallel_for(std::int64_t count, int threads, Body&& body) {
  const int workers = threads > 0 ? threads : omp_get_max_threads();
  std::mutex guard;
  std::int64_t failed_at = count;
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 32) num_threads(workers)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      body(i);
    } catch (...) {
      std::lock_guard lock(guard);
      if (i < failed_at) {
        failed_at = i;
        failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace etatest::detail
