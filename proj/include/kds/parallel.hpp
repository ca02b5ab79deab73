#pragma once

#include <cstddef>
#include <exception>

namespace kds {

/// Runs body(k) for k in [0, n), in parallel when OpenMP is enabled. Each
/// index writes only its own outputs, so results do not depend on the thread
/// count. The exception of the lowest failing index is rethrown afterwards.
template <class F>
void parallel_for(std::size_t n, const F& body) {
  std::exception_ptr first;
  std::size_t first_index = n;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(n); ++k) {
    try {
      body(static_cast<std::size_t>(k));
    } catch (...) {
#pragma omp critical(kds_parallel_for)
      if (static_cast<std::size_t>(k) < first_index) {
        first_index = static_cast<std::size_t>(k);
        first = std::current_exception();
      }
    }
  }
  if (first) std::rethrow_exception(first);
}

}  // namespace kds
