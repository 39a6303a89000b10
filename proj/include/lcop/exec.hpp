#pragma once

#include <cstdint>

namespace lcop {

// Execution lane for data-parallel loops. Every parallel loop writes one
// disjoint slot per index and reduces serially afterwards, so both lanes
// produce bit-identical results; the serial lane is the reference the
// parallel lane is tested against.
enum class Exec { serial, parallel };

template <class F>
void parallel_for(Exec exec, std::int64_t n, F&& fn) {
#ifdef _OPENMP
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
#endif
  for (std::int64_t i = 0; i < n; ++i) fn(i);
}

}  // namespace lcop
