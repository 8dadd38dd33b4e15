#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace odd {

// Data-parallel kernels (Gram entries, per-example losses, Monte Carlo shards,
// per-example-class gradients) run through parallel_for. Every kernel writes
// disjoint output slots and performs the same per-slot arithmetic in both
// modes, so serial and OpenMP execution produce bit-identical results. The
// serial path is the reference the tests and the benchmark compare against.

bool parallel_enabled();
void set_parallel_enabled(bool on);
int parallel_threads();

template <typename F>
void parallel_for(std::size_t n, F&& body) {
    if (n == 0) return;
#ifdef _OPENMP
    if (parallel_enabled() && n > 1) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < static_cast<long long>(n); ++i) {
            body(static_cast<std::size_t>(i));
        }
        return;
    }
#endif
    for (std::size_t i = 0; i < n; ++i) body(i);
}

}  // namespace odd
