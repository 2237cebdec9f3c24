#pragma once

// Node loops run either serially (the reference path, used by the tests) or
// through OpenMP. Both paths perform identical per-index arithmetic, so their
// results agree bit for bit.

#include <cstddef>
#include <limits>

namespace warpflow {

enum class Exec { Serial, Parallel };

// Below this size the OpenMP fork costs more than the loop body.
inline constexpr std::ptrdiff_t kParallelThreshold = 256;

template <class F>
void for_each_index(Exec exec, std::ptrdiff_t n, F&& f) {
    if (exec == Exec::Serial) {
        for (std::ptrdiff_t i = 0; i < n; ++i) f(i);
        return;
    }
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
    for (std::ptrdiff_t i = 0; i < n; ++i) f(i);
}

// Max reduction. The result is independent of the schedule because max is exact.
template <class F>
double max_over(Exec exec, std::ptrdiff_t n, F&& f) {
    double m = -std::numeric_limits<double>::infinity();
    if (exec == Exec::Serial) {
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            const double v = f(i);
            if (v > m) m = v;
        }
        return m;
    }
#pragma omp parallel for schedule(static) reduction(max : m) if (n >= kParallelThreshold)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const double v = f(i);
        if (v > m) m = v;
    }
    return m;
}

} // namespace warpflow
