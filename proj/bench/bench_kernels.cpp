// Serial reference vs OpenMP for the per-step kernels of each solver.

#include "warpflow/csf.hpp"
#include "warpflow/mcf_sym.hpp"
#include "warpflow/neckpinch.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace warpflow;

namespace {

Exec exec_of(const benchmark::State& st) { return st.range(1) ? Exec::Parallel : Exec::Serial; }

void label(benchmark::State& st) { st.SetLabel(st.range(1) ? "parallel" : "serial"); }

void BM_curve_geometry(benchmark::State& st) {
    const auto w = WarpingFunction::power_beta(0.5);
    const auto c = graph_curve(static_cast<int>(st.range(0)), [](double t) { return -3.0 + 0.2 * std::sin(t); });
    for (auto _ : st) benchmark::DoNotOptimize(curve_geometry(c, w, exec_of(st)));
    label(st);
}

void BM_step_graph(benchmark::State& st) {
    const auto w = WarpingFunction::power_beta(0.5);
    const auto c = graph_curve(static_cast<int>(st.range(0)), [](double t) { return -3.0 + 0.2 * std::sin(t); });
    const double dt = stable_dt(c, w, 0.4);
    for (auto _ : st) benchmark::DoNotOptimize(step_graph(c, w, dt, exec_of(st)));
    label(st);
}

void BM_step_lagrangian(benchmark::State& st) {
    const auto w = WarpingFunction::power_beta(0.5);
    const auto c = graph_curve(static_cast<int>(st.range(0)), [](double t) { return -3.0 + 0.2 * std::sin(t); },
                               CurveMode::Lagrangian);
    const double dt = stable_dt(c, w, 0.4);
    for (auto _ : st) benchmark::DoNotOptimize(step_lagrangian(c, w, dt, false, exec_of(st)));
    label(st);
}

void BM_mean_curvature(benchmark::State& st) {
    const auto w = WarpingFunction::power_beta(0.25);
    const auto s = symmetric_graph(ModelM::flat_torus(2), static_cast<int>(st.range(0)),
                                   [](double x) { return -5.0 + 0.1 * std::sin(x); });
    for (auto _ : st) benchmark::DoNotOptimize(mean_curvature(s, w, exec_of(st)));
    label(st);
}

void BM_step_sym(benchmark::State& st) {
    const auto w = WarpingFunction::power_beta(0.25);
    const auto s = symmetric_graph(ModelM::round_sphere(2), static_cast<int>(st.range(0)),
                                   [](double x) { return -5.0 + 0.1 * std::cos(x); });
    const double dt = sym_stable_dt(s, w, 0.4);
    for (auto _ : st) benchmark::DoNotOptimize(step_sym(s, w, dt, exec_of(st)));
    label(st);
}

void BM_step_profile(benchmark::State& st) {
    const auto p = build_initial(BumpConfig{2, 0.05, 2.0 * std::sqrt(2.0), 5.0 * std::sqrt(2.0)},
                                 static_cast<int>(st.range(0)));
    const double dt = profile_stable_dt(p, 0.2);
    for (auto _ : st) benchmark::DoNotOptimize(step_profile(p, dt, exec_of(st)));
    label(st);
}

void sizes(benchmark::internal::Benchmark* b) {
    for (long n : {256, 1024, 4096, 16384})
        for (long par : {0, 1}) b->Args({n, par});
}

} // namespace

BENCHMARK(BM_curve_geometry)->Apply(sizes);
BENCHMARK(BM_step_graph)->Apply(sizes);
BENCHMARK(BM_step_lagrangian)->Apply(sizes);
BENCHMARK(BM_mean_curvature)->Apply(sizes);
BENCHMARK(BM_step_sym)->Apply(sizes);
BENCHMARK(BM_step_profile)->Apply(sizes);

BENCHMARK_MAIN();
