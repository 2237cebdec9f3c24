#include "doctest.h"

#include "warpflow/csf.hpp"
#include "warpflow/mcf_sym.hpp"
#include "warpflow/neckpinch.hpp"

#include <omp.h>

#include <cmath>

using namespace warpflow;

// The OpenMP kernels must reproduce the serial reference bit for bit.
TEST_SUITE("exec") {

TEST_CASE("curve kernels: serial and parallel agree exactly") {
    omp_set_num_threads(4);
    const auto w = WarpingFunction::power_beta(0.5);
    for (CurveMode mode : {CurveMode::Graph, CurveMode::Lagrangian}) {
        const auto c = graph_curve(1024, [](double t) { return -3.0 + 0.2 * std::sin(t) + 0.05 * std::cos(5 * t); }, mode);
        const auto gs = curve_geometry(c, w, Exec::Serial);
        const auto gp = curve_geometry(c, w, Exec::Parallel);
        CHECK(gs.kappa == gp.kappa);
        CHECK(gs.a == gp.a);
        const auto ds = diagnostics(c, w, 3, Exec::Serial);
        const auto dp = diagnostics(c, w, 3, Exec::Parallel);
        CHECK(ds.ds_kappa == dp.ds_kappa);
        CHECK(ds.extremes.g_max == dp.extremes.g_max);
        const double dt = stable_dt(c, w, 0.4);
        const auto ss = mode == CurveMode::Graph ? step_graph(c, w, dt, Exec::Serial)
                                                 : step_lagrangian(c, w, dt, true, Exec::Serial);
        const auto sp = mode == CurveMode::Graph ? step_graph(c, w, dt, Exec::Parallel)
                                                 : step_lagrangian(c, w, dt, true, Exec::Parallel);
        CHECK(ss.zs == sp.zs);
        CHECK(ss.thetas == sp.thetas);
    }
}

TEST_CASE("symmetric graph kernels: serial and parallel agree exactly") {
    omp_set_num_threads(4);
    const auto w = WarpingFunction::power_beta(0.25);
    for (const auto& model : {ModelM::flat_torus(2), ModelM::round_sphere(3)}) {
        const auto s = symmetric_graph(model, 1024, [](double x) { return -5.0 + 0.1 * std::cos(x); });
        const auto a = mean_curvature(s, w, Exec::Serial);
        const auto b = mean_curvature(s, w, Exec::Parallel);
        CHECK(a.H == b.H);
        CHECK(a.g_frak == b.g_frak);
        CHECK(a.nablaA_norm2 == b.nablaA_norm2);
        const double dt = sym_stable_dt(s, w, 0.4);
        CHECK(step_sym(s, w, dt, Exec::Serial).zs == step_sym(s, w, dt, Exec::Parallel).zs);
    }
}

TEST_CASE("profile kernels: serial and parallel agree exactly") {
    omp_set_num_threads(4);
    const auto p = build_initial(BumpConfig{2, 0.05, 2.0 * std::sqrt(2.0), 5.0 * std::sqrt(2.0)}, 800);
    const auto a = profile_geometry(p, Exec::Serial);
    const auto b = profile_geometry(p, Exec::Parallel);
    CHECK(a.H == b.H);
    CHECK(a.theta == b.theta);
    const double dt = profile_stable_dt(p, 0.2);
    const auto s = step_profile(p, dt, Exec::Serial);
    const auto q = step_profile(p, dt, Exec::Parallel);
    CHECK(s.xs == q.xs);
    CHECK(s.us == q.us);
}

TEST_CASE("whole runs: serial and parallel agree exactly") {
    omp_set_num_threads(4);
    const auto w = WarpingFunction::power_beta(0.5);
    CsfConfig cfg;
    cfg.t_end = 0.05;
    cfg.cadence = 0.025;
    const auto c = graph_curve(512, [](double t) { return -3.0 + 0.2 * std::sin(t); });
    cfg.exec = Exec::Serial;
    const auto a = run_csf(c, w, cfg);
    cfg.exec = Exec::Parallel;
    const auto b = run_csf(c, w, cfg);
    CHECK(a.final_state.zs == b.final_state.zs);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) CHECK(a.rows[i].kappa_max == b.rows[i].kappa_max);
}

}
