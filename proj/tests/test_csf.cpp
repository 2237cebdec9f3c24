#include "doctest.h"
#include "oracles.hpp"

#include "warpflow/csf.hpp"
#include "warpflow/errors.hpp"
#include "warpflow/parallel.hpp"

#include <cmath>

using namespace warpflow;

TEST_SUITE("csf") {

TEST_CASE("flat model: circle z = R has curvature 1/R and Theta = 1") {
    const auto w = WarpingFunction::linear();
    for (double R : {0.5, 1.0, 3.0}) {
        const auto c = graph_curve(64, [&](double) { return R; });
        const auto g = curve_geometry(c, w, Exec::Serial);
        for (std::size_t j = 0; j < c.size(); ++j) {
            CHECK(g.kappa[j] == doctest::Approx(1.0 / R).epsilon(1e-12));
            CHECK(g.a[j] == doctest::Approx(1.0).epsilon(1e-14));
        }
    }
}

TEST_CASE("flat model: polar graph curvature converges at second order to the Euclidean formula") {
    const auto w = WarpingFunction::linear();
    auto err = [&](int N) {
        const auto c = graph_curve(N, [](double t) { return 1.0 + 0.1 * std::sin(t); });
        const auto g = curve_geometry(c, w, Exec::Serial);
        double e = 0.0;
        for (std::size_t j = 0; j < c.size(); ++j) {
            const double t = c.thetas[j];
            const double k = oracle::polar_curvature(1.0 + 0.1 * std::sin(t), 0.1 * std::cos(t), -0.1 * std::sin(t));
            e = std::max(e, std::abs(g.kappa[j] - k));
        }
        return e;
    };
    const double e1 = err(64), e2 = err(128), e3 = err(256);
    CHECK(e1 < 1e-3);
    CHECK(std::log2(e1 / e2) > 1.8);
    CHECK(std::log2(e2 / e3) > 1.8);
}

TEST_CASE("flat model: shrinking circle follows sqrt(R^2 - 2t) in both modes") {
    const auto w = WarpingFunction::linear();
    for (CurveMode mode : {CurveMode::Graph, CurveMode::Lagrangian}) {
        CsfConfig cfg;
        cfg.mode = mode;
        cfg.t_end = 0.2;
        cfg.cadence = 0.1;
        const auto s = run_csf(graph_curve(64, [](double) { return 1.0; }, mode), w, cfg);
        CHECK(s.stop == StopReason::ReachedTEnd);
        // Heun leaves an O(dt^2) error, about 2e-9 here
        for (double z : s.final_state.zs) CHECK(std::abs(z - std::sqrt(1.0 - 0.4)) < 1e-7);
    }
}

TEST_CASE("constant graph moves as the parallel slice") {
    const auto w = WarpingFunction::power_beta(0.5);
    CsfConfig cfg;
    cfg.t_end = 1.0;
    cfg.cadence = 0.5;
    const auto s = run_csf(graph_curve(32, [](double) { return -3.0; }), w, cfg);
    const double stop[] = {1.0};
    const auto tr = integrate(w, 1, -3.0, 1.0, 1e-12, stop);
    for (double z : s.final_state.zs) CHECK(std::abs(z - sample_at(tr, 1.0)) < 1e-6);
    // z(t) = -sqrt(z0^2 + t) by hand
    CHECK(sample_at(tr, 1.0) == doctest::Approx(-std::sqrt(10.0)).epsilon(1e-10));
}

TEST_CASE("arclength derivatives of a sampled sine") {
    const int N = 256;
    const double h = 2 * M_PI / N;
    std::vector<double> f(N), ds(N, h);
    for (int j = 0; j < N; ++j) f[j] = std::sin(j * h);
    const auto d1 = d_s(f, ds, Exec::Serial);
    const auto d2 = d_ss(f, ds, Exec::Serial);
    for (int j = 0; j < N; ++j) {
        CHECK(d1[j] == doctest::Approx(std::cos(j * h)).epsilon(1e-3).scale(1.0));
        CHECK(d2[j] == doctest::Approx(-std::sin(j * h)).epsilon(1e-3).scale(1.0));
    }
}

TEST_CASE("perturbed graph in the beta = 1/2 family stays a graph and v_max does not grow") {
    const auto w = WarpingFunction::power_beta(0.5);
    CsfConfig cfg;
    cfg.t_end = 2.0;
    cfg.cadence = 0.25;
    cfg.m_max = 2;
    const auto s = run_csf(graph_curve(64, [](double t) { return -3.0 + 0.2 * std::sin(t); }), w, cfg);
    CHECK(s.stop == StopReason::ReachedTEnd);
    for (std::size_t i = 1; i < s.rows.size(); ++i) {
        CHECK(s.rows[i].theta_min > 0.0);
        CHECK(s.rows[i].v_max <= s.rows[i - 1].v_max + 1e-12);
    }
}

TEST_CASE("z_stop ends the run") {
    const auto w = WarpingFunction::power_beta(0.5);
    CsfConfig cfg;
    cfg.t_end = 100.0;
    cfg.cadence = 0.5;
    cfg.z_stop = -3.5;
    const auto s = run_csf(graph_curve(32, [](double) { return -3.0; }), w, cfg);
    CHECK(s.stop == StopReason::ReachedZStop);
    // slice reaches -3.5 at t = 3.5^2 - 9
    CHECK(s.final_state.t == doctest::Approx(3.25).epsilon(0.2));
}

TEST_CASE("oversized step is rejected") {
    const auto w = WarpingFunction::power_beta(0.5);
    const auto c = graph_curve(64, [](double) { return -3.0; }, CurveMode::Lagrangian);
    CHECK_THROWS_AS(step_lagrangian(c, w, 10 * stable_dt(c, w, kMaxCfl)), StepTooLarge);
}

TEST_CASE("Hausdorff distance") {
    const auto w = WarpingFunction::linear();
    const auto a = graph_curve(128, [](double) { return 1.0; });
    const auto b = graph_curve(128, [](double) { return 1.01; });
    CHECK(hausdorff_distance(a, a, w) == 0.0);
    CHECK(hausdorff_distance(a, b, w) == doctest::Approx(0.01).epsilon(1e-3));
}

}
