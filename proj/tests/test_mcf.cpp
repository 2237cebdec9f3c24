#include "doctest.h"
#include "oracles.hpp"

#include "warpflow/errors.hpp"
#include "warpflow/mcf_sym.hpp"
#include "warpflow/parallel.hpp"

#include <cmath>

using namespace warpflow;

TEST_SUITE("mcf") {

// r(z) = z over the unit round S^2 is Euclidean R^3 in polar coordinates.
TEST_CASE("Euclidean sphere: curvatures 1/R and radius sqrt(R^2 - 4t)") {
    const auto w = WarpingFunction::linear();
    const auto s = symmetric_graph(ModelM::round_sphere(2), 64, [](double) { return 2.0; });
    const auto d = mean_curvature(s, w, Exec::Serial);
    for (std::size_t j = 0; j < s.size(); ++j) {
        CHECK(d.kappa1[j] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(d.kappa2[j] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(d.H[j] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(d.A_norm2[j] == doctest::Approx(0.5).epsilon(1e-12));
    }
    McfConfig cfg;
    cfg.t_end = 0.5;
    cfg.cadence = 0.25;
    const auto run = run_mcf(s, w, cfg);
    for (double z : run.final_state.zs) CHECK(z == doctest::Approx(std::sqrt(4.0 - 2.0)).epsilon(1e-9));
}

TEST_CASE("Euclidean surface of revolution: principal curvatures converge at second order") {
    const auto w = WarpingFunction::linear();
    auto err = [&](int N) {
        const auto s = symmetric_graph(ModelM::round_sphere(2), N, [](double p) { return 1.0 + 0.1 * std::cos(p); });
        const auto d = mean_curvature(s, w, Exec::Serial);
        double e = 0.0;
        for (std::size_t j = 0; j < s.size(); ++j) {
            const double p = s.xs[j];
            const double rho = 1.0 + 0.1 * std::cos(p), d1 = -0.1 * std::sin(p), d2 = -0.1 * std::cos(p);
            const double k1 = oracle::polar_curvature(rho, d1, d2);
            // profile (rho sin p, rho cos p) rotated about the polar axis: k2 = N_x / x
            const double nx = (rho * std::sin(p) - d1 * std::cos(p)) / std::hypot(rho, d1);
            const double k2 = nx / (rho * std::sin(p));
            e = std::max({e, std::abs(d.kappa1[j] - k1), std::abs(d.kappa2[j] - k2)});
        }
        return e;
    };
    const double e1 = err(64), e2 = err(128);
    CHECK(e1 < 1e-2);
    CHECK(std::log2(e1 / e2) > 1.7);
}

TEST_CASE("constant graph over a flat torus follows the parallel ODE") {
    const auto w = WarpingFunction::power_beta(0.25);
    McfConfig cfg;
    cfg.t_end = 1.0;
    cfg.cadence = 0.5;
    const auto run = run_mcf(symmetric_graph(ModelM::flat_torus(2), 32, [](double) { return -5.0; }), w, cfg);
    const double stop[] = {1.0};
    const auto tr = integrate(w, 2, -5.0, 1.0, 1e-12, stop);
    for (double z : run.final_state.zs) CHECK(std::abs(z - sample_at(tr, 1.0)) < 1e-6);
}

TEST_CASE("certified run over a flat torus: mu nondecreasing") {
    const auto w = WarpingFunction::power_beta(0.25);
    McfConfig cfg;
    cfg.alpha = 2.0;
    cfg.t_end = 2.0;
    cfg.cadence = 0.5;
    const auto run =
        run_certified(symmetric_graph(ModelM::flat_torus(2), 64, [](double x) { return -5.0 + 0.1 * std::sin(x); }), w, cfg);
    CHECK(run.conditions.c2_margin >= 0.0);
    CHECK(run.min_mu_step_change >= -1e-8);
    for (std::size_t i = 1; i < run.rows.size(); ++i) CHECK(run.rows[i].mu >= run.rows[i - 1].mu - 1e-8);
}

TEST_CASE("certified run rejects its hypotheses failing") {
    const auto s = symmetric_graph(ModelM::flat_torus(2), 64, [](double x) { return -5.0 + 0.1 * std::sin(x); });
    McfConfig cfg;
    cfg.alpha = 1.0;
    CHECK_THROWS_AS(run_certified(s, WarpingFunction::power_beta(0.25), cfg), ConfigError);
    // beta = 1/2 has r r'' - (1 + alpha) r'^2 < 0 for alpha > 1 / beta
    cfg.alpha = 3.0;
    CHECK_THROWS_AS(run_certified(s, WarpingFunction::power_beta(0.5), cfg), HypothesisError);
    // steep initial graph: min Theta_0 below alpha^(-1/2)
    cfg.alpha = 2.0;
    const auto steep = symmetric_graph(ModelM::flat_torus(2), 64, [](double x) { return -5.0 + 3.0 * std::sin(x); });
    CHECK_THROWS_AS(run_certified(steep, WarpingFunction::power_beta(0.25), cfg), InitialConditionError);
}

TEST_CASE("Ricci of M on the normal") {
    CHECK(ricci_M_normal(ModelM::flat_torus(2), 0.3) == 0.0);
    CHECK(ricci_M_normal(ModelM::round_sphere(3), 0.3) == 2.0);
    CHECK(ricci_M_normal(ModelM::round_sphere(3), 1.0) == 0.0);
}

}
