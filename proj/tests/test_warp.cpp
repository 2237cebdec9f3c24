#include "doctest.h"
#include "oracles.hpp"

#include "warpflow/errors.hpp"
#include "warpflow/warp.hpp"

#include <cmath>
#include <random>

using namespace warpflow;

TEST_SUITE("warp") {

TEST_CASE("derivatives match finite differences of the value") {
    const std::vector<std::pair<WarpingFunction, double>> cases = {
        {WarpingFunction::power_beta(0.5), -3.0},  {WarpingFunction::power_beta(0.25, -2.0), -7.5},
        {WarpingFunction::exp_sqrt_k(2.0), 0.4},   {WarpingFunction::cos_sqrt_k(2.0), 0.3},
        {WarpingFunction::linear(), 2.0},          {WarpingFunction::exp_neg_z_squared(), -0.7},
        {WarpingFunction::double_exp(), 0.5},
    };
    for (const auto& [w, z] : cases) {
        CAPTURE(w.name());
        const double h = 1e-3;
        const auto d = w.eval(z, 2);
        const double fd1 = (w.value(z + h) - w.value(z - h)) / (2 * h);
        const double fd2 = (w.value(z + h) - 2 * w.value(z) + w.value(z - h)) / (h * h);
        CHECK(d[0] == doctest::Approx(w.value(z)).epsilon(1e-14));
        CHECK(d[1] == doctest::Approx(fd1).epsilon(1e-5));
        CHECK(d[2] == doctest::Approx(fd2).epsilon(1e-5));
        CHECK(w.ratio(z, 1) == doctest::Approx(d[1] / d[0]).epsilon(1e-13));
    }
}

TEST_CASE("constant-curvature models against the finite-difference Gauss curvature") {
    struct Case {
        WarpingFunction w;
        double K;
        double lo, hi;
    };
    const std::vector<Case> cases = {
        {WarpingFunction::linear(), 0.0, 0.1, 10.0},
        {WarpingFunction::exp_sqrt_k(2.0), -2.0, -5.0, 5.0},
        {WarpingFunction::cos_sqrt_k(2.0), 2.0, -1.0, 1.0},
    };
    std::mt19937_64 rng(7);
    for (const auto& c : cases) {
        std::uniform_real_distribution<double> U(c.lo, c.hi);
        for (int i = 0; i < 100; ++i) {
            const double z = U(rng);
            CHECK(std::abs(gauss_curvature(c.w, z) - c.K) <= 1e-12);
            CHECK(oracle::gauss_fd([&](double s) { return c.w.value(s); }, z) ==
                  doctest::Approx(c.K).epsilon(1e-5).scale(1.0));
        }
    }
}

TEST_CASE("gauss curvature of the beta family equals -r''/r by differencing") {
    const auto w = WarpingFunction::power_beta(0.5);
    for (double z : {-50.0, -10.0, -2.0, -1.1}) {
        const double fd = oracle::gauss_fd([&](double s) { return w.value(s); }, z, 1e-4);
        CHECK(gauss_curvature(w, z) == doctest::Approx(fd).epsilon(1e-5).scale(1e-3));
    }
}

TEST_CASE("ambient Ricci against a finite-difference Christoffel computation") {
    const auto w = WarpingFunction::power_beta(0.5);
    SUBCASE("flat torus, n = 2") {
        // coordinates (x1, x2, z), g = diag(r^2, r^2, 1)
        oracle::DiagMetric g = [&](const oracle::Point& p) {
            const double r = w.value(p[2]);
            return std::array<double, 3>{r * r, r * r, 1.0};
        };
        for (double z : {-4.0, -2.0, -1.5}) {
            const oracle::Point x{0.3, 1.1, z};
            const auto ric = ambient_ricci(w, 2, z, AmbientModel::Flat);
            const double r = w.value(z);
            CHECK(ric.ric_tangent == doctest::Approx(oracle::ricci(g, x, 0, 0) / (r * r)).epsilon(1e-5));
            CHECK(ric.ric_z == doctest::Approx(oracle::ricci(g, x, 2, 2)).epsilon(1e-5));
            CHECK(std::abs(oracle::ricci(g, x, 0, 2)) < 1e-6);
        }
    }
    SUBCASE("round sphere, n = 2") {
        // coordinates (phi, psi, z), g = diag(r^2, r^2 sin^2 phi, 1)
        oracle::DiagMetric g = [&](const oracle::Point& p) {
            const double r = w.value(p[2]);
            const double s = std::sin(p[0]);
            return std::array<double, 3>{r * r, r * r * s * s, 1.0};
        };
        for (double z : {-4.0, -2.0}) {
            const oracle::Point x{1.0, 0.4, z};
            const auto ric = ambient_ricci(w, 2, z, AmbientModel::RoundSphere);
            const double r = w.value(z);
            CHECK(ric.ric_tangent == doctest::Approx(oracle::ricci(g, x, 0, 0) / (r * r)).epsilon(1e-5));
            CHECK(ric.ric_z == doctest::Approx(oracle::ricci(g, x, 2, 2)).epsilon(1e-5));
        }
    }
}

TEST_CASE("beta family convexity margin has the sign of beta (1 - beta)") {
    const auto grid = linspace(-99.999, -1.001, 2001);
    for (double beta : {0.25, 0.5, 1.0, 2.0}) {
        const auto rep = check_conditions(WarpingFunction::power_beta(beta), grid, 1.0, 0.0);
        CAPTURE(beta);
        CHECK(rep.c1_holds);
        if (beta <= 1.0)
            CHECK(rep.rr2_margin >= 0.0);
        else
            CHECK(rep.rr2_margin < 0.0);
        // r r'' - 2 r'^2 = beta (1 - beta) (-z)^(-2 beta - 2), smallest in magnitude at z = -100
        const double z = -99.999;
        const double expect = beta * (1 - beta) * std::pow(-z, -2 * beta - 2);
        if (beta < 1.0) CHECK(rep.rr2_margin == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("check_conditions reports the sup of r'/r and rejects alpha < 1") {
    const auto w = WarpingFunction::power_beta(0.5);
    const auto grid = linspace(-10.0, -2.0, 81);
    const auto rep = check_conditions(w, grid, 3.0, 0.0);
    CHECK(rep.sup_log_deriv == doctest::Approx(0.25).epsilon(1e-14));
    // r r'' - (1 + alpha) r'^2 = (3/4 - (1 + alpha)/4) r^2 / z^2, negative for alpha > 2
    CHECK(rep.c2_margin < 0.0);
    CHECK(check_conditions(w, grid, 1.5, 0.0).c2_margin > 0.0);
    CHECK_THROWS_AS(check_conditions(w, grid, 0.5, 0.0), PreconditionError);
}

TEST_CASE("log-derivative gap equals the bound exactly for beta = 1") {
    const auto w = WarpingFunction::power_beta(1.0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-100.0, -1.0);
    for (int i = 0; i < 200; ++i) {
        double z1 = U(rng), z2 = U(rng);
        if (z2 > z1) std::swap(z1, z2);
        if (z1 == z2) continue;
        const auto g = log_derivative_gap(w, 1.0, z1, z2);
        // w(z) = 1/(-z): w(z2) - w(z1) = (z2 - z1)/(z1 z2) = -(z1 - z2) w(z1) w(z2)
        const double by_hand = (z2 - z1) / (z1 * z2);
        CHECK(g.lhs == doctest::Approx(by_hand).epsilon(1e-13));
        CHECK(std::abs(g.lhs - g.rhs) <= 1e-12 * std::max(1.0, std::abs(by_hand)));
        CHECK(g.holds);
    }
}

TEST_CASE("log-derivative gap rejects a violated convexity hypothesis") {
    CHECK_THROWS_AS(log_derivative_gap(WarpingFunction::power_beta(2.0), 1.0, -2.0, -5.0), HypothesisError);
    CHECK_THROWS_AS(log_derivative_gap(WarpingFunction::power_beta(0.5), 1.0, -5.0, -2.0), PreconditionError);
    CHECK_THROWS_AS(log_derivative_gap(WarpingFunction::power_beta(0.5), 1.0, 0.5, -2.0), DomainError);
}

TEST_CASE("domain checks") {
    const auto w = WarpingFunction::power_beta(0.5);
    CHECK(w.upper() == -1.0);
    CHECK_THROWS_AS(w.value(-0.5), DomainError);
    CHECK_THROWS_AS(WarpingFunction::cos_sqrt_k(1.0).value(2.0), DomainError);
    CHECK(WarpingFunction::cos_sqrt_k(4.0).upper() == doctest::Approx(M_PI / 4));
}

}
