#include "doctest.h"

#include "warpflow/errors.hpp"
#include "warpflow/parallel.hpp"

#include <cmath>

using namespace warpflow;

TEST_SUITE("parallel") {

TEST_CASE("r = exp(-z^2): z(t) = z0 e^(2t)") {
    const auto w = WarpingFunction::exp_neg_z_squared();
    std::vector<double> stops;
    for (int i = 1; i <= 20; ++i) stops.push_back(0.05 * i);
    const auto tr = integrate(w, 1, -1.0, 1.0, 1e-10, stops);
    CHECK(tr.terminal == Terminal::ReachedTEnd);
    for (double t : stops) CHECK(std::abs(sample_at(tr, t) + std::exp(2 * t)) < 1e-8);
}

TEST_CASE("r = exp(-e^-z): z(t) = log(e^z0 - t) and exit at t = e^z0") {
    const auto w = WarpingFunction::double_exp();
    for (double z0 : {0.0, 0.5, -1.0}) {
        CAPTURE(z0);
        const double tex = std::exp(z0);
        CHECK(exit_time_quadrature(w, 1, z0) == doctest::Approx(tex).epsilon(1e-10));
        const double stop[] = {0.45 * tex, 0.9 * tex};
        const auto tr = integrate(w, 1, z0, 0.9 * tex, 1e-10, stop);
        for (double t : stop) CHECK(std::abs(sample_at(tr, t) - std::log(tex - t)) < 1e-8);
    }
}

TEST_CASE("dimension scales time: n slices move n times as fast") {
    const auto w = WarpingFunction::exp_neg_z_squared();
    const double s1[] = {0.3};
    const double s2[] = {0.15};
    const auto a = integrate(w, 1, -0.5, 0.3, 1e-12, s1);
    const auto b = integrate(w, 2, -0.5, 0.15, 1e-12, s2);
    CHECK(sample_at(a, 0.3) == doctest::Approx(sample_at(b, 0.15)).epsilon(1e-10));
}

TEST_CASE("trajectory leaving the domain reports the exit") {
    const auto w = WarpingFunction::double_exp();
    const auto tr = integrate(w, 1, 0.0, 2.0, 1e-10);
    CHECK(tr.terminal == Terminal::ExitedDomain);
    CHECK(tr.t_exit == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("beta family drifts to -infinity without exiting in finite time") {
    const auto w = WarpingFunction::power_beta(0.5);
    // dz/dt = -1/(2(-z)): (-z)^2 grows linearly, z(t) = -sqrt(z0^2 + t)
    const double stop[] = {10.0};
    const auto tr = integrate(w, 1, -2.0, 10.0, 1e-11, stop);
    CHECK(sample_at(tr, 10.0) == doctest::Approx(-std::sqrt(14.0)).epsilon(1e-9));
    CHECK(std::isinf(exit_time_quadrature(w, 1, -2.0)));
}

TEST_CASE("contraction gap for two beta = 1/2 slices, against the explicit solution") {
    const auto w = WarpingFunction::power_beta(0.5);
    const auto g = contraction_gap(w, 1, 2.0, -2.0, -3.0, 5.0);
    // z(t) = -sqrt(z0^2 + t): z1(5) = -3, z2(5) = -sqrt(14)
    const double z2 = -std::sqrt(14.0);
    CHECK(g.gap == doctest::Approx(std::sqrt(14.0) - 3.0).epsilon(1e-9));
    // (r(z2(t)) / r(z2(0)))^alpha with r = (-z)^(-1/2), alpha = 2
    CHECK(g.bound == doctest::Approx(3.0 / -z2).epsilon(1e-9));
    CHECK(g.holds);
    CHECK_THROWS_AS(contraction_gap(WarpingFunction::power_beta(2.0), 1, 1.0, -2.0, -3.0, 1.0), HypothesisError);
}

TEST_CASE("sample_at rejects times that were not recorded") {
    const auto w = WarpingFunction::exp_neg_z_squared();
    const auto tr = integrate(w, 1, -1.0, 0.5, 1e-10);
    CHECK_THROWS(sample_at(tr, 0.123));
}

}
