#include "doctest.h"

#include "warpflow/errors.hpp"
#include "warpflow/neckpinch.hpp"

#include <cmath>

using namespace warpflow;

namespace {

// Euclidean Theta = <P / |P|, N> at each node, from centred differences of the nodes.
std::vector<double> euclidean_theta(const ProfileState& p) {
    const auto g = profile_geometry(p, Exec::Serial);
    std::vector<double> th(p.size());
    for (std::size_t j = 0; j < p.size(); ++j) {
        const double r = std::hypot(p.xs[j], p.us[j]);
        th[j] = (p.xs[j] * g.nx[j] + p.us[j] * g.ny[j]) / r;
    }
    return th;
}

} // namespace

TEST_SUITE("neckpinch") {

TEST_CASE("round sphere: curvature, mean curvature, |A| and Theta") {
    for (int n : {2, 3}) {
        const auto p = sphere_profile(n, 0.0, 2.0, 256);
        const auto g = profile_geometry(p, Exec::Serial);
        for (std::size_t j = 0; j < p.size(); ++j) {
            CAPTURE(j);
            CHECK(g.kappa[j] == doctest::Approx(0.5).epsilon(1e-3));
            CHECK(g.H[j] == doctest::Approx(n / 2.0).epsilon(1e-3));
            CHECK(g.A[j] == doctest::Approx(std::sqrt(double(n)) / 2.0).epsilon(1e-3));
            CHECK(g.theta[j] == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("warped and Euclidean angle functions agree node by node") {
    const ProfileState cases[] = {
        sphere_profile(2, 0.3, 1.0, 200),
        build_initial(BumpConfig{2, 0.05, 2.0 * std::sqrt(2.0), 5.0 * std::sqrt(2.0)}, 400),
        build_initial(BumpConfig{3, 0.1, 1.0, 2.0}, 300),
    };
    for (const auto& p : cases) {
        const auto a = angle_function_warped(p);
        const auto b = euclidean_theta(p);
        const auto g = profile_geometry(p, Exec::Serial);
        for (std::size_t j = 0; j < p.size(); ++j) {
            CHECK(std::abs(a[j] - b[j]) <= 1e-10);
            CHECK(std::abs(g.theta[j] - b[j]) <= 1e-10);
        }
    }
}

TEST_CASE("off-centre sphere: min Theta = sqrt(1 - c^2 / R^2)") {
    const auto p = sphere_profile(2, 0.3, 1.0, 512);
    CHECK(angle_min(p) == doctest::Approx(std::sqrt(0.91)).epsilon(1e-4));
    // a sphere that does not enclose the origin is not a radial graph
    CHECK(angle_min(sphere_profile(2, 2.0, 1.0, 128)) < 0.0);
}

TEST_CASE("shrinking sphere follows sqrt(R^2 - 2 n t)") {
    NeckConfig cfg;
    cfg.N = 128;
    cfg.horizon = 0.05;
    cfg.cadence = 0.025;
    cfg.exec = Exec::Serial;
    const auto s = run_profile(sphere_profile(2, 0.0, 1.0, 128), 1.0, cfg);
    CHECK(s.stop == NeckStop::ReachedHorizon);
    CHECK(s.inconclusive);
    const double R = std::sqrt(1.0 - 4.0 * 0.05);
    for (std::size_t j = 0; j < s.final_state.size(); ++j)
        CHECK(std::hypot(s.final_state.xs[j], s.final_state.us[j]) == doctest::Approx(R).epsilon(1e-4));
}

TEST_CASE("bump profile eta") {
    const BumpConfig b{2, 0.05, 1.0, 3.0};
    CHECK(eta(b, 0.0) == 3.0);
    CHECK(eta(b, 0.05) == 3.0);
    CHECK(eta(b, 0.1) == 1.0);
    CHECK(eta(b, 0.5) == 1.0);
    for (double y : {0.06, 0.075, 0.09}) {
        const double h = 1e-6;
        CHECK(eta_prime(b, y) == doctest::Approx((eta(b, y + h) - eta(b, y - h)) / (2 * h)).epsilon(1e-6));
        CHECK(eta_prime(b, y) <= 0.0);
    }
    CHECK(eta(b, 0.075) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("bump config validation") {
    CHECK_NOTHROW(validate(BumpConfig{2, 0.05, 1.0, 1.0}));
    CHECK_THROWS_AS(validate(BumpConfig{1, 0.05, 1.0, 2.0}), ConfigError);
    CHECK_THROWS_AS(validate(BumpConfig{2, 0.0, 1.0, 2.0}), ConfigError);
    CHECK_THROWS_AS(validate(BumpConfig{2, 0.6, 1.0, 2.0}), ConfigError);
    CHECK_THROWS_AS(validate(BumpConfig{2, 0.05, 1.0, 0.5}), ConfigError);
}

TEST_CASE("neck detection on a dumbbell") {
    auto c = [](double p) {
        const double x = -2.0 * std::cos(p);
        return std::array<double, 2>{x, std::sin(p) * (1.0 - 0.6 * std::exp(-4.0 * x * x))};
    };
    const auto prof = profile_from_curve(2, c, 0.0, M_PI, 400, 1.0);
    const Neck neck = find_neck(prof);
    CHECK(neck.count == 1);
    CHECK(neck.radius == doctest::Approx(0.4).epsilon(1e-3));
    CHECK(std::abs(neck.x) < 1e-2);
    CHECK(std::isnan(find_neck(sphere_profile(2, 0.0, 1.0, 64)).radius));
}

TEST_CASE("witness: graph property lost before the neck pinches") {
    NeckConfig cfg;
    cfg.cadence = 0.005;
    const double r0 = 2.0 * std::sqrt(2.0);
    const auto s = run_counterexample(BumpConfig{2, 0.05, r0, 2.5 * r0}, cfg);
    REQUIRE(s.graph_lost_at);
    REQUIRE(s.pinched_at);
    CHECK(*s.graph_lost_at < *s.pinched_at);
    CHECK(s.ordering_ok);
    CHECK(s.stop == NeckStop::PinchDetected);
    // Theta is 1 on the initial sphere-with-spike wherever the surface is a round slice
    CHECK(s.rows.front().angle_min > 0.0);
}

TEST_CASE("neck radius shrinks once a neck forms") {
    NeckConfig cfg;
    cfg.cadence = 0.002;
    const double r0 = 2.0 * std::sqrt(2.0);
    const auto s = run_counterexample(BumpConfig{2, 0.05, r0, 2.5 * r0}, cfg);
    double prev = INFINITY;
    int seen = 0;
    for (const auto& row : s.rows) {
        if (std::isnan(row.neck_radius)) continue;
        if (row.t > 0.01) {
            CHECK(row.neck_radius <= prev * (1.0 + 1e-9));
            ++seen;
        }
        prev = row.neck_radius;
    }
    CHECK(seen > 3);
}

}
