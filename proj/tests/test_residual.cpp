#include "doctest.h"

#include "warpflow/errors.hpp"
#include "warpflow/residual.hpp"

#include <cmath>

using namespace warpflow;

namespace {

auto perturbed(double base, double amp) {
    return [=](int N) { return graph_curve(N, [=](double t) { return base + amp * std::sin(t); }); };
}

} // namespace

TEST_SUITE("residual") {

TEST_CASE("observed order of an exact power law") {
    const std::vector<GridLevel> levels = {{64, 0.0}, {128, 0.0}, {256, 0.0}};
    CHECK(observed_order(levels, {1.0, 0.25, 0.0625}) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(observed_order(levels, {1.0, 0.5, 0.25}) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("curve equations converge at second order in the beta = 1/2 family") {
    const auto w = WarpingFunction::power_beta(0.5);
    const auto wins = curve_windows(perturbed(-3.0, 0.2), w, {64, 128, 256}, 0.4, 2);
    for (const auto& rep : {residual_theta_n1(wins, w), residual_v(wins, w), residual_kappa_sq(wins, w)}) {
        CAPTURE(to_string(rep.equation));
        CHECK_FALSE(rep.one_sided);
        CHECK(rep.observed_order >= kMinObservedOrder);
        CHECK(rep.passed);
    }
}

TEST_CASE("same equations on Lagrangian windows with redistribution off") {
    const auto w = WarpingFunction::power_beta(0.5);
    auto init = [](int N) {
        return graph_curve(N, [](double t) { return -3.0 + 0.2 * std::sin(t); }, CurveMode::Lagrangian);
    };
    const auto wins = curve_windows(init, w, {64, 128, 256}, 0.4, 2);
    CHECK(residual_theta_n1(wins, w).observed_order >= kMinObservedOrder);
}

TEST_CASE("negative control: evaluating with the wrong warping does not converge") {
    const auto flow = WarpingFunction::power_beta(0.5);
    const auto other = WarpingFunction::power_beta(0.25);
    const auto wins = curve_windows(perturbed(-3.0, 0.2), flow, {64, 128, 256}, 0.4, 2);
    const auto rep = residual_theta_n1(wins, other);
    CHECK(rep.observed_order < 0.5);
    CHECK_FALSE(rep.passed);
}

TEST_CASE("symmetric graphs: Theta and v equations over a torus and a sphere") {
    const auto w = WarpingFunction::power_beta(0.25);
    for (const auto& model : {ModelM::flat_torus(2), ModelM::round_sphere(2), ModelM::flat_torus(3)}) {
        CAPTURE(model.name());
        const bool sphere = model.kind == ModelKind::RoundSphere;
        auto init = [&](int N) {
            return symmetric_graph(model, N, [&](double x) { return -5.0 + 0.2 * (sphere ? std::cos(x) : std::sin(x)); });
        };
        const auto wins = sym_windows(init, w, {64, 128, 256}, 0.4, 2);
        CHECK(residual_theta_n(wins, w).observed_order >= kMinObservedOrder);
        CHECK(residual_v(wins, w).observed_order >= kMinObservedOrder);
    }
}

TEST_CASE("one-sided bounds hold along a torus flow") {
    const auto w = WarpingFunction::power_beta(0.25);
    auto init = [](int N) {
        return symmetric_graph(ModelM::flat_torus(2), N, [](double x) { return -5.0 + 0.1 * std::sin(x); });
    };
    const auto wins = sym_windows(init, w, {64, 128}, 0.4, 2);
    for (Equation e : {Equation::F_bound, Equation::ASq_bound, Equation::G_bound_n}) {
        const auto rep = residual_inequalities(wins, w, e, 2.0);
        CAPTURE(to_string(e));
        CHECK(rep.one_sided);
        CHECK(rep.passed);
        for (double m : rep.residual_norms) CHECK(m >= -kInequalityTolerance);
    }
}

TEST_CASE("bounds that need a flat M are refused on the sphere") {
    const auto w = WarpingFunction::power_beta(0.25);
    auto init = [](int N) {
        return symmetric_graph(ModelM::round_sphere(2), N, [](double x) { return -5.0 + 0.1 * std::cos(x); });
    };
    const auto wins = sym_windows(init, w, {64}, 0.4, 2);
    CHECK_THROWS_AS(residual_inequalities(wins, w, Equation::ASq_bound, 2.0), UnsupportedModel);
    CHECK_THROWS_AS(residual_inequalities(wins, w, Equation::G_bound_n, 2.0), UnsupportedModel);
}

TEST_CASE("g bound for curves needs r' >= 0 on the window") {
    // cos(z) decreases on (0, pi/2)
    const auto w = WarpingFunction::cos_sqrt_k(1.0);
    const auto wins = curve_windows(perturbed(0.5, 0.1), w, {64}, 0.4, 2);
    CHECK_THROWS_AS(residual_inequalities(wins, w, Equation::G_bound_n1), HypothesisError);
}

TEST_CASE("window length is checked") {
    const auto w = WarpingFunction::power_beta(0.5);
    const auto c = perturbed(-3.0, 0.2)(64);
    const auto win = record_curve_window(c, w, stable_dt(c, w, 0.4), 1, 4);
    CHECK_THROWS_AS(evaluate(win, w, Equation::ThetaN1), WindowTooShort);
}

}
