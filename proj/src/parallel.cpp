#include "warpflow/parallel.hpp"

#include "warpflow/errors.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace warpflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

struct Rhs {
    const WarpingFunction& w;
    int n;
    // Returns false if z left the domain.
    bool operator()(double z, double& out) const {
        if (!w.contains(z)) return false;
        out = -n * w.ratio(z, 1);
        return std::isfinite(out);
    }
};

struct TrialStep {
    bool ok;
    double z5;
    double err;
    double k7;
};

TrialStep dopri_step(const Rhs& f, double z, double k1, double h) {
    double k2, k3, k4, k5, k6, k7;
    TrialStep fail{false, 0.0, 0.0, 0.0};
    if (!f(z + h * a21 * k1, k2)) return fail;
    if (!f(z + h * (a31 * k1 + a32 * k2), k3)) return fail;
    if (!f(z + h * (a41 * k1 + a42 * k2 + a43 * k3), k4)) return fail;
    if (!f(z + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), k5)) return fail;
    if (!f(z + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), k6)) return fail;
    const double z5 = z + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    if (!f(z5, k7)) return fail;
    const double err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    return {true, z5, err, k7};
}

} // namespace

const char* to_string(Terminal t) {
    switch (t) {
    case Terminal::ReachedTEnd: return "ReachedTEnd";
    case Terminal::ExitedDomain: return "ExitedDomain";
    case Terminal::Converged: return "Converged";
    }
    return "?";
}

double exit_time_quadrature(const WarpingFunction& w, int n, double z0) {
    const double w0 = w.ratio(z0, 1);
    if (w0 == 0.0) return kInf;
    const bool down = w0 > 0.0;
    const double end = down ? w.lower() : w.upper();
    // Integrand 1/(n |w|) along the path; a sign change of w means an equilibrium is hit first.
    bool crossed = false;
    auto integrand = [&](double zeta) {
        const double wz = w.ratio(zeta, 1);
        if ((wz > 0.0) != down) crossed = true;
        return 1.0 / (n * std::abs(wz));
    };
    double value = kInf;
    double err = 0.0;
    double l1 = 0.0;
    try {
        if (std::isfinite(end)) {
            boost::math::quadrature::tanh_sinh<double> q;
            const double lo = std::min(end, z0), hi = std::max(end, z0);
            value = q.integrate(integrand, lo, hi, 1e-13, &err, &l1);
        } else {
            boost::math::quadrature::exp_sinh<double> q;
            auto shifted = [&](double s) { return integrand(down ? z0 - s : z0 + s); };
            value = q.integrate(shifted, 0.0, kInf, 1e-13, &err, &l1);
        }
    } catch (const std::exception&) {
        return kInf;
    }
    if (crossed || !std::isfinite(value) || err > 1e-8 * std::max(1.0, value)) return kInf;
    return value;
}

ParallelTrajectory integrate(const WarpingFunction& w, int n, double z0, double t_end, double tol,
                             std::span<const double> stops) {
    if (!w.contains(z0)) throw DomainError(fmt::format("parallel: z0 = {} outside the domain", z0));
    if (!(tol > 0.0)) throw PreconditionError("parallel: tol must be positive");
    if (n < 1) throw PreconditionError("parallel: n must be >= 1");

    ParallelTrajectory traj;
    traj.n = n;
    traj.z0 = z0;
    traj.samples.push_back({0.0, z0});

    const double tau = exit_time_quadrature(w, n, z0);
    const bool exits = tau <= t_end;
    const Rhs f{w, n};

    double t = 0.0;
    double z = z0;
    double k1 = 0.0;
    f(z, k1);
    double h = std::min(t_end, 1e-3 * std::max(1.0, std::abs(z)) / std::max(std::abs(k1), 1e-300));
    h = std::min(h, 0.1 * std::max(t_end, 1e-12));
    double prev_ratio = 1e-4;
    std::size_t next_stop = 0;
    while (next_stop < stops.size() && stops[next_stop] <= 0.0) ++next_stop;

    constexpr int kMaxSteps = 10'000'000;
    while (t < t_end) {
        if (traj.steps_accepted + traj.steps_rejected > kMaxSteps)
            throw StiffnessError("parallel: step budget exhausted");
        double target = t_end;
        if (next_stop < stops.size()) target = std::min(target, stops[next_stop]);
        bool clipped = false;
        if (t + h >= target) {
            h = target - t;
            clipped = true;
        }
        if (!(h > 1e-15 * std::max(1.0, t))) {
            if (exits) break;
            throw StiffnessError(fmt::format("parallel: step size underflow at t = {}, z = {}", t, z));
        }
        const TrialStep s = dopri_step(f, z, k1, h);
        const double scale = tol * h * std::max(1.0, std::abs(z));
        const double ratio = s.ok ? std::abs(s.err) / scale : kInf;
        if (!s.ok || ratio > 1.0) {
            ++traj.steps_rejected;
            const double shrink = s.ok ? std::max(0.1, 0.9 * std::pow(ratio, -0.25)) : 0.25;
            h *= shrink;
            continue;
        }
        ++traj.steps_accepted;
        t = clipped ? target : t + h;
        z = s.z5;
        k1 = s.k7;
        traj.samples.push_back({t, z});
        if (next_stop < stops.size() && t >= stops[next_stop]) ++next_stop;

        const double r = std::max(ratio, 1e-10);
        double grow = 0.9 * std::pow(r, -0.7 / 4.0) * std::pow(prev_ratio, 0.4 / 4.0);
        grow = std::clamp(grow, 0.2, 5.0);
        prev_ratio = r;
        if (!clipped) h *= grow;
        else h = std::max(h, 1e-6 * std::max(1.0, t)) * grow;
    }

    if (exits) {
        traj.terminal = Terminal::ExitedDomain;
        traj.t_exit = tau;
    } else if (std::abs(n * w.ratio(z, 1)) <= 1e-12 * std::max(1.0, std::abs(z))) {
        traj.terminal = Terminal::Converged;
    }
    return traj;
}

double sample_at(const ParallelTrajectory& traj, double t) {
    auto it = std::lower_bound(traj.samples.begin(), traj.samples.end(), t,
                               [](const ParallelSample& s, double x) { return s.t < x; });
    if (it == traj.samples.end() || it->t != t)
        throw PreconditionError(fmt::format("parallel: no sample recorded at t = {}", t));
    return it->z;
}

ContractionGap contraction_gap(const WarpingFunction& w, int n, double alpha, double z1_0, double z2_0, double t) {
    if (!(z2_0 < z1_0)) throw PreconditionError("contraction_gap requires z2_0 < z1_0");
    if (!(t > 0.0)) throw PreconditionError("contraction_gap requires t > 0");
    const double stop[] = {t};
    const auto tr1 = integrate(w, n, z1_0, t, 1e-12, stop);
    const auto tr2 = integrate(w, n, z2_0, t, 1e-12, stop);
    if (tr1.terminal == Terminal::ExitedDomain || tr2.terminal == Terminal::ExitedDomain)
        throw HypothesisError("contraction_gap: a trajectory leaves the domain before t");
    const double z1 = sample_at(tr1, t);
    const double z2 = sample_at(tr2, t);

    const double lo = std::min({z1, z2, z1_0, z2_0});
    const double hi = std::max({z1, z2, z1_0, z2_0});
    for (double z : linspace(lo, hi, 129)) {
        const double wz = w.ratio(z, 1);
        const double r2 = w.ratio(z, 2);
        const double margin = r2 - (1.0 + alpha) * wz * wz;
        if (!(wz > 0.0) || margin < -1e-12 * (std::abs(r2) + (1.0 + alpha) * wz * wz))
            throw HypothesisError(fmt::format("contraction_gap: hypothesis fails at z = {}", z));
    }

    ContractionGap g{};
    g.gap = z1 - z2;
    g.bound = (z1_0 - z2_0) * std::exp(alpha * (w.log_value(z2) - w.log_value(z2_0)));
    g.holds = g.gap > 0.0 && g.gap <= g.bound * (1.0 + 1e-8);
    return g;
}

Blowdown blowdown_time(const WarpingFunction& w, int n, double z0) {
    if (!w.contains(z0)) throw DomainError(fmt::format("blowdown_time: z0 = {} outside the domain", z0));
    const double tau = exit_time_quadrature(w, n, z0);
    if (std::isfinite(tau)) return {true, tau, 0.0, 0.0};

    const double w0 = w.ratio(z0, 1);
    if (w0 == 0.0) return {false, 0.0, 0.0, 0.0};
    const bool down = w0 > 0.0;
    const double end = down ? w.lower() : w.upper();
    if (std::isfinite(end))
        throw InconclusiveError("blowdown_time: finite boundary in the flow direction but no finite exit time");

    // z(t) >= z0 - M t with M = sup |r'/r| below z0: stable sup on nested ranges.
    double prev = -1.0;
    double sup = 0.0;
    double horizon = 0.0;
    for (double len : {10.0, 100.0, 1000.0}) {
        sup = 0.0;
        for (double s : linspace(0.0, len, 4097)) {
            const double wz = w.ratio(down ? z0 - s : z0 + s, 1);
            sup = std::max(sup, std::abs(wz));
        }
        if (!std::isfinite(sup)) break;
        horizon = len;
        if (prev >= 0.0 && sup <= prev * (1.0 + 1e-9)) return {false, 0.0, sup, horizon};
        prev = sup;
    }
    throw InconclusiveError(
        fmt::format("blowdown_time: sup |r'/r| not stable up to horizon {} (last value {})", horizon, sup));
}

} // namespace warpflow
