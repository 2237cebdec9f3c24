#include "warpflow/neckpinch.hpp"

#include "warpflow/errors.hpp"

#include <boost/math/interpolators/cubic_hermite.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace warpflow {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Neighbour of node j with the tips mirrored across the axis.
struct Stencil {
    double xm, ym, xp, yp;
};

Stencil stencil(const ProfileState& p, std::size_t j) {
    const std::size_t last = p.size() - 1;
    Stencil s;
    if (j == 0) {
        s.xm = p.xs[1];
        s.ym = -p.us[1];
    } else {
        s.xm = p.xs[j - 1];
        s.ym = p.us[j - 1];
    }
    if (j == last) {
        s.xp = p.xs[last - 1];
        s.yp = -p.us[last - 1];
    } else {
        s.xp = p.xs[j + 1];
        s.yp = p.us[j + 1];
    }
    return s;
}

std::vector<double> chord_params(const ProfileState& p) {
    std::vector<double> s(p.size(), 0.0);
    for (std::size_t j = 1; j < p.size(); ++j)
        s[j] = s[j - 1] + std::hypot(p.xs[j] - p.xs[j - 1], p.us[j] - p.us[j - 1]);
    return s;
}

// Node derivatives in the chord parameter; the mirrored ghosts make x even and u odd at the tips.
std::vector<double> node_slopes(const std::vector<double>& s, const std::vector<double>& f, bool odd) {
    const std::size_t m = f.size();
    std::vector<double> d(m);
    for (std::size_t j = 1; j + 1 < m; ++j) {
        const double h0 = s[j] - s[j - 1], h1 = s[j + 1] - s[j];
        d[j] = (h0 * h0 * f[j + 1] - h1 * h1 * f[j - 1] + (h1 * h1 - h0 * h0) * f[j]) / (h0 * h1 * (h0 + h1));
    }
    const double hl = s[1] - s[0], hr = s[m - 1] - s[m - 2];
    d[0] = odd ? f[1] / hl : 0.0;
    d[m - 1] = odd ? -f[m - 2] / hr : 0.0;
    return d;
}

ProfileState resample(const ProfileState& p, double scale, std::size_t count) {
    const std::size_t m = p.size();
    const auto g = profile_geometry(p, Exec::Serial);
    const auto s = chord_params(p);
    std::vector<double> W(m, 0.0);
    for (std::size_t j = 1; j < m; ++j) {
        const double M0 = 1.0 + scale * g.A[j - 1], M1 = 1.0 + scale * g.A[j];
        W[j] = W[j - 1] + 0.5 * (M0 + M1) * (s[j] - s[j - 1]);
    }
    auto dx = node_slopes(s, p.xs, false);
    auto du = node_slopes(s, p.us, true);
    using boost::math::interpolators::cubic_hermite;
    cubic_hermite<std::vector<double>> X(std::vector<double>(s), std::vector<double>(p.xs), std::move(dx));
    cubic_hermite<std::vector<double>> U(std::vector<double>(s), std::vector<double>(p.us), std::move(du));

    ProfileState out;
    out.n = p.n;
    out.t = p.t;
    out.xs.resize(count);
    out.us.resize(count);
    out.xs.front() = p.xs.front();
    out.xs.back() = p.xs.back();
    out.us.front() = 0.0;
    out.us.back() = 0.0;
    std::size_t seg = 0;
    for (std::size_t k = 1; k + 1 < count; ++k) {
        const double target = W.back() * static_cast<double>(k) / static_cast<double>(count - 1);
        while (seg + 2 < m && W[seg + 1] < target) ++seg;
        const double frac = (target - W[seg]) / (W[seg + 1] - W[seg]);
        const double sk = s[seg] + frac * (s[seg + 1] - s[seg]);
        out.xs[k] = X(sk);
        out.us[k] = U(sk);
    }
    return out;
}

double smoothstep5(double s) { return s * s * s * (10.0 + s * (-15.0 + 6.0 * s)); }

} // namespace

void validate(const BumpConfig& cfg) {
    if (cfg.n < 2) throw ConfigError(fmt::format("n must be at least 2, got {}", cfg.n));
    if (!(cfg.eps > 0.0 && cfg.eps < 0.5)) throw ConfigError(fmt::format("eps must be in (0, 1/2), got {}", cfg.eps));
    if (!(cfg.r0 > 0.0)) throw ConfigError(fmt::format("r0 must be positive, got {}", cfg.r0));
    if (!(cfg.r1 >= cfg.r0)) throw ConfigError(fmt::format("r1 = {} is below r0 = {}", cfg.r1, cfg.r0));
}

double eta(const BumpConfig& cfg, double y) {
    if (y <= cfg.eps) return cfg.r1;
    if (y >= 2.0 * cfg.eps) return cfg.r0;
    return cfg.r1 + (cfg.r0 - cfg.r1) * smoothstep5((y - cfg.eps) / cfg.eps);
}

double eta_prime(const BumpConfig& cfg, double y) {
    if (y <= cfg.eps || y >= 2.0 * cfg.eps) return 0.0;
    const double s = (y - cfg.eps) / cfg.eps;
    return (cfg.r0 - cfg.r1) * 30.0 * s * s * (1.0 - s) * (1.0 - s) / cfg.eps;
}

double bump_radius(const BumpConfig& cfg, double psi) {
    const double w1 = std::cos(psi);
    if (w1 <= 0.0) return cfg.r0;
    return eta(cfg, std::sqrt(std::max(0.0, 1.0 - w1 * w1)));
}

ProfileState profile_from_curve(int n, const std::function<std::array<double, 2>(double)>& c, double p0, double p1,
                                int N, double scale) {
    if (N < 8) throw PreconditionError(fmt::format("profile needs at least 8 segments, got {}", N));
    const std::size_t dense = 64 * static_cast<std::size_t>(N) + 1;
    ProfileState d;
    d.n = n;
    d.xs.resize(dense);
    d.us.resize(dense);
    for (std::size_t j = 0; j < dense; ++j) {
        const double p = p0 + (p1 - p0) * static_cast<double>(j) / static_cast<double>(dense - 1);
        const auto xy = c(p);
        d.xs[j] = xy[0];
        d.us[j] = xy[1];
    }
    d.us.front() = 0.0;
    d.us.back() = 0.0;
    return resample(d, scale, static_cast<std::size_t>(N) + 1);
}

ProfileState sphere_profile(int n, double center, double R, int N) {
    return profile_from_curve(
        n, [&](double psi) { return std::array<double, 2>{center - R * std::cos(psi), R * std::sin(psi)}; }, 0.0,
        std::numbers::pi, N, R);
}

ProfileState build_initial(const BumpConfig& cfg, int N) {
    validate(cfg);
    // dx1/domega1 on omega1 in (0, 1); the construction needs it positive.
    const int samples = 4096;
    for (int i = 1; i < samples; ++i) {
        const double w1 = static_cast<double>(i) / samples;
        const double y = std::sqrt(1.0 - w1 * w1);
        const double dx = eta_prime(cfg, y) * (-w1 * w1 / y) + eta(cfg, y);
        if (!(dx > 0.0))
            throw ConfigError(fmt::format("x is not monotone in omega_1 near omega_1 = {} (dx = {})", w1, dx));
    }
    const double pi = std::numbers::pi;
    return profile_from_curve(
        cfg.n,
        [&](double p) {
            const double psi = pi - p;
            const double z = bump_radius(cfg, psi);
            return std::array<double, 2>{z * std::cos(psi), z * std::sin(psi)};
        },
        0.0, pi, N, cfg.r0);
}

ProfileGeometry profile_geometry(const ProfileState& p, Exec exec) {
    const std::size_t m = p.size();
    const std::size_t last = m - 1;
    ProfileGeometry g;
    g.ds.resize(m - 1);
    g.nx.resize(m);
    g.ny.resize(m);
    g.kappa.resize(m);
    g.H.resize(m);
    g.A.resize(m);
    g.theta.resize(m);
    const double nm1 = p.n - 1.0;
    for_each_index(exec, static_cast<std::ptrdiff_t>(m), [&](std::ptrdiff_t i) {
        const std::size_t j = static_cast<std::size_t>(i);
        if (j < last) g.ds[j] = std::hypot(p.xs[j + 1] - p.xs[j], p.us[j + 1] - p.us[j]);
        const Stencil st = stencil(p, j);
        const double x = p.xs[j], y = p.us[j];
        const double xu = 0.5 * (st.xp - st.xm), yu = 0.5 * (st.yp - st.ym);
        const double xuu = st.xp - 2.0 * x + st.xm, yuu = st.yp - 2.0 * y + st.ym;
        const double L = std::hypot(xu, yu);
        const double nx = -yu / L, ny = xu / L;
        const double k = (xuu * yu - yuu * xu) / (L * L * L);
        // Rotation directions: N_y / u, which tends to the profile curvature at the tips.
        const double k2 = (j == 0 || j == last) ? k : ny / y;
        g.nx[j] = nx;
        g.ny[j] = ny;
        g.kappa[j] = k;
        g.H[j] = k + nm1 * k2;
        g.A[j] = std::sqrt(k * k + nm1 * k2 * k2);
        g.theta[j] = (x * nx + y * ny) / std::hypot(x, y);
    });
    return g;
}

std::vector<double> angle_function_warped(const ProfileState& p) {
    const std::size_t m = p.size();
    std::vector<double> out(m);
    for (std::size_t j = 0; j < m; ++j) {
        const Stencil st = stencil(p, j);
        const double x = p.xs[j], y = p.us[j];
        const double xu = 0.5 * (st.xp - st.xm), yu = 0.5 * (st.yp - st.ym);
        // Polar coordinates r = |P| and phi measured from the negative x axis, so
        // phi runs from 0 to pi along the profile. In the orthonormal frame
        // (E_phi, E_r) the tangent is (r phi_u, r_u) and N = (-r_u, r phi_u) / |.|.
        const double r = std::hypot(x, y);
        const double r_u = (x * xu + y * yu) / r;
        const double phi_u = (y * xu - x * yu) / (r * r);
        const double len = std::hypot(r * phi_u, r_u);
        out[j] = r * phi_u / len;
    }
    return out;
}

double angle_min(const ProfileState& p) {
    const auto g = profile_geometry(p, Exec::Serial);
    return *std::min_element(g.theta.begin(), g.theta.end());
}

Neck find_neck(const ProfileState& p) {
    Neck neck;
    neck.radius = kNaN;
    neck.x = kNaN;
    const std::size_t m = p.size();
    for (std::size_t j = 2; j + 2 < m; ++j) {
        const double y = p.us[j];
        if (!(y < p.us[j - 1] && y <= p.us[j + 1])) continue;
        ++neck.count;
        // Parabola through the three nodes in the chord parameter.
        const double h0 = std::hypot(p.xs[j] - p.xs[j - 1], y - p.us[j - 1]);
        const double h1 = std::hypot(p.xs[j + 1] - p.xs[j], p.us[j + 1] - y);
        const double d1 = (p.us[j + 1] - y) / h1, d0 = (y - p.us[j - 1]) / h0;
        const double c2 = (d1 - d0) / (h0 + h1);
        const double slope = (d0 * h1 + d1 * h0) / (h0 + h1);
        double r = y;
        double xr = p.xs[j];
        if (c2 > 0.0) {
            const double off = -slope / (2.0 * c2);
            if (std::abs(off) <= std::max(h0, h1)) {
                r = y - slope * slope / (4.0 * c2);
                xr = p.xs[j] + off * (off > 0 ? (p.xs[j + 1] - p.xs[j]) / h1 : (p.xs[j] - p.xs[j - 1]) / h0);
            }
        }
        if (std::isnan(neck.radius) || r < neck.radius) {
            neck.radius = r;
            neck.x = xr;
        }
    }
    return neck;
}

double profile_stable_dt(const ProfileState& p, double cfl) {
    double h2 = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j + 1 < p.size(); ++j) {
        const double d = std::hypot(p.xs[j + 1] - p.xs[j], p.us[j + 1] - p.us[j]);
        h2 = std::min(h2, d * d);
    }
    for (std::size_t j = 1; j + 1 < p.size(); ++j) h2 = std::min(h2, p.us[j] * p.us[j] / (p.n - 1.0));
    return cfl * h2;
}

namespace {

void velocity(const ProfileState& p, Exec exec, std::vector<double>& vx, std::vector<double>& vy) {
    const auto g = profile_geometry(p, exec);
    const std::size_t m = p.size();
    vx.resize(m);
    vy.resize(m);
    for_each_index(exec, static_cast<std::ptrdiff_t>(m), [&](std::ptrdiff_t i) {
        vx[i] = -g.H[i] * g.nx[i];
        vy[i] = -g.H[i] * g.ny[i];
    });
    vy.front() = 0.0;
    vy.back() = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        if (!std::isfinite(vx[j]) || !std::isfinite(vy[j]))
            throw DegenerateSegment(fmt::format("non-finite profile velocity at node {}", j));
    }
}

} // namespace

ProfileState step_profile(const ProfileState& p, double dt, Exec exec) {
    const double limit = profile_stable_dt(p, kMaxProfileCfl);
    if (dt > limit * (1.0 + 1e-12))
        throw StepTooLarge(fmt::format("dt = {} exceeds the stable limit {}", dt, limit));
    const std::size_t m = p.size();
    std::vector<double> vx0, vy0, vx1, vy1;
    velocity(p, exec, vx0, vy0);
    ProfileState mid = p;
    for_each_index(exec, static_cast<std::ptrdiff_t>(m), [&](std::ptrdiff_t i) {
        mid.xs[i] = p.xs[i] + dt * vx0[i];
        mid.us[i] = p.us[i] + dt * vy0[i];
    });
    velocity(mid, exec, vx1, vy1);
    ProfileState out = p;
    for_each_index(exec, static_cast<std::ptrdiff_t>(m), [&](std::ptrdiff_t i) {
        out.xs[i] = p.xs[i] + 0.5 * dt * (vx0[i] + vx1[i]);
        out.us[i] = p.us[i] + 0.5 * dt * (vy0[i] + vy1[i]);
    });
    out.t = p.t + dt;
    return out;
}

ProfileState redistribute_profile(const ProfileState& p, double scale) { return resample(p, scale, p.size()); }

const char* to_string(NeckStop s) {
    switch (s) {
    case NeckStop::PinchDetected: return "PinchDetected";
    case NeckStop::Extinct: return "Extinct";
    case NeckStop::ReachedHorizon: return "ReachedHorizon";
    }
    return "?";
}

NeckSeries run_profile(const ProfileState& initial, double scale, const NeckConfig& cfg) {
    if (!(cfg.cfl > 0.0 && cfg.cfl <= kMaxProfileCfl))
        throw PreconditionError(fmt::format("cfl must be in (0, {}], got {}", kMaxProfileCfl, cfg.cfl));
    if (!(cfg.cadence > 0.0)) throw PreconditionError("cadence must be positive");
    NeckSeries out;
    ProfileState p = initial;
    double next_row = p.t;
    const double pinch_radius = cfg.pinch_fraction * scale;

    auto record = [&](const ProfileState& s, const ProfileGeometry& g, const Neck& neck) {
        out.rows.push_back({s.t, *std::min_element(g.theta.begin(), g.theta.end()), neck.radius,
                            *std::max_element(g.A.begin(), g.A.end()), s.xs.back() - s.xs.front()});
    };

    while (true) {
        const auto g = profile_geometry(p, cfg.exec);
        const Neck neck = find_neck(p);
        const double amin = *std::min_element(g.theta.begin(), g.theta.end());
        if (!out.graph_lost_at && amin <= 0.0) out.graph_lost_at = p.t;
        const bool row_due = p.t >= next_row - 1e-12 * std::max(1.0, next_row);
        if (row_due) {
            record(p, g, neck);
            next_row += cfg.cadence;
        }
        if (neck.count > 0 && neck.radius < pinch_radius) {
            if (!row_due) record(p, g, neck);
            out.pinched_at = p.t;
            out.stop = NeckStop::PinchDetected;
            break;
        }
        if (p.xs.back() - p.xs.front() < 1e-2 * scale) {
            if (!row_due) record(p, g, neck);
            out.stop = NeckStop::Extinct;
            break;
        }
        if (p.t >= cfg.horizon * (1.0 - 1e-12)) {
            if (!row_due) record(p, g, neck);
            out.stop = NeckStop::ReachedHorizon;
            break;
        }
        double dt = profile_stable_dt(p, cfg.cfl);
        dt = std::min({dt, next_row - p.t, cfg.horizon - p.t});
        if (!(dt > 0.0)) dt = profile_stable_dt(p, cfg.cfl);
        p = step_profile(p, dt, cfg.exec);
        ++out.steps;
        if (cfg.redistribute_every > 0 && out.steps % cfg.redistribute_every == 0) p = redistribute_profile(p, scale);
    }
    out.ordering_ok = out.graph_lost_at && out.pinched_at && *out.graph_lost_at < *out.pinched_at;
    out.inconclusive = !out.graph_lost_at && !out.pinched_at;
    out.final_state = p;
    return out;
}

NeckSeries run_counterexample(const BumpConfig& bump, const NeckConfig& cfg) {
    return run_profile(build_initial(bump, cfg.N), bump.r0, cfg);
}

WitnessSearch search_witness(int n, double r0, const std::vector<double>& eps_grid,
                             const std::vector<double>& ratio_grid, const NeckConfig& cfg) {
    WitnessSearch out;
    for (double e : eps_grid) {
        for (double q : ratio_grid) out.entries.push_back({BumpConfig{n, e, r0, q * r0}, {}});
    }
    for (const auto& e : out.entries) validate(e.bump);
    NeckConfig serial = cfg;
    serial.exec = Exec::Serial;
    const auto count = static_cast<std::ptrdiff_t>(out.entries.size());
    std::vector<std::string> failures(out.entries.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        try {
            out.entries[i].series = run_counterexample(out.entries[i].bump, serial);
        } catch (const std::exception& ex) {
            failures[i] = ex.what();
        }
    }
    for (std::size_t i = 0; i < failures.size(); ++i) {
        if (!failures[i].empty())
            throw Error(fmt::format("search run eps = {} r1 = {} failed: {}", out.entries[i].bump.eps,
                                    out.entries[i].bump.r1, failures[i]));
    }
    for (std::size_t i = 0; i < out.entries.size(); ++i) {
        if (out.entries[i].series.ordering_ok) {
            out.witness = i;
            break;
        }
    }
    return out;
}

} // namespace warpflow
