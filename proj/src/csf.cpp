#include "warpflow/csf.hpp"

#include "warpflow/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace warpflow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

double wrap(double d) { return std::remainder(d, kTwoPi); }

double reduce_angle(double th) {
    double x = std::fmod(th, kTwoPi);
    if (x < 0.0) x += kTwoPi;
    if (x >= kTwoPi) x = 0.0;
    return x;
}

std::ptrdiff_t next(std::ptrdiff_t j, std::ptrdiff_t n) { return j + 1 == n ? 0 : j + 1; }
std::ptrdiff_t prev(std::ptrdiff_t j, std::ptrdiff_t n) { return j == 0 ? n - 1 : j - 1; }

void check_domain(const CurveState& c, const WarpingFunction& w) {
    for (double z : c.zs) {
        if (!w.contains(z)) throw DomainExit(fmt::format("curve node left the domain (z = {})", z));
    }
}

struct Velocity {
    std::vector<double> theta;
    std::vector<double> z;
};

Velocity normal_velocity(const CurveState& c, const WarpingFunction& w, Exec exec) {
    const CurveGeometry g = curve_geometry(c, w, exec);
    const auto n = static_cast<std::ptrdiff_t>(c.size());
    Velocity v{std::vector<double>(n), std::vector<double>(n)};
    for_each_index(exec, n, [&](std::ptrdiff_t j) {
        v.theta[j] = g.kappa[j] * g.b[j] / g.r[j];
        v.z[j] = -g.kappa[j] * g.a[j];
    });
    return v;
}

double min_ds_squared(const CurveState& c, const WarpingFunction& w, Exec exec) {
    const CurveGeometry g = curve_geometry(c, w, exec);
    const double m = *std::min_element(g.ds.begin(), g.ds.end());
    return m * m;
}

void graph_rhs(const std::vector<double>& z, const WarpingFunction& w, std::vector<double>& out, double& min_ds2,
               Exec exec) {
    const auto n = static_cast<std::ptrdiff_t>(z.size());
    const double h = kTwoPi / static_cast<double>(n);
    std::vector<double> ds2(n);
    for_each_index(exec, n, [&](std::ptrdiff_t j) {
        const double zp = z[next(j, n)], zm = z[prev(j, n)];
        const double zt = (zp - zm) / (2.0 * h);
        const double ztt = (zp - 2.0 * z[j] + zm) / (h * h);
        const double r = w.value(z[j]);
        const double lw = w.ratio(z[j], 1);
        const double q = r * r + zt * zt;
        out[j] = ztt / q - lw * (r * r + 2.0 * zt * zt) / q;
        ds2[j] = q * h * h;
    });
    min_ds2 = *std::min_element(ds2.begin(), ds2.end());
}

} // namespace

CurveState graph_curve(int N, const std::function<double(double)>& f, CurveMode mode) {
    if (N < 8) throw DegenerateGrid("curve needs at least 8 nodes");
    CurveState c;
    c.mode = mode;
    c.thetas.resize(N);
    c.zs.resize(N);
    for (int j = 0; j < N; ++j) {
        c.thetas[j] = kTwoPi * j / N;
        c.zs[j] = f(c.thetas[j]);
    }
    return c;
}

CurveGeometry curve_geometry(const CurveState& c, const WarpingFunction& w, Exec exec) {
    const auto n = static_cast<std::ptrdiff_t>(c.size());
    if (n < 8) throw DegenerateGrid("curve needs at least 8 nodes");
    CurveGeometry g;
    g.r.resize(n);
    g.w.resize(n);
    g.ds.resize(n);
    g.a.resize(n);
    g.b.resize(n);
    g.kappa.resize(n);
    for_each_index(exec, n, [&](std::ptrdiff_t j) {
        const std::ptrdiff_t jp = next(j, n), jm = prev(j, n);
        const double dtp = wrap(c.thetas[jp] - c.thetas[j]);
        const double dtm = wrap(c.thetas[j] - c.thetas[jm]);
        const double dzp = c.zs[jp] - c.zs[j];
        const double dzm = c.zs[j] - c.zs[jm];
        const double th_u = 0.5 * (dtp + dtm), th_uu = dtp - dtm;
        const double z_u = 0.5 * (dzp + dzm), z_uu = dzp - dzm;
        const double r = w.value(c.zs[j]);
        const double lw = w.ratio(c.zs[j], 1);
        const double L = std::hypot(r * th_u, z_u);
        g.r[j] = r;
        g.w[j] = lw;
        g.a[j] = r * th_u / L;
        g.b[j] = z_u / L;
        g.kappa[j] =
            r * (z_u * th_uu + 2.0 * lw * th_u * z_u * z_u - th_u * z_uu + r * r * lw * th_u * th_u * th_u) /
            (L * L * L);
        const double rm = w.value(0.5 * (c.zs[j] + c.zs[jp]));
        g.ds[j] = std::hypot(rm * dtp, dzp);
    });
    double total = 0.0;
    for (double d : g.ds) total += d;
    const double tiny = 1e-13 * total / static_cast<double>(n);
    for (std::ptrdiff_t j = 0; j < n; ++j) {
        if (!(g.ds[j] > tiny))
            throw DegenerateSegment(fmt::format("nodes {} and {} coincide", j, next(j, n)));
    }
    return g;
}

std::vector<double> d_s(const std::vector<double>& f, const std::vector<double>& ds, Exec exec) {
    const auto n = static_cast<std::ptrdiff_t>(f.size());
    std::vector<double> out(n);
    for_each_index(exec, n, [&](std::ptrdiff_t j) {
        out[j] = (f[next(j, n)] - f[prev(j, n)]) / (ds[prev(j, n)] + ds[j]);
    });
    return out;
}

std::vector<double> d_ss(const std::vector<double>& f, const std::vector<double>& ds, Exec exec) {
    const auto n = static_cast<std::ptrdiff_t>(f.size());
    std::vector<double> out(n);
    for_each_index(exec, n, [&](std::ptrdiff_t j) {
        const double hp = ds[j], hm = ds[prev(j, n)];
        out[j] = 2.0 * ((f[next(j, n)] - f[j]) / hp - (f[j] - f[prev(j, n)]) / hm) / (hp + hm);
    });
    return out;
}

CurveDiagnostics diagnostics(const CurveState& c, const WarpingFunction& w, int m_max, Exec exec) {
    if (m_max < 0 || m_max > 4) throw PreconditionError("diagnostics: m_max must be in [0, 4]");
    const CurveGeometry g = curve_geometry(c, w, exec);
    const auto n = static_cast<std::ptrdiff_t>(c.size());
    CurveDiagnostics d;
    d.ds = g.ds;
    d.kappa = g.kappa;
    d.theta_angle = g.a;
    d.normal_theta.resize(n);
    d.v.resize(n);
    for_each_index(exec, n, [&](std::ptrdiff_t j) {
        d.normal_theta[j] = -g.b[j];
        d.v[j] = g.a[j] > 0.0 ? 1.0 / g.a[j] : kNaN;
    });
    if (m_max >= 1) d.ds_kappa.push_back(d_s(g.kappa, g.ds, exec));
    if (m_max >= 2) d.ds_kappa.push_back(d_ss(g.kappa, g.ds, exec));
    if (m_max >= 3) d.ds_kappa.push_back(d_s(d.ds_kappa[1], g.ds, exec));
    if (m_max >= 4) d.ds_kappa.push_back(d_ss(d.ds_kappa[1], g.ds, exec));

    CurveExtremes& e = d.extremes;
    e.theta_min = *std::min_element(g.a.begin(), g.a.end());
    e.v_max = e.theta_min > 0.0 ? 1.0 / e.theta_min : kInf;
    e.kappa_max_abs = max_over(exec, n, [&](std::ptrdiff_t j) { return std::abs(g.kappa[j]); });
    if (e.theta_min > 0.0) {
        const auto gf = g_function(d, 0.5 / (e.v_max * e.v_max));
        e.g_max = *std::max_element(gf.begin(), gf.end());
    } else {
        e.g_max = kNaN;
    }
    return d;
}

std::vector<double> g_function(const CurveDiagnostics& d, double k) {
    std::vector<double> out(d.kappa.size());
    for (std::size_t j = 0; j < out.size(); ++j) {
        const double v = d.v[j];
        if (!std::isfinite(v)) throw GraphLost(fmt::format("g_function: Theta <= 0 at node {}", j));
        const double phi = v * v / (1.0 - k * v * v);
        out[j] = phi * d.kappa[j] * d.kappa[j];
    }
    return out;
}

double stable_dt(const CurveState& c, const WarpingFunction& w, double cfl) {
    return cfl * min_ds_squared(c, w, Exec::Serial);
}

CurveState step_lagrangian(const CurveState& c, const WarpingFunction& w, double dt, bool redistribute_nodes,
                           Exec exec) {
    if (c.mode != CurveMode::Lagrangian) throw PreconditionError("step_lagrangian needs a Lagrangian curve");
    const auto n = static_cast<std::ptrdiff_t>(c.size());
    const Velocity v1 = normal_velocity(c, w, exec);
    if (dt > kMaxCfl * min_ds_squared(c, w, exec) * (1.0 + 1e-12))
        throw StepTooLarge(fmt::format("dt = {} exceeds the explicit stability limit", dt));

    CurveState mid = c;
    for_each_index(exec, n, [&](std::ptrdiff_t j) {
        mid.thetas[j] = c.thetas[j] + dt * v1.theta[j];
        mid.zs[j] = c.zs[j] + dt * v1.z[j];
    });
    check_domain(mid, w);
    const Velocity v2 = normal_velocity(mid, w, exec);
    CurveState out = c;
    for_each_index(exec, n, [&](std::ptrdiff_t j) {
        out.thetas[j] = reduce_angle(c.thetas[j] + 0.5 * dt * (v1.theta[j] + v2.theta[j]));
        out.zs[j] = c.zs[j] + 0.5 * dt * (v1.z[j] + v2.z[j]);
    });
    check_domain(out, w);
    out.t = c.t + dt;
    if (redistribute_nodes) {
        out = redistribute(out, w);
        out.redistributed = true;
    } else {
        out.redistributed = false;
    }
    return out;
}

CurveState step_graph(const CurveState& c, const WarpingFunction& w, double dt, Exec exec) {
    if (c.mode != CurveMode::Graph) throw PreconditionError("step_graph needs a Graph curve");
    const auto n = static_cast<std::ptrdiff_t>(c.size());
    std::vector<double> k1(n), k2(n);
    double min_ds2 = 0.0;
    graph_rhs(c.zs, w, k1, min_ds2, exec);
    if (dt > kMaxCfl * min_ds2 * (1.0 + 1e-12))
        throw StepTooLarge(fmt::format("dt = {} exceeds the explicit stability limit", dt));
    CurveState out = c;
    std::vector<double> mid(n);
    for_each_index(exec, n, [&](std::ptrdiff_t j) { mid[j] = c.zs[j] + dt * k1[j]; });
    for (double z : mid) {
        if (!w.contains(z)) throw DomainExit(fmt::format("graph left the domain (z = {})", z));
    }
    graph_rhs(mid, w, k2, min_ds2, exec);
    for_each_index(exec, n, [&](std::ptrdiff_t j) { out.zs[j] = c.zs[j] + 0.5 * dt * (k1[j] + k2[j]); });
    for (double z : out.zs) {
        if (!std::isfinite(z)) throw GraphLost("graph slope blew up");
    }
    check_domain(out, w);
    out.t = c.t + dt;
    out.redistributed = false;
    return out;
}

CurveState redistribute(const CurveState& c, const WarpingFunction& w) {
    const CurveGeometry g = curve_geometry(c, w, Exec::Serial);
    const auto n = static_cast<std::ptrdiff_t>(c.size());

    // Unwrapped angle and cumulative arclength, extended by one period.
    std::vector<double> U(n + 1), s(n + 1), Z(n + 1);
    U[0] = c.thetas[0];
    s[0] = 0.0;
    for (std::ptrdiff_t j = 0; j < n; ++j) {
        U[j + 1] = U[j] + wrap(c.thetas[next(j, n)] - c.thetas[j]);
        s[j + 1] = s[j] + g.ds[j];
        Z[j] = c.zs[j];
    }
    Z[n] = c.zs[0];
    const double shift = U[n] - U[0];
    const double S = s[n];

    auto U_at = [&](std::ptrdiff_t j) {
        if (j < 0) return U[j + n] - shift;
        if (j > n) return U[j - n] + shift;
        return U[j];
    };
    auto Z_at = [&](std::ptrdiff_t j) { return Z[((j % n) + n) % n]; };
    auto h_at = [&](std::ptrdiff_t j) { return g.ds[((j % n) + n) % n]; }; // segment j -> j + 1

    // Three-point derivative on a nonuniform grid.
    auto deriv = [&](auto&& F, std::ptrdiff_t j) {
        const double hm = h_at(j - 1), hp = h_at(j);
        return hm / (hp * (hm + hp)) * (F(j + 1) - F(j)) + hp / (hm * (hm + hp)) * (F(j) - F(j - 1));
    };

    CurveState out = c;
    std::ptrdiff_t seg = 0;
    for (std::ptrdiff_t k = 1; k < n; ++k) {
        const double target = S * static_cast<double>(k) / static_cast<double>(n);
        while (seg + 1 < n && s[seg + 1] <= target) ++seg;
        const double h = s[seg + 1] - s[seg];
        const double x = (target - s[seg]) / h;
        const double h00 = (1 + 2 * x) * (1 - x) * (1 - x), h10 = x * (1 - x) * (1 - x);
        const double h01 = x * x * (3 - 2 * x), h11 = x * x * (x - 1);
        const double u = h00 * U_at(seg) + h10 * h * deriv(U_at, seg) + h01 * U_at(seg + 1) +
                         h11 * h * deriv(U_at, seg + 1);
        const double z = h00 * Z_at(seg) + h10 * h * deriv(Z_at, seg) + h01 * Z_at(seg + 1) +
                         h11 * h * deriv(Z_at, seg + 1);
        out.thetas[k] = reduce_angle(u);
        out.zs[k] = z;
    }
    check_domain(out, w);
    return out;
}

double hausdorff_distance(const CurveState& A, const CurveState& B, const WarpingFunction& w) {
    auto one_sided = [&](const CurveState& P, const CurveState& Q) {
        const auto np = static_cast<std::ptrdiff_t>(P.size());
        const auto nq = static_cast<std::ptrdiff_t>(Q.size());
        return max_over(Exec::Parallel, np, [&](std::ptrdiff_t i) {
            const double rp = w.value(P.zs[i]);
            double best = kInf;
            for (std::ptrdiff_t j = 0; j < nq; ++j) {
                const std::ptrdiff_t jp = next(j, nq);
                const double x1 = rp * wrap(Q.thetas[j] - P.thetas[i]), y1 = Q.zs[j] - P.zs[i];
                const double ex = rp * wrap(Q.thetas[jp] - Q.thetas[j]), ey = Q.zs[jp] - Q.zs[j];
                const double len2 = ex * ex + ey * ey;
                double tpar = len2 > 0.0 ? -(x1 * ex + y1 * ey) / len2 : 0.0;
                tpar = std::clamp(tpar, 0.0, 1.0);
                best = std::min(best, std::hypot(x1 + tpar * ex, y1 + tpar * ey));
            }
            return best;
        });
    };
    return std::max(one_sided(A, B), one_sided(B, A));
}

const char* to_string(StopReason s) {
    switch (s) {
    case StopReason::ReachedTEnd: return "ReachedTEnd";
    case StopReason::ReachedZStop: return "ReachedZStop";
    case StopReason::GraphLost: return "GraphLost";
    case StopReason::CurvatureBlowup: return "CurvatureBlowup";
    case StopReason::DomainExit: return "DomainExit";
    }
    return "?";
}

CsfSeries run_csf(const CurveState& initial, const WarpingFunction& w, const CsfConfig& cfg) {
    if (initial.mode != cfg.mode) throw PreconditionError("run_csf: initial curve mode differs from the config");
    if (!(cfg.t_end > 0.0) || !(cfg.cadence > 0.0)) throw PreconditionError("run_csf: t_end and cadence must be positive");
    check_domain(initial, w);

    CsfSeries series;
    CurveState state = initial;
    std::size_t next_snapshot = 0;
    auto snapshots = cfg.snapshot_times;
    std::sort(snapshots.begin(), snapshots.end());

    auto record = [&](const CurveState& c) {
        const CurveDiagnostics d = diagnostics(c, w, cfg.m_max, cfg.exec);
        CsfRow row{};
        row.t = c.t;
        row.theta_min = d.extremes.theta_min;
        row.v_max = d.extremes.v_max;
        row.kappa_max = d.extremes.kappa_max_abs;
        if (d.extremes.theta_min > 0.0) {
            series.sup_v = std::max(series.sup_v, d.extremes.v_max);
            const auto gf = g_function(d, 0.5 / (series.sup_v * series.sup_v));
            row.g_max = *std::max_element(gf.begin(), gf.end());
        } else {
            row.g_max = kNaN;
        }
        for (const auto& col : d.ds_kappa) {
            double m = 0.0;
            for (double x : col) m = std::max(m, std::abs(x));
            row.dskappa_max.push_back(m);
        }
        row.z_min = *std::min_element(c.zs.begin(), c.zs.end());
        row.z_max = *std::max_element(c.zs.begin(), c.zs.end());
        series.rows.push_back(row);
        return row;
    };
    auto stop_with = [&](StopReason why, const std::string& detail) {
        series.stop = why;
        series.events.push_back({to_string(why), state.t, detail});
    };

    while (next_snapshot < snapshots.size() && snapshots[next_snapshot] <= 0.0) {
        series.snapshots.push_back(state);
        ++next_snapshot;
    }
    const CsfRow first = record(state);
    if (first.theta_min <= 0.0 && cfg.mode == CurveMode::Graph)
        throw GraphLost("run_csf: initial curve is not a graph");

    long cadence_index = 1;
    bool done = false;
    while (!done) {
        const double t_row = std::min(cfg.t_end, cadence_index * cfg.cadence);
        double target = t_row;
        if (next_snapshot < snapshots.size()) target = std::min(target, snapshots[next_snapshot]);

        double dt = cfg.dt > 0.0 ? cfg.dt : stable_dt(state, w, cfg.cfl);
        bool clipped = false;
        if (state.t + dt >= target * (1.0 - 1e-14)) {
            dt = target - state.t;
            clipped = true;
        }
        try {
            state = cfg.mode == CurveMode::Graph ? step_graph(state, w, dt, cfg.exec)
                                                 : step_lagrangian(state, w, dt, cfg.redistribute, cfg.exec);
        } catch (const DomainExit& e) {
            stop_with(StopReason::DomainExit, e.what());
            break;
        } catch (const GraphLost& e) {
            stop_with(StopReason::GraphLost, e.what());
            break;
        } catch (const DegenerateSegment& e) {
            stop_with(StopReason::CurvatureBlowup, e.what());
            break;
        }
        ++series.steps;
        if (clipped) state.t = target;

        const CurveGeometry g = curve_geometry(state, w, cfg.exec);
        const double kmax = max_over(cfg.exec, static_cast<std::ptrdiff_t>(state.size()),
                                     [&](std::ptrdiff_t j) { return std::abs(g.kappa[j]); });
        const double amin = *std::min_element(g.a.begin(), g.a.end());

        while (next_snapshot < snapshots.size() && snapshots[next_snapshot] <= state.t) {
            series.snapshots.push_back(state);
            ++next_snapshot;
        }
        const bool at_row = clipped && state.t == t_row;
        if (at_row) ++cadence_index;
        if (amin <= 0.0) {
            record(state);
            stop_with(StopReason::GraphLost, fmt::format("min Theta = {}", amin));
            break;
        }
        if (kmax > cfg.kappa_blowup) {
            record(state);
            stop_with(StopReason::CurvatureBlowup, fmt::format("max |kappa| = {}", kmax));
            break;
        }
        if (at_row) {
            const CsfRow row = record(state);
            if (cfg.z_stop && row.z_max < *cfg.z_stop) {
                series.stop = StopReason::ReachedZStop;
                done = true;
            } else if (state.t >= cfg.t_end) {
                series.stop = StopReason::ReachedTEnd;
                done = true;
            }
        }
    }
    series.final_state = state;
    return series;
}

} // namespace warpflow
