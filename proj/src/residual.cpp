#include "warpflow/residual.hpp"

#include "warpflow/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace warpflow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool is_upper_bound(Equation e) {
    return e == Equation::ASq_bound || e == Equation::G_bound_n1 || e == Equation::G_bound_n;
}

std::vector<double> phi_of(const std::vector<double>& v, double k) {
    std::vector<double> out(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) out[j] = v[j] * v[j] / (1.0 - k * v[j] * v[j]);
    return out;
}

struct CurveFields {
    CurveGeometry g;
    std::vector<double> r2; // r''/r
    std::vector<double> v;
    std::vector<double> phi;
    std::vector<double> quantity;
};

std::vector<double> curve_quantity(Equation eq, const CurveFields& f) {
    const std::size_t n = f.g.kappa.size();
    std::vector<double> q(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double kap = f.g.kappa[j];
        switch (eq) {
        case Equation::ThetaN1: q[j] = f.g.a[j]; break;
        case Equation::Vn1: q[j] = f.v[j]; break;
        case Equation::KappaSq: q[j] = kap * kap; break;
        case Equation::G_bound_n1: q[j] = f.phi[j] * kap * kap; break;
        default: throw PreconditionError(fmt::format("{} is not a curve equation", to_string(eq)));
        }
    }
    return q;
}

CurveFields curve_fields(const CurveState& c, const WarpingFunction& w, Equation eq, double k) {
    CurveFields f;
    f.g = curve_geometry(c, w, Exec::Serial);
    const std::size_t n = c.size();
    f.r2.resize(n);
    f.v.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        if (!(f.g.a[j] > 0.0)) throw GraphLost("residual window: Theta <= 0");
        f.r2[j] = w.ratio(c.zs[j], 2);
        f.v[j] = 1.0 / f.g.a[j];
    }
    f.phi = phi_of(f.v, k);
    f.quantity = curve_quantity(eq, f);
    return f;
}

struct SymFields {
    HypersurfaceDiagnostics d;
    std::vector<double> r2;
    std::vector<double> ric_M;
    std::vector<double> ric_NN;
    std::vector<double> norm_R;
    std::vector<double> norm_gradR;
    std::vector<double> phi;
    std::vector<double> quantity;
};

SymFields sym_fields(const SymmetricGraphState& s, const WarpingFunction& w, Equation eq, double k) {
    SymFields f;
    f.d = mean_curvature(s, w, Exec::Serial);
    const std::size_t n = s.size();
    const bool flat = s.model.kind == ModelKind::FlatTorus;
    const bool needs_norms = eq == Equation::ASq_bound || eq == Equation::G_bound_n;
    if (needs_norms && !flat)
        throw UnsupportedModel(fmt::format("{} needs curvature norms, available for flat M only", to_string(eq)));
    f.r2.resize(n);
    f.ric_M.resize(n);
    f.ric_NN.resize(n);
    f.norm_R.assign(n, 0.0);
    f.norm_gradR.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        const double th = f.d.a[j];
        f.r2[j] = w.ratio(s.zs[j], 2);
        f.ric_M[j] = ricci_M_normal(s.model, th);
        f.ric_NN[j] = ambient_ricci_normal(s.model, w, s.zs[j], th);
        if (needs_norms) {
            const auto cc = curvature_components(w, s.model.n, s.zs[j]);
            f.norm_R[j] = cc.norm_R;
            f.norm_gradR[j] = cc.norm_gradR;
        }
    }
    f.phi = phi_of(f.d.v, k);
    f.quantity.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        switch (eq) {
        case Equation::ThetaN: f.quantity[j] = f.d.a[j]; break;
        case Equation::Vn: f.quantity[j] = f.d.v[j]; break;
        case Equation::F_bound: f.quantity[j] = f.d.f[j]; break;
        case Equation::ASq_bound: f.quantity[j] = f.d.A_norm2[j]; break;
        case Equation::G_bound_n: f.quantity[j] = f.phi[j] * f.d.A_norm2[j]; break;
        default: throw PreconditionError(fmt::format("{} is not a hypersurface equation", to_string(eq)));
        }
    }
    return f;
}

template <class Snap>
void check_window(const std::vector<Snap>& snaps, double dt_snap) {
    if (static_cast<int>(snaps.size()) < 2 * kWindowTrim + 1)
        throw WindowTooShort(fmt::format("window has {} snapshots, needs at least {}", snaps.size(),
                                         2 * kWindowTrim + 1));
    if (!(dt_snap > 0.0)) throw WindowTooShort("window snapshot spacing must be positive");
}

} // namespace

const char* to_string(Equation e) {
    switch (e) {
    case Equation::ThetaN1: return "ThetaN1";
    case Equation::ThetaN: return "ThetaN";
    case Equation::Vn1: return "Vn1";
    case Equation::Vn: return "Vn";
    case Equation::KappaSq: return "KappaSq";
    case Equation::ASq_bound: return "ASq_bound";
    case Equation::G_bound_n1: return "G_bound_n1";
    case Equation::G_bound_n: return "G_bound_n";
    case Equation::F_bound: return "F_bound";
    }
    return "?";
}

bool is_inequality(Equation e) { return is_upper_bound(e) || e == Equation::F_bound; }

CurveWindow record_curve_window(const CurveState& initial, const WarpingFunction& w, double dt, int steps_between,
                                int count, bool redistribute_nodes) {
    if (steps_between < 1 || count < 1) throw PreconditionError("record_curve_window: bad spacing");
    CurveWindow win;
    win.dt_snap = dt * steps_between;
    CurveState s = initial;
    win.snaps.push_back(s);
    for (int k = 1; k < count; ++k) {
        for (int i = 0; i < steps_between; ++i) {
            s = s.mode == CurveMode::Graph ? step_graph(s, w, dt, Exec::Serial)
                                           : step_lagrangian(s, w, dt, redistribute_nodes, Exec::Serial);
        }
        win.snaps.push_back(s);
    }
    for (const auto& c : win.snaps) {
        const auto g = curve_geometry(c, w, Exec::Serial);
        const double amin = *std::min_element(g.a.begin(), g.a.end());
        if (!(amin > 0.0)) throw GraphLost("residual window: Theta <= 0");
        win.sup_v = std::max(win.sup_v, 1.0 / amin);
    }
    return win;
}

SymWindow record_sym_window(const SymmetricGraphState& initial, const WarpingFunction& w, double dt,
                            int steps_between, int count) {
    if (steps_between < 1 || count < 1) throw PreconditionError("record_sym_window: bad spacing");
    SymWindow win;
    win.dt_snap = dt * steps_between;
    SymmetricGraphState s = initial;
    win.snaps.push_back(s);
    for (int k = 1; k < count; ++k) {
        for (int i = 0; i < steps_between; ++i) s = step_sym(s, w, dt, Exec::Serial);
        win.snaps.push_back(s);
    }
    for (const auto& c : win.snaps) win.sup_v = std::max(win.sup_v, 1.0 / mean_curvature(c, w, Exec::Serial).theta_min);
    return win;
}

WindowSample evaluate(const CurveWindow& win, const WarpingFunction& w, Equation eq) {
    check_window(win.snaps, win.dt_snap);
    const double k = 0.5 / (win.sup_v * win.sup_v);
    std::vector<CurveFields> F;
    for (const auto& c : win.snaps) F.push_back(curve_fields(c, w, eq, k));
    WindowSample out;
    const int K = static_cast<int>(win.snaps.size());
    const double two_dt = 2.0 * win.dt_snap;
    for (int s = kWindowTrim; s < K - kWindowTrim; ++s) {
        const CurveFields& f = F[s];
        const auto& Q = f.quantity;
        const auto Qs = d_s(Q, f.g.ds, Exec::Serial);
        const auto Qss = d_ss(Q, f.g.ds, Exec::Serial);
        const auto vs = d_s(f.v, f.g.ds, Exec::Serial);
        const auto ks = d_s(f.g.kappa, f.g.ds, Exec::Serial);
        const auto phis = d_s(f.phi, f.g.ds, Exec::Serial);
        const CurveState& prev = win.snaps[s - 1];
        const CurveState& next = win.snaps[s + 1];
        for (std::size_t j = 0; j < Q.size(); ++j) {
            const double th_dot = std::remainder(next.thetas[j] - prev.thetas[j], kTwoPi) / two_dt;
            const double z_dot = (next.zs[j] - prev.zs[j]) / two_dt;
            const double vtan = f.g.a[j] * f.g.r[j] * th_dot + f.g.b[j] * z_dot;
            const double dQ = (F[s + 1].quantity[j] - F[s - 1].quantity[j]) / two_dt;
            out.lhs.push_back(dQ - vtan * Qs[j] - Qss[j]);

            const double th = f.g.a[j], v = f.v[j], kap = f.g.kappa[j], lw = f.g.w[j], r2 = f.r2[j];
            const double shape = r2 - 2.0 * lw * lw; // (r r'' - 2 r'^2) / r^2
            const double mix = lw * th - kap;
            double rhs = 0.0;
            switch (eq) {
            case Equation::ThetaN1: rhs = shape * th * (1.0 - th * th) + mix * mix * th; break;
            case Equation::Vn1: rhs = -2.0 / v * vs[j] * vs[j] - shape * (v - 1.0 / v) - mix * mix * v; break;
            case Equation::KappaSq: rhs = -2.0 * ks[j] * ks[j] + 2.0 * kap * kap * (kap * kap - r2); break;
            case Equation::G_bound_n1: {
                const double g = Q[j], phi = f.phi[j];
                const double v3 = v * v * v;
                rhs = -2.0 * k * g * g + 4.0 * lw * std::sqrt(phi) / v3 * std::pow(g, 1.5) -
                      (shape * (v - 1.0 / v) * 2.0 * phi / v3 + 2.0 * r2) * g - Qs[j] * phis[j] / phi;
                break;
            }
            default: break;
            }
            out.rhs.push_back(rhs);
        }
    }
    return out;
}

WindowSample evaluate(const SymWindow& win, const WarpingFunction& w, Equation eq, const InequalityParams& p) {
    check_window(win.snaps, win.dt_snap);
    const double k = 0.5 / (win.sup_v * win.sup_v);
    std::vector<SymFields> F;
    for (const auto& c : win.snaps) F.push_back(sym_fields(c, w, eq, k));
    WindowSample out;
    const int K = static_cast<int>(win.snaps.size());
    const double two_dt = 2.0 * win.dt_snap;
    const int n = win.snaps.front().model.n;
    for (int s = kWindowTrim; s < K - kWindowTrim; ++s) {
        const SymFields& f = F[s];
        const auto& d = f.d;
        const auto& Q = f.quantity;
        const auto Qs = sym_d_s(d, Q, Exec::Serial);
        const auto lap = sym_laplacian(d, Q, Exec::Serial);
        const auto vs = sym_d_s(d, d.v, Exec::Serial);
        const auto phis = sym_d_s(d, f.phi, Exec::Serial);
        const auto& prev = win.snaps[s - 1];
        const auto& next = win.snaps[s + 1];
        for (std::size_t j = 0; j < Q.size(); ++j) {
            const double z_dot = (next.zs[j] - prev.zs[j]) / two_dt;
            const double vtan = d.b[j] * z_dot;
            const double dQ = (F[s + 1].quantity[j] - F[s - 1].quantity[j]) / two_dt;
            out.lhs.push_back(dQ - vtan * Qs[j] - lap[j]);

            const double th = d.a[j], v = d.v[j], lw = d.w[j], r2 = f.r2[j], r = d.r[j];
            const double H = d.H[j], A2 = d.A_norm2[j];
            // {n (r r'' - r'^2) + Ric_M(v_M, v_M)} / r^2
            const double tilt = n * (r2 - lw * lw) + f.ric_M[j] / (r * r);
            double rhs = 0.0;
            switch (eq) {
            case Equation::ThetaN:
                rhs = 2.0 * lw * (d.b[j] * Qs[j] - H) + A2 * th + n * lw * lw * th + th * (1.0 - th * th) * tilt;
                break;
            case Equation::Vn:
                rhs = -2.0 / v * vs[j] * vs[j] + 2.0 * lw * d.b[j] * vs[j] + 2.0 * lw * H * v * v - A2 * v -
                      n * lw * lw * v - tilt * (v - 1.0 / v);
                break;
            case Equation::F_bound: {
                const double fv = Q[j];
                rhs = 2.0 * lw * d.b[j] * Qs[j] - Qs[j] * Qs[j] / (2.0 * fv) +
                      2.0 * n * (1.0 - fv) * (lw * lw * (p.alpha * fv - 1.0) + p.c * fv / (r * r));
                break;
            }
            case Equation::ASq_bound: {
                const double A = std::sqrt(A2);
                rhs = -2.0 * d.nablaA_norm2[j] + 2.0 * A2 * A2 + 2.0 * A2 * f.ric_NN[j] + 8.0 * A2 * f.norm_R[j] +
                      4.0 * A * f.norm_gradR[j];
                break;
            }
            case Equation::G_bound_n: {
                const double g = Q[j], phi = f.phi[j];
                const double v3 = v * v * v;
                rhs = -2.0 * k * g * g + 4.0 * std::sqrt(static_cast<double>(n)) * lw * std::sqrt(phi) / v *
                                             std::pow(g, 1.5) +
                      4.0 * std::sqrt(phi) * f.norm_gradR[j] * std::sqrt(g) +
                      (-2.0 * phi / v3 * tilt * (v - 1.0 / v) + 2.0 * f.ric_NN[j] + 8.0 * f.norm_R[j]) * g -
                      Qs[j] * phis[j] / phi;
                break;
            }
            default: break;
            }
            out.rhs.push_back(rhs);
        }
    }
    return out;
}

double residual_norm(const WindowSample& s) {
    double m = 0.0;
    for (std::size_t i = 0; i < s.lhs.size(); ++i) m = std::max(m, std::abs(s.lhs[i] - s.rhs[i]));
    return m;
}

double one_sided_margin(const WindowSample& s, Equation eq) {
    const bool upper = is_upper_bound(eq);
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.lhs.size(); ++i) {
        const double slack = upper ? s.rhs[i] - s.lhs[i] : s.lhs[i] - s.rhs[i];
        const double scale = std::max({std::abs(s.lhs[i]), std::abs(s.rhs[i]), 1.0});
        m = std::min(m, slack / scale);
    }
    return m;
}

double observed_order(const std::vector<GridLevel>& levels, const std::vector<double>& norms) {
    const std::size_t m = levels.size();
    if (m < 2 || norms.size() != m) throw PreconditionError("observed_order needs at least two levels");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double x = std::log(static_cast<double>(levels[i].N));
        const double y = std::log(norms[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return -slope;
}

namespace {

template <class Window>
ResidualReport equality_report(const std::vector<Window>& levels, Equation eq,
                               const std::function<WindowSample(const Window&)>& eval) {
    ResidualReport rep;
    rep.equation = eq;
    for (const auto& win : levels) {
        rep.grid_levels.push_back({static_cast<int>(win.snaps.front().size()), win.dt_snap});
        rep.residual_norms.push_back(residual_norm(eval(win)));
    }
    rep.observed_order = observed_order(rep.grid_levels, rep.residual_norms);
    rep.passed = rep.observed_order >= kMinObservedOrder;
    return rep;
}

template <class Window>
ResidualReport inequality_report(const std::vector<Window>& levels, Equation eq,
                                 const std::function<WindowSample(const Window&)>& eval) {
    ResidualReport rep;
    rep.equation = eq;
    rep.one_sided = true;
    rep.passed = true;
    for (const auto& win : levels) {
        rep.grid_levels.push_back({static_cast<int>(win.snaps.front().size()), win.dt_snap});
        const double m = one_sided_margin(eval(win), eq);
        rep.residual_norms.push_back(m);
        if (m < -kInequalityTolerance) rep.passed = false;
    }
    return rep;
}

template <class Window>
std::pair<double, double> z_range(const std::vector<Window>& levels) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& win : levels) {
        for (const auto& s : win.snaps) {
            lo = std::min(lo, *std::min_element(s.zs.begin(), s.zs.end()));
            hi = std::max(hi, *std::max_element(s.zs.begin(), s.zs.end()));
        }
    }
    return {lo, hi};
}

} // namespace

ResidualReport residual_theta_n1(const std::vector<CurveWindow>& levels, const WarpingFunction& w) {
    return equality_report<CurveWindow>(levels, Equation::ThetaN1,
                                        [&](const CurveWindow& c) { return evaluate(c, w, Equation::ThetaN1); });
}

ResidualReport residual_v(const std::vector<CurveWindow>& levels, const WarpingFunction& w) {
    return equality_report<CurveWindow>(levels, Equation::Vn1,
                                        [&](const CurveWindow& c) { return evaluate(c, w, Equation::Vn1); });
}

ResidualReport residual_v(const std::vector<SymWindow>& levels, const WarpingFunction& w) {
    return equality_report<SymWindow>(levels, Equation::Vn,
                                      [&](const SymWindow& c) { return evaluate(c, w, Equation::Vn); });
}

ResidualReport residual_theta_n(const std::vector<SymWindow>& levels, const WarpingFunction& w) {
    return equality_report<SymWindow>(levels, Equation::ThetaN,
                                      [&](const SymWindow& c) { return evaluate(c, w, Equation::ThetaN); });
}

ResidualReport residual_kappa_sq(const std::vector<CurveWindow>& levels, const WarpingFunction& w) {
    return equality_report<CurveWindow>(levels, Equation::KappaSq,
                                        [&](const CurveWindow& c) { return evaluate(c, w, Equation::KappaSq); });
}

ResidualReport residual_inequalities(const std::vector<CurveWindow>& levels, const WarpingFunction& w,
                                     Equation which) {
    if (which != Equation::G_bound_n1)
        throw PreconditionError(fmt::format("{} is not a curve inequality", to_string(which)));
    const auto [lo, hi] = z_range(levels);
    const auto grid = linspace(lo, hi, 257);
    for (double z : grid) {
        if (!(w.ratio(z, 1) >= 0.0)) throw HypothesisError(fmt::format("r' < 0 at z = {} inside the window", z));
    }
    return inequality_report<CurveWindow>(levels, which,
                                          [&](const CurveWindow& c) { return evaluate(c, w, which); });
}

ResidualReport residual_inequalities(const std::vector<SymWindow>& levels, const WarpingFunction& w, Equation which,
                                     double alpha) {
    if (which != Equation::F_bound && which != Equation::G_bound_n && which != Equation::ASq_bound)
        throw PreconditionError(fmt::format("{} is not a hypersurface inequality", to_string(which)));
    const auto [lo, hi] = z_range(levels);
    const auto grid = linspace(lo, hi, 257);
    const ModelM model = levels.front().snaps.front().model;
    InequalityParams p;
    if (which == Equation::F_bound) {
        const ConditionReport rep = check_conditions(w, grid, alpha, model.rho());
        if (!rep.c1_holds || rep.c2_margin < 0.0)
            throw HypothesisError(fmt::format("conditions fail on the window range (margin {})", rep.c2_margin));
        p.alpha = alpha;
        p.c = rep.c;
    } else if (which == Equation::G_bound_n) {
        for (double z : grid) {
            if (!(w.ratio(z, 1) >= 0.0)) throw HypothesisError(fmt::format("r' < 0 at z = {} inside the window", z));
        }
    }
    return inequality_report<SymWindow>(levels, which, [&](const SymWindow& c) { return evaluate(c, w, which, p); });
}

std::vector<CurveWindow> curve_windows(const std::function<CurveState(int)>& initial, const WarpingFunction& w,
                                       const std::vector<int>& Ns, double cfl, int steps_between,
                                       bool redistribute_nodes) {
    std::vector<CurveWindow> out;
    for (int N : Ns) {
        const CurveState s0 = initial(N);
        const double dt = stable_dt(s0, w, cfl);
        out.push_back(record_curve_window(s0, w, dt, steps_between, kWindowSnapshots, redistribute_nodes));
    }
    return out;
}

std::vector<SymWindow> sym_windows(const std::function<SymmetricGraphState(int)>& initial, const WarpingFunction& w,
                                   const std::vector<int>& Ns, double cfl, int steps_between) {
    std::vector<SymWindow> out;
    for (int N : Ns) {
        const SymmetricGraphState s0 = initial(N);
        const double dt = sym_stable_dt(s0, w, cfl);
        out.push_back(record_sym_window(s0, w, dt, steps_between, kWindowSnapshots));
    }
    return out;
}

} // namespace warpflow
