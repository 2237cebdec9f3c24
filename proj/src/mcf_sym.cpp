#include "warpflow/mcf_sym.hpp"

#include "warpflow/errors.hpp"
#include "warpflow/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace warpflow {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxSymCfl = 0.5;

bool periodic(const ModelM& m) { return m.kind == ModelKind::FlatTorus; }

// Neighbour indices; at the sphere poles the neighbour is the mirror ghost, which
// carries the same value as the boundary node.
std::ptrdiff_t right(std::ptrdiff_t j, std::ptrdiff_t n, bool per) { return j + 1 < n ? j + 1 : (per ? 0 : n - 1); }
std::ptrdiff_t left(std::ptrdiff_t j, std::ptrdiff_t n, bool per) { return j > 0 ? j - 1 : (per ? n - 1 : 0); }

void check_domain(const std::vector<double>& zs, const WarpingFunction& w) {
    for (double z : zs) {
        if (!w.contains(z)) throw DomainExit(fmt::format("graph left the domain (z = {})", z));
    }
}

// Explicit-step limit factor: the pole term of the sphere adds to the stiffness.
double cfl_factor(const ModelM& m) { return m.kind == ModelKind::FlatTorus ? 1.0 : 2.0 / (m.n + 1.0); }

} // namespace

ModelM ModelM::flat_torus(int n) {
    if (n < 2) throw PreconditionError("flat torus model needs n >= 2");
    return {ModelKind::FlatTorus, n};
}

ModelM ModelM::round_sphere(int n) {
    if (n < 2) throw PreconditionError("round sphere model needs n >= 2");
    return {ModelKind::RoundSphere, n};
}

std::string ModelM::name() const {
    return fmt::format("{}({})", kind == ModelKind::FlatTorus ? "flat_torus" : "round_sphere", n);
}

double SymmetricGraphState::spacing() const {
    const double N = static_cast<double>(size());
    return model.kind == ModelKind::FlatTorus ? 2.0 * kPi / N : kPi / N;
}

SymmetricGraphState symmetric_graph(const ModelM& model, int N, const std::function<double(double)>& f) {
    if (N < 8) throw DegenerateGrid("symmetric graph needs at least 8 nodes");
    SymmetricGraphState s;
    s.model = model;
    s.xs.resize(N);
    s.zs.resize(N);
    for (int j = 0; j < N; ++j) {
        s.xs[j] = model.kind == ModelKind::FlatTorus ? 2.0 * kPi * j / N : (j + 0.5) * kPi / N;
        s.zs[j] = f(s.xs[j]);
    }
    return s;
}

double ricci_M_normal(const ModelM& model, double theta) {
    if (model.kind == ModelKind::FlatTorus) return 0.0;
    return theta < 1.0 ? model.n - 1.0 : 0.0;
}

double ambient_ricci_normal(const ModelM& model, const WarpingFunction& w, double z, double theta) {
    const AmbientRicci ric = ambient_ricci(w, model.n, z, model.ambient());
    return (1.0 - theta * theta) * ric.ric_tangent + theta * theta * ric.ric_z;
}

HypersurfaceDiagnostics mean_curvature(const SymmetricGraphState& s, const WarpingFunction& w, Exec exec) {
    const auto N = static_cast<std::ptrdiff_t>(s.size());
    if (N < 8) throw DegenerateGrid("symmetric graph needs at least 8 nodes");
    const bool per = periodic(s.model);
    const bool sphere = !per;
    const int n = s.model.n;
    const double h = s.spacing();

    HypersurfaceDiagnostics d;
    d.n = n;
    d.periodic = per;
    for (auto* v : {&d.r, &d.w, &d.a, &d.b, &d.kappa1, &d.kappa2, &d.lambda, &d.H, &d.A_norm2, &d.theta_angle, &d.f,
                    &d.v, &d.g_frak, &d.ds_minus, &d.ds_plus, &d.nablaA_surrogate, &d.nabla2A_surrogate,
                    &d.nablaA_norm2})
        v->resize(N);

    for_each_index(exec, N, [&](std::ptrdiff_t j) {
        const std::ptrdiff_t jp = right(j, N, per), jm = left(j, N, per);
        const double z = s.zs[j], zp = s.zs[jp], zm = s.zs[jm];
        const double zx = (zp - zm) / (2.0 * h);
        const double zxx = (zp - 2.0 * z + zm) / (h * h);
        const double r = w.value(z);
        const double lw = w.ratio(z, 1);
        const double L = std::hypot(r, zx);
        const double a = r / L, b = zx / L;
        const double k1 = (2.0 * r * lw * zx * zx - r * zxx + r * r * r * lw) / (L * L * L);
        double k2 = lw * a;
        double lam = lw * b;
        if (sphere) {
            const double cot = 1.0 / std::tan(s.xs[j]);
            k2 -= cot * b / r;
            lam += cot * a / r;
        }
        d.r[j] = r;
        d.w[j] = lw;
        d.a[j] = a;
        d.b[j] = b;
        d.kappa1[j] = k1;
        d.kappa2[j] = k2;
        d.lambda[j] = lam;
        d.H[j] = k1 + (n - 1) * k2;
        d.A_norm2[j] = k1 * k1 + (n - 1) * k2 * k2;
        d.theta_angle[j] = a;
        d.f[j] = a * a;
        d.v[j] = 1.0 / a;
        d.ds_plus[j] = std::hypot(w.value(0.5 * (z + zp)) * h, zp - z);
        d.ds_minus[j] = std::hypot(w.value(0.5 * (z + zm)) * h, z - zm);
    });

    d.theta_min = *std::min_element(d.a.begin(), d.a.end());
    d.mu = d.theta_min * d.theta_min;
    if (!(d.theta_min > 0.0)) throw GraphLost("symmetric graph: Theta <= 0");
    const double vmax = 1.0 / d.theta_min;
    const double k = 0.5 / (vmax * vmax);

    const auto dk1 = sym_d_s(d, d.kappa1, exec);
    const auto dk2 = sym_d_s(d, d.kappa2, exec);
    const auto ddk1 = sym_d_ss(d, d.kappa1, exec);
    const auto ddk2 = sym_d_ss(d, d.kappa2, exec);
    for_each_index(exec, N, [&](std::ptrdiff_t j) {
        const double v = d.v[j];
        d.g_frak[j] = v * v / (1.0 - k * v * v) * d.A_norm2[j];
        d.nablaA_surrogate[j] = std::sqrt(dk1[j] * dk1[j] + (n - 1) * dk2[j] * dk2[j]);
        d.nabla2A_surrogate[j] = std::sqrt(ddk1[j] * ddk1[j] + (n - 1) * ddk2[j] * ddk2[j]);
        const double split = d.lambda[j] * (d.kappa1[j] - d.kappa2[j]);
        d.nablaA_norm2[j] = dk1[j] * dk1[j] + (n - 1) * (dk2[j] * dk2[j] + 2.0 * split * split);
    });
    d.A2_max = max_over(exec, N, [&](std::ptrdiff_t j) { return d.A_norm2[j]; });
    d.g_max = max_over(exec, N, [&](std::ptrdiff_t j) { return d.g_frak[j]; });
    d.nablaA_surrogate_max = max_over(exec, N, [&](std::ptrdiff_t j) { return d.nablaA_surrogate[j]; });
    d.nabla2A_surrogate_max = max_over(exec, N, [&](std::ptrdiff_t j) { return d.nabla2A_surrogate[j]; });
    return d;
}

std::vector<double> sym_d_s(const HypersurfaceDiagnostics& d, const std::vector<double>& f, Exec exec) {
    const auto N = static_cast<std::ptrdiff_t>(f.size());
    const bool per = d.periodic;
    std::vector<double> out(N);
    for_each_index(exec, N, [&](std::ptrdiff_t j) {
        out[j] = (f[right(j, N, per)] - f[left(j, N, per)]) / (d.ds_minus[j] + d.ds_plus[j]);
    });
    return out;
}

std::vector<double> sym_d_ss(const HypersurfaceDiagnostics& d, const std::vector<double>& f, Exec exec) {
    const auto N = static_cast<std::ptrdiff_t>(f.size());
    const bool per = d.periodic;
    std::vector<double> out(N);
    for_each_index(exec, N, [&](std::ptrdiff_t j) {
        const double hp = d.ds_plus[j], hm = d.ds_minus[j];
        out[j] = 2.0 * ((f[right(j, N, per)] - f[j]) / hp - (f[j] - f[left(j, N, per)]) / hm) / (hp + hm);
    });
    return out;
}

std::vector<double> sym_laplacian(const HypersurfaceDiagnostics& d, const std::vector<double>& f, Exec exec) {
    const auto N = static_cast<std::ptrdiff_t>(f.size());
    const auto fs = sym_d_s(d, f, exec);
    auto out = sym_d_ss(d, f, exec);
    for_each_index(exec, N, [&](std::ptrdiff_t j) { out[j] += (d.n - 1) * d.lambda[j] * fs[j]; });
    return out;
}

double sym_stable_dt(const SymmetricGraphState& s, const WarpingFunction& w, double cfl) {
    const auto d = mean_curvature(s, w, Exec::Serial);
    double m = kInf;
    for (std::size_t j = 0; j < s.size(); ++j) m = std::min(m, std::min(d.ds_plus[j], d.ds_minus[j]));
    return cfl * cfl_factor(s.model) * m * m;
}

SymmetricGraphState step_sym(const SymmetricGraphState& s, const WarpingFunction& w, double dt, Exec exec) {
    const auto N = static_cast<std::ptrdiff_t>(s.size());
    const auto d1 = mean_curvature(s, w, exec);
    double m = kInf;
    for (std::ptrdiff_t j = 0; j < N; ++j) m = std::min(m, std::min(d1.ds_plus[j], d1.ds_minus[j]));
    if (dt > kMaxSymCfl * cfl_factor(s.model) * m * m * (1.0 + 1e-12))
        throw StepTooLarge(fmt::format("dt = {} exceeds the explicit stability limit", dt));
    SymmetricGraphState mid = s;
    for_each_index(exec, N, [&](std::ptrdiff_t j) { mid.zs[j] = s.zs[j] - dt * d1.H[j] * d1.v[j]; });
    check_domain(mid.zs, w);
    const auto d2 = mean_curvature(mid, w, exec);
    SymmetricGraphState out = s;
    for_each_index(exec, N, [&](std::ptrdiff_t j) {
        out.zs[j] = s.zs[j] - 0.5 * dt * (d1.H[j] * d1.v[j] + d2.H[j] * d2.v[j]);
    });
    for (double z : out.zs) {
        if (!std::isfinite(z)) throw GraphLost("symmetric graph slope blew up");
    }
    check_domain(out.zs, w);
    out.t = s.t + dt;
    return out;
}

McfSeries run_mcf(const SymmetricGraphState& initial, const WarpingFunction& w, const McfConfig& cfg) {
    if (!(cfg.t_end > 0.0) || !(cfg.cadence > 0.0)) throw PreconditionError("run_mcf: t_end and cadence must be positive");
    check_domain(initial.zs, w);
    McfSeries series;
    SymmetricGraphState state = initial;
    auto snapshots = cfg.snapshot_times;
    std::sort(snapshots.begin(), snapshots.end());
    std::size_t next_snapshot = 0;

    auto record = [&](const HypersurfaceDiagnostics& d, const SymmetricGraphState& st) {
        series.sup_v = std::max(series.sup_v, 1.0 / d.theta_min);
        const double k = 0.5 / (series.sup_v * series.sup_v);
        double gmax = 0.0;
        for (std::size_t j = 0; j < st.size(); ++j) {
            const double v = d.v[j];
            gmax = std::max(gmax, v * v / (1.0 - k * v * v) * d.A_norm2[j]);
        }
        series.rows.push_back({st.t, d.mu, d.theta_min, d.A2_max, gmax, d.nablaA_surrogate_max,
                               d.nabla2A_surrogate_max, *std::min_element(st.zs.begin(), st.zs.end()),
                               *std::max_element(st.zs.begin(), st.zs.end())});
    };

    while (next_snapshot < snapshots.size() && snapshots[next_snapshot] <= 0.0) {
        series.snapshots.push_back(state);
        ++next_snapshot;
    }
    HypersurfaceDiagnostics d = mean_curvature(state, w, cfg.exec);
    record(d, state);
    double mu_prev = d.mu;
    series.min_mu_step_change = 0.0;

    long cadence_index = 1;
    for (;;) {
        const double t_row = std::min(cfg.t_end, cadence_index * cfg.cadence);
        double target = t_row;
        if (next_snapshot < snapshots.size()) target = std::min(target, snapshots[next_snapshot]);
        double dt = cfg.dt > 0.0 ? cfg.dt : sym_stable_dt(state, w, cfg.cfl);
        bool clipped = false;
        if (state.t + dt >= target * (1.0 - 1e-14)) {
            dt = target - state.t;
            clipped = true;
        }
        try {
            state = step_sym(state, w, dt, cfg.exec);
        } catch (const DomainExit& e) {
            series.stop = "DomainExit";
            series.events.push_back(fmt::format("DomainExit at t = {}: {}", state.t, e.what()));
            break;
        } catch (const GraphLost& e) {
            series.stop = "GraphLost";
            series.events.push_back(fmt::format("GraphLost at t = {}: {}", state.t, e.what()));
            break;
        }
        ++series.steps;
        if (clipped) state.t = target;
        d = mean_curvature(state, w, cfg.exec);
        series.min_mu_step_change = std::min(series.min_mu_step_change, d.mu - mu_prev);
        mu_prev = d.mu;

        while (next_snapshot < snapshots.size() && snapshots[next_snapshot] <= state.t) {
            series.snapshots.push_back(state);
            ++next_snapshot;
        }
        const bool at_row = clipped && state.t == t_row;
        if (at_row) ++cadence_index;
        if (d.A2_max > cfg.A2_blowup) {
            record(d, state);
            series.stop = "CurvatureBlowup";
            series.events.push_back(fmt::format("CurvatureBlowup at t = {}: |A|^2 = {}", state.t, d.A2_max));
            break;
        }
        if (at_row) {
            record(d, state);
            if (state.t >= cfg.t_end) break;
        }
    }
    series.final_state = state;
    return series;
}

McfSeries run_certified(const SymmetricGraphState& initial, const WarpingFunction& w, const McfConfig& cfg) {
    if (!(cfg.alpha > 1.0)) throw ConfigError(fmt::format("alpha must be > 1 (got {})", cfg.alpha));
    check_domain(initial.zs, w);
    const double zmin0 = *std::min_element(initial.zs.begin(), initial.zs.end());
    const double zmax0 = *std::max_element(initial.zs.begin(), initial.zs.end());
    // The flow stays above the parallel slice started at the lowest initial height.
    const double stop[] = {cfg.t_end};
    const auto lower = integrate(w, initial.model.n, zmin0, cfg.t_end, 1e-10, stop);
    if (lower.terminal == Terminal::ExitedDomain)
        throw HypothesisError("the lower comparison slice leaves the domain before t_end");
    const double zlo = sample_at(lower, cfg.t_end);
    const auto grid = linspace(zlo, zmax0, 513);
    const ConditionReport rep = check_conditions(w, grid, cfg.alpha, initial.model.rho());
    if (!rep.c1_holds) throw HypothesisError("r' > 0 fails on the visited range");
    if (rep.c2_margin < 0.0)
        throw HypothesisError(fmt::format("convexity condition fails on the visited range (margin {})", rep.c2_margin));

    const auto d0 = mean_curvature(initial, w, cfg.exec);
    const double bound = 1.0 / std::sqrt(cfg.alpha);
    if (!(d0.theta_min > bound))
        throw InitialConditionError(
            fmt::format("min Theta_0 = {} does not exceed alpha^(-1/2) = {}", d0.theta_min, bound));
    McfSeries series = run_mcf(initial, w, cfg);
    series.conditions = rep;
    return series;
}

} // namespace warpflow
