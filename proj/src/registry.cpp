#include "warpflow/registry.hpp"

#include "warpflow/errors.hpp"
#include "warpflow/harness.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>

namespace warpflow {

namespace {

using nlohmann::json;

json warp_power(double beta) { return {{"family", "power_beta"}, {"beta", beta}, {"a", -1.0}}; }
json sinusoid(double base, double amp, int freq, const char* shape) {
    return {{"kind", "sinusoidal"}, {"base", base}, {"amplitude", amp}, {"frequency", freq}, {"shape", shape}};
}

// r0 such that the round sphere z = r0 in R^3 becomes extinct at t = 2.
const double kWitnessR0 = 2.0 * std::sqrt(2.0);

std::map<std::string, json> build_documents() {
    std::map<std::string, json> d;
    auto add = [&](json doc) {
        const auto name = doc.at("name").get<std::string>();
        d[name] = std::move(doc);
    };

    add({{"name", "closedform-exp-neg-z2"},
         {"module", "parallel"},
         {"warping", {{"family", "exp_neg_z_squared"}}},
         {"initial", {{"kind", "constant"}, {"base", -1.0}}},
         {"numerics", {{"n", 1}, {"t_end", 1.0}, {"tol", 1e-10}, {"cadence", 0.05}}}});
    add({{"name", "closedform-double-exp"},
         {"module", "parallel"},
         {"warping", {{"family", "double_exp"}}},
         {"initial", {{"kind", "constant"}, {"base", 0.0}}},
         {"numerics", {{"n", 1}, {"t_end", 0.9}, {"tol", 1e-10}, {"cadence", 0.05}}}});

    add({{"name", "curvature-linear"},
         {"module", "geometry"},
         {"seed", 11},
         {"warping", {{"family", "linear"}}},
         {"numerics", {{"z_lo", 0.05}, {"z_hi", 20.0}, {"points", 101}, {"samples", 100}, {"alpha", 1.0}}}});
    add({{"name", "curvature-exp-sqrt-k"},
         {"module", "geometry"},
         {"seed", 12},
         {"warping", {{"family", "exp_sqrt_k"}, {"k", 2.0}}},
         {"numerics", {{"z_lo", -10.0}, {"z_hi", 10.0}, {"points", 101}, {"samples", 100}, {"alpha", 1.0}}}});
    add({{"name", "curvature-cos-sqrt-k"},
         {"module", "geometry"},
         {"seed", 13},
         {"warping", {{"family", "cos_sqrt_k"}, {"k", 2.0}}},
         {"numerics", {{"z_lo", -1.1}, {"z_hi", 1.1}, {"points", 101}, {"samples", 100}, {"alpha", 1.0}}}});

    for (double beta : {0.25, 0.5, 1.0, 2.0}) {
        add({{"name", fmt::format("conditions-beta-{}", beta)},
             {"module", "geometry"},
             {"warping", warp_power(beta)},
             {"numerics", {{"z_lo", -99.999}, {"z_hi", -1.001}, {"points", 2001}, {"alpha", 1.0}, {"rho", 0.0}}}});
    }
    for (double beta : {0.5, 1.0}) {
        add({{"name", fmt::format("contraction-beta-{}", beta)},
             {"module", "geometry"},
             {"seed", beta == 0.5 ? 41 : 42},
             {"warping", warp_power(beta)},
             {"numerics", {{"z_lo", -99.999}, {"z_hi", -1.001}, {"points", 201}, {"alpha", 1.0 / beta}}}});
    }

    add({{"name", "residual-curve-beta-half"},
         {"module", "residual"},
         {"warping", warp_power(0.5)},
         {"initial", sinusoid(-3.0, 0.2, 1, "sin")},
         {"numerics",
          {{"levels", {128, 256, 512}},
           {"cfl", 0.4},
           {"steps_between", 2},
           {"equations", {"ThetaN1", "Vn1", "KappaSq"}}}}});
    add({{"name", "residual-torus-beta-half"},
         {"module", "residual"},
         {"warping", warp_power(0.5)},
         {"model", {{"kind", "flat_torus"}, {"n", 2}}},
         {"initial", sinusoid(-3.0, 0.2, 1, "sin")},
         {"numerics", {{"levels", {128, 256, 512}}, {"cfl", 0.4}, {"steps_between", 2}, {"equations", {"ThetaN", "Vn"}}}}});
    add({{"name", "residual-sphere-beta-half"},
         {"module", "residual"},
         {"warping", warp_power(0.5)},
         {"model", {{"kind", "round_sphere"}, {"n", 2}}},
         {"initial", sinusoid(-3.0, 0.2, 1, "cos")},
         {"numerics", {{"levels", {128, 256, 512}}, {"cfl", 0.4}, {"steps_between", 2}, {"equations", {"ThetaN", "Vn"}}}}});

    add({{"name", "csf-beta-half-decay"},
         {"module", "csf"},
         {"warping", warp_power(0.5)},
         {"initial", sinusoid(-3.0, 0.2, 1, "sin")},
         {"numerics", {{"N", 64}, {"cfl", 0.4}, {"t_end", 5000.0}, {"cadence", 5.0}, {"z_stop", -30.0}, {"m_max", 3}}}});
    add({{"name", "csf-exp-sqrt-k"},
         {"module", "csf"},
         {"warping", {{"family", "exp_sqrt_k"}, {"k", 1.0}}},
         {"initial", sinusoid(0.0, 0.3, 1, "sin")},
         {"numerics", {{"N", 128}, {"cfl", 0.4}, {"t_end", 2.0}, {"cadence", 0.05}, {"m_max", 3}}}});
    add({{"name", "csf-flat-star"},
         {"module", "csf"},
         {"warping", {{"family", "linear"}}},
         {"initial", sinusoid(1.0, 0.2, 2, "cos")},
         {"numerics", {{"N", 128}, {"cfl", 0.4}, {"t_end", 0.3}, {"cadence", 0.01}, {"m_max", 3}}}});

    add({{"name", "mcf-torus-certified"},
         {"module", "mcf"},
         {"warping", warp_power(0.25)},
         {"model", {{"kind", "flat_torus"}, {"n", 2}}},
         {"initial", sinusoid(-5.0, 0.1, 1, "sin")},
         {"numerics", {{"N", 128}, {"cfl", 0.4}, {"t_end", 20.0}, {"cadence", 0.5}, {"alpha", 2.0}, {"certify", true}}}});
    add({{"name", "mcf-sphere-certified"},
         {"module", "mcf"},
         {"warping", warp_power(0.25)},
         {"model", {{"kind", "round_sphere"}, {"n", 2}}},
         {"initial", sinusoid(-5.0, 0.1, 1, "cos")},
         {"numerics", {{"N", 64}, {"cfl", 0.4}, {"t_end", 5.0}, {"cadence", 0.5}, {"alpha", 2.0}, {"certify", true}}}});
    add({{"name", "mcf-torus-constant"},
         {"module", "mcf"},
         {"warping", warp_power(0.25)},
         {"model", {{"kind", "flat_torus"}, {"n", 2}}},
         {"initial", {{"kind", "constant"}, {"base", -5.0}}},
         {"numerics", {{"N", 64}, {"cfl", 0.4}, {"t_end", 1.0}, {"cadence", 0.25}}}});

    // One-sided checks on windows taken from the registered flows, at the start and later on.
    struct Ineq {
        const char* name;
        const char* source;
        std::vector<std::string> eqs;
        double t_start;
    };
    const std::vector<Ineq> ineqs = {
        {"ineq-csf-beta-half-t0", "csf-beta-half-decay", {"G_bound_n1"}, 0.0},
        {"ineq-csf-beta-half-t2", "csf-beta-half-decay", {"G_bound_n1"}, 2.0},
        {"ineq-csf-exp-sqrt-k-t0", "csf-exp-sqrt-k", {"G_bound_n1"}, 0.0},
        {"ineq-csf-exp-sqrt-k-t1", "csf-exp-sqrt-k", {"G_bound_n1"}, 1.0},
        {"ineq-csf-flat-star-t0", "csf-flat-star", {"G_bound_n1"}, 0.0},
        {"ineq-csf-flat-star-t01", "csf-flat-star", {"G_bound_n1"}, 0.1},
        {"ineq-mcf-torus-t0", "mcf-torus-certified", {"F_bound", "ASq_bound", "G_bound_n"}, 0.0},
        {"ineq-mcf-torus-t2", "mcf-torus-certified", {"F_bound", "ASq_bound", "G_bound_n"}, 2.0},
        {"ineq-mcf-sphere-t0", "mcf-sphere-certified", {"F_bound"}, 0.0},
        {"ineq-mcf-sphere-t1", "mcf-sphere-certified", {"F_bound"}, 1.0},
    };
    for (const auto& q : ineqs) {
        const json& src = d.at(q.source);
        json doc = {{"name", q.name},
                    {"module", "residual"},
                    {"warping", src.at("warping")},
                    {"initial", src.at("initial")},
                    {"numerics",
                     {{"levels", {64, 128}}, {"cfl", 0.4}, {"steps_between", 2}, {"t_start", q.t_start}, {"equations", q.eqs}}}};
        if (src.contains("model")) {
            doc["model"] = src.at("model");
            doc["numerics"]["alpha"] = src.at("numerics").at("alpha");
        }
        add(doc);
    }

    add({{"name", "cross-solver-base"},
         {"module", "csf"},
         {"warping", warp_power(0.5)},
         {"initial", sinusoid(-3.0, 0.2, 1, "sin")},
         {"numerics", {{"N", 64}, {"cfl", 0.4}, {"t_end", 1.0}, {"cadence", 0.5}, {"m_max", 1}}}});

    const json bump = {{"kind", "bump"}, {"n", 2}, {"eps", 0.05}, {"r0", kWitnessR0}, {"r1", 2.5 * kWitnessR0}};
    const json neck_num = {{"N", 400}, {"cfl", 0.2}, {"horizon", 1.0}, {"cadence", 0.005}, {"redistribute_every", 10},
                           {"pinch_fraction", 1e-3}};
    add({{"name", "neckpinch-witness"}, {"module", "neckpinch"}, {"initial", bump}, {"numerics", neck_num}});
    add({{"name", "neckpinch-search"},
         {"module", "neckpinch"},
         {"initial", bump},
         {"numerics", neck_num},
         {"search", {{"eps", {0.05, 0.08, 0.12}}, {"ratio", {2.5, 3.5, 5.0}}}}});
    json control = bump;
    control["r1"] = kWitnessR0;
    add({{"name", "neckpinch-control"},
         {"module", "neckpinch"},
         {"initial", control},
         {"numerics", {{"N", 200}, {"cfl", 0.2}, {"horizon", 2.0}, {"cadence", 0.05}}}});
    add({{"name", "neckpinch-sphere-oracle"},
         {"module", "neckpinch"},
         {"initial", {{"kind", "sphere"}, {"n", 2}, {"center", 0.0}, {"radius", 1.0}}},
         {"numerics", {{"N", 512}, {"cfl", 0.2}, {"horizon", 0.225}, {"cadence", 0.025}}}});
    return d;
}

template <class T>
const T& result_as(const RunOutput& out) {
    return std::get<T>(out.result);
}

std::shared_ptr<const RunOutput> run_named(const std::string& name) { return execute_cached(registered_config(name)); }

class Builder {
public:
    explicit Builder(Verdict& v) : v_(v) {}
    void check(bool ok, std::string what) { v_.checks.push_back({std::move(what), ok}); }

private:
    Verdict& v_;
};

// x_{i+1} <= x_i + slack * max(1, |x_i|) over the given range.
bool nonincreasing(const std::vector<double>& xs, double slack, double* worst = nullptr) {
    double w = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < xs.size(); ++i) w = std::max(w, (xs[i] - xs[i - 1]) / std::max(1.0, std::abs(xs[i - 1])));
    if (worst) *worst = w;
    return xs.size() < 2 || w <= slack;
}

void closed_forms(Verdict& v, Builder& b) {
    {
        const auto out = run_named("closedform-exp-neg-z2");
        const auto& tr = result_as<ParallelTrajectory>(*out);
        double err = 0.0;
        for (const auto& s : tr.samples) err = std::max(err, std::abs(s.z - (-1.0) * std::exp(2.0 * s.t)));
        b.check(err < 1e-8 && tr.samples.back().t == 1.0,
                fmt::format("r = exp(-z^2), z0 = -1: max |z - z0 e^(2t)| = {:.3e} on [0, 1]", err));
        v.data["exp_neg_z2_error"] = err;
    }
    {
        const auto out = run_named("closedform-double-exp");
        const auto& tr = result_as<ParallelTrajectory>(*out);
        const double tex = exit_time_quadrature(*out->config.warping, 1, 0.0);
        double err = 0.0;
        for (const auto& s : tr.samples) err = std::max(err, std::abs(s.z - std::log(1.0 - s.t)));
        b.check(std::abs(tex - 1.0) < 1e-8, fmt::format("r = exp(-e^-z), z0 = 0: exit time {:.15f}", tex));
        b.check(err < 1e-8 && std::abs(tr.samples.back().t - 0.9 * tex) < 1e-8,
                fmt::format("max |z - log(1 - t)| = {:.3e} on [0, 0.9 t_exit]", err));
        v.data["double_exp_error"] = err;
    }
}

void constant_curvature(Verdict& v, Builder& b) {
    const std::vector<std::pair<std::string, double>> cases = {
        {"curvature-linear", 0.0}, {"curvature-exp-sqrt-k", -2.0}, {"curvature-cos-sqrt-k", 2.0}};
    for (const auto& [name, K] : cases) {
        const auto out = run_named(name);
        const auto& g = result_as<GeometryResult>(*out);
        double err = 0.0;
        for (double k : g.sample_gauss) err = std::max(err, std::abs(k - K));
        b.check(g.sample_gauss.size() == 100 && err <= 1e-12,
                fmt::format("{}: |K - {}| <= {:.2e} at {} random points", name, K, err, g.sample_gauss.size()));
        v.data[name] = err;
    }
}

void beta_conditions(Verdict& v, Builder& b) {
    for (double beta : {0.25, 0.5, 1.0, 2.0}) {
        const auto out = run_named(fmt::format("conditions-beta-{}", beta));
        const auto& r = result_as<GeometryResult>(*out).report;
        const bool want = beta <= 1.0;
        b.check(want ? r.rr2_margin >= 0.0 : r.rr2_margin < 0.0,
                fmt::format("beta = {}: rr2_margin = {:.3e} ({})", beta, r.rr2_margin, want ? "expect >= 0" : "expect < 0"));
        v.data[fmt::format("beta_{}", beta)] = r.rr2_margin;
    }
}

void contraction(Verdict& v, Builder& b) {
    for (double beta : {0.5, 1.0}) {
        const auto cfg = registered_config(fmt::format("contraction-beta-{}", beta));
        const auto& w = *cfg.warping;
        std::mt19937_64 rng(cfg.seed);
        std::uniform_real_distribution<double> U(cfg.numerics.z_lo, cfg.numerics.z_hi);
        std::uniform_real_distribution<double> A(1.0, cfg.numerics.alpha);
        int held = 0;
        double worst_eq = 0.0;
        const int pairs = 1000;
        for (int i = 0; i < pairs; ++i) {
            double z1 = U(rng), z2 = U(rng);
            if (z2 > z1) std::swap(z1, z2);
            if (z1 == z2) continue;
            const double alpha = A(rng);
            if (log_derivative_gap(w, alpha, z1, z2).holds) ++held;
            if (beta == 1.0) {
                const auto g = log_derivative_gap(w, 1.0, z1, z2);
                worst_eq = std::max(worst_eq, std::abs(g.lhs - g.rhs) / std::max({1.0, std::abs(g.lhs), std::abs(g.rhs)}));
            }
        }
        b.check(held == pairs, fmt::format("beta = {}: holds on {}/{} random pairs, alpha in [1, {}]", beta, held,
                                           pairs, cfg.numerics.alpha));
        if (beta == 1.0) {
            b.check(worst_eq <= 1e-12, fmt::format("beta = 1, alpha = 1: max |lhs - rhs| = {:.2e}", worst_eq));
            v.data["equality_error"] = worst_eq;
        }
    }
}

void report_checks(Verdict& v, Builder& b, const std::string& name, bool inequality) {
    const auto out = run_named(name);
    const auto& reps = result_as<std::vector<ResidualReport>>(*out);
    for (const auto& r : reps) {
        std::string vals;
        for (std::size_t i = 0; i < r.grid_levels.size(); ++i)
            vals += fmt::format("{}N={}:{:.2e}", i ? " " : "", r.grid_levels[i].N, r.residual_norms[i]);
        if (inequality) {
            b.check(r.one_sided && r.passed, fmt::format("{} {}: margins {}", name, to_string(r.equation), vals));
        } else {
            b.check(!r.one_sided && r.observed_order >= kMinObservedOrder,
                    fmt::format("{} {}: order {:.3f} ({})", name, to_string(r.equation), r.observed_order, vals));
        }
        v.data[name][to_string(r.equation)] = out->summary;
    }
}

void residuals(Verdict& v, Builder& b) {
    for (const char* name : {"residual-curve-beta-half", "residual-torus-beta-half", "residual-sphere-beta-half"})
        report_checks(v, b, name, false);
}

void inequalities(Verdict& v, Builder& b) {
    for (const auto& [name, doc] : registered_documents()) {
        if (name.rfind("ineq-", 0) == 0) report_checks(v, b, name, true);
    }
}

void graph_preservation(Verdict& v, Builder& b) {
    for (const char* name : {"csf-beta-half-decay", "csf-exp-sqrt-k", "csf-flat-star"}) {
        const auto out = run_named(name);
        const auto& s = result_as<CsfSeries>(*out);
        const auto& w = *out->config.warping;
        double th = 1.0, zlo = 1e300, zhi = -1e300;
        for (const auto& r : s.rows) {
            th = std::min(th, r.theta_min);
            zlo = std::min(zlo, r.z_min);
            zhi = std::max(zhi, r.z_max);
        }
        b.check(th > 0.0 && s.stop != StopReason::GraphLost, fmt::format("{}: min Theta = {:.6f}", name, th));
        // Growth rate of v_max allowed by the maximum principle: sup of (2 w^2 - r''/r)_+.
        const auto grid = linspace(zlo, zhi, 1001);
        double C = 0.0;
        for (double z : grid) C = std::max(C, 2.0 * w.ratio(z, 1) * w.ratio(z, 1) - w.ratio(z, 2));
        const double lv0 = std::log(s.rows.front().v_max);
        double excess = -std::numeric_limits<double>::infinity();
        for (const auto& r : s.rows) excess = std::max(excess, std::log(r.v_max) - lv0 - C * r.t);
        b.check(excess <= 1e-4, fmt::format("{}: log v_max - log v_max(0) - C t <= {:.3e} with C = {:.4f}", name,
                                            excess, C));
        const auto rep = check_conditions(w, grid, 1.0, 0.0);
        if (rep.rr2_margin >= 0.0) {
            double worst = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 1; i < s.rows.size(); ++i) {
                const double dt = s.rows[i].t - s.rows[i - 1].t;
                worst = std::max(worst, (s.rows[i].v_max - s.rows[i - 1].v_max) / dt);
            }
            b.check(worst <= 1e-6, fmt::format("{}: rr2_margin >= 0, max dv_max/dt = {:.3e}", name, worst));
        }
        v.data[name] = {{"theta_min", th}, {"C", C}, {"log_growth_excess", excess}};
    }
}

void decay(Verdict& v, Builder& b) {
    const auto out = run_named("csf-beta-half-decay");
    const auto& s = result_as<CsfSeries>(*out);
    const auto& last = s.rows.back();
    b.check(s.stop == StopReason::ReachedZStop && last.z_max < -30.0,
            fmt::format("stop {} at t = {:.1f} with z_max = {:.3f}", to_string(s.stop), last.t, last.z_max));
    const double ratio = last.kappa_max / s.rows.front().kappa_max;
    b.check(ratio < 0.1, fmt::format("kappa_max(end) / kappa_max(0) = {:.4f}", ratio));
    std::vector<double> k, d1, d2;
    for (const auto& r : s.rows) {
        if (r.t < 0.5 * last.t) continue;
        k.push_back(r.kappa_max);
        d1.push_back(r.dskappa_max.at(0));
        d2.push_back(r.dskappa_max.at(1));
    }
    double wk, w1, w2;
    b.check(nonincreasing(k, 1e-6, &wk), fmt::format("kappa_max nonincreasing over the final half (worst rise {:.2e})", wk));
    b.check(nonincreasing(d1, 1e-6, &w1), fmt::format("max |d_s kappa| nonincreasing (worst rise {:.2e})", w1));
    b.check(nonincreasing(d2, 1e-6, &w2), fmt::format("max |d_s^2 kappa| nonincreasing (worst rise {:.2e})", w2));
    v.data = {{"t_final", last.t}, {"kappa_ratio", ratio}, {"steps", s.steps}};
}

void monotonicity(Verdict& v, Builder& b) {
    const auto out = run_named("mcf-torus-certified");
    const auto& s = result_as<McfSeries>(*out);
    b.check(s.conditions.c2_margin >= 0.0 && s.conditions.c1_holds,
            fmt::format("conditions certified: c2_margin = {:.3e}", s.conditions.c2_margin));
    b.check(s.min_mu_step_change >= -1e-8, fmt::format("min per-step change of mu = {:.3e}", s.min_mu_step_change));
    std::vector<double> a2;
    const double tf = s.rows.back().t;
    for (const auto& r : s.rows)
        if (r.t >= 0.5 * tf) a2.push_back(r.A2_max);
    bool strictly = a2.size() >= 2;
    for (std::size_t i = 1; i < a2.size(); ++i) strictly = strictly && a2[i] < a2[i - 1];
    b.check(strictly, fmt::format("|A|^2_max decreasing over the final half ({:.4e} -> {:.4e})", a2.front(), a2.back()));

    const auto cst = run_named("mcf-torus-constant");
    const auto& c = result_as<McfSeries>(*cst);
    std::vector<double> stops;
    for (const auto& r : c.rows)
        if (r.t > 0.0) stops.push_back(r.t);
    const auto tr = integrate(*cst->config.warping, 2, cst->config.initial.base, stops.back(), 1e-12, stops);
    double err = 0.0;
    for (const auto& r : c.rows) {
        if (r.t == 0.0) continue;
        const double z = sample_at(tr, r.t);
        err = std::max({err, std::abs(r.z_min - z), std::abs(r.z_max - z)});
    }
    b.check(err < 1e-6, fmt::format("constant graph vs parallel ODE: max error {:.3e}", err));
    v.data = {{"min_mu_step_change", s.min_mu_step_change}, {"constant_error", err}};
}

void graph_loss(Verdict& v, Builder& b) {
    {
        const auto out = run_named("neckpinch-witness");
        const auto& s = result_as<NeckSeries>(*out);
        b.check(s.ordering_ok, fmt::format("witness: graph lost at {}, pinch at {}",
                                           s.graph_lost_at ? fmt::format("{:.5f}", *s.graph_lost_at) : "never",
                                           s.pinched_at ? fmt::format("{:.5f}", *s.pinched_at) : "never"));
        v.data["witness"] = out->summary;
    }
    {
        const auto out = run_named("neckpinch-sphere-oracle");
        const auto& s = result_as<NeckSeries>(*out);
        const double R = out->config.initial.radius;
        const int n = out->config.initial.n;
        double err = 0.0;
        for (const auto& r : s.rows) err = std::max(err, std::abs(0.5 * r.x_extent - std::sqrt(R * R - 2.0 * n * r.t)));
        const auto& f = s.final_state;
        for (std::size_t j = 0; j < f.size(); ++j)
            err = std::max(err, std::abs(std::hypot(f.xs[j], f.us[j]) - std::sqrt(R * R - 2.0 * n * f.t)));
        const double life = R * R / (2.0 * n);
        b.check(err < 1e-4 && f.t >= 0.9 * life * (1.0 - 1e-12),
                fmt::format("sphere oracle: max radius error {:.3e} through t = {:.4f} (90% of {:.4f})", err, f.t, life));
        v.data["sphere_error"] = err;
    }
    {
        const auto out = run_named("neckpinch-control");
        const auto& s = result_as<NeckSeries>(*out);
        double amin = 1.0;
        for (const auto& r : s.rows) amin = std::min(amin, r.angle_min);
        b.check(!s.graph_lost_at && !s.pinched_at,
                fmt::format("control r1 = r0: stop {}, min angle {:.6f}", to_string(s.stop), amin));
        v.data["control"] = out->summary;
    }
    {
        const auto out = execute_cached(registered_config("neckpinch-search"), true);
        const auto& s = result_as<WitnessSearch>(*out);
        int ok = 0;
        for (const auto& e : s.entries) ok += e.series.ordering_ok ? 1 : 0;
        const auto shipped = registered_config("neckpinch-witness").initial.bump;
        const bool same = s.witness && s.entries[*s.witness].bump.eps == shipped.eps &&
                          s.entries[*s.witness].bump.r1 == shipped.r1;
        b.check(same, fmt::format("search: {} of {} configurations lose the graph before pinching; first is the shipped witness",
                                  ok, s.entries.size()));
        v.data["search"] = out->summary;
    }
}

void cross_solver(Verdict& v, Builder& b) {
    const json base = registered_documents().at("cross-solver-base");
    std::vector<GridLevel> levels;
    std::vector<double> dists;
    for (int N : {64, 128, 256}) {
        json g = base, l = base;
        g["name"] = fmt::format("cross-solver-graph-{}", N);
        g["numerics"]["N"] = N;
        l["name"] = fmt::format("cross-solver-lagrangian-{}", N);
        l["numerics"]["N"] = N;
        l["numerics"]["mode"] = "lagrangian";
        const auto og = execute_cached(parse_config(g));
        const auto ol = execute_cached(parse_config(l));
        const auto& sg = result_as<CsfSeries>(*og).final_state;
        const auto& sl = result_as<CsfSeries>(*ol).final_state;
        const double d = hausdorff_distance(sg, sl, *og->config.warping);
        levels.push_back({N, 0.0});
        dists.push_back(d);
    }
    const double order = observed_order(levels, dists);
    b.check(order >= 1.5, fmt::format("Hausdorff distances {:.3e} {:.3e} {:.3e}, observed order {:.3f}", dists[0],
                                      dists[1], dists[2], order));
    v.data = {{"distances", dists}, {"order", order}};
}

void reproducibility(Verdict& v, Builder& b) {
    for (const char* name : {"closedform-double-exp", "curvature-exp-sqrt-k", "csf-flat-star", "mcf-torus-constant",
                             "residual-sphere-beta-half", "neckpinch-witness"}) {
        const auto cfg = registered_config(name);
        const RunOutput a = execute(cfg);
        const RunOutput c = execute(cfg);
        bool same = a.files.size() == c.files.size();
        std::size_t csvs = 0;
        for (const auto& [file, text] : a.files) {
            if (file.size() < 4 || file.substr(file.size() - 4) != ".csv") continue;
            ++csvs;
            const auto it = c.files.find(file);
            same = same && it != c.files.end() && it->second == text;
        }
        b.check(same && csvs > 0, fmt::format("{}: {} CSV files byte-identical across two runs", name, csvs));
        v.data[name] = a.hash;
    }
}

using Runner = void (*)(Verdict&, Builder&);

const std::map<std::string, Runner>& runners() {
    static const std::map<std::string, Runner> r = {
        {"parallel-closed-forms", closed_forms},
        {"constant-curvature-models", constant_curvature},
        {"beta-family-conditions", beta_conditions},
        {"log-derivative-contraction", contraction},
        {"evolution-residuals", residuals},
        {"inequality-suite", inequalities},
        {"graph-preservation-n1", graph_preservation},
        {"beta-half-decay", decay},
        {"theta-monotonicity", monotonicity},
        {"graph-loss-before-pinch", graph_loss},
        {"cross-solver-equivalence", cross_solver},
        {"reproducibility", reproducibility},
    };
    return r;
}

} // namespace

nlohmann::json to_json(const Verdict& v) {
    json checks = json::array();
    for (const auto& c : v.checks) checks.push_back({{"ok", c.ok}, {"what", c.what}});
    return {{"name", v.name},         {"criterion", v.criterion}, {"verdict", v.passed ? "PASS" : "FAIL"},
            {"checks", checks},       {"seconds", v.seconds},     {"budget_seconds", v.budget_seconds},
            {"data", v.data}};
}

const std::vector<RegistryEntry>& registry() {
    static const std::vector<RegistryEntry> entries = {
        {"parallel-closed-forms", 1, "parallel flow matches z0 e^(2t) and log(e^z0 - t)", 1.0,
         {"closedform-exp-neg-z2", "closedform-double-exp"}},
        {"constant-curvature-models", 2, "Gauss curvature is 0, -k, k for the three model warpings", 1.0,
         {"curvature-linear", "curvature-exp-sqrt-k", "curvature-cos-sqrt-k"}},
        {"beta-family-conditions", 3, "r r'' - 2 r'^2 >= 0 exactly for beta <= 1", 1.0,
         {"conditions-beta-0.25", "conditions-beta-0.5", "conditions-beta-1", "conditions-beta-2"}},
        {"log-derivative-contraction", 4, "w(z2) - w(z1) <= -alpha (z1 - z2) w(z1) w(z2) under the convexity condition",
         5.0, {"contraction-beta-0.5", "contraction-beta-1"}},
        {"evolution-residuals", 5, "evolution equations of Theta, v and kappa^2 hold to second order", 300.0,
         {"residual-curve-beta-half", "residual-torus-beta-half", "residual-sphere-beta-half"}},
        {"inequality-suite", 6, "differential inequalities for g and f = Theta^2 hold along the registered flows", 300.0,
         {"ineq-csf-beta-half-t0", "ineq-csf-beta-half-t2", "ineq-csf-exp-sqrt-k-t0", "ineq-csf-exp-sqrt-k-t1",
          "ineq-csf-flat-star-t0", "ineq-csf-flat-star-t01", "ineq-mcf-torus-t0", "ineq-mcf-torus-t2",
          "ineq-mcf-sphere-t0", "ineq-mcf-sphere-t1"}},
        {"graph-preservation-n1", 7, "curve shortening flow stays a graph with v_max bounded by e^(Ct)", 600.0,
         {"csf-beta-half-decay", "csf-exp-sqrt-k", "csf-flat-star"}},
        {"beta-half-decay", 8, "curvature and its derivatives decay for the beta = 1/2 flow", 600.0,
         {"csf-beta-half-decay"}},
        {"theta-monotonicity", 9, "min Theta^2 is nondecreasing and |A|^2 decays for n = 2 over a flat torus", 600.0,
         {"mcf-torus-certified", "mcf-torus-constant"}},
        {"graph-loss-before-pinch", 10, "a sphere with a thin spike loses the graph property before its neck pinches", 600.0,
         {"neckpinch-witness", "neckpinch-sphere-oracle", "neckpinch-control", "neckpinch-search"}},
        {"cross-solver-equivalence", 11, "Lagrangian and graph curve flows agree to second order", 300.0,
         {"cross-solver-base"}},
        {"reproducibility", 12, "repeated runs write byte-identical CSV", 600.0,
         {"closedform-double-exp", "curvature-exp-sqrt-k", "csf-flat-star", "mcf-torus-constant",
          "residual-sphere-beta-half", "neckpinch-witness"}},
    };
    return entries;
}

const RegistryEntry& find_entry(const std::string& name) {
    for (const auto& e : registry())
        if (e.name == name) return e;
    throw ConfigError(fmt::format("no registry entry named '{}'", name));
}

const std::map<std::string, nlohmann::json>& registered_documents() {
    static const std::map<std::string, json> docs = build_documents();
    return docs;
}

ExperimentConfig registered_config(const std::string& name) {
    const auto& docs = registered_documents();
    const auto it = docs.find(name);
    if (it == docs.end()) throw ConfigError(fmt::format("no registered config named '{}'", name));
    return parse_config(it->second);
}

Verdict run_entry(const RegistryEntry& entry, const std::optional<std::filesystem::path>& out_root) {
    Verdict v;
    v.name = entry.name;
    v.criterion = entry.criterion;
    v.budget_seconds = entry.budget_seconds;
    Builder b(v);
    const auto t0 = std::chrono::steady_clock::now();
    try {
        runners().at(entry.name)(v, b);
    } catch (const std::exception& e) {
        b.check(false, fmt::format("error: {}", e.what()));
    }
    v.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    b.check(v.seconds <= v.budget_seconds, fmt::format("runtime {:.2f} s within {:.0f} s", v.seconds, v.budget_seconds));
    v.passed = std::all_of(v.checks.begin(), v.checks.end(), [](const Check& c) { return c.ok; });
    if (out_root) {
        for (const auto& name : entry.configs) {
            const auto cfg = registered_config(name);
            const bool search = cfg.search.has_value();
            if (cfg.module == ModuleKind::Csf && name == "cross-solver-base") continue;
            write_outputs(*execute_cached(cfg, search), *out_root);
        }
        const auto dir = *out_root / "registry" / entry.name;
        std::filesystem::create_directories(dir);
        std::ofstream f(dir / "verdict.json");
        f << to_json(v).dump(2) << "\n";
    }
    return v;
}

} // namespace warpflow
