#include "warpflow/harness.hpp"

#include "warpflow/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <random>

namespace warpflow {

namespace {

using nlohmann::json;

// CSV built row by row; every number goes through format_double.
class Csv {
public:
    explicit Csv(const std::vector<std::string>& header) {
        for (std::size_t i = 0; i < header.size(); ++i) text_ += (i ? "," : "") + header[i];
        text_ += '\n';
    }
    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) text_ += (i ? "," : "") + format_double(values[i]);
        text_ += '\n';
    }
    void raw_row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) text_ += (i ? "," : "") + cells[i];
        text_ += '\n';
    }
    std::string str() const { return text_; }

private:
    std::string text_;
};

json optional_time(const std::optional<double>& t) { return t ? json(*t) : json(nullptr); }

RunOutput run_geometry(const ExperimentConfig& cfg) {
    const auto& w = *cfg.warping;
    const auto& num = cfg.numerics;
    RunOutput out;
    GeometryResult g;
    g.grid = linspace(num.z_lo, num.z_hi, num.points);
    for (double z : g.grid) {
        if (!w.contains(z)) throw ConfigError(fmt::format("numerics.z_lo/z_hi: z = {} is outside the domain", z));
    }
    g.report = check_conditions(w, g.grid, num.alpha, num.rho);
    Csv csv({"z", "r", "dr", "d2r", "log_derivative", "gauss_curvature", "rr2_margin", "c2_margin"});
    auto add = [&](Csv& c, double z) {
        const auto d = w.eval(z, 2);
        c.row({z, d[0], d[1], d[2], w.log_derivative(z), gauss_curvature(w, z), w.convexity_margin(z, 1.0),
               w.convexity_margin(z, num.alpha) + num.rho - g.report.c});
    };
    for (double z : g.grid) add(csv, z);
    out.files["geometry.csv"] = csv.str();
    if (num.samples > 0) {
        std::mt19937_64 rng(cfg.seed);
        std::uniform_real_distribution<double> U(num.z_lo, num.z_hi);
        Csv s({"z", "r", "dr", "d2r", "log_derivative", "gauss_curvature", "rr2_margin", "c2_margin"});
        for (int i = 0; i < num.samples; ++i) {
            const double z = U(rng);
            g.sample_z.push_back(z);
            g.sample_gauss.push_back(gauss_curvature(w, z));
            add(s, z);
        }
        out.files["samples.csv"] = s.str();
    }
    out.summary = to_json(g.report);
    out.files["condition_report.json"] = out.summary.dump(2) + "\n";
    out.result = std::move(g);
    return out;
}

RunOutput run_parallel(const ExperimentConfig& cfg) {
    const auto& num = cfg.numerics;
    std::vector<double> stops;
    for (int k = 1; k * num.cadence < num.t_end * (1.0 - 1e-12); ++k) stops.push_back(k * num.cadence);
    stops.push_back(num.t_end);
    auto traj = integrate(*cfg.warping, num.n, cfg.initial.base, num.t_end, num.tol, stops);
    RunOutput out;
    Csv csv({"t", "z"});
    for (const auto& s : traj.samples) csv.row({s.t, s.z});
    out.files["parallel.csv"] = csv.str();
    out.summary = {{"terminal", to_string(traj.terminal)},
                   {"t_exit", traj.terminal == Terminal::ExitedDomain ? json(traj.t_exit) : json(nullptr)},
                   {"steps_accepted", traj.steps_accepted},
                   {"steps_rejected", traj.steps_rejected}};
    out.result = std::move(traj);
    return out;
}

RunOutput run_csf_config(const ExperimentConfig& cfg) {
    const auto& num = cfg.numerics;
    CsfConfig c;
    c.mode = num.mode == "lagrangian" ? CurveMode::Lagrangian : CurveMode::Graph;
    c.t_end = num.t_end;
    c.cfl = num.cfl;
    c.dt = num.dt;
    c.cadence = num.cadence;
    c.m_max = num.m_max;
    c.kappa_blowup = num.kappa_blowup;
    c.z_stop = num.z_stop;
    c.redistribute = num.redistribute;
    c.snapshot_times = num.snapshot_times;
    auto series = run_csf(initial_curve(cfg, num.N), *cfg.warping, c);
    RunOutput out;
    std::vector<std::string> header = {"t", "theta_min", "v_max", "kappa_max", "g_max"};
    for (int m = 1; m <= num.m_max; ++m) header.push_back(fmt::format("dskappa{}_max", m));
    header.push_back("z_min");
    header.push_back("z_max");
    Csv csv(header);
    for (const auto& r : series.rows) {
        std::vector<double> v = {r.t, r.theta_min, r.v_max, r.kappa_max, r.g_max};
        v.insert(v.end(), r.dskappa_max.begin(), r.dskappa_max.end());
        v.push_back(r.z_min);
        v.push_back(r.z_max);
        csv.row(v);
    }
    out.files["csf.csv"] = csv.str();
    for (std::size_t i = 0; i < series.snapshots.size(); ++i) {
        Csv s({"theta", "z"});
        const auto& st = series.snapshots[i];
        for (std::size_t j = 0; j < st.size(); ++j) s.row({st.thetas[j], st.zs[j]});
        out.files[fmt::format("snapshot_{:03d}.csv", i)] = s.str();
    }
    json events = json::array();
    for (const auto& e : series.events) events.push_back({{"kind", e.kind}, {"t", e.t}, {"detail", e.detail}});
    out.summary = {{"stop", to_string(series.stop)},
                   {"t_final", series.final_state.t},
                   {"steps", series.steps},
                   {"sup_v", series.sup_v},
                   {"events", events}};
    out.files["events.json"] = out.summary.dump(2) + "\n";
    out.result = std::move(series);
    return out;
}

RunOutput run_mcf_config(const ExperimentConfig& cfg) {
    const auto& num = cfg.numerics;
    McfConfig c;
    c.alpha = num.alpha;
    c.t_end = num.t_end;
    c.cfl = num.cfl;
    c.dt = num.dt;
    c.cadence = num.cadence;
    c.A2_blowup = num.A2_blowup;
    c.snapshot_times = num.snapshot_times;
    const auto s0 = initial_sym(cfg, num.N);
    auto series = num.certify ? run_certified(s0, *cfg.warping, c) : run_mcf(s0, *cfg.warping, c);
    RunOutput out;
    Csv csv({"t", "mu", "theta_min", "A2_max", "g_max", "nablaA_surrogate_max", "z_min", "z_max"});
    for (const auto& r : series.rows)
        csv.row({r.t, r.mu, r.theta_min, r.A2_max, r.g_max, r.nablaA_surrogate_max, r.z_min, r.z_max});
    out.files["mcf.csv"] = csv.str();
    for (std::size_t i = 0; i < series.snapshots.size(); ++i) {
        Csv s({"x", "z"});
        const auto& st = series.snapshots[i];
        for (std::size_t j = 0; j < st.size(); ++j) s.row({st.xs[j], st.zs[j]});
        out.files[fmt::format("snapshot_{:03d}.csv", i)] = s.str();
    }
    out.summary = {{"stop", series.stop},
                   {"t_final", series.final_state.t},
                   {"steps", series.steps},
                   {"min_mu_step_change", series.min_mu_step_change},
                   {"events", series.events}};
    if (num.certify) out.summary["conditions"] = to_json(series.conditions);
    out.files["events.json"] = out.summary.dump(2) + "\n";
    out.result = std::move(series);
    return out;
}

RunOutput run_residual_config(const ExperimentConfig& cfg) {
    const auto& num = cfg.numerics;
    const auto& w = *cfg.warping;
    std::vector<Equation> eqs;
    for (const auto& e : num.equations) eqs.push_back(parse_equation(e));
    const bool sym = cfg.model.has_value();
    for (Equation e : eqs) {
        const bool curve_eq = e == Equation::ThetaN1 || e == Equation::Vn1 || e == Equation::KappaSq ||
                              e == Equation::G_bound_n1;
        if (curve_eq == sym)
            throw ConfigError(fmt::format("numerics.equations: {} needs {}", to_string(e),
                                          curve_eq ? "no model section (curves)" : "a model section (n >= 2)"));
    }
    std::vector<ResidualReport> reports;
    if (!sym) {
        const CurveMode mode = num.mode == "lagrangian" ? CurveMode::Lagrangian : CurveMode::Graph;
        auto initial = [&](int N) {
            CurveState s = graph_curve(N, cfg.initial.height(), mode);
            if (num.t_start > 0.0) {
                while (s.t < num.t_start * (1.0 - 1e-12)) {
                    const double h = std::min(stable_dt(s, w, num.cfl), num.t_start - s.t);
                    s = mode == CurveMode::Graph ? step_graph(s, w, h, Exec::Serial)
                                                 : step_lagrangian(s, w, h, false, Exec::Serial);
                }
            }
            return s;
        };
        const auto wins = curve_windows(initial, w, num.levels, num.cfl, num.steps_between);
        for (Equation e : eqs) {
            switch (e) {
            case Equation::ThetaN1: reports.push_back(residual_theta_n1(wins, w)); break;
            case Equation::Vn1: reports.push_back(residual_v(wins, w)); break;
            case Equation::KappaSq: reports.push_back(residual_kappa_sq(wins, w)); break;
            default: reports.push_back(residual_inequalities(wins, w, e)); break;
            }
        }
    } else {
        auto initial = [&](int N) {
            SymmetricGraphState s = symmetric_graph(*cfg.model, N, cfg.initial.height());
            if (num.t_start > 0.0) {
                while (s.t < num.t_start * (1.0 - 1e-12))
                    s = step_sym(s, w, std::min(sym_stable_dt(s, w, num.cfl), num.t_start - s.t), Exec::Serial);
            }
            return s;
        };
        const auto wins = sym_windows(initial, w, num.levels, num.cfl, num.steps_between);
        for (Equation e : eqs) {
            switch (e) {
            case Equation::ThetaN: reports.push_back(residual_theta_n(wins, w)); break;
            case Equation::Vn: reports.push_back(residual_v(wins, w)); break;
            default: reports.push_back(residual_inequalities(wins, w, e, num.alpha)); break;
            }
        }
    }
    RunOutput out;
    Csv csv({"equation", "N", "dt", "residual", "order"});
    json arr = json::array();
    for (const auto& r : reports) {
        for (std::size_t i = 0; i < r.grid_levels.size(); ++i) {
            csv.raw_row({to_string(r.equation), std::to_string(r.grid_levels[i].N), format_double(r.grid_levels[i].dt),
                         format_double(r.residual_norms[i]),
                         r.one_sided ? std::string("nan") : format_double(r.observed_order)});
        }
        json levels = json::array();
        for (std::size_t i = 0; i < r.grid_levels.size(); ++i)
            levels.push_back({{"N", r.grid_levels[i].N}, {"dt", r.grid_levels[i].dt}, {"value", r.residual_norms[i]}});
        arr.push_back({{"equation", to_string(r.equation)},
                       {"one_sided", r.one_sided},
                       {"observed_order", r.one_sided ? json(nullptr) : json(r.observed_order)},
                       {"levels", levels},
                       {"passed", r.passed}});
    }
    out.files["residual.csv"] = csv.str();
    out.summary = {{"reports", arr}};
    out.files["reports.json"] = arr.dump(2) + "\n";
    out.result = std::move(reports);
    return out;
}

NeckConfig neck_config(const NumericsSpec& num) {
    NeckConfig c;
    c.N = num.N;
    c.cfl = num.cfl;
    c.horizon = num.horizon;
    c.cadence = num.cadence;
    c.redistribute_every = num.redistribute_every;
    c.pinch_fraction = num.pinch_fraction;
    return c;
}

json neck_verdict(const NeckSeries& s) {
    return {{"graph_lost_at", optional_time(s.graph_lost_at)},
            {"pinched_at", optional_time(s.pinched_at)},
            {"ordering_ok", s.ordering_ok},
            {"inconclusive", s.inconclusive},
            {"stop", to_string(s.stop)},
            {"steps", s.steps}};
}

RunOutput run_neckpinch_config(const ExperimentConfig& cfg, bool search) {
    const auto& num = cfg.numerics;
    const NeckConfig nc = neck_config(num);
    RunOutput out;
    if (search) {
        if (!cfg.search) throw ConfigError("search: missing");
        const auto& b = cfg.initial.bump;
        auto res = search_witness(b.n, b.r0, cfg.search->eps, cfg.search->ratio, nc);
        Csv csv({"eps", "r1_over_r0", "graph_lost_at", "pinched_at", "ordering_ok"});
        for (const auto& e : res.entries) {
            const double nan = std::nan("");
            csv.row({e.bump.eps, e.bump.r1 / e.bump.r0, e.series.graph_lost_at.value_or(nan),
                     e.series.pinched_at.value_or(nan), e.series.ordering_ok ? 1.0 : 0.0});
        }
        out.files["search.csv"] = csv.str();
        json witness = nullptr;
        if (res.witness) {
            const auto& e = res.entries[*res.witness];
            witness = {{"n", e.bump.n}, {"eps", e.bump.eps}, {"r0", e.bump.r0}, {"r1", e.bump.r1},
                       {"verdict", neck_verdict(e.series)}};
        }
        out.summary = {{"witness", witness}, {"runs", res.entries.size()}};
        out.files["witness.json"] = out.summary.dump(2) + "\n";
        out.result = std::move(res);
        return out;
    }
    const ProfileState p0 = initial_profile(cfg);
    const double scale = cfg.initial.kind == "bump" ? cfg.initial.bump.r0 : cfg.initial.radius;
    auto series = run_profile(p0, scale, nc);
    Csv csv({"t", "angle_min", "neck_radius", "A_max"});
    for (const auto& r : series.rows) csv.row({r.t, r.angle_min, r.neck_radius, r.A_max});
    out.files["neckpinch.csv"] = csv.str();
    out.summary = neck_verdict(series);
    out.files["verdict.json"] = out.summary.dump(2) + "\n";
    out.result = std::move(series);
    return out;
}

std::mutex g_cache_mutex;
std::map<std::string, std::shared_ptr<const RunOutput>> g_cache;

} // namespace

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return fmt::format("{:.17g}", x);
}

nlohmann::json to_json(const ConditionReport& r) {
    return {{"c1_holds", r.c1_holds}, {"c2_margin", r.c2_margin}, {"sup_log_deriv", r.sup_log_deriv},
            {"rr2_margin", r.rr2_margin}, {"alpha", r.alpha}, {"rho", r.rho}, {"c", r.c}};
}

Equation parse_equation(const std::string& s) {
    for (Equation e : {Equation::ThetaN1, Equation::ThetaN, Equation::Vn1, Equation::Vn, Equation::KappaSq,
                       Equation::ASq_bound, Equation::G_bound_n1, Equation::G_bound_n, Equation::F_bound}) {
        if (s == to_string(e)) return e;
    }
    throw ConfigError(fmt::format("numerics.equations: unknown equation '{}'", s));
}

CurveState initial_curve(const ExperimentConfig& cfg, int N) {
    const CurveMode mode = cfg.numerics.mode == "lagrangian" ? CurveMode::Lagrangian : CurveMode::Graph;
    return graph_curve(N, cfg.initial.height(), mode);
}

SymmetricGraphState initial_sym(const ExperimentConfig& cfg, int N) {
    if (!cfg.model) throw ConfigError("model: missing");
    return symmetric_graph(*cfg.model, N, cfg.initial.height());
}

ProfileState initial_profile(const ExperimentConfig& cfg) {
    const int N = cfg.numerics.N;
    if (cfg.initial.kind == "bump") return build_initial(cfg.initial.bump, N);
    if (cfg.initial.kind == "sphere") return sphere_profile(cfg.initial.n, cfg.initial.center, cfg.initial.radius, N);
    throw ConfigError(fmt::format("initial.kind: '{}' is not a profile", cfg.initial.kind));
}

RunOutput execute(const ExperimentConfig& cfg, bool search) {
    RunOutput out;
    switch (cfg.module) {
    case ModuleKind::Geometry: out = run_geometry(cfg); break;
    case ModuleKind::Parallel: out = run_parallel(cfg); break;
    case ModuleKind::Csf: out = run_csf_config(cfg); break;
    case ModuleKind::Mcf: out = run_mcf_config(cfg); break;
    case ModuleKind::Residual: out = run_residual_config(cfg); break;
    case ModuleKind::Neckpinch: out = run_neckpinch_config(cfg, search); break;
    }
    out.config = cfg;
    out.hash = config_hash_hex(cfg);
    return out;
}

std::shared_ptr<const RunOutput> execute_cached(const ExperimentConfig& cfg, bool search) {
    const std::string key = config_hash_hex(cfg) + (search ? "/search" : "/run");
    {
        std::lock_guard lock(g_cache_mutex);
        auto it = g_cache.find(key);
        if (it != g_cache.end()) return it->second;
    }
    auto out = std::make_shared<const RunOutput>(execute(cfg, search));
    std::lock_guard lock(g_cache_mutex);
    return g_cache.emplace(key, out).first->second;
}

void clear_run_cache() {
    std::lock_guard lock(g_cache_mutex);
    g_cache.clear();
}

std::filesystem::path resolve_output_root(const std::optional<std::string>& cli_out) {
    if (cli_out && !cli_out->empty()) return *cli_out;
    if (const char* env = std::getenv("WARPFLOW_OUT"); env && *env) return env;
    return "warpflow_out";
}

std::filesystem::path write_outputs(const RunOutput& out, const std::filesystem::path& root) {
    const auto dir = root / (out.config.name + "-" + out.hash);
    std::filesystem::create_directories(dir);
    auto put = [&](const std::string& name, const std::string& text) {
        std::ofstream f(dir / name, std::ios::binary);
        f << text;
        if (!f) throw Error(fmt::format("cannot write {}", (dir / name).string()));
    };
    for (const auto& [name, text] : out.files) put(name, text);
    put("config.json", out.config.source.dump(2) + "\n");
    if (!out.files.count("summary.json")) put("summary.json", out.summary.dump(2) + "\n");
    return dir;
}

} // namespace warpflow
