#include "warpflow/config.hpp"

#include "warpflow/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <map>
#include <set>

namespace warpflow {

namespace {

using nlohmann::json;

const std::map<ModuleKind, std::set<std::string>> kNumericsKeys = {
    {ModuleKind::Geometry, {"alpha", "rho", "z_lo", "z_hi", "points", "samples"}},
    {ModuleKind::Parallel, {"n", "t_end", "tol", "cadence"}},
    {ModuleKind::Csf,
     {"N", "cfl", "dt", "t_end", "cadence", "snapshot_times", "mode", "redistribute", "m_max", "z_stop",
      "kappa_blowup"}},
    {ModuleKind::Mcf, {"N", "cfl", "dt", "t_end", "cadence", "snapshot_times", "alpha", "A2_blowup", "certify"}},
    {ModuleKind::Residual, {"levels", "cfl", "steps_between", "t_start", "equations", "alpha", "mode"}},
    {ModuleKind::Neckpinch, {"N", "cfl", "horizon", "cadence", "redistribute_every", "pinch_fraction"}},
};

const std::map<std::string, std::set<std::string>> kWarpingKeys = {
    {"power_beta", {"beta", "a"}},     {"exp_sqrt_k", {"k"}}, {"cos_sqrt_k", {"k"}}, {"linear", {}},
    {"exp_neg_z_squared", {}},         {"double_exp", {}},    {"custom", {"knots", "coeffs"}},
};

const std::map<std::string, std::set<std::string>> kInitialKeys = {
    {"constant", {"base"}},
    {"sinusoidal", {"base", "amplitude", "frequency", "shape"}},
    {"bump", {"n", "eps", "r0", "r1"}},
    {"sphere", {"n", "center", "radius"}},
};

// Typed access to one JSON object; remembers its dotted path for messages.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(fmt::format("{}: expected an object", label()));
    }

    bool has(const std::string& key) const { return j_.contains(key); }
    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json& raw(const std::string& key) const {
        if (!j_.contains(key)) throw ConfigError(fmt::format("{}: missing", at(key)));
        return j_.at(key);
    }

    double number(const std::string& key) const {
        const json& v = raw(key);
        if (!v.is_number()) throw ConfigError(fmt::format("{}: expected a number", at(key)));
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ConfigError(fmt::format("{}: not finite", at(key)));
        return d;
    }
    double number(const std::string& key, double def) const { return has(key) ? number(key) : def; }

    long long integer(const std::string& key) const {
        const json& v = raw(key);
        if (!v.is_number_integer()) throw ConfigError(fmt::format("{}: expected an integer", at(key)));
        return v.get<long long>();
    }
    int integer(const std::string& key, int def) const { return has(key) ? static_cast<int>(integer(key)) : def; }

    std::string string(const std::string& key) const {
        const json& v = raw(key);
        if (!v.is_string()) throw ConfigError(fmt::format("{}: expected a string", at(key)));
        return v.get<std::string>();
    }
    std::string string(const std::string& key, const std::string& def) const { return has(key) ? string(key) : def; }

    bool boolean(const std::string& key, bool def) const {
        if (!has(key)) return def;
        const json& v = raw(key);
        if (!v.is_boolean()) throw ConfigError(fmt::format("{}: expected true or false", at(key)));
        return v.get<bool>();
    }

    std::vector<double> numbers(const std::string& key) const {
        const json& v = raw(key);
        if (!v.is_array()) throw ConfigError(fmt::format("{}: expected an array", at(key)));
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) throw ConfigError(fmt::format("{}[{}]: expected a number", at(key), i));
            out.push_back(v[i].get<double>());
        }
        return out;
    }

    Section child(const std::string& key) const { return Section(raw(key), at(key)); }

    void allow_only(const std::set<std::string>& keys) const {
        for (const auto& [k, v] : j_.items()) {
            if (!keys.count(k)) throw ConfigError(fmt::format("{}: unknown key", at(k)));
        }
    }

private:
    std::string label() const { return path_.empty() ? "config" : path_; }
    const json& j_;
    std::string path_;
};

WarpingFunction parse_warping(const Section& s) {
    const std::string family = s.string("family");
    const auto it = kWarpingKeys.find(family);
    if (it == kWarpingKeys.end()) throw ConfigError(fmt::format("{}: unknown family '{}'", s.at("family"), family));
    std::set<std::string> keys = it->second;
    keys.insert("family");
    s.allow_only(keys);
    try {
        if (family == "power_beta") {
            const double beta = s.number("beta");
            if (!(beta > 0.0)) throw ConfigError(fmt::format("{}: must be positive", s.at("beta")));
            const double a = s.number("a", -1.0);
            if (!(a <= 0.0)) throw ConfigError(fmt::format("{}: must be <= 0", s.at("a")));
            return WarpingFunction::power_beta(beta, a);
        }
        if (family == "exp_sqrt_k" || family == "cos_sqrt_k") {
            const double k = s.number("k");
            if (!(k > 0.0)) throw ConfigError(fmt::format("{}: must be positive", s.at("k")));
            return family == "exp_sqrt_k" ? WarpingFunction::exp_sqrt_k(k) : WarpingFunction::cos_sqrt_k(k);
        }
        if (family == "linear") return WarpingFunction::linear();
        if (family == "exp_neg_z_squared") return WarpingFunction::exp_neg_z_squared();
        if (family == "double_exp") return WarpingFunction::double_exp();
        PiecewisePolynomial pp;
        pp.knots = s.numbers("knots");
        const json& c = s.raw("coeffs");
        if (!c.is_array()) throw ConfigError(fmt::format("{}: expected an array of arrays", s.at("coeffs")));
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (!c[i].is_array()) throw ConfigError(fmt::format("{}[{}]: expected an array", s.at("coeffs"), i));
            std::vector<double> row;
            for (std::size_t k = 0; k < c[i].size(); ++k) {
                if (!c[i][k].is_number())
                    throw ConfigError(fmt::format("{}[{}][{}]: expected a number", s.at("coeffs"), i, k));
                row.push_back(c[i][k].get<double>());
            }
            pp.coeffs.push_back(std::move(row));
        }
        return WarpingFunction(pp);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(fmt::format("{}: {}", s.at("family"), e.what()));
    }
}

ModelM parse_model(const Section& s) {
    s.allow_only({"kind", "n"});
    const std::string kind = s.string("kind");
    const long long n = s.integer("n");
    if (n < 2) throw ConfigError(fmt::format("{}: must be at least 2", s.at("n")));
    if (kind == "flat_torus") return ModelM::flat_torus(static_cast<int>(n));
    if (kind == "round_sphere") return ModelM::round_sphere(static_cast<int>(n));
    throw ConfigError(fmt::format("{}: unknown kind '{}'", s.at("kind"), kind));
}

InitialSpec parse_initial(const Section& s) {
    InitialSpec out;
    out.kind = s.string("kind");
    const auto it = kInitialKeys.find(out.kind);
    if (it == kInitialKeys.end()) throw ConfigError(fmt::format("{}: unknown kind '{}'", s.at("kind"), out.kind));
    std::set<std::string> keys = it->second;
    keys.insert("kind");
    s.allow_only(keys);
    if (out.kind == "constant") {
        out.base = s.number("base");
    } else if (out.kind == "sinusoidal") {
        out.base = s.number("base");
        out.amplitude = s.number("amplitude");
        out.frequency = s.integer("frequency", 1);
        out.shape = s.string("shape", "sin");
        if (out.shape != "sin" && out.shape != "cos")
            throw ConfigError(fmt::format("{}: expected sin or cos", s.at("shape")));
    } else if (out.kind == "bump") {
        out.bump.n = s.integer("n", 2);
        out.bump.eps = s.number("eps");
        out.bump.r0 = s.number("r0");
        out.bump.r1 = s.number("r1");
        try {
            validate(out.bump);
        } catch (const ConfigError& e) {
            throw ConfigError(fmt::format("{}: {}", s.at("kind"), e.what()));
        }
        out.n = out.bump.n;
    } else {
        out.n = s.integer("n", 2);
        out.center = s.number("center", 0.0);
        out.radius = s.number("radius");
        if (!(out.radius > 0.0)) throw ConfigError(fmt::format("{}: must be positive", s.at("radius")));
    }
    return out;
}

NumericsSpec parse_numerics(const Section& s, ModuleKind m) {
    s.allow_only(kNumericsKeys.at(m));
    NumericsSpec d;
    d.N = s.integer("N", d.N);
    d.cfl = s.number("cfl", d.cfl);
    d.dt = s.number("dt", d.dt);
    d.t_end = s.number("t_end", d.t_end);
    d.cadence = s.number("cadence", d.cadence);
    if (s.has("snapshot_times")) d.snapshot_times = s.numbers("snapshot_times");
    d.alpha = s.number("alpha", d.alpha);
    d.rho = s.number("rho", d.rho);
    d.z_lo = s.number("z_lo", d.z_lo);
    d.z_hi = s.number("z_hi", d.z_hi);
    d.points = s.integer("points", d.points);
    d.samples = s.integer("samples", d.samples);
    d.n = s.integer("n", d.n);
    d.tol = s.number("tol", d.tol);
    d.mode = s.string("mode", d.mode);
    d.redistribute = s.boolean("redistribute", d.redistribute);
    d.m_max = s.integer("m_max", d.m_max);
    if (s.has("z_stop")) d.z_stop = s.number("z_stop");
    d.kappa_blowup = s.number("kappa_blowup", d.kappa_blowup);
    d.A2_blowup = s.number("A2_blowup", d.A2_blowup);
    d.certify = s.boolean("certify", d.certify);
    if (s.has("levels")) {
        for (double v : s.numbers("levels")) {
            if (v != std::floor(v) || v < 8) throw ConfigError(fmt::format("{}: expected integers >= 8", s.at("levels")));
            d.levels.push_back(static_cast<int>(v));
        }
    }
    d.steps_between = s.integer("steps_between", d.steps_between);
    d.t_start = s.number("t_start", d.t_start);
    if (s.has("equations")) {
        const json& e = s.raw("equations");
        if (!e.is_array()) throw ConfigError(fmt::format("{}: expected an array", s.at("equations")));
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (!e[i].is_string()) throw ConfigError(fmt::format("{}[{}]: expected a string", s.at("equations"), i));
            d.equations.push_back(e[i].get<std::string>());
        }
    }
    d.horizon = s.number("horizon", d.horizon);
    d.redistribute_every = s.integer("redistribute_every", d.redistribute_every);
    d.pinch_fraction = s.number("pinch_fraction", d.pinch_fraction);

    if (d.mode != "graph" && d.mode != "lagrangian")
        throw ConfigError(fmt::format("{}: expected graph or lagrangian", s.at("mode")));
    if (d.N < 8) throw ConfigError(fmt::format("{}: must be at least 8", s.at("N")));
    if (!(d.cfl > 0.0)) throw ConfigError(fmt::format("{}: must be positive", s.at("cfl")));
    if (!(d.cadence > 0.0)) throw ConfigError(fmt::format("{}: must be positive", s.at("cadence")));
    if (!(d.t_end > 0.0)) throw ConfigError(fmt::format("{}: must be positive", s.at("t_end")));
    if (!(d.tol > 0.0)) throw ConfigError(fmt::format("{}: must be positive", s.at("tol")));
    if (m == ModuleKind::Geometry && !(d.z_lo < d.z_hi))
        throw ConfigError(fmt::format("{}: must be below numerics.z_hi", s.at("z_lo")));
    if (m == ModuleKind::Residual) {
        if (d.levels.size() < 1) throw ConfigError(fmt::format("{}: missing", s.at("levels")));
        if (d.equations.empty()) throw ConfigError(fmt::format("{}: missing", s.at("equations")));
    }
    return d;
}

} // namespace

const char* to_string(ModuleKind m) {
    switch (m) {
    case ModuleKind::Geometry: return "geometry";
    case ModuleKind::Parallel: return "parallel";
    case ModuleKind::Csf: return "csf";
    case ModuleKind::Mcf: return "mcf";
    case ModuleKind::Residual: return "residual";
    case ModuleKind::Neckpinch: return "neckpinch";
    }
    return "?";
}

ModuleKind parse_module(const std::string& s) {
    for (ModuleKind m : {ModuleKind::Geometry, ModuleKind::Parallel, ModuleKind::Csf, ModuleKind::Mcf,
                         ModuleKind::Residual, ModuleKind::Neckpinch}) {
        if (s == to_string(m)) return m;
    }
    throw ConfigError(fmt::format("module: unknown module '{}'", s));
}

std::function<double(double)> InitialSpec::height() const {
    if (kind == "constant") {
        const double b = base;
        return [b](double) { return b; };
    }
    if (kind == "sinusoidal") {
        const double b = base, amp = amplitude;
        const int k = frequency;
        if (shape == "cos") return [=](double x) { return b + amp * std::cos(k * x); };
        return [=](double x) { return b + amp * std::sin(k * x); };
    }
    throw ConfigError(fmt::format("initial.kind: '{}' does not define a height function", kind));
}

ExperimentConfig parse_config(const nlohmann::json& doc) {
    Section root(doc, "");
    root.allow_only({"name", "module", "seed", "warping", "model", "initial", "numerics", "search"});
    ExperimentConfig cfg;
    cfg.source = doc;
    cfg.name = root.string("name");
    if (cfg.name.empty() || cfg.name.find_first_of("/\\ ") != std::string::npos)
        throw ConfigError("name: must be non-empty without spaces or slashes");
    cfg.module = parse_module(root.string("module"));
    if (root.has("seed")) {
        const long long s = root.integer("seed");
        if (s < 0) throw ConfigError("seed: must be non-negative");
        cfg.seed = static_cast<std::uint64_t>(s);
    }
    if (root.has("warping")) cfg.warping = parse_warping(root.child("warping"));
    else if (cfg.module != ModuleKind::Neckpinch) throw ConfigError("warping: missing");
    if (root.has("model")) cfg.model = parse_model(root.child("model"));
    if (cfg.module == ModuleKind::Mcf && !cfg.model) throw ConfigError("model: missing");
    if (root.has("initial")) cfg.initial = parse_initial(root.child("initial"));
    else if (cfg.module != ModuleKind::Geometry) throw ConfigError("initial: missing");
    static const json kEmpty = json::object();
    cfg.numerics =
        parse_numerics(root.has("numerics") ? root.child("numerics") : Section(kEmpty, "numerics"), cfg.module);
    if (root.has("search")) {
        if (cfg.module != ModuleKind::Neckpinch) throw ConfigError("search: only valid for the neckpinch module");
        Section s = root.child("search");
        s.allow_only({"eps", "ratio"});
        cfg.search = SearchSpec{s.numbers("eps"), s.numbers("ratio")};
    }

    const std::string& kind = cfg.initial.kind;
    switch (cfg.module) {
    case ModuleKind::Geometry: break;
    case ModuleKind::Parallel:
        if (kind != "constant") throw ConfigError("initial.kind: the parallel module needs a constant height");
        if (!cfg.warping->contains(cfg.initial.base))
            throw ConfigError(fmt::format("initial.base: {} is outside the warping domain", cfg.initial.base));
        if (cfg.numerics.n < 1) throw ConfigError("numerics.n: must be at least 1");
        break;
    case ModuleKind::Csf:
    case ModuleKind::Mcf:
    case ModuleKind::Residual:
        if (kind != "constant" && kind != "sinusoidal")
            throw ConfigError(fmt::format("initial.kind: '{}' is not a graph over the base", kind));
        break;
    case ModuleKind::Neckpinch:
        if (kind != "bump" && kind != "sphere")
            throw ConfigError(fmt::format("initial.kind: '{}' is not a profile", kind));
        if (cfg.search && kind != "bump") throw ConfigError("search: needs a bump initial profile");
        break;
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open config {}", path.string()));
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    }
    return parse_config(doc);
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    const std::string text = cfg.source.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string config_hash_hex(const ExperimentConfig& cfg) { return fmt::format("{:016x}", config_hash(cfg)); }

} // namespace warpflow
