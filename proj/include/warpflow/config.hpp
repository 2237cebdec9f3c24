#pragma once

// Experiment configuration files (JSON). Every section has a fixed key set and
// unknown keys are errors, reported with their dotted path.
//
//   name       string, required
//   module     geometry | parallel | csf | mcf | residual | neckpinch
//   seed       integer, default 0 (random sample points)
//   warping    {family, ...}: power_beta {beta, a = -1}, exp_sqrt_k {k}, cos_sqrt_k {k},
//              linear, exp_neg_z_squared, double_exp, custom {knots, coeffs}
//              (required except for neckpinch)
//   model      {kind: flat_torus | round_sphere, n}  (mcf; residual for n >= 2)
//   initial    {kind: constant | sinusoidal | bump | sphere, ...}
//              constant {base}; sinusoidal {base, amplitude, frequency, shape: sin | cos};
//              bump {n, eps, r0, r1}; sphere {n, center, radius}
//   numerics   module-specific, see kNumericsKeys in config.cpp
//   search     {eps: [...], ratio: [...]}  (neckpinch search)

#include "warpflow/mcf_sym.hpp"
#include "warpflow/neckpinch.hpp"
#include "warpflow/warp.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace warpflow {

enum class ModuleKind { Geometry, Parallel, Csf, Mcf, Residual, Neckpinch };

const char* to_string(ModuleKind m);
ModuleKind parse_module(const std::string& s); // ConfigError

struct InitialSpec {
    std::string kind = "constant";
    double base = 0.0;
    double amplitude = 0.0;
    int frequency = 1;
    std::string shape = "sin";
    BumpConfig bump;
    int n = 2;
    double center = 0.0;
    double radius = 1.0;

    // Height function over the coordinate of the base (constant and sinusoidal kinds).
    std::function<double(double)> height() const;
};

struct NumericsSpec {
    // shared
    int N = 64;
    double cfl = 0.4;
    double dt = 0.0;
    double t_end = 1.0;
    double cadence = 0.1;
    std::vector<double> snapshot_times;
    // geometry
    double alpha = 2.0;
    double rho = 0.0;
    double z_lo = 0.0;
    double z_hi = 0.0;
    int points = 201;
    int samples = 0;
    // parallel
    int n = 1;
    double tol = 1e-10;
    // csf
    std::string mode = "graph";
    bool redistribute = true;
    int m_max = 3;
    std::optional<double> z_stop;
    double kappa_blowup = 1e4;
    // mcf
    double A2_blowup = 1e8;
    bool certify = false; // run the hypothesis-checked experiment
    // residual
    std::vector<int> levels;
    int steps_between = 2;
    double t_start = 0.0;
    std::vector<std::string> equations;
    // neckpinch
    double horizon = 1.0;
    int redistribute_every = 10;
    double pinch_fraction = 1e-3;
};

struct SearchSpec {
    std::vector<double> eps;
    std::vector<double> ratio;
};

struct ExperimentConfig {
    std::string name;
    ModuleKind module = ModuleKind::Geometry;
    std::uint64_t seed = 0;
    std::optional<WarpingFunction> warping;
    std::optional<ModelM> model;
    InitialSpec initial;
    NumericsSpec numerics;
    std::optional<SearchSpec> search;
    nlohmann::json source; // the document as read, used for hashing
};

ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

// FNV-1a 64 of the compact, key-sorted JSON text of the source document.
std::uint64_t config_hash(const ExperimentConfig& cfg);
std::string config_hash_hex(const ExperimentConfig& cfg);

} // namespace warpflow
