#pragma once

// Mean curvature flow of graphs z over M for n >= 2, restricted to graphs that
// depend on one coordinate x of M: the periodic coordinate of a flat torus, or
// the polar angle phi of a unit round sphere. The profile curve (x, z) lives in
// the totally geodesic slice with metric r(z)^2 dx^2 + dz^2 and carries the
// first principal curvature; the remaining n - 1 directions share a second one.

#include "warpflow/exec.hpp"
#include "warpflow/warp.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace warpflow {

enum class ModelKind { FlatTorus, RoundSphere };

struct ModelM {
    ModelKind kind = ModelKind::FlatTorus;
    int n = 2;

    static ModelM flat_torus(int n);
    static ModelM round_sphere(int n);

    // Lower Ricci bound Ric_M >= n rho g_M.
    double rho() const { return kind == ModelKind::FlatTorus ? 0.0 : (n - 1.0) / n; }
    AmbientModel ambient() const { return kind == ModelKind::FlatTorus ? AmbientModel::Flat : AmbientModel::RoundSphere; }
    std::string name() const;
};

struct SymmetricGraphState {
    ModelM model;
    std::vector<double> xs; // torus: 2 pi j / N; sphere: cell centres (j + 1/2) pi / N
    std::vector<double> zs;
    double t = 0.0;
    std::size_t size() const { return zs.size(); }
    double spacing() const;
};

SymmetricGraphState symmetric_graph(const ModelM& model, int N, const std::function<double(double)>& f);

struct HypersurfaceDiagnostics {
    int n = 2;
    bool periodic = true;
    std::vector<double> r, w;
    std::vector<double> a, b;         // tangent of the profile: a = Theta, b = dz/ds
    std::vector<double> kappa1;       // profile direction
    std::vector<double> kappa2;       // each of the n - 1 symmetric directions
    std::vector<double> lambda;       // d/ds of log(volume weight of the symmetric directions)
    std::vector<double> H;
    std::vector<double> A_norm2;
    std::vector<double> theta_angle;
    std::vector<double> f;
    std::vector<double> v;
    std::vector<double> g_frak;       // with k = 1 / (2 max v^2) of this state
    std::vector<double> ds_minus;     // metric length to the left neighbour (ghost at the poles)
    std::vector<double> ds_plus;      // metric length to the right neighbour
    std::vector<double> nablaA_surrogate;   // sqrt((d_s kappa1)^2 + (n - 1)(d_s kappa2)^2)
    std::vector<double> nabla2A_surrogate;  // same with second arclength derivatives
    std::vector<double> nablaA_norm2;       // full |nabla A|^2 of the symmetric hypersurface
    double mu;                        // min f
    double theta_min;
    double A2_max;
    double g_max;
    double nablaA_surrogate_max;
    double nabla2A_surrogate_max;
};

HypersurfaceDiagnostics mean_curvature(const SymmetricGraphState& s, const WarpingFunction& w,
                                       Exec exec = Exec::Parallel);

// Arclength derivatives of a node function that is even under the pole reflections.
std::vector<double> sym_d_s(const HypersurfaceDiagnostics& d, const std::vector<double>& f,
                            Exec exec = Exec::Parallel);
std::vector<double> sym_d_ss(const HypersurfaceDiagnostics& d, const std::vector<double>& f,
                             Exec exec = Exec::Parallel);
// Laplacian of the induced metric applied to a function of x alone:
// d_ss f + (n - 1) lambda d_s f.
std::vector<double> sym_laplacian(const HypersurfaceDiagnostics& d, const std::vector<double>& f,
                                  Exec exec = Exec::Parallel);

// Ric_M(v_M, v_M) with v_M the g_M-unit direction of the M-part of N (0 where that part vanishes).
double ricci_M_normal(const ModelM& model, double theta);

// Ric of the ambient space on the unit normal.
double ambient_ricci_normal(const ModelM& model, const WarpingFunction& w, double z, double theta);

double sym_stable_dt(const SymmetricGraphState& s, const WarpingFunction& w, double cfl);

// Heun step of z_t = -H v.
SymmetricGraphState step_sym(const SymmetricGraphState& s, const WarpingFunction& w, double dt,
                             Exec exec = Exec::Parallel);

struct McfRow {
    double t;
    double mu;
    double theta_min;
    double A2_max;
    double g_max;
    double nablaA_surrogate_max;
    double nabla2A_surrogate_max;
    double z_min;
    double z_max;
};

struct McfConfig {
    double alpha = 2.0;
    double t_end = 1.0;
    double cfl = 0.4;
    double dt = 0.0;
    double cadence = 0.1;
    double A2_blowup = 1e8;
    std::vector<double> snapshot_times;
    Exec exec = Exec::Parallel;
};

struct McfSeries {
    std::vector<McfRow> rows;
    std::vector<std::string> events;
    std::string stop = "ReachedTEnd";
    SymmetricGraphState final_state;
    std::vector<SymmetricGraphState> snapshots;
    double min_mu_step_change = 0.0; // most negative per-step change of mu
    double sup_v = 1.0;
    long steps = 0;
    ConditionReport conditions{};
};

// Plain run without hypothesis checks.
McfSeries run_mcf(const SymmetricGraphState& initial, const WarpingFunction& w, const McfConfig& cfg);

// Validates alpha > 1, the conditions on the range the flow can visit, and
// min Theta_0 > alpha^{-1/2}, then runs.
McfSeries run_certified(const SymmetricGraphState& initial, const WarpingFunction& w, const McfConfig& cfg);

} // namespace warpflow
