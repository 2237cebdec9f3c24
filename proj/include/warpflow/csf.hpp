#pragma once

// Curve shortening flow on S^1 x I with metric r(z)^2 dtheta^2 + dz^2.
//
// Nodes are (theta, z) pairs on a closed curve; neighbours are periodic in the
// node index and theta differences are taken modulo 2 pi. The unit tangent is
// T = a E_theta + b E_z with a = r theta_u / L, b = z_u / L, L = |X_u|, and the
// unit normal is N = -b E_theta + a E_z, so Theta = <N, E_z> = a. Curvature kappa
// is measured against -N: a horizontal circle has kappa = r'/r and the flow
// velocity is -kappa N.

#include "warpflow/exec.hpp"
#include "warpflow/warp.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace warpflow {

enum class CurveMode { Lagrangian, Graph };

struct CurveState {
    std::vector<double> thetas; // reduced to [0, 2 pi)
    std::vector<double> zs;
    double t = 0.0;
    CurveMode mode = CurveMode::Lagrangian;
    bool redistributed = false; // set by the last step
    std::size_t size() const { return zs.size(); }
};

// z_j = f(theta_j) on the uniform grid theta_j = 2 pi j / N.
CurveState graph_curve(int N, const std::function<double(double)>& f, CurveMode mode = CurveMode::Graph);

// Pointwise quantities of a curve. Node arrays have size N; ds[j] is the metric
// length of the chord from node j to node j + 1.
struct CurveGeometry {
    std::vector<double> r;       // r(z_j)
    std::vector<double> w;       // r'/r
    std::vector<double> ds;
    std::vector<double> a;       // <T, E_theta> = Theta
    std::vector<double> b;       // <T, E_z> = dz/ds
    std::vector<double> kappa;
};

CurveGeometry curve_geometry(const CurveState& c, const WarpingFunction& w, Exec exec = Exec::Parallel);

struct CurveExtremes {
    double theta_min;
    double v_max;
    double kappa_max_abs;
    double g_max;
};

struct CurveDiagnostics {
    std::vector<double> ds;
    std::vector<double> kappa;
    std::vector<double> theta_angle;  // <N, E_z>
    std::vector<double> normal_theta; // <N, E_theta>
    std::vector<double> v;            // 1/Theta; NaN where Theta <= 0
    std::vector<std::vector<double>> ds_kappa; // ds_kappa[m - 1][j] = d^m kappa / ds^m
    CurveExtremes extremes;
};

// g_max in the extremes uses k = 1 / (2 max v^2) of this state alone.
CurveDiagnostics diagnostics(const CurveState& c, const WarpingFunction& w, int m_max, Exec exec = Exec::Parallel);

// Periodic arclength derivatives on a nonuniform closed grid with segment lengths ds.
std::vector<double> d_s(const std::vector<double>& f, const std::vector<double>& ds, Exec exec = Exec::Parallel);
std::vector<double> d_ss(const std::vector<double>& f, const std::vector<double>& ds, Exec exec = Exec::Parallel);

// phi(v) kappa^2 with phi(v) = v^2 / (1 - k v^2).
std::vector<double> g_function(const CurveDiagnostics& d, double k);

// Largest stable explicit step for the current state.
double stable_dt(const CurveState& c, const WarpingFunction& w, double cfl);

inline constexpr double kMaxCfl = 0.5;

// Heun step of pure normal motion, then (if requested) uniform-arclength
// redistribution with node 0 fixed.
CurveState step_lagrangian(const CurveState& c, const WarpingFunction& w, double dt, bool redistribute = true,
                           Exec exec = Exec::Parallel);

// Heun step of z_t = z_tt/(r^2 + z_t^2) - (r'/r)(r^2 + 2 z_t^2)/(r^2 + z_t^2) (subscript t = theta).
CurveState step_graph(const CurveState& c, const WarpingFunction& w, double dt, Exec exec = Exec::Parallel);

// Reparametrize by uniform metric arclength, keeping node 0.
CurveState redistribute(const CurveState& c, const WarpingFunction& w);

// Symmetric Hausdorff distance between two closed polylines, measured with the
// metric frozen at each query node.
double hausdorff_distance(const CurveState& a, const CurveState& b, const WarpingFunction& w);

enum class StopReason { ReachedTEnd, ReachedZStop, GraphLost, CurvatureBlowup, DomainExit };

const char* to_string(StopReason s);

struct FlowEvent {
    std::string kind;
    double t;
    std::string detail;
};

struct CsfRow {
    double t;
    double theta_min;
    double v_max;
    double kappa_max;
    double g_max;
    std::vector<double> dskappa_max;
    double z_min;
    double z_max;
};

struct CsfConfig {
    CurveMode mode = CurveMode::Graph;
    double t_end = 1.0;
    double cfl = 0.4;
    double dt = 0.0;          // > 0: fixed step; otherwise cfl * min ds^2 each step
    double cadence = 0.1;     // time between recorded rows
    int m_max = 3;
    double kappa_blowup = 1e4;
    std::optional<double> z_stop; // stop once z_max < z_stop
    bool redistribute = true;
    std::vector<double> snapshot_times;
    Exec exec = Exec::Parallel;
};

struct CsfSeries {
    std::vector<CsfRow> rows;
    std::vector<FlowEvent> events;
    StopReason stop = StopReason::ReachedTEnd;
    CurveState final_state;
    std::vector<CurveState> snapshots;
    double sup_v = 1.0; // running sup of v_max
    long steps = 0;
};

CsfSeries run_csf(const CurveState& initial, const WarpingFunction& w, const CsfConfig& cfg);

} // namespace warpflow
