#pragma once

// Evolution equations checked as numerical identities along simulated flows.
//
// A window is a short run of equally spaced snapshots. At each interior
// snapshot the operator (d/dt - Laplacian) is assembled from centered time
// differences taken along node paths, corrected for the tangential part of the
// node motion: d/dt at a fixed surface point = d/dt along the index - V_tan d/ds.

#include "warpflow/csf.hpp"
#include "warpflow/mcf_sym.hpp"

#include <functional>
#include <string>
#include <vector>

namespace warpflow {

enum class Equation { ThetaN1, ThetaN, Vn1, Vn, KappaSq, ASq_bound, G_bound_n1, G_bound_n, F_bound };

const char* to_string(Equation e);
bool is_inequality(Equation e);

struct CurveWindow {
    std::vector<CurveState> snaps;
    double dt_snap = 0.0;
    double sup_v = 1.0; // sup of v over the run up to the end of the window
};

struct SymWindow {
    std::vector<SymmetricGraphState> snaps;
    double dt_snap = 0.0;
    double sup_v = 1.0;
};

inline constexpr int kWindowSnapshots = 9;
// Snapshots excluded at each end of a window.
inline constexpr int kWindowTrim = 2;

// Runs `count` snapshots, `steps_between` steps of size dt apart, from `initial`.
CurveWindow record_curve_window(const CurveState& initial, const WarpingFunction& w, double dt, int steps_between,
                                int count = kWindowSnapshots, bool redistribute = false);
SymWindow record_sym_window(const SymmetricGraphState& initial, const WarpingFunction& w, double dt,
                            int steps_between, int count = kWindowSnapshots);

// Pointwise LHS and RHS of one equation over the interior of a window.
struct WindowSample {
    std::vector<double> lhs;
    std::vector<double> rhs;
};

struct InequalityParams {
    double alpha = 1.0; // F_bound
    double c = 0.0;     // F_bound
};

WindowSample evaluate(const CurveWindow& win, const WarpingFunction& w, Equation eq);
WindowSample evaluate(const SymWindow& win, const WarpingFunction& w, Equation eq, const InequalityParams& p = {});

// max |LHS - RHS|.
double residual_norm(const WindowSample& s);
// min over points of signed slack / max(|LHS|, |RHS|, 1); negative means violated.
double one_sided_margin(const WindowSample& s, Equation eq);

struct GridLevel {
    int N;
    double dt;
};

struct ResidualReport {
    Equation equation;
    std::vector<GridLevel> grid_levels;
    std::vector<double> residual_norms; // equalities: max |LHS - RHS|; inequalities: the normalized margin
    double observed_order = 0.0;        // equalities only
    bool one_sided = false;
    bool passed = false;
};

// Least-squares slope of -log(residual) against log(N).
double observed_order(const std::vector<GridLevel>& levels, const std::vector<double>& norms);

inline constexpr double kMinObservedOrder = 1.5;
inline constexpr double kInequalityTolerance = 1e-6;

ResidualReport residual_theta_n1(const std::vector<CurveWindow>& levels, const WarpingFunction& w);
ResidualReport residual_v(const std::vector<CurveWindow>& levels, const WarpingFunction& w);
ResidualReport residual_v(const std::vector<SymWindow>& levels, const WarpingFunction& w);
ResidualReport residual_theta_n(const std::vector<SymWindow>& levels, const WarpingFunction& w);
ResidualReport residual_kappa_sq(const std::vector<CurveWindow>& levels, const WarpingFunction& w);

// Hypotheses are checked on the z-range of the windows; HypothesisError if they fail.
ResidualReport residual_inequalities(const std::vector<CurveWindow>& levels, const WarpingFunction& w, Equation which);
ResidualReport residual_inequalities(const std::vector<SymWindow>& levels, const WarpingFunction& w, Equation which,
                                     double alpha);

// Windows at N in Ns with dt = cfl * min ds^2 of each level's initial state (so dt ~ N^-2).
std::vector<CurveWindow> curve_windows(const std::function<CurveState(int)>& initial, const WarpingFunction& w,
                                       const std::vector<int>& Ns, double cfl, int steps_between,
                                       bool redistribute = false);
std::vector<SymWindow> sym_windows(const std::function<SymmetricGraphState(int)>& initial, const WarpingFunction& w,
                                   const std::vector<int>& Ns, double cfl, int steps_between);

} // namespace warpflow
