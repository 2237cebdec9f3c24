#pragma once

// Parallel slices M x {z(t)} evolve by the scalar ODE dz/dt = -n r'(z)/r(z).

#include "warpflow/warp.hpp"

#include <span>
#include <vector>

namespace warpflow {

enum class Terminal { ReachedTEnd, ExitedDomain, Converged };

const char* to_string(Terminal t);

struct ParallelSample {
    double t;
    double z;
};

struct ParallelTrajectory {
    int n = 1;
    double z0 = 0.0;
    std::vector<ParallelSample> samples;
    Terminal terminal = Terminal::ReachedTEnd;
    double t_exit = 0.0; // meaningful only for ExitedDomain
    int steps_accepted = 0;
    int steps_rejected = 0;
};

// Adaptive Dormand-Prince 5(4) with PI step control. The local error per unit
// time is kept below tol * max(1, |z|). Steps are clipped so that every time in
// `stops` (ascending, inside (0, t_end]) is hit exactly and recorded.
ParallelTrajectory integrate(const WarpingFunction& w, int n, double z0, double t_end, double tol,
                             std::span<const double> stops = {});

// Height at time t (t must be one of the recorded sample times).
double sample_at(const ParallelTrajectory& traj, double t);

// Time for the trajectory from z0 to reach the domain boundary; +inf if the
// quadrature diverges or the flow heads toward a zero of r'/r.
double exit_time_quadrature(const WarpingFunction& w, int n, double z0);

struct ContractionGap {
    double gap;
    double bound;
    bool holds;
};

ContractionGap contraction_gap(const WarpingFunction& w, int n, double alpha, double z1_0, double z2_0, double t);

struct Blowdown {
    bool finite;
    double t_exit;         // finite case
    double sup_log_deriv;  // infinite case: sup of |r'/r| on the certified range
    double horizon;        // infinite case: length of the sampled range below z0
};

Blowdown blowdown_time(const WarpingFunction& w, int n, double z0);

} // namespace warpflow
