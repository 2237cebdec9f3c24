#pragma once

// Rotationally symmetric mean curvature flow in R^{n+1} minus the origin, which
// is the warped product S^n x (0, inf) with metric z^2 g_S + dz^2. The
// hypersurface is generated by rotating a profile curve (x, u) about the x axis.
// The profile is stored parametrically from the left tip to the right tip
// (u = 0 at both), so tips and necks need no chart switching.

#include "warpflow/exec.hpp"

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace warpflow {

// Initial data: the sphere z = r0 with a spike of radius r1 around the positive
// x axis. eta(y) is r1 on [0, eps], r0 on [2 eps, 1), with a quintic
// smoothstep in between.
struct BumpConfig {
    int n = 2;
    double eps = 0.05;
    double r0 = 1.0;
    double r1 = 3.5;
};

void validate(const BumpConfig& cfg); // ConfigError
double eta(const BumpConfig& cfg, double y);
double eta_prime(const BumpConfig& cfg, double y);
// Radial height z(omega) of the initial hypersurface at polar angle psi from the
// positive x axis (omega_1 = cos psi).
double bump_radius(const BumpConfig& cfg, double psi);

struct ProfileState {
    int n = 2;
    std::vector<double> xs; // axis coordinate
    std::vector<double> us; // distance from the axis; zero at both ends
    double t = 0.0;
    std::size_t size() const { return xs.size(); }
};

// A curve c(p), p in [p0, p1], from the left tip to the right tip, resampled to
// N + 1 nodes equidistributed in 1 + scale |A|.
ProfileState profile_from_curve(int n, const std::function<std::array<double, 2>(double)>& c, double p0, double p1,
                                int N, double scale);
ProfileState sphere_profile(int n, double center, double R, int N);
// ConfigError if x along the construction is not monotone in omega_1 on the sample grid.
ProfileState build_initial(const BumpConfig& cfg, int N);

struct ProfileGeometry {
    std::vector<double> ds;    // segment lengths, size N
    std::vector<double> nx, ny; // outward unit normal
    std::vector<double> kappa;  // profile curvature, positive on a round sphere
    std::vector<double> H;      // mean curvature, n / R on a round sphere
    std::vector<double> A;      // |A|
    std::vector<double> theta;  // <P / |P|, N>
};

ProfileGeometry profile_geometry(const ProfileState& p, Exec exec = Exec::Parallel);

// Angle function computed from the polar (warped) representation of the same
// discrete tangent: Theta = r phi' / sqrt(r^2 phi'^2 + r'^2).
std::vector<double> angle_function_warped(const ProfileState& p);
double angle_min(const ProfileState& p);

struct Neck {
    int count = 0;          // interior local minima of u
    double radius = 0.0;    // smallest, refined by a parabola through the minimum node; NaN if count == 0
    double x = 0.0;
};
Neck find_neck(const ProfileState& p);

inline constexpr double kMaxProfileCfl = 0.5;
// cfl * min(segment length^2, interior u^2 / (n - 1)).
double profile_stable_dt(const ProfileState& p, double cfl);
// Heun step of X_t = -H N. Tips stay on the axis.
ProfileState step_profile(const ProfileState& p, double dt, Exec exec = Exec::Parallel);
// Same node count, equidistributed in 1 + scale |A|; tips are kept.
ProfileState redistribute_profile(const ProfileState& p, double scale);

enum class NeckStop { PinchDetected, Extinct, ReachedHorizon };
const char* to_string(NeckStop s);

struct NeckRow {
    double t;
    double angle_min;
    double neck_radius; // NaN while no neck exists
    double A_max;
    double x_extent;
};

struct NeckConfig {
    int N = 400;
    double cfl = 0.2;
    double horizon = 1.0;
    double cadence = 0.01;
    int redistribute_every = 10;
    double pinch_fraction = 1e-3; // pinch once the neck is below this times the length scale
    Exec exec = Exec::Parallel;
};

struct NeckSeries {
    std::vector<NeckRow> rows;
    NeckStop stop = NeckStop::ReachedHorizon;
    std::optional<double> graph_lost_at;
    std::optional<double> pinched_at;
    bool ordering_ok = false; // graph lost strictly before the pinch
    bool inconclusive = false; // neither event before the horizon
    ProfileState final_state;
    long steps = 0;
};

NeckSeries run_profile(const ProfileState& initial, double scale, const NeckConfig& cfg);
NeckSeries run_counterexample(const BumpConfig& bump, const NeckConfig& cfg);

struct SearchEntry {
    BumpConfig bump;
    NeckSeries series;
};

struct WitnessSearch {
    std::vector<SearchEntry> entries; // grid order: eps outer, ratio inner
    std::optional<std::size_t> witness; // first entry with ordering_ok
};

// Runs the grid concurrently; each run uses serial kernels.
WitnessSearch search_witness(int n, double r0, const std::vector<double>& eps_grid,
                             const std::vector<double>& ratio_grid, const NeckConfig& cfg);

} // namespace warpflow
