#pragma once

// Independent reference computations for the tests. Nothing here calls the
// closed forms in the library; curvature comes from finite differences of a
// coordinate metric, curve quantities from Euclidean formulas.

#include <array>
#include <cmath>
#include <functional>

namespace oracle {

// Diagonal metric on a 3-dimensional chart, g = diag(g0(x), g1(x), g2(x)).
using Point = std::array<double, 3>;
using DiagMetric = std::function<std::array<double, 3>(const Point&)>;

inline Point shifted(Point x, int k, double h) {
    x[k] += h;
    return x;
}

// Gamma^a_{bc} by central differences of g.
inline std::array<std::array<std::array<double, 3>, 3>, 3> christoffel(const DiagMetric& g, const Point& x,
                                                                       double h = 1e-4) {
    std::array<std::array<double, 3>, 3> dg{}; // dg[k][i] = d_k g_ii
    for (int k = 0; k < 3; ++k) {
        const auto p = g(shifted(x, k, h));
        const auto m = g(shifted(x, k, -h));
        for (int i = 0; i < 3; ++i) dg[k][i] = (p[i] - m[i]) / (2 * h);
    }
    const auto g0 = g(x);
    std::array<std::array<std::array<double, 3>, 3>, 3> G{};
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c) {
                // Gamma^a_bc = 1/2 g^aa (d_b g_ac + d_c g_ab - d_a g_bc), diagonal g.
                double s = 0.0;
                if (a == c) s += dg[b][a];
                if (a == b) s += dg[c][a];
                if (b == c) s -= dg[a][b];
                G[a][b][c] = 0.5 * s / g0[a];
            }
    return G;
}

// Ric_bd = d_a Gamma^a_bd - d_d Gamma^a_ab + Gamma^a_ae Gamma^e_bd - Gamma^a_de Gamma^e_ab.
inline double ricci(const DiagMetric& g, const Point& x, int b, int d, double h = 1e-3) {
    const auto G = christoffel(g, x);
    double s = 0.0;
    for (int a = 0; a < 3; ++a) {
        const auto Gp = christoffel(g, shifted(x, a, h));
        const auto Gm = christoffel(g, shifted(x, a, -h));
        s += (Gp[a][b][d] - Gm[a][b][d]) / (2 * h);
    }
    {
        const auto Gp = christoffel(g, shifted(x, d, h));
        const auto Gm = christoffel(g, shifted(x, d, -h));
        for (int a = 0; a < 3; ++a) s -= (Gp[a][a][b] - Gm[a][a][b]) / (2 * h);
    }
    for (int a = 0; a < 3; ++a)
        for (int e = 0; e < 3; ++e) s += G[a][a][e] * G[e][b][d] - G[a][d][e] * G[e][a][b];
    return s;
}

// Gauss curvature of r(z)^2 dtheta^2 + dz^2 from the classical formula
// K = -(sqrt E)_zz / sqrt E with E = r^2, differencing r itself.
inline double gauss_fd(const std::function<double(double)>& r, double z, double h = 1e-4) {
    return -(r(z + h) - 2 * r(z) + r(z - h)) / (h * h) / r(z);
}

// Signed curvature of the polar curve rho(theta) in the Euclidean plane.
inline double polar_curvature(double rho, double d1, double d2) {
    return (rho * rho + 2 * d1 * d1 - rho * d2) / std::pow(rho * rho + d1 * d1, 1.5);
}

} // namespace oracle
