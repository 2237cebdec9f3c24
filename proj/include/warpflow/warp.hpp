#pragma once

// Warping functions r(z) of the warped product M x I with metric
// r(z)^2 g_M + dz^2, and the ambient curvature quantities built from them.

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace warpflow {

// r(z) = (-z)^(-beta) on (-inf, a), a <= 0.
struct PowerBeta {
    double beta;
    double a = -1.0;
};
// r(z) = exp(sqrt(k) z) on R; constant Gauss curvature -k.
struct ExpSqrtK {
    double k;
};
// r(z) = cos(sqrt(k) z) on (-pi/(2 sqrt k), pi/(2 sqrt k)); constant Gauss curvature k.
struct CosSqrtK {
    double k;
};
// r(z) = z on (0, inf); the flat cone / Euclidean plane in polar form.
struct Linear {};
// r(z) = exp(-z^2) on (-inf, 0).
struct ExpNegZSquared {};
// r(z) = exp(-exp(-z)) on R.
struct DoubleExp {};
// Piece i covers [knots[i], knots[i+1]) with r(z) = sum_k coeffs[i][k] (z - knots[i])^k.
struct PiecewisePolynomial {
    std::vector<double> knots;
    std::vector<std::vector<double>> coeffs;
};

using WarpFamily =
    std::variant<PowerBeta, ExpSqrtK, CosSqrtK, Linear, ExpNegZSquared, DoubleExp, PiecewisePolynomial>;

class WarpingFunction {
public:
    static constexpr int kMaxOrder = 6;

    explicit WarpingFunction(WarpFamily family);

    static WarpingFunction power_beta(double beta, double a = -1.0) { return WarpingFunction(PowerBeta{beta, a}); }
    static WarpingFunction exp_sqrt_k(double k) { return WarpingFunction(ExpSqrtK{k}); }
    static WarpingFunction cos_sqrt_k(double k) { return WarpingFunction(CosSqrtK{k}); }
    static WarpingFunction linear() { return WarpingFunction(Linear{}); }
    static WarpingFunction exp_neg_z_squared() { return WarpingFunction(ExpNegZSquared{}); }
    static WarpingFunction double_exp() { return WarpingFunction(DoubleExp{}); }

    const WarpFamily& family() const { return family_; }
    std::string name() const;

    // Open domain interval; either end may be infinite.
    double lower() const { return lo_; }
    double upper() const { return hi_; }
    bool contains(double z) const { return z > lo_ && z < hi_; }
    int max_order() const { return kMaxOrder; }

    // [r, r', ..., r^(order)] at z.
    std::vector<double> eval(double z, int order) const;

    double value(double z) const;
    double log_value(double z) const;
    // r^(k)(z) / r(z). Stays finite where r itself under- or overflows.
    double ratio(double z, int k) const;
    double log_derivative(double z) const { return ratio(z, 1); }

    // r r'' - (1 + alpha) r'^2, evaluated as r^2 (r''/r - (1 + alpha) (r'/r)^2).
    double convexity_margin(double z, double alpha) const;

private:
    double ratio_unchecked(double z, int k) const;

    WarpFamily family_;
    double lo_;
    double hi_;
};

double gauss_curvature(const WarpingFunction& w, double z);

enum class AmbientModel { Flat, RoundSphere };

// Curvature of r^2 g_M + dz^2 for flat M in the orthonormal frame {E_i = E_i^M / r, E_z}.
// |R| sums squared components over index pairs i < j and the mixed pairs (i, z), each once;
// |grad R| uses the z-derivatives of those component functions.
struct CurvatureComponents {
    double sec_tangent;
    double sec_mixed;
    double norm_R;
    double norm_gradR;
};

CurvatureComponents curvature_components(const WarpingFunction& w, int n, double z,
                                         AmbientModel model = AmbientModel::Flat);

// Per unit frame vector: ric_tangent = Ric(E_i, E_i), ric_z = Ric(E_z, E_z).
struct AmbientRicci {
    double ric_tangent;
    double ric_z;
};

AmbientRicci ambient_ricci(const WarpingFunction& w, int n, double z, AmbientModel model);

struct ConditionReport {
    bool c1_holds;
    double c2_margin;
    double sup_log_deriv;
    double rr2_margin;
    double alpha;
    double rho;
    double c;
};

ConditionReport check_conditions(const WarpingFunction& w, std::span<const double> grid, double alpha,
                                 double rho);

struct LogDerivativeGap {
    double lhs;
    double rhs;
    bool holds;
};

LogDerivativeGap log_derivative_gap(const WarpingFunction& w, double alpha, double z1, double z2);

std::vector<double> linspace(double lo, double hi, int count);

} // namespace warpflow
