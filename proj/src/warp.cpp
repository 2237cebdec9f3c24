#include "warpflow/warp.hpp"

#include "warpflow/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace warpflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

// Coefficients of P_k with r^(k)/r = P_k(g), g = exp(-z), for r = exp(-exp(-z)).
// P_1 = g and P_{k+1}(g) = g (P_k(g) - P_k'(g)).
using PolyTable = std::array<std::array<double, WarpingFunction::kMaxOrder + 2>, WarpingFunction::kMaxOrder + 1>;

PolyTable double_exp_table() {
    PolyTable p{};
    p[0][0] = 1.0;
    for (int k = 0; k < WarpingFunction::kMaxOrder; ++k) {
        for (int j = 0; j <= k; ++j) {
            const double c = p[k][j];
            p[k + 1][j + 1] += c;
            if (j > 0) p[k + 1][j] -= c * j;
        }
    }
    return p;
}

const PolyTable& double_exp_poly() {
    static const PolyTable table = double_exp_table();
    return table;
}

// Physicists' Hermite polynomial: r^(k)/r = (-1)^k H_k(z) for r = exp(-z^2).
double hermite(int k, double z) {
    double h0 = 1.0;
    if (k == 0) return h0;
    double h1 = 2.0 * z;
    for (int m = 1; m < k; ++m) {
        const double h2 = 2.0 * z * h1 - 2.0 * m * h0;
        h0 = h1;
        h1 = h2;
    }
    return h1;
}

struct PieceEval {
    std::size_t piece;
    double dz;
};

PieceEval locate(const PiecewisePolynomial& p, double z) {
    auto it = std::upper_bound(p.knots.begin(), p.knots.end(), z);
    std::size_t i = it == p.knots.begin() ? 0 : static_cast<std::size_t>(it - p.knots.begin()) - 1;
    i = std::min(i, p.coeffs.size() - 1);
    return {i, z - p.knots[i]};
}

double poly_derivative(const std::vector<double>& c, double x, int k) {
    double acc = 0.0;
    for (int j = static_cast<int>(c.size()) - 1; j >= k; --j) {
        double falling = 1.0;
        for (int m = 0; m < k; ++m) falling *= (j - m);
        acc = acc * x + c[j] * falling;
    }
    return acc;
}

} // namespace

WarpingFunction::WarpingFunction(WarpFamily family) : family_(std::move(family)) {
    std::visit(overloaded{
                   [&](const PowerBeta& f) {
                       if (!(f.beta > 0.0)) throw DomainError("power_beta: beta must be positive");
                       if (f.a > 0.0) throw DomainError("power_beta: a must be <= 0");
                       lo_ = -kInf;
                       hi_ = f.a;
                   },
                   [&](const ExpSqrtK& f) {
                       if (!(f.k > 0.0)) throw DomainError("exp_sqrt_k: k must be positive");
                       lo_ = -kInf;
                       hi_ = kInf;
                   },
                   [&](const CosSqrtK& f) {
                       if (!(f.k > 0.0)) throw DomainError("cos_sqrt_k: k must be positive");
                       hi_ = std::numbers::pi / (2.0 * std::sqrt(f.k));
                       lo_ = -hi_;
                   },
                   [&](const Linear&) {
                       lo_ = 0.0;
                       hi_ = kInf;
                   },
                   [&](const ExpNegZSquared&) {
                       lo_ = -kInf;
                       hi_ = 0.0;
                   },
                   [&](const DoubleExp&) {
                       lo_ = -kInf;
                       hi_ = kInf;
                   },
                   [&](const PiecewisePolynomial& f) {
                       if (f.knots.size() < 2 || f.coeffs.size() + 1 != f.knots.size())
                           throw DomainError("piecewise_polynomial: need knots.size() == coeffs.size() + 1 >= 2");
                       if (!std::is_sorted(f.knots.begin(), f.knots.end()) ||
                           std::adjacent_find(f.knots.begin(), f.knots.end()) != f.knots.end())
                           throw DomainError("piecewise_polynomial: knots must be strictly increasing");
                       lo_ = f.knots.front();
                       hi_ = f.knots.back();
                       for (std::size_t i = 0; i < f.coeffs.size(); ++i) {
                           const double h = f.knots[i + 1] - f.knots[i];
                           for (int s = 0; s <= 32; ++s) {
                               if (poly_derivative(f.coeffs[i], h * s / 32.0, 0) <= 0.0)
                                   throw DomainError("piecewise_polynomial: r must be positive on its domain");
                           }
                       }
                   },
               },
               family_);
}

std::string WarpingFunction::name() const {
    return std::visit(overloaded{
                          [](const PowerBeta& f) { return fmt::format("power_beta(beta={}, a={})", f.beta, f.a); },
                          [](const ExpSqrtK& f) { return fmt::format("exp_sqrt_k(k={})", f.k); },
                          [](const CosSqrtK& f) { return fmt::format("cos_sqrt_k(k={})", f.k); },
                          [](const Linear&) { return std::string("linear"); },
                          [](const ExpNegZSquared&) { return std::string("exp_neg_z_squared"); },
                          [](const DoubleExp&) { return std::string("double_exp"); },
                          [](const PiecewisePolynomial& f) {
                              return fmt::format("piecewise_polynomial({} pieces)", f.coeffs.size());
                          },
                      },
                      family_);
}

double WarpingFunction::ratio_unchecked(double z, int k) const {
    if (k == 0) return 1.0;
    return std::visit(
        overloaded{
            [&](const PowerBeta& f) {
                // r^(k)/r = beta (beta+1) ... (beta+k-1) (-z)^(-k)
                const double inv = 1.0 / (-z);
                double c = 1.0;
                double p = 1.0;
                for (int m = 0; m < k; ++m) {
                    c *= f.beta + m;
                    p *= inv;
                }
                return c * p;
            },
            [&](const ExpSqrtK& f) { return std::pow(std::sqrt(f.k), k); },
            [&](const CosSqrtK& f) {
                const double s = std::sqrt(f.k);
                const double sk = std::pow(s, k);
                if (k % 2 == 0) return (k / 2) % 2 == 0 ? sk : -sk;
                const double t = std::tan(s * z);
                return ((k + 1) / 2) % 2 == 0 ? sk * t : -sk * t;
            },
            [&](const Linear&) { return k == 1 ? 1.0 / z : 0.0; },
            [&](const ExpNegZSquared&) { return (k % 2 == 0 ? 1.0 : -1.0) * hermite(k, z); },
            [&](const DoubleExp&) {
                const double g = std::exp(-z);
                const auto& c = double_exp_poly()[k];
                double acc = c[k];
                for (int j = k - 1; j >= 0; --j) acc = acc * g + c[j];
                return acc;
            },
            [&](const PiecewisePolynomial& f) {
                const auto [i, dz] = locate(f, z);
                return poly_derivative(f.coeffs[i], dz, k) / poly_derivative(f.coeffs[i], dz, 0);
            },
        },
        family_);
}

double WarpingFunction::ratio(double z, int k) const {
    if (!contains(z)) throw DomainError(fmt::format("{}: z = {} outside ({}, {})", name(), z, lo_, hi_));
    if (k < 0 || k > kMaxOrder) throw OrderError(fmt::format("derivative order {} exceeds {}", k, kMaxOrder));
    return ratio_unchecked(z, k);
}

double WarpingFunction::log_value(double z) const {
    if (!contains(z)) throw DomainError(fmt::format("{}: z = {} outside ({}, {})", name(), z, lo_, hi_));
    return std::visit(overloaded{
                          [&](const PowerBeta& f) { return -f.beta * std::log(-z); },
                          [&](const ExpSqrtK& f) { return std::sqrt(f.k) * z; },
                          [&](const CosSqrtK& f) { return std::log(std::cos(std::sqrt(f.k) * z)); },
                          [&](const Linear&) { return std::log(z); },
                          [&](const ExpNegZSquared&) { return -z * z; },
                          [&](const DoubleExp&) { return -std::exp(-z); },
                          [&](const PiecewisePolynomial& f) {
                              const auto [i, dz] = locate(f, z);
                              return std::log(poly_derivative(f.coeffs[i], dz, 0));
                          },
                      },
                      family_);
}

double WarpingFunction::value(double z) const {
    if (const auto* f = std::get_if<PowerBeta>(&family_)) {
        if (!contains(z)) throw DomainError(fmt::format("{}: z = {} outside domain", name(), z));
        return std::pow(-z, -f->beta);
    }
    if (std::holds_alternative<Linear>(family_)) {
        if (!contains(z)) throw DomainError(fmt::format("{}: z = {} outside domain", name(), z));
        return z;
    }
    if (const auto* f = std::get_if<CosSqrtK>(&family_)) {
        if (!contains(z)) throw DomainError(fmt::format("{}: z = {} outside domain", name(), z));
        return std::cos(std::sqrt(f->k) * z);
    }
    return std::exp(log_value(z));
}

std::vector<double> WarpingFunction::eval(double z, int order) const {
    if (order < 0 || order > kMaxOrder)
        throw OrderError(fmt::format("derivative order {} exceeds {}", order, kMaxOrder));
    const double r = value(z);
    std::vector<double> out(static_cast<std::size_t>(order) + 1);
    out[0] = r;
    for (int k = 1; k <= order; ++k) out[k] = r * ratio_unchecked(z, k);
    return out;
}

double WarpingFunction::convexity_margin(double z, double alpha) const {
    const double w = ratio(z, 1);
    const double r = value(z);
    return r * r * (ratio_unchecked(z, 2) - (1.0 + alpha) * (w * w));
}

double gauss_curvature(const WarpingFunction& w, double z) { return -w.ratio(z, 2); }

CurvatureComponents curvature_components(const WarpingFunction& w, int n, double z, AmbientModel model) {
    if (model != AmbientModel::Flat) throw UnsupportedModel("curvature_components requires a flat model M");
    if (n < 2) throw PreconditionError("curvature_components requires n >= 2");
    const double r1 = w.ratio(z, 1);
    const double r2 = w.ratio(z, 2);
    const double r3 = w.ratio(z, 3);
    const double tangent_pairs = 0.5 * n * (n - 1);
    CurvatureComponents c{};
    c.sec_tangent = -r1 * r1;
    c.sec_mixed = -r2;
    c.norm_R = std::sqrt(tangent_pairs * c.sec_tangent * c.sec_tangent + n * c.sec_mixed * c.sec_mixed);
    // d/dz (r'/r) = r''/r - (r'/r)^2 and d/dz (r''/r) = r'''/r - (r''/r)(r'/r)
    const double d_tangent = -2.0 * r1 * (r2 - r1 * r1);
    const double d_mixed = -(r3 - r2 * r1);
    c.norm_gradR = std::sqrt(tangent_pairs * d_tangent * d_tangent + n * d_mixed * d_mixed);
    return c;
}

AmbientRicci ambient_ricci(const WarpingFunction& w, int n, double z, AmbientModel model) {
    if (n < 2) throw PreconditionError("ambient_ricci requires n >= 2");
    const double r1 = w.ratio(z, 1);
    const double r2 = w.ratio(z, 2);
    AmbientRicci ric{};
    ric.ric_z = -n * r2;
    ric.ric_tangent = -(r2 + (n - 1) * r1 * r1);
    if (model == AmbientModel::RoundSphere) {
        const double r = w.value(z);
        ric.ric_tangent += (n - 1) / (r * r);
    }
    return ric;
}

ConditionReport check_conditions(const WarpingFunction& w, std::span<const double> grid, double alpha, double rho) {
    if (grid.empty()) throw PreconditionError("check_conditions: empty grid");
    if (!(alpha >= 1.0)) throw PreconditionError("check_conditions: alpha must be >= 1");
    ConditionReport rep{};
    rep.alpha = alpha;
    rep.rho = rho;
    rep.c = std::max(rho, 0.0);
    rep.c1_holds = true;
    rep.c2_margin = kInf;
    rep.rr2_margin = kInf;
    rep.sup_log_deriv = -kInf;
    for (double z : grid) {
        const double wz = w.ratio(z, 1);
        if (!(wz > 0.0)) rep.c1_holds = false;
        rep.sup_log_deriv = std::max(rep.sup_log_deriv, wz);
        rep.c2_margin = std::min(rep.c2_margin, w.convexity_margin(z, alpha) + rho - rep.c);
        rep.rr2_margin = std::min(rep.rr2_margin, w.convexity_margin(z, 1.0));
    }
    return rep;
}

LogDerivativeGap log_derivative_gap(const WarpingFunction& w, double alpha, double z1, double z2) {
    if (!(z2 < z1)) throw PreconditionError("log_derivative_gap requires z2 < z1");
    if (!w.contains(z1) || !w.contains(z2)) throw DomainError("log_derivative_gap: points outside the domain");
    constexpr int kSamples = 65;
    for (int i = 0; i < kSamples; ++i) {
        const double z = z2 + (z1 - z2) * i / (kSamples - 1);
        const double r1 = w.ratio(z, 1);
        const double r2 = w.ratio(z, 2);
        const double margin = r2 - (1.0 + alpha) * (r1 * r1);
        const double scale = std::abs(r2) + (1.0 + alpha) * r1 * r1;
        if (margin < -1e-12 * scale || !(r1 > 0.0))
            throw HypothesisError(fmt::format("convexity hypothesis fails at z = {} (margin {})", z, margin));
    }
    const double w1 = w.ratio(z1, 1);
    const double w2 = w.ratio(z2, 1);
    LogDerivativeGap gap{};
    gap.lhs = w2 - w1;
    gap.rhs = -alpha * (z1 - z2) * w1 * w2;
    gap.holds = gap.lhs <= gap.rhs + 1e-12 * std::max({1.0, std::abs(gap.lhs), std::abs(gap.rhs)});
    return gap;
}

std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> v(static_cast<std::size_t>(std::max(count, 0)));
    if (count == 1) {
        v[0] = 0.5 * (lo + hi);
        return v;
    }
    for (int i = 0; i < count; ++i) v[i] = lo + (hi - lo) * i / (count - 1);
    return v;
}

} // namespace warpflow
