#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ssgp/numerics.hpp"

namespace ssgp {

// Kernel shape on (0,1]; F == 0 on (1,inf) by support convention. Declared
// exponents describe algebraic endpoint behaviour, F ~ u^{l0} at 0+ and
// F ~ (1-u)^{l1} at 1-, and must be > -1/2 so that F stays square-integrable.
struct FFunction {
    std::function<double(double)> eval;
    std::optional<double> singularity_at_zero;
    std::optional<double> singularity_at_one;
    std::string name;

    double operator()(double u) const {
        if (!(u > 0.0)) throw std::domain_error("FFunction: argument must be > 0");
        if (u > 1.0) return 0.0;
        return eval(u);
    }
};

// Canonical kernel of a self-similar process: k(t,s) = t^{beta-1/2} F(s/t).
struct SelfSimilarKernel {
    double beta = 0.5;
    FFunction shape;
};

inline double kernel_eval(const SelfSimilarKernel& k, double t, double s) {
    if (!(t > 0.0) || !(s > 0.0))
        throw std::domain_error("kernel_eval: requires t, s > 0");
    if (s >= t) return 0.0;  // Volterra support
    return std::pow(t, k.beta - 0.5) * k.shape(s / t);
}

// Black-box Volterra kernel. diagonal_exponent: k ~ (t-s)^l as s->t-;
// origin_exponent: k ~ s^l as s->0+. Both feed quadrature specs downstream.
struct GenericVolterraKernel {
    std::function<double(double, double)> eval;
    std::optional<double> diagonal_exponent;
    std::optional<double> origin_exponent;
    std::string name;

    double operator()(double t, double s) const {
        if (s >= t) return 0.0;
        return eval(t, s);
    }
};

inline GenericVolterraKernel as_generic(const SelfSimilarKernel& k) {
    GenericVolterraKernel out;
    out.eval = [k](double t, double s) { return kernel_eval(k, t, s); };
    out.diagonal_exponent = k.shape.singularity_at_one;
    out.origin_exponent = k.shape.singularity_at_zero;
    out.name = k.shape.name;
    return out;
}

struct HomogeneityReport {
    bool homogeneous = false;
    double degree = 0.0;
    double tolerance = 0.0;
    double worst_violation = 0.0;  // |k(at,as) - a^deg k(t,s)| / (1 + |k(t,s)|)
    double worst_scale = 0.0;
    std::pair<double, double> worst_point{0.0, 0.0};
};

// Sample-based homogeneity test: k(at,as) == a^degree k(t,s) at every scale
// and sample point, within tol*(1 + |k(t,s)|).
inline HomogeneityReport check_homogeneity(const GenericVolterraKernel& k, double degree,
                                           const std::vector<double>& scales,
                                           const std::vector<std::pair<double, double>>& sample_points,
                                           double tol) {
    if (scales.empty() || sample_points.empty())
        throw std::invalid_argument("check_homogeneity: empty sample set");
    if (!(tol > 0.0)) throw std::invalid_argument("check_homogeneity: tolerance must be positive");
    for (const auto& [t, s] : sample_points)
        if (!(0.0 < s && s < t))
            throw std::invalid_argument("check_homogeneity: sample points must satisfy 0 < s < t");
    for (double a : scales)
        if (!(a > 0.0)) throw std::invalid_argument("check_homogeneity: scales must be positive");

    HomogeneityReport report;
    report.degree = degree;
    report.tolerance = tol;
    for (const auto& [t, s] : sample_points) {
        const double base = k(t, s);
        for (double a : scales) {
            const double scaled = k(a * t, a * s);
            const double violation = std::abs(scaled - std::pow(a, degree) * base) / (1.0 + std::abs(base));
            if (violation > report.worst_violation) {
                report.worst_violation = violation;
                report.worst_scale = a;
                report.worst_point = {t, s};
            }
        }
    }
    report.homogeneous = report.worst_violation <= tol;
    return report;
}

// int_0^1 F(u)^2 du, with the declared exponents doubled for the quadrature.
inline double f_l2_norm_sq(const FFunction& f, double relative_tolerance = 1e-8,
                           int node_count = 16) {
    QuadratureSpec spec;
    spec.node_count = node_count;
    spec.relative_tolerance = relative_tolerance;
    if (f.singularity_at_zero) spec.singularity_left = 2.0 * *f.singularity_at_zero;
    if (f.singularity_at_one) spec.singularity_right = 2.0 * *f.singularity_at_one;
    return integrate([&f](double u) {
        const double v = f.eval(u);
        return v * v;
    }, 0.0, 1.0, spec);
}

}  // namespace ssgp
