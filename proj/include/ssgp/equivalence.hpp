#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ssgp/covariance.hpp"
#include "ssgp/kernels.hpp"

namespace ssgp {

// Dimensionless Volterra kernel of a measure change. Square-integrability
// over the triangle is part of the contract; validate_perturbation probes it
// numerically, which is what rules out the (-1)-homogeneous family.
struct PerturbationKernel {
    GenericVolterraKernel l;
};

inline PerturbationKernel zero_perturbation() {
    GenericVolterraKernel k;
    k.eval = [](double, double) { return 0.0; };
    k.name = "l=0";
    return {std::move(k)};
}

inline PerturbationKernel constant_perturbation(double c) {
    GenericVolterraKernel k;
    k.eval = [c](double, double) { return c; };
    k.name = "l=" + std::to_string(c);
    return {std::move(k)};
}

// l(v, u) = v.
inline PerturbationKernel linear_time_perturbation() {
    GenericVolterraKernel k;
    k.eval = [](double v, double) { return v; };
    k.name = "l=v";
    return {std::move(k)};
}

// l(t, s) = (1/t) g(s/t): homogeneous of degree -1, the family the
// square-integrability validator must reject on [0, T].
template <class G>
inline PerturbationKernel scale_invariant_perturbation(G&& g) {
    GenericVolterraKernel k;
    k.eval = [g](double t, double s) { return g(s / t) / t; };
    k.name = "l=(1/t)g(s/t)";
    return {std::move(k)};
}

struct PerturbationValidation {
    bool square_integrable = false;
    double l2_norm_sq = 0.0;                  // N(delta) at the finest probe
    std::vector<double> probe_deltas;         // delta_k, decreasing
    std::vector<double> probe_values;         // N(delta_k)
};

namespace detail {

// N(delta) = int_delta^T int_0^t l(t,s)^2 ds dt.
inline double truncated_l2_norm_sq(const GenericVolterraKernel& l, double delta, double horizon,
                                   double relative_tolerance) {
    QuadratureSpec inner;
    inner.relative_tolerance = relative_tolerance / 10.0;
    if (l.origin_exponent) {
        const double expo = 2.0 * *l.origin_exponent;
        if (expo != 0.0) inner.singularity_left = expo;
    }
    if (l.diagonal_exponent) {
        const double expo = 2.0 * *l.diagonal_exponent;
        if (expo != 0.0) inner.singularity_right = expo;
    }
    QuadratureSpec outer;
    outer.relative_tolerance = relative_tolerance;
    return integrate(
        [&](double t) {
            return integrate([&](double s) {
                const double v = l(t, s);
                return v * v;
            }, 0.0, t, inner);
        },
        delta, horizon, outer);
}

}  // namespace detail

// L2 probe at delta = T * {1e-4, 1e-5, 1e-6}. A convergent kernel has
// shrinking increments between probes; a degree (-1) homogeneous kernel adds
// the same log(10) * int g^2 every decade and is flagged.
inline PerturbationValidation validate_perturbation(const PerturbationKernel& l, double horizon,
                                                    double relative_tolerance = 1e-8) {
    if (!(horizon > 0.0)) throw std::invalid_argument("validate_perturbation: horizon must be positive");
    PerturbationValidation report;
    report.probe_deltas = {1e-4 * horizon, 1e-5 * horizon, 1e-6 * horizon};
    for (double delta : report.probe_deltas)
        report.probe_values.push_back(
            detail::truncated_l2_norm_sq(l.l, delta, horizon, relative_tolerance));
    report.l2_norm_sq = report.probe_values.back();
    const double inc1 = report.probe_values[1] - report.probe_values[0];
    const double inc2 = report.probe_values[2] - report.probe_values[1];
    const double scale = std::abs(report.l2_norm_sq) + 1e-300;
    report.square_integrable = inc2 <= 0.5 * inc1 + 1e-10 * scale;
    return report;
}

// z(t,s) = int_s^t F(u/t) l(u,s) du.
inline double z_kernel(const FFunction& f, const PerturbationKernel& l, double t, double s,
                       double relative_tolerance = 1e-8, int node_count = 16) {
    if (!(s > 0.0) || !(t > 0.0)) throw std::domain_error("z_kernel: requires t, s > 0");
    if (s >= t) return 0.0;
    QuadratureSpec spec;
    spec.node_count = node_count;
    spec.relative_tolerance = relative_tolerance;
    if (f.singularity_at_one) spec.singularity_right = *f.singularity_at_one;
    if (l.l.diagonal_exponent) spec.singularity_left = *l.l.diagonal_exponent;
    return integrate([&](double u) { return f(u / t) * l.l(u, s); }, s, t, spec);
}

// ktilde(t,s) = k(t,s) - t^{beta-1/2} z(t,s). The subtracted term vanishes at
// the diagonal at least linearly, so the base kernel's exponents carry over.
inline GenericVolterraKernel perturbed_kernel(const SelfSimilarKernel& k,
                                              const PerturbationKernel& l,
                                              double relative_tolerance = 1e-8) {
    GenericVolterraKernel out;
    out.eval = [k, l, relative_tolerance](double t, double s) {
        return kernel_eval(k, t, s) -
               std::pow(t, k.beta - 0.5) * z_kernel(k.shape, l, t, s, relative_tolerance);
    };
    out.diagonal_exponent = k.shape.singularity_at_one;
    out.origin_exponent = k.shape.singularity_at_zero;
    out.name = k.shape.name + "~" + l.l.name;
    return out;
}

// Covariance of the perturbed Brownian motion under the reference measure:
//   t^s - int_0^{t^s} int_u^s l - int_0^{t^s} int_u^t l
//       + int_0^t int_0^s int_0^{v1^v2} l(v1,u) l(v2,u) du dv2 dv1.
// Nested quadrature, each inner level 10x tighter; the triple integral is
// split at its interior kinks (v2 = v1 and v1 = t^s).
inline double hitsuda_w_covariance(const PerturbationKernel& l, double t, double s,
                                   double relative_tolerance = 1e-8, int node_count = 16) {
    if (!(t > 0.0) || !(s > 0.0)) throw std::domain_error("hitsuda_w_covariance: requires t, s > 0");
    const double m = std::min(t, s);
    const double rtol_mid = relative_tolerance / 10.0;
    const double rtol_inner = relative_tolerance / 100.0;

    QuadratureSpec outer;
    outer.node_count = node_count;
    outer.relative_tolerance = relative_tolerance;
    QuadratureSpec mid;
    mid.node_count = node_count;
    mid.relative_tolerance = rtol_mid;
    QuadratureSpec inner;
    inner.node_count = node_count;
    inner.relative_tolerance = rtol_inner;
    if (l.l.diagonal_exponent) inner.singularity_left = *l.l.diagonal_exponent;

    auto drift_tail = [&](double u, double x) {  // int_u^x l(v,u) dv
        if (x <= u) return 0.0;
        return integrate([&](double v) { return l.l(v, u); }, u, x, inner);
    };
    const double term2 = integrate([&](double u) { return drift_tail(u, s); }, 0.0, m, outer);
    const double term3 = integrate([&](double u) { return drift_tail(u, t); }, 0.0, m, outer);

    QuadratureSpec innermost;
    innermost.node_count = node_count;
    innermost.relative_tolerance = rtol_inner;
    if (l.l.origin_exponent) {
        const double expo = 2.0 * *l.l.origin_exponent;
        if (expo != 0.0) innermost.singularity_left = expo;
    }
    auto product_overlap = [&](double v1, double v2) {  // int_0^{v1^v2} l(v1,u) l(v2,u) du
        const double w = std::min(v1, v2);
        if (!(w > 0.0)) return 0.0;
        QuadratureSpec spec = innermost;
        if (l.l.diagonal_exponent) {
            const double mult = (v1 == v2) ? 2.0 : 1.0;
            const double expo = mult * *l.l.diagonal_exponent;
            if (expo != 0.0) spec.singularity_right = expo;
        }
        return integrate([&](double u) { return l.l(v1, u) * l.l(v2, u); }, 0.0, w, spec);
    };
    auto inner_v2 = [&](double v1) {  // int_0^s, split where min(v1, v2) switches
        const double split = std::min(v1, s);
        double acc = integrate([&](double v2) { return product_overlap(v1, v2); }, 0.0, split, mid);
        if (split < s)
            acc += integrate([&](double v2) { return product_overlap(v1, v2); }, split, s, mid);
        return acc;
    };
    double term4 = integrate([&](double v1) { return inner_v2(v1); }, 0.0, m, outer);
    if (m < t) term4 += integrate([&](double v1) { return inner_v2(v1); }, m, t, outer);

    return m - term2 - term3 + term4;
}

// Left-point Ito discretization of the log density
// log dP~/dP = int int l dW dW - 1/2 int (int l dW)^2 ds  on a sampled path.
inline double rn_log_density(const PerturbationKernel& l, const TimeGrid& grid,
                             const std::vector<double>& w_path) {
    if (w_path.size() != grid.size())
        throw std::invalid_argument("rn_log_density: path length must match the grid");
    const std::size_t n = grid.size();
    std::vector<double> dw(n - 1);
    for (std::size_t j = 0; j + 1 < n; ++j) dw[j] = w_path[j + 1] - w_path[j];

    // Outer sum over grid points with an outgoing increment; A_0 = 0.
    double stochastic = 0.0;
    double compensator = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        // A_i = sum_{j<i} l(t_i, t_j) dW_j, the left-point inner integral.
        const double ti = grid[i];
        double a = 0.0;
        for (std::size_t j = 0; j < i; ++j) {
            const double v = l.l(ti, grid[j]);
            if (!std::isfinite(v))
                throw data_error("rn_log_density: kernel not finite at a grid point");
            a += v * dw[j];
        }
        stochastic += a * dw[i];
        compensator += a * a * (grid[i + 1] - grid[i]);
    }
    return stochastic - 0.5 * compensator;
}

struct LemmaDivergenceEntry {
    double epsilon = 0.0;
    double measured = 0.0;   // N(eps) by nested quadrature
    double expected = 0.0;   // log(T/eps) * int_0^1 g^2
    double rel_error = 0.0;
};

struct LemmaDivergenceReport {
    double g_norm_sq = 0.0;
    std::vector<LemmaDivergenceEntry> entries;
    double worst_rel_error = 0.0;
};

// For l(t,s) = (1/t) g(s/t): N(eps) = int_eps^T int_0^t l^2 ds dt equals
// log(T/eps) int_0^1 g^2 du, so square-integrability down to 0 forces g = 0.
template <class G>
inline LemmaDivergenceReport lemma32_divergence(G&& g, double horizon,
                                                const std::vector<double>& epsilons,
                                                double relative_tolerance = 1e-10) {
    if (!(horizon > 0.0)) throw std::invalid_argument("lemma32_divergence: horizon must be positive");
    if (epsilons.empty()) throw std::invalid_argument("lemma32_divergence: empty epsilon list");
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        if (!(epsilons[i] > 0.0 && epsilons[i] < horizon))
            throw std::invalid_argument("lemma32_divergence: epsilons must lie in (0, T)");
        if (i > 0 && !(epsilons[i] < epsilons[i - 1]))
            throw std::invalid_argument("lemma32_divergence: epsilons must decrease");
    }
    QuadratureSpec spec;
    spec.relative_tolerance = relative_tolerance;

    LemmaDivergenceReport report;
    report.g_norm_sq = integrate([&](double u) {
        const double v = g(u);
        return v * v;
    }, 0.0, 1.0, spec);

    QuadratureSpec inner;
    inner.relative_tolerance = relative_tolerance / 10.0;
    for (double eps : epsilons) {
        LemmaDivergenceEntry entry;
        entry.epsilon = eps;
        entry.measured = integrate(
            [&](double t) {
                return integrate([&](double s) {
                    const double v = g(s / t) / t;
                    return v * v;
                }, 0.0, t, inner);
            },
            eps, horizon, spec);
        entry.expected = std::log(horizon / eps) * report.g_norm_sq;
        entry.rel_error = std::abs(entry.measured - entry.expected) / std::abs(entry.expected);
        report.worst_rel_error = std::max(report.worst_rel_error, entry.rel_error);
        report.entries.push_back(entry);
    }
    return report;
}

struct ScalingCheckReport {
    bool selfsimilar = false;
    double worst_rel_deviation = 0.0;
    std::pair<double, double> worst_pair{0.0, 0.0};
    std::size_t pairs_compared = 0;
    double tolerance = 0.0;
};

// rtilde(t,s) from the perturbed kernel must satisfy
// rtilde(2t, 2s) = 2^{2 beta} rtilde(t, s) exactly when l == 0 and for no
// nonzero l; checked on grid pairs whose doubled points stay on the grid.
inline ScalingCheckReport selfsimilar_iff_l_zero_check(const SelfSimilarKernel& k,
                                                       const PerturbationKernel& l,
                                                       const TimeGrid& grid, double tol,
                                                       double relative_tolerance = 1e-7) {
    if (!(tol > 0.0)) throw std::invalid_argument("selfsimilar_iff_l_zero_check: tolerance must be positive");
    const GenericVolterraKernel kt = perturbed_kernel(k, l, relative_tolerance / 10.0);
    const std::vector<double> ts = grid.positive_points();

    std::vector<double> base;
    for (double t : ts) {
        const double doubled = 2.0 * t;
        for (double m : ts)
            if (std::abs(m - doubled) <= 1e-9 * doubled) {
                base.push_back(t);
                break;
            }
    }
    if (base.size() < 2)
        throw std::invalid_argument("selfsimilar_iff_l_zero_check: grid not closed under doubling");

    ScalingCheckReport report;
    report.tolerance = tol;
    const double factor = std::pow(2.0, 2.0 * k.beta);
    for (std::size_t i = 0; i < base.size(); ++i) {
        for (std::size_t j = i; j < base.size(); ++j) {
            const double t = base[j];
            const double s = base[i];
            const double r_base = factorized_covariance(kt, t, s, relative_tolerance);
            const double r_scaled = factorized_covariance(kt, 2.0 * t, 2.0 * s, relative_tolerance);
            const double dev = std::abs(r_scaled - factor * r_base) /
                               std::max(std::abs(factor * r_base), 1e-300);
            ++report.pairs_compared;
            if (dev > report.worst_rel_deviation) {
                report.worst_rel_deviation = dev;
                report.worst_pair = {t, s};
            }
        }
    }
    report.selfsimilar = report.worst_rel_deviation <= tol;
    return report;
}

}  // namespace ssgp
