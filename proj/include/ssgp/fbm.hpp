#pragma once

#include <cmath>
#include <cstdio>
#include <string>

#include "ssgp/kernels.hpp"

namespace ssgp {

// Hurst index. The checked constructor enforces the supported range
// [0.05, 0.95]: gamma arguments and quadrature exponents degrade at the
// extremes. unchecked() admits all of (0,1) for experiments. Kernel
// quadrature also loses accuracy within ~0.01 of H = 1/2 (the singularity
// exponent approaches -1); H = 1/2 itself takes the exact Brownian branch.
class HurstIndex {
public:
    static constexpr double kMinSupported = 0.05;
    static constexpr double kMaxSupported = 0.95;

    explicit HurstIndex(double h) : h_(h) {
        if (!(h >= kMinSupported && h <= kMaxSupported))
            throw std::domain_error("HurstIndex: H must lie in [0.05, 0.95]");
    }

    static HurstIndex unchecked(double h) {
        if (!(h > 0.0 && h < 1.0))
            throw std::domain_error("HurstIndex: H must lie in (0, 1)");
        HurstIndex out(0.5);
        out.h_ = h;
        return out;
    }

    double value() const { return h_; }
    bool is_brownian() const { return h_ == 0.5; }

private:
    double h_;
};

// R_H(t,s) = (s^{2H} + t^{2H} - |t-s|^{2H}) / 2.
inline double fbm_covariance(const HurstIndex& hurst, double t, double s) {
    if (!std::isfinite(t) || !std::isfinite(s) || t < 0.0 || s < 0.0)
        throw std::domain_error("fbm_covariance: requires finite t, s >= 0");
    const double two_h = 2.0 * hurst.value();
    return 0.5 * (std::pow(s, two_h) + std::pow(t, two_h) - std::pow(std::abs(t - s), two_h));
}

// Kernel normalization for the smooth regime H > 1/2:
// ( H(2H-1) / B(2-2H, H-1/2) )^{1/2}.
inline double fbm_constant_smooth(const HurstIndex& hurst) {
    const double h = hurst.value();
    if (!(h > 0.5)) throw std::domain_error("fbm_constant_smooth: requires H > 1/2");
    return std::sqrt(h * (2.0 * h - 1.0) / beta_fn(2.0 - 2.0 * h, h - 0.5));
}

// Kernel normalization for the rough regime H < 1/2:
// ( 2H / ((1-2H) B(1-2H, H+1/2)) )^{1/2}.
inline double fbm_constant_rough(const HurstIndex& hurst) {
    const double h = hurst.value();
    if (!(h < 0.5)) throw std::domain_error("fbm_constant_rough: requires H < 1/2");
    return std::sqrt(2.0 * h / ((1.0 - 2.0 * h) * beta_fn(1.0 - 2.0 * h, h + 0.5)));
}

// Canonical fBm kernel, evaluated from its integral form.
//   H > 1/2: c_s s^{1/2-H} int_s^t (u-s)^{H-3/2} u^{H-1/2} du
//   H < 1/2: c_r [ (t/s)^{H-1/2}(t-s)^{H-1/2}
//                  - (H-1/2) s^{1/2-H} int_s^t u^{H-3/2}(u-s)^{H-1/2} du ]
//   H = 1/2: 1 on s < t.
inline double fbm_kernel(const HurstIndex& hurst, double t, double s,
                         double relative_tolerance = 1e-10) {
    if (!(t > 0.0) || !(s > 0.0))
        throw std::domain_error("fbm_kernel: requires t, s > 0");
    if (s >= t) return 0.0;
    const double h = hurst.value();
    if (h == 0.5) return 1.0;

    QuadratureSpec spec;
    spec.relative_tolerance = relative_tolerance;
    if (h > 0.5) {
        spec.singularity_left = h - 1.5;
        const double integral = integrate(
            [h](double u, double dist_left, double) {
                return std::pow(dist_left, h - 1.5) * std::pow(u, h - 0.5);
            },
            s, t, spec);
        return fbm_constant_smooth(hurst) * std::pow(s, 0.5 - h) * integral;
    }
    spec.singularity_left = h - 0.5;
    const double integral = integrate(
        [h](double u, double dist_left, double) {
            return std::pow(u, h - 1.5) * std::pow(dist_left, h - 0.5);
        },
        s, t, spec);
    return fbm_constant_rough(hurst) *
           (std::pow(t / s, h - 0.5) * std::pow(t - s, h - 0.5) -
            (h - 0.5) * std::pow(s, 0.5 - h) * integral);
}

namespace detail {

inline std::string fbm_label(double h) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fbm_H%.6g", h);
    return buf;
}

}  // namespace detail

// The beta-independent shape of the fBm kernel: k_H(t,s) = t^{H-1/2} F(s/t).
//
// Declared endpoint exponents (both are -|H-1/2|, measured numerically for
// the origin; the diagonal one is H-1/2 straight from the closed forms):
//   H > 1/2: F ~ u^{1/2-H} at 0+ and F ~ (1-u)^{H-1/2} -> 0 at 1-.
//   H < 1/2: F ~ u^{H-1/2} at 0+ and F ~ (1-u)^{H-1/2} (blows up) at 1-.
inline FFunction fbm_f_function(const HurstIndex& hurst, double relative_tolerance = 1e-10) {
    const double h = hurst.value();
    if (h == 0.5) {
        FFunction f;
        f.eval = [](double) { return 1.0; };
        f.name = "brownian";
        return f;
    }
    FFunction f;
    f.name = detail::fbm_label(h);
    if (h > 0.5) {
        const double c = fbm_constant_smooth(hurst);
        f.eval = [h, c, relative_tolerance](double u) {
            if (u >= 1.0) return 0.0;
            QuadratureSpec spec;
            spec.relative_tolerance = relative_tolerance;
            spec.singularity_left = h - 1.5;
            const double integral = integrate(
                [h](double z, double dist_left, double) {
                    return std::pow(dist_left, h - 1.5) * std::pow(z, h - 0.5);
                },
                u, 1.0, spec);
            return c * std::pow(u, 0.5 - h) * integral;
        };
        f.singularity_at_zero = 0.5 - h;
        f.singularity_at_one = h - 0.5;
        return f;
    }
    const double c = fbm_constant_rough(hurst);
    f.eval = [h, c, relative_tolerance](double u) {
        // (1/u - 1) written as (1-u)/u: the direct form cancels near u = 1.
        QuadratureSpec spec;
        spec.relative_tolerance = relative_tolerance;
        spec.singularity_left = h - 0.5;
        const double integral = integrate(
            [h](double z, double dist_left, double) {
                return std::pow(z, h - 1.5) * std::pow(dist_left, h - 0.5);
            },
            u, 1.0, spec);
        return c * (std::pow((1.0 - u) / u, h - 0.5) -
                    (h - 0.5) * std::pow(u, 0.5 - h) * integral);
    };
    f.singularity_at_zero = h - 0.5;
    f.singularity_at_one = h - 0.5;
    return f;
}

// fBm kernel as a black-box Volterra kernel with its exponents declared.
inline GenericVolterraKernel fbm_volterra_kernel(const HurstIndex& hurst,
                                                 double relative_tolerance = 1e-10) {
    const double h = hurst.value();
    GenericVolterraKernel k;
    k.eval = [hurst, relative_tolerance](double t, double s) {
        return fbm_kernel(hurst, t, s, relative_tolerance);
    };
    if (h != 0.5) {
        k.diagonal_exponent = h - 0.5;
        k.origin_exponent = -std::abs(h - 0.5);
    }
    k.name = detail::fbm_label(h);
    return k;
}

// Same process, beta = H and the F-shape; the two evaluation routes must
// agree and the tests hold them to that.
inline SelfSimilarKernel fbm_self_similar_kernel(const HurstIndex& hurst,
                                                 double relative_tolerance = 1e-10) {
    return SelfSimilarKernel{hurst.value(), fbm_f_function(hurst, relative_tolerance)};
}

}  // namespace ssgp
