#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ssgp/kernels.hpp"

namespace ssgp {

// Moving-average shape of the stationary side: G(v) for lags v >= 0, zero for
// v < 0. decay_rate r means |G(v)| <~ e^{-r v}, which is what truncated
// integrals over [0,inf) use for their tail bounds.
struct StationaryShape {
    std::function<double(double)> eval;
    std::optional<double> singularity_at_zero;  // G ~ v^l as v -> 0+
    std::optional<double> decay_rate;
    std::string name;

    double operator()(double v) const { return v < 0.0 ? 0.0 : eval(v); }
};

// Truncation point for [0,inf) lag integrals; the tail beyond it is reported
// from the declared decay rate.
inline constexpr double kStationaryCutoff = 40.0;

// F(u) = u^{-1/2} G(log(1/u)) on (0,1].
inline FFunction f_from_g(const StationaryShape& g) {
    FFunction f;
    f.eval = [g](double u) { return std::pow(u, -0.5) * g(std::log(1.0 / u)); };
    if (g.decay_rate) {
        const double expo = *g.decay_rate - 0.5;
        if (expo != 0.0) f.singularity_at_zero = expo;
    } else {
        f.singularity_at_zero = -0.5 + 1e-9;  // decay unknown: worst admissible exponent
    }
    f.singularity_at_one = g.singularity_at_zero;
    f.name = g.name.empty() ? "f_from_g" : "f_from_g(" + g.name + ")";
    return f;
}

// G(v) = e^{-v/2} F(e^{-v}) for v >= 0; inverse of f_from_g.
inline StationaryShape g_from_f(const FFunction& f) {
    StationaryShape g;
    g.eval = [f](double v) {
        const double u = std::exp(-v);
        if (u <= 0.0) return 0.0;  // lag beyond double range; G has decayed
        return std::exp(-0.5 * v) * f(u);
    };
    g.singularity_at_zero = f.singularity_at_one;
    g.decay_rate = 0.5 + (f.singularity_at_zero ? *f.singularity_at_zero : 0.0);
    g.name = f.name.empty() ? "g_from_f" : "g_from_f(" + f.name + ")";
    return g;
}

// int_0^cutoff G(v)^2 dv; *tail_bound (optional) receives the
// G(cutoff)^2 / (2 decay_rate) estimate of the discarded tail, or NaN when no
// decay rate is declared.
inline double g_l2_norm_sq(const StationaryShape& g, double cutoff = kStationaryCutoff,
                           double relative_tolerance = 1e-8, double* tail_bound = nullptr) {
    if (!(cutoff > 0.0)) throw std::invalid_argument("g_l2_norm_sq: cutoff must be positive");
    QuadratureSpec spec;
    spec.relative_tolerance = relative_tolerance;
    if (g.singularity_at_zero) {
        const double expo = 2.0 * *g.singularity_at_zero;
        if (expo != 0.0) spec.singularity_left = expo;
    }
    const double value = integrate([&g](double v) {
        const double x = g.eval(v);
        return x * x;
    }, 0.0, cutoff, spec);
    if (tail_bound) {
        if (g.decay_rate && *g.decay_rate > 0.0) {
            const double edge = g.eval(cutoff);
            *tail_bound = edge * edge / (2.0 * *g.decay_rate);
        } else {
            *tail_bound = std::numeric_limits<double>::quiet_NaN();
        }
    }
    return value;
}

// Covariance pushforward of the time change: r_Y(tau) = e^{-beta tau} r(e^tau, 1).
template <class R>
inline double stationary_covariance_from_selfsimilar(R&& r, double beta, double tau) {
    if (!(tau >= 0.0)) throw std::invalid_argument("stationary_covariance_from_selfsimilar: lag must be >= 0");
    return std::exp(-beta * tau) * r(std::exp(tau), 1.0);
}

struct SampledPath {
    std::vector<double> times;
    std::vector<double> values;
};

// Y(log t) = t^{-beta} X(t); exact transform, times go to log-times.
inline SampledPath lamperti_path(const SampledPath& x, double beta) {
    if (x.times.size() != x.values.size())
        throw std::invalid_argument("lamperti_path: times/values size mismatch");
    SampledPath y;
    y.times.reserve(x.times.size());
    y.values.reserve(x.times.size());
    for (std::size_t i = 0; i < x.times.size(); ++i) {
        const double t = x.times[i];
        if (!(t > 0.0)) throw std::domain_error("lamperti_path: requires strictly positive times");
        y.times.push_back(std::log(t));
        y.values.push_back(std::pow(t, -beta) * x.values[i]);
    }
    return y;
}

// X(e^u) = e^{beta u} Y(u); inverse of lamperti_path up to round-off.
inline SampledPath inverse_lamperti_path(const SampledPath& y, double beta) {
    if (y.times.size() != y.values.size())
        throw std::invalid_argument("inverse_lamperti_path: times/values size mismatch");
    SampledPath x;
    x.times.reserve(y.times.size());
    x.values.reserve(y.times.size());
    for (std::size_t i = 0; i < y.times.size(); ++i) {
        const double t = std::exp(y.times[i]);
        x.times.push_back(t);
        x.values.push_back(std::pow(t, beta) * y.values[i]);
    }
    return x;
}

struct StationarityReport {
    bool stationary = false;
    double worst_deviation = 0.0;  // |r_Y(pair.first) - r_Y(pair.second)| / max(1, |r_Y|)
    std::size_t worst_pair_index = 0;
    double tolerance = 0.0;
};

// Pairs of log-time points ((u1,v1),(u2,v2)) with equal lags u1-v1 == u2-v2.
using LogLagPair = std::pair<std::pair<double, double>, std::pair<double, double>>;

// The Lamperti image of a 2beta-self-similar covariance depends on log-time
// points only through their lag; checked on the supplied equal-lag pairs.
template <class R>
inline StationarityReport stationarity_check(R&& r, double beta,
                                             const std::vector<LogLagPair>& pairs, double tol) {
    if (pairs.empty()) throw std::invalid_argument("stationarity_check: empty pair list");
    if (!(tol > 0.0)) throw std::invalid_argument("stationarity_check: tolerance must be positive");
    auto transformed = [&](double u, double v) {
        return std::exp(-beta * (u + v)) * r(std::exp(u), std::exp(v));
    };
    StationarityReport report;
    report.tolerance = tol;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& [p1, p2] = pairs[i];
        if (std::abs((p1.first - p1.second) - (p2.first - p2.second)) > 1e-12)
            throw std::invalid_argument("stationarity_check: pair lags differ");
        const double a = transformed(p1.first, p1.second);
        const double b = transformed(p2.first, p2.second);
        const double dev = std::abs(a - b) / std::max(1.0, std::abs(a));
        if (dev > report.worst_deviation) {
            report.worst_deviation = dev;
            report.worst_pair_index = i;
        }
    }
    report.stationary = report.worst_deviation <= tol;
    return report;
}

// Linear-interpolation resampling. Approximate: only the original grid points
// carry exact transform values.
inline SampledPath resample_linear(const SampledPath& path, const std::vector<double>& new_times) {
    if (path.times.size() != path.values.size() || path.times.size() < 2)
        throw std::invalid_argument("resample_linear: need a path with at least two points");
    SampledPath out;
    out.times = new_times;
    out.values.reserve(new_times.size());
    for (double t : new_times) {
        if (t < path.times.front() || t > path.times.back())
            throw std::invalid_argument("resample_linear: time outside the sampled range");
        auto it = std::lower_bound(path.times.begin(), path.times.end(), t);
        if (it == path.times.begin()) {
            out.values.push_back(path.values.front());
            continue;
        }
        const std::size_t hi = static_cast<std::size_t>(it - path.times.begin());
        const std::size_t lo = hi - 1;
        const double w = (t - path.times[lo]) / (path.times[hi] - path.times[lo]);
        out.values.push_back((1.0 - w) * path.values[lo] + w * path.values[hi]);
    }
    return out;
}

}  // namespace ssgp
