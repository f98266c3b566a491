#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ssgp/covariance.hpp"
#include "ssgp/kernels.hpp"
#include "ssgp/matrix.hpp"

namespace ssgp {

// Master seed for an ensemble; the per-sample stream is a deterministic mix
// of (master_seed, path_index, step), so paths are independent work units.
struct SeedSpec {
    std::uint64_t master_seed = 0;
};

namespace rng {

// splitmix64 finalizer: bijective avalanche mix.
inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

inline constexpr std::uint64_t kStreamGamma = 0x9E3779B97F4A7C15ull;

inline std::uint64_t sample_bits(SeedSpec seed, std::uint64_t path_index, std::uint64_t step) {
    std::uint64_t x = mix64(seed.master_seed + kStreamGamma);
    x = mix64(x + kStreamGamma * (path_index + 1));
    x = mix64(x + kStreamGamma * (step + 1));
    return x;
}

// Uniform in the open interval (0,1), centered on 2^-53 cells.
inline double uniform01(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

// Standard normal quantile by bracketed Newton on erfc; accurate to well
// below the 1e-9 contract (limited only by libm's erfc).
inline double inverse_normal_cdf(double u) {
    if (!(u > 0.0 && u < 1.0))
        throw std::domain_error("inverse_normal_cdf: requires u in (0,1)");
    if (u == 0.5) return 0.0;
    const bool upper = u > 0.5;
    const double target = 2.0 * (upper ? 1.0 - u : u);  // erfc(z) = target, z >= 0

    double lo = 0.0;                                         // erfc(lo) - target >= 0
    double hi = std::sqrt(std::max(0.0, -std::log(target)));  // erfc(z*) <= e^{-z*^2}
    double z = hi;
    for (int iter = 0; iter < 200; ++iter) {
        const double residual = std::erfc(z) - target;
        if (residual > 0.0) lo = z; else hi = z;
        const double deriv = -2.0 / std::sqrt(M_PI) * std::exp(-z * z);
        double next = z - residual / deriv;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - z) <= 1e-15 * (1.0 + std::abs(next))) {
            z = next;
            break;
        }
        z = next;
    }
    const double x = M_SQRT2 * z;
    return upper ? x : -x;
}

inline double normal_sample(SeedSpec seed, std::uint64_t path_index, std::uint64_t step) {
    return inverse_normal_cdf(uniform01(sample_bits(seed, path_index, step)));
}

}  // namespace rng

inline unsigned default_thread_count() {
    if (const char* env = std::getenv("SSGP_THREADS")) {
        const long parsed = std::strtol(env, nullptr, 10);
        if (parsed >= 1) return static_cast<unsigned>(parsed);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1u;
}

namespace detail {

// Paths are independent: chunk them across threads, results do not depend on
// the schedule because every sample is keyed by (seed, path, step).
template <class Fn>
inline void parallel_over_paths(std::size_t n_paths, Fn&& fn) {
    const unsigned threads = std::min<std::size_t>(default_thread_count(), n_paths);
    if (threads <= 1) {
        for (std::size_t p = 0; p < n_paths; ++p) fn(p);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    const std::size_t chunk = (n_paths + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(n_paths, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([begin, end, &fn]() {
            for (std::size_t p = begin; p < end; ++p) fn(p);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace detail

enum class SampleMethod { volterra, cholesky };

inline const char* to_string(SampleMethod m) {
    return m == SampleMethod::volterra ? "volterra" : "cholesky";
}

struct PathEnsemble {
    TimeGrid grid;
    Matrix values;  // n_paths x grid.size()
    SeedSpec seed;
    SampleMethod method;
    std::string process;
};

// Independent centered Gaussians with variance t_{j+1} - t_j.
inline std::vector<double> brownian_increments(const TimeGrid& grid, SeedSpec seed,
                                               std::uint64_t path_index) {
    std::vector<double> dw(grid.size() - 1);
    for (std::size_t j = 0; j + 1 < grid.size(); ++j)
        dw[j] = std::sqrt(grid[j + 1] - grid[j]) * rng::normal_sample(seed, path_index, j);
    return dw;
}

// Discretization weights: X(t_i) = sum_{j<i} w(i,j) dW_j. Off-diagonal cells
// carry the cell average of k(t_i, .); the final cell j = i-1 carries the
// variance-matched weight sqrt(cell mean of k^2), which removes the dominant
// bias at the diagonal. A declared origin singularity gets the same
// variance-matched treatment in cell 0: the kernel slice there is separable
// to leading order, so matching the cell L2 norm keeps cross-covariances
// nearly exact while a plain cell mean loses O(sqrt(dt)) of the variance.
inline Matrix volterra_weights(const GenericVolterraKernel& k, const TimeGrid& grid,
                               double relative_tolerance = 1e-8) {
    if (!grid.starts_at_zero())
        throw std::invalid_argument("volterra_weights: grid must start at t_0 = 0");
    const std::size_t n = grid.size();
    Matrix weights(n, n - 1);
    for (std::size_t i = 1; i < n; ++i) {
        const double t = grid[i];
        for (std::size_t j = 0; j + 1 <= i; ++j) {
            const double a = grid[j];
            const double b = grid[j + 1];
            const double dt = b - a;
            QuadratureSpec spec;
            spec.relative_tolerance = relative_tolerance;
            const bool diagonal_cell = (j + 1 == i);
            const bool origin_cell = (j == 0 && k.origin_exponent.has_value());
            if (diagonal_cell || origin_cell) {
                if (origin_cell && k.origin_exponent)
                    spec.singularity_left = 2.0 * *k.origin_exponent;
                if (diagonal_cell && k.diagonal_exponent) {
                    const double expo = 2.0 * *k.diagonal_exponent;
                    if (expo != 0.0) spec.singularity_right = expo;
                }
                const double second_moment = integrate([&](double s) {
                    const double v = k(t, s);
                    return v * v;
                }, a, b, spec);
                const double mid = k(t, a + 0.5 * dt);
                const double sign = mid < 0.0 ? -1.0 : 1.0;
                weights(i, j) = sign * std::sqrt(second_moment / dt);
            } else {
                weights(i, j) = integrate([&](double s) { return k(t, s); }, a, b, spec) / dt;
            }
        }
    }
    return weights;
}

// Covariance the discretized kernel actually realizes:
// C(i,j) = sum_cells w(i,.) w(j,.) dt. Deterministic companion to the
// Monte Carlo checks.
inline CovarianceMatrix volterra_implied_covariance(const Matrix& weights, const TimeGrid& grid) {
    const std::size_t n = grid.size();
    std::vector<double> times = grid.positive_points();
    Matrix c(times.size(), times.size());
    for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t cell = 0; cell + 1 <= i; ++cell)
                acc += weights(i, cell) * weights(j, cell) * (grid[cell + 1] - grid[cell]);
            c(i - 1, j - 1) = acc;
            c(j - 1, i - 1) = acc;
        }
    }
    return {std::move(times), std::move(c)};
}

inline PathEnsemble sample_volterra(const GenericVolterraKernel& k, const TimeGrid& grid,
                                    std::size_t n_paths, SeedSpec seed,
                                    double relative_tolerance = 1e-8) {
    if (n_paths == 0) throw std::invalid_argument("sample_volterra: need at least one path");
    const Matrix weights = volterra_weights(k, grid, relative_tolerance);
    const std::size_t n = grid.size();
    Matrix values(n_paths, n);
    detail::parallel_over_paths(n_paths, [&](std::size_t p) {
        const std::vector<double> dw = brownian_increments(grid, seed, p);
        for (std::size_t i = 1; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j + 1 <= i; ++j) acc += weights(i, j) * dw[j];
            values(p, i) = acc;
        }
    });
    return {grid, std::move(values), seed, SampleMethod::volterra, k.name};
}

// Exact-law oracle: each path is L z with z i.i.d. standard normal. The
// ensemble grid is the matrix's positive times with t = 0 prepended.
inline PathEnsemble sample_cholesky(const CovarianceMatrix& c, std::size_t n_paths, SeedSpec seed,
                                    const std::string& process_label = "") {
    if (n_paths == 0) throw std::invalid_argument("sample_cholesky: need at least one path");
    const CholeskyResult chol = cholesky(c);
    const std::size_t n = c.times.size();
    std::vector<double> pts(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) pts[i + 1] = c.times[i];
    TimeGrid grid(std::move(pts));
    Matrix values(n_paths, n + 1);
    detail::parallel_over_paths(n_paths, [&](std::size_t p) {
        std::vector<double> z(n);
        for (std::size_t j = 0; j < n; ++j) z[j] = rng::normal_sample(seed, p, j);
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j <= i; ++j) acc += chol.lower(i, j) * z[j];
            values(p, i + 1) = acc;
        }
    });
    return {std::move(grid), std::move(values), seed, SampleMethod::cholesky, process_label};
}

// Unbiased sample covariance over the positive-time columns.
inline CovarianceMatrix empirical_covariance(const PathEnsemble& e) {
    const std::size_t n_paths = e.values.rows();
    if (n_paths < 2) throw data_error("empirical_covariance: need at least two paths");
    const std::size_t offset = e.grid.starts_at_zero() ? 1 : 0;
    const std::vector<double> times = e.grid.positive_points();
    const std::size_t n = times.size();

    std::vector<double> mean(n, 0.0);
    for (std::size_t p = 0; p < n_paths; ++p)
        for (std::size_t i = 0; i < n; ++i) mean[i] += e.values(p, i + offset);
    for (double& m : mean) m /= static_cast<double>(n_paths);

    Matrix c(n, n);
    for (std::size_t p = 0; p < n_paths; ++p) {
        for (std::size_t i = 0; i < n; ++i) {
            const double di = e.values(p, i + offset) - mean[i];
            for (std::size_t j = i; j < n; ++j)
                c(i, j) += di * (e.values(p, j + offset) - mean[j]);
        }
    }
    const double norm = 1.0 / static_cast<double>(n_paths - 1);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            c(i, j) *= norm;
            c(j, i) = c(i, j);
        }
    return {times, std::move(c)};
}

struct ScaleCheck {
    double scale = 0.0;
    double worst_z = 0.0;  // |Chat(at,as) - a^{2beta} Chat(t,s)| in MC standard errors
    std::size_t pairs_compared = 0;
    bool pass = false;
};

struct SelfSimilarityReport {
    std::vector<ScaleCheck> scales;
    bool pass = false;
    double tol_sigma = 0.0;
};

// Empirical covariance at scaled grid points against a^{2beta} times the
// covariance at base points, in units of the (correlated) Monte Carlo
// standard error of the difference.
inline SelfSimilarityReport self_similarity_test(const PathEnsemble& e, double beta,
                                                 const std::vector<double>& scales,
                                                 double tol_sigma = 4.0) {
    if (scales.empty()) throw std::invalid_argument("self_similarity_test: empty scale list");
    const CovarianceMatrix chat = empirical_covariance(e);
    const std::vector<double>& ts = chat.times;
    const double n = static_cast<double>(e.values.rows());

    SelfSimilarityReport report;
    report.tol_sigma = tol_sigma;
    report.pass = true;
    for (double a : scales) {
        // Base indices whose scaled image lands on the grid; a scaled point
        // inside the horizon that misses every grid point breaks closure.
        std::vector<std::pair<std::size_t, std::size_t>> matched;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const double scaled = a * ts[i];
            if (scaled > ts.back() * (1.0 + 1e-12)) continue;
            bool found = false;
            for (std::size_t m = 0; m < ts.size(); ++m) {
                if (std::abs(ts[m] - scaled) <= 1e-9 * scaled) {
                    matched.emplace_back(i, m);
                    found = true;
                    break;
                }
            }
            if (!found)
                throw std::invalid_argument("self_similarity_test: grid not closed under scale " +
                                            std::to_string(a));
        }
        if (matched.empty())
            throw std::invalid_argument("self_similarity_test: no grid points remain in range under scale " +
                                        std::to_string(a));
        const double factor = std::pow(a, 2.0 * beta);
        ScaleCheck check;
        check.scale = a;
        for (std::size_t x = 0; x < matched.size(); ++x) {
            for (std::size_t y = x; y < matched.size(); ++y) {
                const auto [i, is] = matched[x];
                const auto [j, js] = matched[y];
                const double diff = chat.values(is, js) - factor * chat.values(i, j);
                // Var of the difference of correlated sample covariances.
                const double var =
                    (chat.values(is, is) * chat.values(js, js) + chat.values(is, js) * chat.values(is, js) +
                     factor * factor *
                         (chat.values(i, i) * chat.values(j, j) + chat.values(i, j) * chat.values(i, j)) -
                     2.0 * factor *
                         (chat.values(is, i) * chat.values(js, j) + chat.values(is, j) * chat.values(js, i))) /
                    n;
                const double sigma = std::sqrt(std::max(var, 1e-300));
                const double z = std::abs(diff) / sigma;
                if (z > check.worst_z) check.worst_z = z;
                ++check.pairs_compared;
            }
        }
        check.pass = check.worst_z <= tol_sigma;
        if (!check.pass) report.pass = false;
        report.scales.push_back(check);
    }
    return report;
}

inline void write_ensemble_csv(const PathEnsemble& e, std::ostream& os) {
    const std::size_t n = e.grid.size();
    for (std::size_t j = 0; j < n; ++j)
        os << (j ? "," : "") << detail::format_double(e.grid[j]);
    os << "\n";
    for (std::size_t p = 0; p < e.values.rows(); ++p) {
        for (std::size_t j = 0; j < n; ++j)
            os << (j ? "," : "") << detail::format_double(e.values(p, j));
        os << "\n";
    }
}

inline void write_ensemble_csv(const PathEnsemble& e, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw data_error("write_ensemble_csv: cannot open " + path);
    write_ensemble_csv(e, os);
}

// key=value sidecar next to an output file; everything needed to reproduce it.
inline void write_sidecar(const std::string& path,
                          const std::vector<std::pair<std::string, std::string>>& entries) {
    std::ofstream os(path);
    if (!os) throw data_error("write_sidecar: cannot open " + path);
    for (const auto& [key, value] : entries) os << key << "=" << value << "\n";
}

struct EnsembleData {
    std::vector<double> times;
    Matrix values;  // n_paths x n_times
};

inline EnsembleData read_ensemble_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw data_error("read_ensemble_csv: cannot open " + path);
    std::string line;
    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::size_t begin = 0;
        while (begin <= line.size()) {
            std::size_t end = line.find(',', begin);
            if (end == std::string::npos) end = line.size();
            row.push_back(std::stod(line.substr(begin, end - begin)));
            begin = end + 1;
        }
        rows.push_back(std::move(row));
    }
    if (rows.size() < 2) throw data_error("read_ensemble_csv: need a header row and at least one path");
    const std::size_t n = rows.front().size();
    for (const auto& row : rows)
        if (row.size() != n) throw data_error("read_ensemble_csv: ragged rows");
    EnsembleData data;
    data.times = rows.front();
    data.values = Matrix(rows.size() - 1, n);
    for (std::size_t p = 1; p < rows.size(); ++p)
        for (std::size_t j = 0; j < n; ++j) data.values(p - 1, j) = rows[p][j];
    return data;
}

}  // namespace ssgp
