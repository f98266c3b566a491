#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ssgp/kernels.hpp"
#include "ssgp/matrix.hpp"

namespace ssgp {

class not_psd_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class data_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Strictly increasing times t_0 < ... < t_n with t_0 >= 0. Processes start at
// zero in mean square, so covariance matrices are built over the positive
// points only; a leading t_0 = 0 is kept for path containers.
class TimeGrid {
public:
    explicit TimeGrid(std::vector<double> points, bool uniform = false)
        : points_(std::move(points)), uniform_(uniform) {
        if (points_.size() < 2) throw std::invalid_argument("TimeGrid: need at least two points");
        if (!(points_.front() >= 0.0)) throw std::invalid_argument("TimeGrid: times must be >= 0");
        for (std::size_t i = 1; i < points_.size(); ++i)
            if (!(points_[i] > points_[i - 1]))
                throw std::invalid_argument("TimeGrid: times must be strictly increasing");
    }

    static TimeGrid uniform(double horizon, std::size_t cells) {
        if (!(horizon > 0.0)) throw std::invalid_argument("TimeGrid: horizon must be positive");
        if (cells < 1) throw std::invalid_argument("TimeGrid: need at least one cell");
        std::vector<double> pts(cells + 1);
        for (std::size_t i = 0; i < cells; ++i)
            pts[i] = horizon * static_cast<double>(i) / static_cast<double>(cells);
        pts[cells] = horizon;
        return TimeGrid(std::move(pts), true);
    }

    const std::vector<double>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    double operator[](std::size_t i) const { return points_[i]; }
    double horizon() const { return points_.back(); }
    bool is_uniform() const { return uniform_; }
    bool starts_at_zero() const { return points_.front() == 0.0; }

    std::vector<double> positive_points() const {
        return starts_at_zero() ? std::vector<double>(points_.begin() + 1, points_.end())
                                : points_;
    }

private:
    std::vector<double> points_;
    bool uniform_;
};

// Symmetric matrix r(t_i, t_j) over strictly positive times.
struct CovarianceMatrix {
    std::vector<double> times;
    Matrix values;
};

// r(t,s) = int_0^{t^s} k(t,u) k(s,u) du. Endpoint exponents for the quadrature
// come from the kernel's declared origin and diagonal behaviour; the diagonal
// one doubles when t == s (both factors are singular there).
inline double factorized_covariance(const GenericVolterraKernel& k, double t, double s,
                                    double relative_tolerance = 1e-8, int node_count = 16) {
    if (!(t > 0.0) || !(s > 0.0))
        throw std::domain_error("factorized_covariance: requires t, s > 0");
    const double m = std::min(t, s);
    QuadratureSpec spec;
    spec.node_count = node_count;
    spec.relative_tolerance = relative_tolerance;
    if (k.origin_exponent) spec.singularity_left = 2.0 * *k.origin_exponent;
    if (k.diagonal_exponent) {
        const double mult = (t == s) ? 2.0 : 1.0;
        const double expo = mult * *k.diagonal_exponent;
        if (expo != 0.0) spec.singularity_right = expo;
    }
    return integrate([&](double u) { return k(t, u) * k(s, u); }, 0.0, m, spec);
}

template <class R>
inline CovarianceMatrix covariance_matrix(R&& r, const TimeGrid& grid) {
    const std::vector<double> ts = grid.positive_points();
    const std::size_t n = ts.size();
    Matrix values(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double v = r(ts[i], ts[j]);
            if (!std::isfinite(v)) {
                std::ostringstream msg;
                msg << "covariance_matrix: non-finite value at (t_i=" << ts[i]
                    << ", t_j=" << ts[j] << ")";
                throw data_error(msg.str());
            }
            values(i, j) = v;
            values(j, i) = v;
        }
    }
    return {ts, std::move(values)};
}

struct CholeskyResult {
    Matrix lower;
    std::size_t rank = 0;
};

// Pivot-free semi-definite Cholesky: columns whose pivot falls below
// zero_pivot_rel * max-diagonal are zeroed and excluded from the rank;
// a pivot below -negative_pivot_rel * max-diagonal means the input is not PSD.
inline CholeskyResult cholesky(const Matrix& c, double zero_pivot_rel = 1e-12,
                               double negative_pivot_rel = 1e-10) {
    if (c.rows() != c.cols()) throw std::invalid_argument("cholesky: matrix must be square");
    const std::size_t n = c.rows();
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, c(i, i));

    CholeskyResult result{Matrix(n, n), 0};
    Matrix& lower = result.lower;
    for (std::size_t j = 0; j < n; ++j) {
        double d = c(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= lower(j, k) * lower(j, k);
        if (d < -negative_pivot_rel * max_diag) {
            std::ostringstream msg;
            msg << "cholesky: pivot " << d << " at column " << j
                << " below the PSD tolerance " << -negative_pivot_rel * max_diag;
            throw not_psd_error(msg.str());
        }
        if (d <= zero_pivot_rel * max_diag) continue;  // numerically null direction
        ++result.rank;
        const double root = std::sqrt(d);
        lower(j, j) = root;
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = c(i, j);
            for (std::size_t k = 0; k < j; ++k) v -= lower(i, k) * lower(j, k);
            lower(i, j) = v / root;
        }
    }
    return result;
}

inline CholeskyResult cholesky(const CovarianceMatrix& c, double zero_pivot_rel = 1e-12,
                               double negative_pivot_rel = 1e-10) {
    return cholesky(c.values, zero_pivot_rel, negative_pivot_rel);
}

struct Rank1Report {
    std::size_t rank = 0;
    // degree -> homogeneity verdict of the surviving discrete factor column;
    // every scanned degree is expected to fail.
    std::vector<std::pair<double, HomogeneityReport>> degree_scan;
    bool all_degrees_fail = false;
};

// The trivial self-similar covariance r(t,s) = (ts)^beta factors through a
// single direction: the triangular factor degenerates to one column and that
// column, read as a kernel, is homogeneous of no degree.
inline Rank1Report rank1_demo(double beta, const TimeGrid& grid,
                              std::vector<double> degrees = {-0.5, 0.0, 0.5, 1.0}) {
    if (!(beta > 0.0)) throw std::invalid_argument("rank1_demo: beta must be positive");
    const std::vector<double> ts = grid.positive_points();
    if (ts.size() < 3) throw std::invalid_argument("rank1_demo: need at least three positive grid points");

    auto r = [beta](double t, double s) { return std::pow(t, beta) * std::pow(s, beta); };
    const CovarianceMatrix c = covariance_matrix(r, grid);
    const CholeskyResult chol = cholesky(c);

    Rank1Report report;
    report.rank = chol.rank;

    // Surviving column as a kernel: step function of t over the grid,
    // supported on s in the first cell [0, t_1).
    std::vector<double> column(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) column[i] = chol.lower(i, 0);
    const double cell_width = ts.front();
    GenericVolterraKernel discrete_factor;
    discrete_factor.eval = [ts, column, cell_width](double t, double s) -> double {
        if (s >= cell_width) return 0.0;
        std::size_t idx = 0;
        while (idx + 1 < ts.size() && ts[idx + 1] <= t) ++idx;
        return column[idx] / std::sqrt(cell_width);
    };
    discrete_factor.name = "rank1_discrete_factor";

    if (std::find(degrees.begin(), degrees.end(), beta - 0.5) == degrees.end())
        degrees.push_back(beta - 0.5);

    // Sample points inside the support whose scaled images leave it.
    std::vector<std::pair<double, double>> pts = {
        {ts[1], 0.55 * cell_width},
        {ts[2], 0.85 * cell_width},
        {ts.back(), 0.7 * cell_width},
    };
    report.all_degrees_fail = true;
    for (double degree : degrees) {
        HomogeneityReport h = check_homogeneity(discrete_factor, degree, {2.0, 0.5}, pts, 1e-6);
        if (h.homogeneous) report.all_degrees_fail = false;
        report.degree_scan.emplace_back(degree, std::move(h));
    }
    return report;
}

namespace detail {

// 17 significant digits round-trips IEEE doubles exactly.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

inline void write_covariance_csv(const CovarianceMatrix& c, std::ostream& os) {
    const std::size_t n = c.times.size();
    for (std::size_t j = 0; j < n; ++j)
        os << (j ? "," : "") << detail::format_double(c.times[j]);
    os << "\n";
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j)
            os << (j ? "," : "") << detail::format_double(c.values(i, j));
        os << "\n";
    }
}

inline void write_covariance_csv(const CovarianceMatrix& c, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw data_error("write_covariance_csv: cannot open " + path);
    write_covariance_csv(c, os);
}

}  // namespace ssgp
