#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ssgp/covariance.hpp"
#include "ssgp/fbm.hpp"
#include "ssgp/lamperti.hpp"
#include "ssgp/sampling.hpp"

using namespace ssgp;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

StationaryShape exponential_shape(double rate) {
    StationaryShape g;
    g.eval = [rate](double v) { return std::exp(-rate * v); };
    g.decay_rate = rate;
    g.name = "exp";
    return g;
}

}  // namespace

TEST_CASE("f_from_g") {
    SECTION("G(v) = e^{-v/2} maps to the Brownian shape") {
        const FFunction f = f_from_g(exponential_shape(0.5));
        for (int i = 1; i <= 20; ++i) {
            const double u = i / 20.0;
            REQUIRE_THAT(f(u), WithinRel(1.0, 1e-14));
        }
        REQUIRE_FALSE(f.singularity_at_zero.has_value());
    }
    SECTION("G(v) = e^{-v} maps to F(u) = u^{1/2}") {
        const FFunction f = f_from_g(exponential_shape(1.0));
        for (double u : {0.1, 0.37, 0.92, 1.0})
            REQUIRE_THAT(f(u), WithinRel(std::sqrt(u), 1e-13));
    }
    SECTION("negative lags have no weight") {
        const StationaryShape g = exponential_shape(1.0);
        REQUIRE(g(-0.5) == 0.0);
    }
}

TEST_CASE("g_from_f and the round trip") {
    SECTION("F == 1 maps to e^{-v/2}") {
        FFunction one;
        one.eval = [](double) { return 1.0; };
        const StationaryShape g = g_from_f(one);
        for (double v : {0.0, 0.5, 3.0})
            REQUIRE_THAT(g(v), WithinRel(std::exp(-0.5 * v), 1e-14));
        REQUIRE_THAT(*g.decay_rate, WithinAbs(0.5, 1e-15));
    }
    SECTION("round trip on the fBm shape at 50 points") {
        const FFunction f = fbm_f_function(HurstIndex(0.75));
        const FFunction back = f_from_g(g_from_f(f));
        for (int i = 1; i <= 50; ++i) {
            const double u = i / 50.0;
            REQUIRE_THAT(back(u), WithinAbs(f(u), 1e-12 * (1.0 + std::abs(f(u)))));
        }
    }
}

TEST_CASE("isometry between the shapes") {
    SECTION("F == 1: both norms are 1") {
        FFunction one;
        one.eval = [](double) { return 1.0; };
        REQUIRE_THAT(f_l2_norm_sq(one), WithinRel(1.0, 1e-12));
        double tail = 0.0;
        REQUIRE_THAT(g_l2_norm_sq(g_from_f(one), kStationaryCutoff, 1e-10, &tail),
                     WithinRel(1.0, 1e-10));
        REQUIRE(tail < 1e-16);
    }
    SECTION("fBm H = 0.6: cutoff growth closes the gap") {
        const FFunction f = fbm_f_function(HurstIndex(0.6));
        const double f_norm = f_l2_norm_sq(f);
        const StationaryShape g = g_from_f(f);
        const double at30 = g_l2_norm_sq(g, 30.0);
        double tail = 0.0;
        const double at40 = g_l2_norm_sq(g, 40.0, 1e-8, &tail);
        REQUIRE_THAT(at40, WithinRel(f_norm, 1e-6));
        REQUIRE(std::abs(at40 - f_norm) <= std::abs(at30 - f_norm) + 1e-12);
        REQUIRE(tail >= 0.0);
        REQUIRE(tail < 1e-8);
    }
}

TEST_CASE("stationary_covariance_from_selfsimilar") {
    const HurstIndex h75(0.75);
    auto r75 = [&](double t, double s) { return fbm_covariance(h75, t, s); };
    REQUIRE_THAT(stationary_covariance_from_selfsimilar(r75, 0.75, 0.0), WithinRel(1.0, 1e-15));

    auto rbm = [](double t, double s) { return std::min(t, s); };
    REQUIRE_THAT(stationary_covariance_from_selfsimilar(rbm, 0.5, std::log(2.0)),
                 WithinRel(std::pow(2.0, -0.5), 1e-14));

    REQUIRE_THAT(stationary_covariance_from_selfsimilar(r75, 0.75, std::log(2.0)),
                 WithinRel(std::pow(2.0, -0.25), 1e-14));

    REQUIRE_THROWS_AS(stationary_covariance_from_selfsimilar(rbm, 0.5, -0.1),
                      std::invalid_argument);
}

TEST_CASE("lamperti_path") {
    SECTION("X(t) = t^beta maps to the constant path") {
        const double beta = 0.7;
        SampledPath x;
        for (double t : {0.5, 1.0, 1.7, 3.0}) {
            x.times.push_back(t);
            x.values.push_back(std::pow(t, beta));
        }
        const SampledPath y = lamperti_path(x, beta);
        for (std::size_t i = 0; i < y.values.size(); ++i) {
            REQUIRE_THAT(y.values[i], WithinRel(1.0, 1e-14));
            REQUIRE_THAT(y.times[i], WithinAbs(std::log(x.times[i]), 1e-15));
        }
    }
    SECTION("round trip is the identity to round-off") {
        SampledPath x;
        std::uint64_t state = 42;
        for (double t : {0.25, 0.8, 1.0, 2.5, 6.0}) {
            state = state * 6364136223846793005ull + 1442695040888963407ull;
            x.times.push_back(t);
            x.values.push_back(static_cast<double>(state >> 11) * 0x1.0p-53 - 0.5);
        }
        const SampledPath back = inverse_lamperti_path(lamperti_path(x, 0.6), 0.6);
        for (std::size_t i = 0; i < x.times.size(); ++i) {
            REQUIRE_THAT(back.times[i], WithinRel(x.times[i], 1e-14));
            REQUIRE_THAT(back.values[i], WithinAbs(x.values[i], 1e-14 * (1.0 + std::abs(x.values[i]))));
        }
    }
    SECTION("nonpositive times are rejected") {
        SampledPath x{{0.0, 1.0}, {0.0, 1.0}};
        REQUIRE_THROWS_AS(lamperti_path(x, 0.5), std::domain_error);
        SampledPath mismatched{{1.0, 2.0}, {0.0}};
        REQUIRE_THROWS_AS(lamperti_path(mismatched, 0.5), std::invalid_argument);
    }
}

TEST_CASE("stationarity_check") {
    SECTION("fBm image is stationary") {
        const HurstIndex h(0.75);
        auto r = [&](double t, double s) { return fbm_covariance(h, t, s); };
        std::vector<LogLagPair> pairs;
        for (double base : {0.0, 1.0, 2.0})
            pairs.push_back({{std::log(2.0), 0.0}, {base + std::log(2.0), base}});
        const StationarityReport rep = stationarity_check(r, 0.75, pairs, 1e-12);
        REQUIRE(rep.stationary);
    }
    SECTION("the trivial self-similar covariance maps to a constant image") {
        const double beta = 0.8;
        auto r = [beta](double t, double s) { return std::pow(t * s, beta); };
        std::vector<LogLagPair> pairs = {{{0.5, 0.0}, {2.5, 2.0}}, {{1.0, 0.5}, {3.0, 2.5}}};
        REQUIRE(stationarity_check(r, beta, pairs, 1e-12).stationary);
    }
    SECTION("a non-self-similar covariance fails") {
        auto r = [](double t, double s) { return std::min(t, s) + t * s; };
        std::vector<LogLagPair> pairs = {{{0.5, 0.0}, {1.5, 1.0}}, {{1.0, 0.5}, {2.0, 1.5}}};
        const StationarityReport rep = stationarity_check(r, 0.5, pairs, 1e-10);
        REQUIRE_FALSE(rep.stationary);
    }
    SECTION("argument validation") {
        auto r = [](double t, double s) { return std::min(t, s); };
        REQUIRE_THROWS_AS(stationarity_check(r, 0.5, {}, 1e-10), std::invalid_argument);
        std::vector<LogLagPair> bad = {{{1.0, 0.0}, {2.0, 0.5}}};
        REQUIRE_THROWS_AS(stationarity_check(r, 0.5, bad, 1e-10), std::invalid_argument);
    }
}

TEST_CASE("resample_linear") {
    SampledPath p{{0.0, 1.0, 2.0}, {0.0, 2.0, 4.0}};
    const SampledPath q = resample_linear(p, {0.5, 1.0, 1.75});
    REQUIRE_THAT(q.values[0], WithinRel(1.0, 1e-15));
    REQUIRE_THAT(q.values[1], WithinRel(2.0, 1e-15));
    REQUIRE_THAT(q.values[2], WithinRel(3.5, 1e-15));
    REQUIRE_THROWS_AS(resample_linear(p, {2.5}), std::invalid_argument);
}

TEST_CASE("lamperti image of a sampled fBm ensemble is variance-stationary") {
    // Var Y(u) = R_H(1,1) = 1 for every log-time u, within Monte Carlo error.
    const HurstIndex h(0.75);
    const TimeGrid grid = TimeGrid::uniform(1.0, 8);
    const CovarianceMatrix c = covariance_matrix(
        [&h](double t, double s) { return fbm_covariance(h, t, s); }, grid);
    const std::size_t n_paths = 20000;
    const PathEnsemble e = sample_cholesky(c, n_paths, SeedSpec{99}, "fbm");

    const std::vector<double> ts = e.grid.positive_points();
    for (std::size_t j = 0; j < ts.size(); ++j) {
        double mean = 0.0, m2 = 0.0;
        for (std::size_t p = 0; p < n_paths; ++p) {
            const double y = std::pow(ts[j], -0.75) * e.values(p, j + 1);
            mean += y;
            m2 += y * y;
        }
        mean /= static_cast<double>(n_paths);
        const double var = m2 / static_cast<double>(n_paths) - mean * mean;
        const double sigma = std::sqrt(2.0 / static_cast<double>(n_paths));  // Var of sample var of N(0,1)
        REQUIRE_THAT(var, WithinAbs(1.0, 4.0 * sigma));
    }
}
