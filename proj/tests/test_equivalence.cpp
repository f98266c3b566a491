#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ssgp/equivalence.hpp"
#include "ssgp/fbm.hpp"
#include "ssgp/sampling.hpp"

using namespace ssgp;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

SelfSimilarKernel brownian() {
    FFunction one;
    one.eval = [](double) { return 1.0; };
    one.name = "brownian";
    return SelfSimilarKernel{0.5, one};
}

// E W~_t W~_s for constant l == c, s <= t, by hand:
// s - c t s + c^2 (s^3/3 + (t-s) s^2/2).
double hitsuda_constant_closed_form(double c, double t, double s) {
    if (s > t) std::swap(t, s);
    return s - c * t * s + c * c * (s * s * s / 3.0 + (t - s) * s * s / 2.0);
}

}  // namespace

TEST_CASE("z_kernel") {
    const FFunction one = brownian().shape;
    SECTION("constant perturbation: z = t - s") {
        const PerturbationKernel l = constant_perturbation(1.0);
        for (auto [t, s] : {std::pair{2.0, 1.0}, {1.0, 0.25}, {0.9, 0.8}})
            REQUIRE_THAT(z_kernel(one, l, t, s), WithinRel(t - s, 1e-10));
    }
    SECTION("zero perturbation: z == 0") {
        const PerturbationKernel l = zero_perturbation();
        REQUIRE(z_kernel(one, l, 2.0, 1.0) == 0.0);
    }
    SECTION("l(u,s) = u: z = (t^2 - s^2)/2") {
        const PerturbationKernel l = linear_time_perturbation();
        for (auto [t, s] : {std::pair{2.0, 1.0}, {1.5, 0.5}})
            REQUIRE_THAT(z_kernel(one, l, t, s), WithinRel((t * t - s * s) / 2.0, 1e-10));
    }
    SECTION("linear in l") {
        const double alpha = 2.0, gamma = -0.75;
        GenericVolterraKernel combined;
        combined.eval = [=](double v, double) { return alpha * 1.0 + gamma * v; };
        combined.name = "combo";
        const PerturbationKernel lc{combined};
        for (auto [t, s] : {std::pair{2.0, 1.0}, {1.2, 0.3}}) {
            const double direct = z_kernel(one, lc, t, s);
            const double parts = alpha * z_kernel(one, constant_perturbation(1.0), t, s) +
                                 gamma * z_kernel(one, linear_time_perturbation(), t, s);
            REQUIRE_THAT(direct, WithinRel(parts, 1e-12));
        }
    }
    SECTION("volterra support and domain") {
        REQUIRE(z_kernel(one, constant_perturbation(1.0), 1.0, 2.0) == 0.0);
        REQUIRE_THROWS_AS(z_kernel(one, constant_perturbation(1.0), 1.0, 0.0), std::domain_error);
    }
}

TEST_CASE("perturbed_kernel") {
    SECTION("zero perturbation is the identity") {
        const SelfSimilarKernel k = fbm_self_similar_kernel(HurstIndex(0.75));
        const GenericVolterraKernel kt = perturbed_kernel(k, zero_perturbation());
        for (auto [t, s] : {std::pair{2.0, 1.0}, {1.0, 0.4}})
            REQUIRE_THAT(kt(t, s), WithinRel(kernel_eval(k, t, s), 1e-12));
    }
    SECTION("Brownian with l == 1: ktilde = 1 - (t-s)") {
        const GenericVolterraKernel kt = perturbed_kernel(brownian(), constant_perturbation(1.0));
        REQUIRE_THAT(kt(2.0, 1.0), WithinAbs(0.0, 1e-12));
        REQUIRE_THAT(kt(1.5, 1.0), WithinRel(0.5, 1e-10));
        REQUIRE_THAT(kt(1.0, 0.25), WithinRel(0.25, 1e-10));
    }
    SECTION("fBm H = 0.75 with l == 0.1, frozen pin") {
        const SelfSimilarKernel k = fbm_self_similar_kernel(HurstIndex(0.75));
        const GenericVolterraKernel kt = perturbed_kernel(k, constant_perturbation(0.1), 1e-9);
        REQUIRE_THAT(kt(2.0, 1.0), WithinRel(1.0277399503398076428, 1e-8));
    }
}

TEST_CASE("hitsuda_w_covariance") {
    SECTION("zero perturbation gives t^s") {
        REQUIRE_THAT(hitsuda_w_covariance(zero_perturbation(), 2.0, 1.0), WithinRel(1.0, 1e-12));
        REQUIRE_THAT(hitsuda_w_covariance(zero_perturbation(), 0.4, 0.9), WithinRel(0.4, 1e-12));
    }
    SECTION("constant perturbation closed form") {
        const PerturbationKernel l = constant_perturbation(0.5);
        REQUIRE_THAT(hitsuda_w_covariance(l, 1.0, 1.0), WithinRel(7.0 / 12.0, 1e-8));
        REQUIRE_THAT(hitsuda_w_covariance(l, 2.0, 1.0), WithinRel(5.0 / 24.0, 1e-8));
        for (auto [t, s] : {std::pair{1.5, 0.5}, {0.8, 0.6}, {1.0, 1.0}})
            REQUIRE_THAT(hitsuda_w_covariance(l, t, s),
                         WithinRel(hitsuda_constant_closed_form(0.5, t, s), 1e-8));
    }
    SECTION("cross-route agreement with the factorized covariance") {
        const std::vector<std::pair<std::string, PerturbationKernel>> kernels = {
            {"l=0", zero_perturbation()},
            {"l=1", constant_perturbation(1.0)},
            {"l=v", linear_time_perturbation()}};
        for (const auto& [label, l] : kernels) {
            const GenericVolterraKernel kt = perturbed_kernel(brownian(), l, 1e-9);
            for (auto [t, s] : {std::pair{1.0, 1.0}, {1.0, 0.5}, {0.75, 0.25}}) {
                const double direct = hitsuda_w_covariance(l, t, s, 1e-8);
                const double routed = factorized_covariance(kt, t, s, 1e-8);
                INFO(label);
                REQUIRE_THAT(routed, WithinAbs(direct, 1e-5 * std::max(1.0, std::abs(direct))));
            }
        }
    }
    SECTION("pinned point value 1/3 at (1,1) for l == 1") {
        const PerturbationKernel l = constant_perturbation(1.0);
        REQUIRE_THAT(hitsuda_w_covariance(l, 1.0, 1.0), WithinRel(1.0 / 3.0, 1e-6));
        const GenericVolterraKernel kt = perturbed_kernel(brownian(), l, 1e-9);
        REQUIRE_THAT(factorized_covariance(kt, 1.0, 1.0), WithinRel(1.0 / 3.0, 1e-6));
    }
}

TEST_CASE("rn_log_density") {
    const TimeGrid grid = TimeGrid::uniform(1.0, 16);
    const SeedSpec seed{77};
    std::vector<double> w(grid.size(), 0.0);
    const std::vector<double> dw = brownian_increments(grid, seed, 0);
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) w[i + 1] = w[i] + dw[i];

    SECTION("zero kernel gives log-density zero") {
        REQUIRE(rn_log_density(zero_perturbation(), grid, w) == 0.0);
    }
    SECTION("quadratic compensator breaks naive scaling") {
        const double one = rn_log_density(constant_perturbation(1.0), grid, w);
        const double two = rn_log_density(constant_perturbation(2.0), grid, w);
        // log D(2l) - 2 log D(l) = -sum A_i^2 dt_i < 0 on a nonzero path.
        REQUIRE(two - 2.0 * one < -1e-6);
    }
    SECTION("path length validation") {
        std::vector<double> bad(grid.size() - 1, 0.0);
        REQUIRE_THROWS_AS(rn_log_density(zero_perturbation(), grid, bad), std::invalid_argument);
    }
    SECTION("non-finite kernel values are a data error") {
        GenericVolterraKernel singular;
        singular.eval = [](double, double s) { return 1.0 / s; };  // blows at t_0 = 0
        singular.name = "1/s";
        REQUIRE_THROWS_AS(rn_log_density(PerturbationKernel{singular}, grid, w), data_error);
    }
    SECTION("martingale normalization at modest path count") {
        const std::size_t n_paths = 20000;
        const TimeGrid g64 = TimeGrid::uniform(1.0, 64);
        const PerturbationKernel l = constant_perturbation(0.5);
        double sum = 0.0, sum_sq = 0.0;
        std::vector<double> path(g64.size());
        for (std::size_t p = 0; p < n_paths; ++p) {
            const std::vector<double> inc = brownian_increments(g64, SeedSpec{78}, p);
            path[0] = 0.0;
            for (std::size_t i = 0; i + 1 < g64.size(); ++i) path[i + 1] = path[i] + inc[i];
            const double d = std::exp(rn_log_density(l, g64, path));
            sum += d;
            sum_sq += d * d;
        }
        const double mean = sum / static_cast<double>(n_paths);
        const double var = sum_sq / static_cast<double>(n_paths) - mean * mean;
        const double sigma = std::sqrt(var / static_cast<double>(n_paths));
        REQUIRE_THAT(mean, WithinAbs(1.0, 4.0 * sigma));
    }
}

TEST_CASE("lemma32_divergence") {
    SECTION("g == 1, T = 1, eps = 1/e gives N = 1") {
        const LemmaDivergenceReport r =
            lemma32_divergence([](double) { return 1.0; }, 1.0, {std::exp(-1.0)});
        REQUIRE_THAT(r.entries[0].measured, WithinRel(1.0, 1e-8));
        REQUIRE_THAT(r.g_norm_sq, WithinRel(1.0, 1e-12));
    }
    SECTION("logarithmic growth ratios 1 : 2 : 3") {
        const LemmaDivergenceReport r =
            lemma32_divergence([](double) { return 1.0; }, 1.0, {1e-1, 1e-2, 1e-3});
        const double base = r.entries[0].measured;
        REQUIRE_THAT(r.entries[1].measured / base, WithinRel(2.0, 1e-6));
        REQUIRE_THAT(r.entries[2].measured / base, WithinRel(3.0, 1e-6));
        REQUIRE(r.worst_rel_error <= 1e-8);
    }
    SECTION("g(u) = u, T = 2, eps = 0.5") {
        const LemmaDivergenceReport r = lemma32_divergence([](double u) { return u; }, 2.0, {0.5});
        REQUIRE_THAT(r.entries[0].measured, WithinRel(std::log(4.0) / 3.0, 1e-8));
    }
    SECTION("epsilon list validation") {
        auto g = [](double) { return 1.0; };
        REQUIRE_THROWS_AS(lemma32_divergence(g, 1.0, {}), std::invalid_argument);
        REQUIRE_THROWS_AS(lemma32_divergence(g, 1.0, {0.1, 0.2}), std::invalid_argument);
        REQUIRE_THROWS_AS(lemma32_divergence(g, 1.0, {1.5}), std::invalid_argument);
    }
}

TEST_CASE("validate_perturbation") {
    SECTION("square-integrable kernels pass") {
        REQUIRE(validate_perturbation(constant_perturbation(1.0), 1.0).square_integrable);
        REQUIRE(validate_perturbation(linear_time_perturbation(), 1.0).square_integrable);
        REQUIRE(validate_perturbation(zero_perturbation(), 1.0).square_integrable);
    }
    SECTION("the degree (-1) homogeneous family is flagged") {
        const PerturbationKernel l = scale_invariant_perturbation([](double) { return 1.0; });
        const PerturbationValidation v = validate_perturbation(l, 1.0);
        REQUIRE_FALSE(v.square_integrable);
        // Each delta decade adds the same log(10) * int g^2.
        const double inc1 = v.probe_values[1] - v.probe_values[0];
        const double inc2 = v.probe_values[2] - v.probe_values[1];
        REQUIRE_THAT(inc1, WithinRel(std::log(10.0), 1e-6));
        REQUIRE_THAT(inc2, WithinRel(std::log(10.0), 1e-6));
    }
}

TEST_CASE("selfsimilar_iff_l_zero_check") {
    const TimeGrid grid = TimeGrid::uniform(2.0, 8);
    SECTION("l == 0 preserves self-similarity") {
        const SelfSimilarKernel k = fbm_self_similar_kernel(HurstIndex(0.75));
        const ScalingCheckReport r =
            selfsimilar_iff_l_zero_check(k, zero_perturbation(), grid, 1e-5);
        REQUIRE(r.selfsimilar);
        REQUIRE(r.pairs_compared >= 3);
    }
    SECTION("constant l breaks it") {
        const ScalingCheckReport r =
            selfsimilar_iff_l_zero_check(brownian(), constant_perturbation(1.0), grid, 1e-5);
        REQUIRE_FALSE(r.selfsimilar);
        REQUIRE(r.worst_rel_deviation > 0.1);
    }
    SECTION("grid closure requirement") {
        REQUIRE_THROWS_AS(selfsimilar_iff_l_zero_check(brownian(), zero_perturbation(),
                                                       TimeGrid({1.1, 1.3}), 1e-5),
                          std::invalid_argument);
    }
}
