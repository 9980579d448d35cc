#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "reluscan/bounds.hpp"
#include "reluscan/rng.hpp"

using namespace reluscan;

TEST_CASE("arrangement_count closed forms") {
    CHECK(arrangement_count(3, 2) == 7);   // 1 + 3 + 3
    CHECK(arrangement_count(2, 5) == 4);   // 2^m when m <= n
    CHECK(arrangement_count(10, 2) == 56); // 1 + 10 + 45
    CHECK(arrangement_count(0, 3) == 1);

    // m <= n gives exactly 2^m
    for (long long m = 0; m <= 20; ++m) CHECK(arrangement_count(m, m + 3) == (1ULL << m));
    // n = 1 gives m + 1
    for (long long m = 0; m <= 50; ++m) CHECK(arrangement_count(m, 1) == static_cast<std::uint64_t>(m + 1));

    CHECK_THROWS_AS(arrangement_count(-1, 2), std::invalid_argument);
    CHECK_THROWS_AS(arrangement_count(200, 150), std::overflow_error);
}

TEST_CASE("density_bound reference values") {
    CHECK(density_bound({96, 2, 1.0, 0.0, 1.0}).value == doctest::Approx(4608.0)); // 96^2/2
    CHECK(density_bound({60, 2, 1.0, 0.0, 1.0}).value == doctest::Approx(1800.0));
    CHECK(density_bound({3, 5, 1.0, 0.0, 1.0}).value == doctest::Approx(8.0)); // 2^3

    SUBCASE("monotone in T, neurons, volume") {
        double base = density_bound({50, 3, 1.0, 0.0, 1.0}).value;
        CHECK(density_bound({50, 3, 2.0, 0.0, 1.0}).value >= base);
        CHECK(density_bound({80, 3, 1.0, 0.0, 1.0}).value >= base);
        CHECK(density_bound({50, 3, 1.0, 0.0, 4.0}).value >= base);
    }
    SUBCASE("log-space path agrees with the direct one") {
        DensityBound small = density_bound({100, 19, 1.0, 0.0, 1.0});
        CHECK(std::log10(small.value) == doctest::Approx(small.log10_value).epsilon(1e-9));
        DensityBound big = density_bound({100, 25, 1.0, 0.0, 1.0});
        CHECK_FALSE(big.saturated);
        CHECK(std::log10(big.value) == doctest::Approx(big.log10_value).epsilon(1e-9));
    }
    SUBCASE("overflow saturates instead of throwing") {
        DensityBound huge = density_bound({1000000, 200, 1.0, 0.0, 1.0});
        CHECK(huge.saturated);
        CHECK(huge.log10_value > 300.0);
    }
    CHECK_THROWS_AS(density_bound({0, 2, 1.0, 0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("expected_count_prediction") {
    CHECK(expected_count_prediction(96, 1) == doctest::Approx(96.0));
    CHECK(expected_count_prediction(96, 2) == doctest::Approx(4608.0));
    CHECK(expected_count_prediction(60, 2) == doctest::Approx(1800.0));

    // approaches the exact arrangement count for m >> n
    double exact = static_cast<double>(arrangement_count(1000, 2)); // 1 + 1000 + 499500
    double approx = expected_count_prediction(1000, 2);
    CHECK(std::abs(exact - approx) / exact < 0.002);
}

TEST_CASE("gradient statistics") {
    SUBCASE("depth-1: the gradient of each neuron is its weight row") {
        Network net = he_init(3, {4, 1}, InitSpec{1.0, 0.1, 5});
        GradSampler sampler;
        sampler.sample_x = [](Rng& rng) {
            std::normal_distribution<double> g(0.0, 1.0);
            return std::vector<double>{g(rng), g(rng), g(rng)};
        };
        GradStats stats = estimate_grad_constant(net, sampler, 32, {1, 2}, 1);
        for (int i = 0; i < 4; ++i) {
            double wnorm = std::hypot(net.weight(0, i, 0),
                                      std::hypot(net.weight(0, i, 1), net.weight(0, i, 2)));
            CHECK(stats.per_neuron_max[i] == doctest::Approx(wnorm).epsilon(1e-12));
            CHECK(stats.per_neuron_mean[i] == doctest::Approx(wnorm).epsilon(1e-12));
        }
        CHECK(stats.sample_count == 32);
    }
    SUBCASE("zero weights give zero norms") {
        Network net(2, {3, 1}, {std::vector<double>(6, 0.0), std::vector<double>(3, 0.0)},
                    {{0.1, 0.2, 0.3}, {0.0}});
        GradSampler sampler;
        sampler.sample_x = [](Rng& rng) {
            std::uniform_real_distribution<double> u(-1.0, 1.0);
            return std::vector<double>{u(rng), u(rng)};
        };
        GradStats stats = estimate_grad_constant(net, sampler, 8, {1}, 2);
        for (double v : stats.per_neuron_max) CHECK(v == 0.0);
        CHECK(stats.grad_constant_estimate() == 0.0);
    }
    SUBCASE("fresh-net first moment is stable across disjoint batches") {
        Network proto = he_init(4, {16, 16, 1}, InitSpec{1.0, 1e-3, 0});
        GradSampler sampler;
        sampler.sample_x = [](Rng& rng) {
            std::normal_distribution<double> g(0.0, 1.0);
            std::vector<double> x(4);
            for (double& v : x) v = g(rng);
            return x;
        };
        sampler.fresh_net = [](std::uint64_t seed) {
            return he_init(4, {16, 16, 1}, InitSpec{1.0, 1e-3, seed});
        };
        GradStats a = estimate_grad_constant(proto, sampler, 10000, {1}, 100);
        GradStats b = estimate_grad_constant(proto, sampler, 10000, {1}, 200);
        CHECK(a.moment_roots[1] == doctest::Approx(b.moment_roots[1]).epsilon(0.10));
        CHECK(a.grad_constant_estimate() > 0.0);
    }
}
