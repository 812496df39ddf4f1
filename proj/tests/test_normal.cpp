#include <catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "sgdinf/errors.hpp"
#include "sgdinf/normal.hpp"

using namespace sgdinf;
using Catch::Matchers::WithinAbs;

TEST_CASE("quantile at standard points") {
    CHECK_THAT(normal_quantile(0.5), WithinAbs(0.0, 1e-12));
    CHECK_THAT(normal_quantile(0.975), WithinAbs(1.959963984540054, 1e-9));
    CHECK_THAT(normal_quantile(0.995), WithinAbs(oracle::bisect_quantile(0.995), 1e-8));
    CHECK_THAT(normal_quantile(0.995), WithinAbs(2.575829, 1e-6));
    CHECK_THAT(two_sided_critical_value(0.05), WithinAbs(1.959964, 1e-6));
}

TEST_CASE("quantile matches bisection on an independent erf series") {
    for (double p : {1e-10, 1e-6, 0.001, 0.02425, 0.1, 0.3, 0.6, 0.9, 0.97575, 0.999, 1 - 1e-6}) {
        INFO("p = " << p);
        CHECK_THAT(normal_quantile(p), WithinAbs(oracle::bisect_quantile(p), 1e-8));
    }
}

TEST_CASE("quantile and cdf are inverse") {
    for (double q : {0.2, 0.1, 0.05, 0.01}) CHECK_THAT(normal_cdf(normal_quantile(1 - q / 2)), WithinAbs(1 - q / 2, 1e-8));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-8, 8);
    for (int i = 0; i < 200; ++i) {
        const double x = u(rng);
        CHECK_THAT(normal_cdf(x), WithinAbs(oracle::normal_cdf_series(x), 1e-12));
    }
}

TEST_CASE("quantile rejects probabilities outside (0, 1)") {
    CHECK_THROWS_AS(normal_quantile(0.0), InvalidArgument);
    CHECK_THROWS_AS(normal_quantile(1.0), InvalidArgument);
    CHECK_THROWS_AS(normal_quantile(-0.2), InvalidArgument);
}
