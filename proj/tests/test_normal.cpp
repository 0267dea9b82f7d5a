#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mcev/normal.hpp"

using Catch::Approx;

// Reference values from tests/oracles/frozen_values.py (mpmath, 40 digits).

TEST_CASE("norm_cdf against high-precision references") {
    CHECK(mcev::norm_cdf(0.0) == 0.5);
    CHECK(mcev::norm_cdf(1.959964) == Approx(0.9750000009035575957).margin(1e-14));
    CHECK(mcev::norm_cdf(-3.5) == Approx(0.00023262907903552503635).margin(1e-15));
    CHECK(mcev::norm_cdf(0.3) == Approx(0.61791142218895263731).margin(1e-14));
}

TEST_CASE("norm_cdf symmetry and saturation") {
    for (double x = -8.0; x <= 8.0; x += 0.37) {
        CHECK(mcev::norm_cdf(-x) == Approx(1.0 - mcev::norm_cdf(x)).margin(1e-15));
    }
    CHECK(mcev::norm_cdf(-40.0) == 0.0);
    CHECK(mcev::norm_cdf(40.0) == 1.0);
}

TEST_CASE("norm_inv against high-precision references") {
    CHECK(mcev::norm_inv(0.5) == 0.0);
    CHECK(mcev::norm_inv(0.975) == Approx(1.9599639845400542355).margin(1e-12));
    CHECK(mcev::norm_inv(0.02) == Approx(-2.0537489106318230529).margin(1e-12));
    CHECK(mcev::norm_inv(1e-10) == Approx(-6.3613409024040562047).margin(1e-10));
}

TEST_CASE("norm_inv rejects probabilities outside (0,1)") {
    CHECK_THROWS_AS(mcev::norm_inv(0.0), mcev::DomainError);
    CHECK_THROWS_AS(mcev::norm_inv(1.0), mcev::DomainError);
    CHECK_THROWS_AS(mcev::norm_inv(-0.1), mcev::DomainError);
    CHECK_THROWS_AS(mcev::norm_inv(std::nan("")), mcev::DomainError);
}

TEST_CASE("norm_cdf(norm_inv(u)) round-trips on a grid") {
    double worst = 0.0;
    for (int i = 1; i < 10000; ++i) {
        const double u = i / 10000.0;
        worst = std::max(worst, std::fabs(mcev::norm_cdf(mcev::norm_inv(u)) - u));
    }
    CHECK(worst < 1e-9);
}
