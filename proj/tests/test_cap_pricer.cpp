#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "mcev/cap_pricer.hpp"
#include "oracles.hpp"

using Catch::Approx;

TEST_CASE("caplet deterministic limit is the discounted intrinsic value") {
    CHECK(mcev::caplet_price(1e6, 0.95, 0.03, 0.02, 0.0, 2.0, 1.0) == Approx(9500.0).margin(1e-9));
    CHECK(mcev::caplet_price(1e6, 0.95, 0.03, 0.02, 0.2, 0.0, 1.0) == Approx(9500.0).margin(1e-9));
    CHECK(mcev::caplet_price(1e6, 0.95, 0.01, 0.02, 0.0, 2.0, 1.0) == 0.0);
}

TEST_CASE("at-the-money-forward closed form") {
    const double n = 2e6, b = 0.91, f = 0.031, vol = 0.17, t = 3.0, delta = 0.5;
    const double expected = n * delta * b * f * (2.0 * mcev::norm_cdf(vol * std::sqrt(t) / 2.0) - 1.0);
    CHECK(mcev::caplet_price(n, b, f, f, vol, t, delta) == Approx(expected).margin(1e-9));
}

TEST_CASE("caplet matches quadrature and Monte-Carlo references") {
    const double price = mcev::caplet_price(1e6, 0.95, 0.03, 0.02, 0.2, 2.0, 1.0);
    // mpmath quadrature of the lognormal payoff
    CHECK(price == Approx(9722.47112611840611).margin(1e-7));
    const auto mc = oracle::caplet_monte_carlo(1e6, 0.95, 0.03, 0.02, 0.2, 2.0, 1.0, 1'000'000, 99);
    CHECK(std::fabs(price - mc.mean) < 3.0 * mc.std_error);
}

TEST_CASE("caplet input validation") {
    CHECK_THROWS_AS(mcev::caplet_price(1e6, 0.95, 0.03, 0.0, 0.2, 1.0), mcev::DomainError);
    CHECK_THROWS_AS(mcev::caplet_price(1e6, 0.95, 0.03, 0.02, -0.1, 1.0), mcev::DomainError);
    CHECK_THROWS_AS(mcev::caplet_price(1e6, 0.95, -0.01, 0.02, 0.2, 1.0), mcev::DomainError);
    CHECK_NOTHROW(mcev::caplet_price(1e6, 0.95, -0.01, 0.02, 0.0, 1.0));
}

TEST_CASE("caplet monotonicity and intrinsic lower bound") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> rate(0.002, 0.08), vol(0.01, 0.6), t(0.05, 10.0), bump(1e-4, 0.05);
    for (int i = 0; i < 1000; ++i) {
        const double f = rate(rng), e = rate(rng), s = vol(rng), tf = t(rng), h = bump(rng);
        const double base = mcev::caplet_price(1e6, 0.9, f, e, s, tf);
        CHECK(mcev::caplet_price(1e6, 0.9, f, e, s + h, tf) >= base);
        CHECK(mcev::caplet_price(1e6, 0.9, f + h * 0.1, e, s, tf) >= base);
        CHECK(mcev::caplet_price(1e6, 0.9, f, e + h * 0.1, s, tf) <= base);
        CHECK(base >= 1e6 * 0.9 * std::max(f - e, 0.0));
    }
}

namespace {

mcev::MarketData reference_market() {
    return mcev::MarketData(
        mcev::ZeroCurve({0, 1, 2, 3, 4, 5, 6}, {0.0238, 0.0268, 0.0279, 0.0291, 0.0295, 0.0303, 0.0311}),
        mcev::VolTermStructure({0, 1, 2, 3, 4, 5, 6}, {0.166, 0.166, 0.170, 0.169, 0.166, 0.161, 0.1555}), 0.0195,
        0.275);
}

mcev::CapSpec reference_cap() {
    mcev::CapSpec spec;
    spec.strike = 0.019;
    spec.index_tenor = 3.0;
    spec.notionals = {1327916.50, 1132393.77, 578046.58, 262250.98, 95451.83, 20285.94, 0.0};
    return spec;
}

}  // namespace

TEST_CASE("price_cap aggregates periods 1..n") {
    const auto market = reference_market();
    const auto spec = reference_cap();
    const auto v = mcev::price_cap(spec, market);
    REQUIRE(v.caplet_values.size() == 7);

    double total = 0.0;
    for (std::size_t j = 1; j < v.caplet_values.size(); ++j) {
        const double t_fix = static_cast<double>(j - 1);
        const double expected = mcev::caplet_price(
            spec.notionals[j], mcev::discount_factor(market.curve, static_cast<double>(j)),
            mcev::forward_index_rate(market.curve, t_fix, 3.0), 0.019, mcev::vol_at(market.vols, t_fix), t_fix);
        CHECK(v.caplet_values[j] == Approx(expected).margin(1e-9));
        total += v.caplet_values[j];
    }
    CHECK(v.stochastic_value == total);
    CHECK(v.valuation_spread == v.stochastic_value - v.deterministic_value);
    CHECK(v.stochastic_value >= v.deterministic_value);
    // period 1 fixes today on the 3y spot rate
    CHECK(v.forwards[1] == 0.0291);
    CHECK(v.caplet_values.back() == 0.0);
}

TEST_CASE("spot index override only affects the period-0 fixing") {
    const auto market = reference_market();
    auto spec = reference_cap();
    const auto base = mcev::price_cap(spec, market);
    spec.spot_index_first_fixing = true;
    const auto overridden = mcev::price_cap(spec, market);
    CHECK(overridden.forwards[0] == 0.0195);
    CHECK(overridden.caplet_values[0] == Approx(1327916.50 * (0.0195 - 0.019)).margin(1e-9));
    CHECK(overridden.stochastic_value == base.stochastic_value);
}

TEST_CASE("zero vol or out-of-the-money caps") {
    auto market = reference_market();
    market.vols = mcev::VolTermStructure::flat(1e-300);
    const auto v = mcev::price_cap(reference_cap(), market);
    CHECK(v.valuation_spread == Approx(0.0).margin(1e-9));

    auto spec = reference_cap();
    spec.strike = 0.50;
    market.vols = mcev::VolTermStructure::flat(1e-300);
    const auto otm = mcev::price_cap(spec, market);
    for (double c : otm.caplet_values) CHECK(c == 0.0);
    CHECK(otm.stochastic_value == 0.0);
}

TEST_CASE("per-period strikes") {
    const auto market = reference_market();
    auto spec = reference_cap();
    spec.strikes = {0.0191, 0.0214, 0.0217, 0.0221, 0.0224, 0.0228, 0.0231};
    const auto with_strikes = mcev::price_cap(spec, market);
    const auto flat = mcev::price_cap(reference_cap(), market);
    CHECK(with_strikes.stochastic_value < flat.stochastic_value);
    spec.strikes.pop_back();
    CHECK_THROWS_AS(mcev::price_cap(spec, market), mcev::DomainError);
}

TEST_CASE("aggregate identities on replayed caplets") {
    const auto v = mcev::valuation_from_caplets({-153.48, -3175.22, -1981.13, -1019.51, -404.18, -91.44, 0.0}, -5268.03);
    CHECK(v.stochastic_value == Approx(-6671.48).margin(1e-9));
    CHECK(v.valuation_spread == Approx(-1403.45).margin(1e-9));
    CHECK(mcev::remuneration_option_cost(v, -958.21, 0.275) == Approx(-4142.12).margin(0.01));
}

TEST_CASE("remuneration option cost") {
    mcev::CapValuation v;
    v.stochastic_value = -1234.5;
    CHECK(mcev::remuneration_option_cost(v, -1234.5, 0.3) == 0.0);
    CHECK(mcev::remuneration_option_cost(v, 0.0, 0.0) == -1234.5);
    CHECK_THROWS_AS(mcev::remuneration_option_cost(v, 0.0, 1.0), mcev::DomainError);
    const auto costed = mcev::with_option_cost(mcev::as_insurer_cost(mcev::valuation_from_caplets({5, 10, 20}, 25)), -3.0, 0.5);
    CHECK(costed.stochastic_value == -30.0);
    CHECK(costed.valuation_spread == -5.0);
    CHECK(costed.crd == Approx((-30.0 + 3.0) * 0.5));
}
