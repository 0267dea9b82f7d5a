#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "mcev/projection.hpp"

using Catch::Approx;

namespace {

mcev::PortfolioSpec simple_portfolio(std::size_t horizon, double premium = 100.0) {
    mcev::PortfolioSpec p;
    p.id = "test";
    p.initial_premium = premium;
    p.chronicle.assign(horizon, 0.8);
    p.renewal = mcev::TacitRenewal{0.0};
    p.volatility = mcev::DirectSigma{0.2};
    return p;
}

}  // namespace

TEST_CASE("underwriting result with profit sharing") {
    CHECK(mcev::underwriting_result(100, 2.0, 0.5) == -100.0);
    CHECK(mcev::underwriting_result(100, 0.10, 0.5) == Approx(45.0));
    for (double tau : {0.0, 0.3, 1.0}) CHECK(mcev::underwriting_result(100, 1.0, tau) == 0.0);
    CHECK_THROWS_AS(mcev::underwriting_result(-1, 0.5, 0.5), mcev::DomainError);
    CHECK_THROWS_AS(mcev::underwriting_result(100, -0.5, 0.5), mcev::DomainError);
    CHECK_THROWS_AS(mcev::underwriting_result(100, 0.5, 1.5), mcev::DomainError);
}

TEST_CASE("underwriting result shape") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> gap(0.001, 0.999), premium(1.0, 1e6);
    for (int i = 0; i < 500; ++i) {
        const double g = gap(rng), p = premium(rng);
        // symmetric without profit sharing
        CHECK(mcev::underwriting_result(p, 1 - g, 0.0) == Approx(-mcev::underwriting_result(p, 1 + g, 0.0)));
        // gains are shared, losses are not
        const double tau = 0.35;
        const double gain = mcev::underwriting_result(p, 1 - g, tau);
        const double loss = mcev::underwriting_result(p, 1 + g, tau);
        CHECK(gain == Approx((1 - tau) * std::fabs(loss)));
        CHECK(gain < std::fabs(loss));
    }
    // slopes either side of breakeven
    const double h = 1e-6;
    CHECK((mcev::underwriting_result(100, 0.5 + h, 0.4) - mcev::underwriting_result(100, 0.5, 0.4)) / h ==
          Approx(-60.0).margin(1e-6));
    CHECK((mcev::underwriting_result(100, 1.5 + h, 0.4) - mcev::underwriting_result(100, 1.5, 0.4)) / h ==
          Approx(-100.0).margin(1e-6));
}

TEST_CASE("asymmetry lowers the expected result") {
    const double mean_result = 0.5 * (mcev::underwriting_result(100, 0.5, 0.5) + mcev::underwriting_result(100, 1.5, 0.5));
    CHECK(mean_result == -12.5);
    CHECK(mean_result < mcev::underwriting_result(100, 1.0, 0.5));
}

TEST_CASE("premium run-off") {
    auto p = simple_portfolio(5);
    p.renewal = mcev::TacitRenewal{0.2};
    auto premiums = mcev::premium_runoff(p);
    CHECK(premiums[0] == 100.0);
    CHECK(premiums[1] == Approx(80.0));
    CHECK(premiums[2] == Approx(64.0));

    p.renewal = mcev::FixedTerm{24};
    premiums = mcev::premium_runoff(p);
    CHECK(premiums == std::vector<double>{100.0, 50.0, 0.0, 0.0, 0.0});

    p.renewal = mcev::FixedTerm{13};  // rounds up to two years
    CHECK(mcev::premium_runoff(p)[1] == 50.0);

    p.renewal = mcev::TacitRenewal{0.0};
    for (double v : mcev::premium_runoff(p)) CHECK(v == 100.0);

    for (double months : {0.0, 6.0, 200.0, 360.0}) {
        p.renewal = mcev::FixedTerm{months};
        premiums = mcev::premium_runoff(p);
        for (std::size_t t = 1; t < premiums.size(); ++t) {
            CHECK(premiums[t] <= premiums[t - 1]);
            CHECK(premiums[t] >= 0.0);
        }
    }
}

TEST_CASE("pvfp arithmetic") {
    const auto flat0 = mcev::ZeroCurve::flat(0.0);
    SECTION("single period") {
        const auto p = simple_portfolio(1);
        CHECK(mcev::pvfp(p, std::vector<double>{0.8}, flat0) == Approx(20.0));
    }
    SECTION("breakeven path gives zero") {
        auto p = simple_portfolio(10);
        p.profit_share_rate = 0.4;
        p.tax_rate = 0.3;
        CHECK(mcev::pvfp(p, std::vector<double>(10, 1.0), mcev::ZeroCurve::flat(0.03)) == 0.0);
    }
    SECTION("tax, sharing and discounting") {
        auto p = simple_portfolio(2);
        p.profit_share_rate = 0.5;
        p.tax_rate = 0.25;
        p.renewal = mcev::TacitRenewal{0.5};
        const auto curve = mcev::ZeroCurve::flat(0.05);
        const double expected = 100 * 0.2 * 0.5 * 0.75 / 1.05 + 50 * (1 - 1.3) * 0.75 / (1.05 * 1.05);
        CHECK(mcev::pvfp(p, std::vector<double>{0.8, 1.3}, curve) == Approx(expected).margin(1e-12));
        // spread shifts every zero rate
        const double shifted = 100 * 0.2 * 0.5 * 0.75 / 1.06 + 50 * (1 - 1.3) * 0.75 / (1.06 * 1.06);
        CHECK(mcev::pvfp(p, std::vector<double>{0.8, 1.3}, curve, 0.01) == Approx(shifted).margin(1e-12));
    }
    SECTION("positive results lose value under a spread") {
        const auto p = simple_portfolio(30);
        const auto curve = mcev::ZeroCurve::flat(0.03);
        CHECK(mcev::deterministic_pvfp(p, curve, 0.01) < mcev::deterministic_pvfp(p, curve));
    }
    SECTION("linear in premiums") {
        const auto curve = mcev::ZeroCurve({0, 10}, {0.02, 0.04});
        const std::vector<double> path{0.7, 1.2, 0.9, 0.95, 1.4};
        CHECK(mcev::pvfp(simple_portfolio(5, 200.0), path, curve) ==
              Approx(2.0 * mcev::pvfp(simple_portfolio(5, 100.0), path, curve)).margin(1e-12));
    }
    SECTION("errors") {
        const auto p = simple_portfolio(3);
        CHECK_THROWS_AS(mcev::pvfp(p, std::vector<double>{0.8, 0.8}, flat0), mcev::DomainError);
        CHECK_THROWS_AS(mcev::pvfp(p, std::vector<double>(3, 0.8), flat0, -0.01), mcev::DomainError);
    }
}

TEST_CASE("pvfp batch") {
    auto p = simple_portfolio(20);
    p.profit_share_rate = 0.5;
    p.renewal = mcev::TacitRenewal{0.2};
    const auto curve = mcev::ZeroCurve::flat(0.03);

    SECTION("chronicle scenario reproduces the deterministic PVFP") {
        mcev::LossScenarioSet set;
        set.scenario_count = 2;
        set.horizon = 20;
        set.values = p.chronicle;
        set.values.insert(set.values.end(), p.chronicle.begin(), p.chronicle.end());
        const auto samples = mcev::pvfp_batch(p, set, curve);
        REQUIRE(samples.size() == 2);
        CHECK(samples[0].pvfp == Approx(mcev::deterministic_pvfp(p, curve)).margin(1e-9));
        CHECK(samples[0].pvfp == samples[1].pvfp);
        CHECK(samples[1].scenario_index == 1);
    }
    SECTION("independent of thread count") {
        const auto inputs = mcev::scenario_inputs(p, nullptr);
        const auto set = mcev::generate_scenarios(inputs, 10000, 8);
        const auto one = mcev::pvfp_batch(p, set, curve, 0.0, 1);
        const auto many = mcev::pvfp_batch(p, set, curve, 0.0, 6);
        REQUIRE(one.size() == many.size());
        for (std::size_t i = 0; i < one.size(); ++i) {
            CHECK(one[i].pvfp == many[i].pvfp);
            CHECK(std::isfinite(one[i].pvfp));
        }
    }
    SECTION("horizon mismatch") {
        mcev::LossScenarioSet set;
        set.scenario_count = 1;
        set.horizon = 3;
        set.values = {0.8, 0.8, 0.8};
        CHECK_THROWS_AS(mcev::pvfp_batch(p, set, curve), mcev::DomainError);
    }
}

TEST_CASE("portfolio lognormal parameters") {
    auto p = simple_portfolio(5);
    p.retained_sp = 0.95;
    p.volatility = mcev::DirectSigma{0.19};
    CHECK(mcev::portfolio_lognormal(p, nullptr).mu == Approx(-0.069343294387550533426).margin(1e-14));

    p.volatility = mcev::DirectCoefficientOfVariation{0.25};
    CHECK(mcev::portfolio_lognormal(p, nullptr).coefficient_of_variation() == Approx(0.25).margin(1e-12));

    mcev::RiskCriteria rc;
    rc.portfolio_age = 6;
    rc.ratings.fill(mcev::RiskLevel::Moderate);
    p.volatility = mcev::ScoredCriteria{rc};
    CHECK_THROWS_AS(mcev::portfolio_lognormal(p, nullptr), mcev::ConfigError);
    const auto w = mcev::WeightMatrix::uniform(0.5);
    CHECK(mcev::portfolio_lognormal(p, &w).coefficient_of_variation() == Approx(std::pow(0.5, 6)).margin(1e-12));
}

TEST_CASE("portfolio validation") {
    auto p = simple_portfolio(5);
    CHECK_NOTHROW(p.validate());
    p.profit_share_rate = 1.5;
    CHECK_THROWS_AS(p.validate(), mcev::DomainError);
    p = simple_portfolio(5);
    p.renewal = mcev::TacitRenewal{1.0};
    CHECK_THROWS_AS(p.validate(), mcev::DomainError);
    p = simple_portfolio(5);
    p.chronicle[2] = 0.0;
    CHECK_THROWS_AS(p.validate(), mcev::DomainError);
    p = simple_portfolio(0);
    CHECK_THROWS_AS(p.validate(), mcev::DomainError);
}
