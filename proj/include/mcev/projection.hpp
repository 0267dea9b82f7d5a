#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mcev/errors.hpp"
#include "mcev/loss_model.hpp"
#include "mcev/market_curves.hpp"
#include "mcev/parallel.hpp"

namespace mcev {

// Contracts renewed each year unless they lapse.
struct TacitRenewal {
    double lapse_rate = 0.0;
};

// Contracts running to a term; the book amortizes linearly to zero.
struct FixedTerm {
    double mean_remaining_term_months = 0.0;
};

using RenewalMode = std::variant<TacitRenewal, FixedTerm>;

// Ways to specify the year-1 loss-ratio dispersion.
struct DirectSigma {
    double sigma = 0.0;
};
struct DirectCoefficientOfVariation {
    double cv = 0.0;
};
struct ScoredCriteria {
    RiskCriteria criteria;
};

using VolatilitySource = std::variant<DirectSigma, DirectCoefficientOfVariation, ScoredCriteria>;

/// Aggregate description of an individual-protection portfolio.
struct PortfolioSpec {
    std::string id;
    double initial_premium = 0.0;
    std::vector<double> chronicle;  // E[S/P(t)], t = 1..H
    double retained_sp = 0.0;       // E[S/P(1)] used for the lognormal mean; 0 means chronicle[0]
    RenewalMode renewal = TacitRenewal{};
    double profit_share_rate = 0.0;
    double tax_rate = 0.0;
    VolatilitySource volatility = DirectSigma{};
    double reversion_speed = 0.8;

    // Descriptive only.
    double accounting_sp = 0.0;
    double actuarial_age = 0.0;
    bool risk_anticipation = false;

    std::size_t horizon() const noexcept { return chronicle.size(); }
    double mean_sp() const { return retained_sp > 0.0 ? retained_sp : chronicle.at(0); }

    void validate() const {
        const std::string who = "portfolio '" + id + "': ";
        detail::require(initial_premium >= 0.0, who + "initial premium must be nonnegative");
        detail::require(!chronicle.empty(), who + "chronicle must cover at least one year");
        for (double c : chronicle) detail::require(c > 0.0, who + "chronicle values must be positive");
        detail::require(retained_sp >= 0.0, who + "retained loss ratio must be nonnegative");
        detail::require(profit_share_rate >= 0.0 && profit_share_rate <= 1.0, who + "profit share rate must lie in [0,1]");
        detail::require(tax_rate >= 0.0 && tax_rate < 1.0, who + "tax rate must lie in [0,1)");
        detail::require(reversion_speed > 0.0 && reversion_speed <= 1.0, who + "reversion speed must lie in (0,1]");
        if (const auto* tr = std::get_if<TacitRenewal>(&renewal)) {
            detail::require(tr->lapse_rate >= 0.0 && tr->lapse_rate < 1.0, who + "lapse rate must lie in [0,1)");
        } else {
            detail::require(std::get<FixedTerm>(renewal).mean_remaining_term_months >= 0.0,
                            who + "remaining term must be nonnegative");
        }
    }
};

// Lognormal parameters of S/P(1). `weights` is only consulted for scored portfolios.
inline LognormalParams portfolio_lognormal(const PortfolioSpec& spec, const WeightMatrix* weights) {
    const double mean = spec.mean_sp();
    return std::visit(
        [&](const auto& src) -> LognormalParams {
            using T = std::decay_t<decltype(src)>;
            if constexpr (std::is_same_v<T, DirectSigma>) {
                return lognormal_params_from_sigma(mean, src.sigma);
            } else if constexpr (std::is_same_v<T, DirectCoefficientOfVariation>) {
                return lognormal_params(mean, src.cv);
            } else {
                if (weights == nullptr) throw ConfigError("portfolio '" + spec.id + "': criteria scoring needs a weight matrix");
                return lognormal_params(mean, volatility_score(src.criteria, *weights));
            }
        },
        spec.volatility);
}

inline ScenarioInputs scenario_inputs(const PortfolioSpec& spec, const WeightMatrix* weights) {
    spec.validate();
    return {portfolio_lognormal(spec, weights), spec.chronicle, spec.reversion_speed};
}

// Premiums minus claims; the distributor takes a share of gains only.
inline double underwriting_result(double premium, double sp, double profit_share_rate) {
    detail::require(premium >= 0.0, "underwriting_result: negative premium");
    detail::require(sp >= 0.0, "underwriting_result: negative loss ratio");
    detail::require(profit_share_rate >= 0.0 && profit_share_rate <= 1.0, "underwriting_result: share must lie in [0,1]");
    const double gross = premium * (1.0 - sp);
    return sp < 1.0 ? gross * (1.0 - profit_share_rate) : gross;
}

inline std::vector<double> premium_runoff(const PortfolioSpec& spec) {
    const std::size_t h = spec.horizon();
    std::vector<double> premiums(h);
    if (const auto* tr = std::get_if<TacitRenewal>(&spec.renewal)) {
        double level = spec.initial_premium;
        for (std::size_t t = 0; t < h; ++t) {
            premiums[t] = level;
            level *= 1.0 - tr->lapse_rate;
        }
    } else {
        const double years = std::ceil(std::get<FixedTerm>(spec.renewal).mean_remaining_term_months / 12.0);
        for (std::size_t t = 0; t < h; ++t) {
            const double remaining = years > 0.0 ? 1.0 - static_cast<double>(t) / years : 0.0;
            premiums[t] = spec.initial_premium * std::max(remaining, 0.0);
        }
    }
    return premiums;
}

namespace detail {

inline std::vector<double> spread_discount_factors(const ZeroCurve& curve, std::size_t horizon, double extra_spread) {
    std::vector<double> dfs(horizon);
    for (std::size_t t = 0; t < horizon; ++t) dfs[t] = discount_factor(curve, static_cast<double>(t + 1), extra_spread);
    return dfs;
}

inline double pvfp_with(const PortfolioSpec& spec, std::span<const double> premiums, std::span<const double> dfs,
                        std::span<const double> sp_path) {
    detail::require(sp_path.size() == spec.horizon(), "pvfp: loss-ratio path length differs from the horizon");
    double total = 0.0;
    for (std::size_t t = 0; t < sp_path.size(); ++t) {
        total += underwriting_result(premiums[t], sp_path[t], spec.profit_share_rate) * (1.0 - spec.tax_rate) * dfs[t];
    }
    return total;
}

}  // namespace detail

// After-tax underwriting results for years 1..H discounted at the zero curve
// shifted by `extra_spread`.
inline double pvfp(const PortfolioSpec& spec, std::span<const double> sp_path, const ZeroCurve& curve,
                   double extra_spread = 0.0) {
    detail::require(extra_spread >= 0.0, "pvfp: negative spread");
    const auto premiums = premium_runoff(spec);
    const auto dfs = detail::spread_discount_factors(curve, spec.horizon(), extra_spread);
    return detail::pvfp_with(spec, premiums, dfs, sp_path);
}

// PVFP along the deterministic chronicle.
inline double deterministic_pvfp(const PortfolioSpec& spec, const ZeroCurve& curve, double extra_spread = 0.0) {
    return pvfp(spec, spec.chronicle, curve, extra_spread);
}

struct PvfpSample {
    std::size_t scenario_index = 0;
    double pvfp = 0.0;
};

inline std::vector<PvfpSample> pvfp_batch(const PortfolioSpec& spec, const LossScenarioSet& scenarios,
                                          const ZeroCurve& curve, double extra_spread = 0.0, unsigned threads = 1) {
    detail::require(extra_spread >= 0.0, "pvfp_batch: negative spread");
    detail::require(scenarios.horizon == spec.horizon(), "pvfp_batch: scenario horizon differs from the portfolio");
    const auto premiums = premium_runoff(spec);
    const auto dfs = detail::spread_discount_factors(curve, spec.horizon(), extra_spread);
    std::vector<PvfpSample> out(scenarios.scenario_count);
    parallel_for(out.size(), threads, [&](std::size_t i) {
        out[i] = {i, detail::pvfp_with(spec, premiums, dfs, scenarios.row(i))};
    });
    return out;
}

}  // namespace mcev
