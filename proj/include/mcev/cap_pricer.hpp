#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "mcev/errors.hpp"
#include "mcev/market_curves.hpp"
#include "mcev/normal.hpp"

namespace mcev {

/// Distributor-remuneration option modelled as a cap on an index rate.
///
/// `notionals[j]` is the technical-reserve amount at period j = 0..n. The
/// option pays N_j * accrual * max(F_j - E_j, 0) at T_j = j * accrual, where
/// F_j is the index rate fixing at T_{j-1}.
struct CapSpec {
    double strike = 0.0;
    std::vector<double> notionals;
    double index_tenor = 3.0;
    double accrual = 1.0;
    // Per-period strikes E_0..E_n; empty means the constant `strike`.
    std::vector<double> strikes;
    // Use MarketData::spot_index_rate instead of the curve for the period-0 fixing.
    bool spot_index_first_fixing = false;

    std::size_t horizon() const noexcept { return notionals.empty() ? 0 : notionals.size() - 1; }

    double strike_at(std::size_t j) const { return strikes.empty() ? strike : strikes.at(j); }

    void validate() const {
        detail::require(strike > 0.0, "CapSpec: strike must be positive");
        detail::require(notionals.size() >= 2, "CapSpec: need notionals for periods 0..n with n >= 1");
        detail::require(accrual > 0.0, "CapSpec: accrual must be positive");
        detail::require(index_tenor > 0.0, "CapSpec: index tenor must be positive");
        for (double n : notionals) detail::require(n >= 0.0, "CapSpec: notionals must be nonnegative");
        if (!strikes.empty()) {
            detail::require(strikes.size() == notionals.size(), "CapSpec: one strike per period is required");
            for (double e : strikes) detail::require(e > 0.0, "CapSpec: strikes must be positive");
        }
    }
};

struct CapValuation {
    std::vector<double> caplet_values;  // periods 0..n
    std::vector<double> forwards;       // index fixing used by each period
    std::vector<double> discount_factors;
    std::vector<double> vols;
    double stochastic_value = 0.0;
    double deterministic_value = 0.0;
    double valuation_spread = 0.0;
    double booked_flows_pv = 0.0;
    double crd = 0.0;
};

// Black-76 caplet on an index rate. Degenerates to the discounted intrinsic
// value when vol * sqrt(t_fix) is zero.
inline double caplet_price(double notional, double df_pay, double fwd, double strike, double vol, double t_fix,
                           double accrual = 1.0) {
    detail::require(strike > 0.0, "caplet_price: strike must be positive");
    detail::require(vol >= 0.0, "caplet_price: negative volatility");
    detail::require(notional >= 0.0, "caplet_price: negative notional");
    detail::require(t_fix >= 0.0, "caplet_price: negative fixing time");

    const double scale = notional * accrual * df_pay;
    const double intrinsic = scale * std::max(fwd - strike, 0.0);
    const double stdev = vol * std::sqrt(t_fix);
    if (stdev == 0.0) return intrinsic;

    detail::require(fwd > 0.0, "caplet_price: forward must be positive when vol > 0");
    const double d1 = (std::log(fwd / strike) + 0.5 * stdev * stdev) / stdev;
    const double d2 = d1 - stdev;
    // Rounding in the cdf terms can leave deep in-the-money prices a few ulps under intrinsic.
    return std::max(scale * (fwd * norm_cdf(d1) - strike * norm_cdf(d2)), intrinsic);
}

namespace detail {

inline double sum_periods(std::span<const double> values) {
    double total = 0.0;
    for (std::size_t j = 1; j < values.size(); ++j) total += values[j];
    return total;
}

}  // namespace detail

// Builds the aggregate rows from per-period caplet values. Period 0 is already
// fixed and is excluded from the option value.
inline CapValuation valuation_from_caplets(std::vector<double> caplet_values, double deterministic_value) {
    CapValuation v;
    v.caplet_values = std::move(caplet_values);
    v.stochastic_value = detail::sum_periods(v.caplet_values);
    v.deterministic_value = deterministic_value;
    v.valuation_spread = v.stochastic_value - v.deterministic_value;
    return v;
}

inline CapValuation price_cap(const CapSpec& spec, const MarketData& market) {
    spec.validate();
    const std::size_t n = spec.horizon();
    const double delta = spec.accrual;

    std::vector<double> stochastic(n + 1), deterministic(n + 1);
    CapValuation out;
    out.forwards.resize(n + 1);
    out.discount_factors.resize(n + 1);
    out.vols.resize(n + 1);

    // Period 0: fixed at inception, paid now.
    {
        const double fwd0 = spec.spot_index_first_fixing ? market.spot_index_rate
                                                         : forward_index_rate(market.curve, 0.0, spec.index_tenor);
        out.forwards[0] = fwd0;
        out.discount_factors[0] = 1.0;
        out.vols[0] = vol_at(market.vols, 0.0);
        stochastic[0] = caplet_price(spec.notionals[0], 1.0, fwd0, spec.strike_at(0), 0.0, 0.0, delta);
        deterministic[0] = stochastic[0];
    }

    for (std::size_t j = 1; j <= n; ++j) {
        const double t_fix = static_cast<double>(j - 1) * delta;
        const double t_pay = static_cast<double>(j) * delta;
        const double fwd = forward_index_rate(market.curve, t_fix, spec.index_tenor);
        const double df = discount_factor(market.curve, t_pay);
        const double vol = vol_at(market.vols, t_fix);
        const double strike = spec.strike_at(j);
        out.forwards[j] = fwd;
        out.discount_factors[j] = df;
        out.vols[j] = vol;
        stochastic[j] = caplet_price(spec.notionals[j], df, fwd, strike, vol, t_fix, delta);
        deterministic[j] = caplet_price(spec.notionals[j], df, fwd, strike, 0.0, t_fix, delta);
    }

    const double det_total = detail::sum_periods(deterministic);
    CapValuation agg = valuation_from_caplets(std::move(stochastic), det_total);
    out.caplet_values = std::move(agg.caplet_values);
    out.stochastic_value = agg.stochastic_value;
    out.deterministic_value = agg.deterministic_value;
    out.valuation_spread = agg.valuation_spread;
    return out;
}

// Reports present option values as costs to the insurer (negative amounts).
inline CapValuation as_insurer_cost(CapValuation v) {
    for (double& c : v.caplet_values) c = -c;
    v.stochastic_value = -v.stochastic_value;
    v.deterministic_value = -v.deterministic_value;
    v.valuation_spread = -v.valuation_spread;
    return v;
}

// Net option cost after the part already booked in the deterministic
// account and after tax.
inline double remuneration_option_cost(const CapValuation& valuation, double booked_flows_pv, double tax_rate) {
    detail::require(tax_rate >= 0.0 && tax_rate < 1.0, "remuneration_option_cost: tax_rate must lie in [0,1)");
    return (valuation.stochastic_value - booked_flows_pv) * (1.0 - tax_rate);
}

inline CapValuation with_option_cost(CapValuation valuation, double booked_flows_pv, double tax_rate) {
    valuation.booked_flows_pv = booked_flows_pv;
    valuation.crd = remuneration_option_cost(valuation, booked_flows_pv, tax_rate);
    return valuation;
}

}  // namespace mcev
