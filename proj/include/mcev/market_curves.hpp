#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "mcev/errors.hpp"

namespace mcev {

namespace detail {

// Piecewise-linear interpolation on a strictly increasing grid, flat outside.
inline double interpolate_flat(std::span<const double> xs, std::span<const double> ys, double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto hi = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
    const std::size_t lo = hi - 1;
    if (x == xs[lo]) return ys[lo];
    const double w = (x - xs[lo]) / (xs[hi] - xs[lo]);
    return ys[lo] + w * (ys[hi] - ys[lo]);
}

inline void require_increasing(const std::vector<double>& xs, const char* what) {
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (!(xs[i] > xs[i - 1])) throw ConfigError(std::string(what) + ": grid must be strictly increasing");
    }
}

}  // namespace detail

/// Annually-compounded zero-coupon curve on a tenor grid (years).
///
/// Rates are linearly interpolated in tenor and held flat beyond both ends.
class ZeroCurve {
public:
    ZeroCurve(std::vector<double> tenors, std::vector<double> zero_rates)
        : tenors_(std::move(tenors)), rates_(std::move(zero_rates)) {
        if (tenors_.empty()) throw ConfigError("ZeroCurve: at least one node is required");
        if (tenors_.size() != rates_.size()) throw ConfigError("ZeroCurve: tenor/rate length mismatch");
        if (tenors_.front() < 0.0) throw ConfigError("ZeroCurve: first tenor must be >= 0");
        detail::require_increasing(tenors_, "ZeroCurve");
        for (double r : rates_) {
            if (!(r > -1.0) || !std::isfinite(r)) throw ConfigError("ZeroCurve: zero rates must be finite and > -1");
        }
    }

    // Constant-rate curve.
    static ZeroCurve flat(double rate) { return ZeroCurve({0.0}, {rate}); }

    double zero_rate(double t) const {
        if (t < 0.0) throw DomainError("ZeroCurve: negative time");
        return detail::interpolate_flat(tenors_, rates_, t);
    }

    const std::vector<double>& tenors() const noexcept { return tenors_; }
    const std::vector<double>& rates() const noexcept { return rates_; }
    double max_tenor() const noexcept { return tenors_.back(); }

private:
    std::vector<double> tenors_;
    std::vector<double> rates_;
};

/// Black (lognormal) forward volatilities by fixing time.
class VolTermStructure {
public:
    VolTermStructure() = default;
    VolTermStructure(std::vector<double> fixing_times, std::vector<double> black_vols)
        : times_(std::move(fixing_times)), vols_(std::move(black_vols)) {
        if (times_.size() != vols_.size()) throw ConfigError("VolTermStructure: time/vol length mismatch");
        detail::require_increasing(times_, "VolTermStructure");
        for (double v : vols_) {
            if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("VolTermStructure: vols must be finite and > 0");
        }
    }

    static VolTermStructure flat(double vol) { return VolTermStructure({0.0}, {vol}); }

    bool empty() const noexcept { return times_.empty(); }
    const std::vector<double>& fixing_times() const noexcept { return times_; }
    const std::vector<double>& vols() const noexcept { return vols_; }

private:
    std::vector<double> times_;
    std::vector<double> vols_;
};

struct MarketData {
    ZeroCurve curve;
    VolTermStructure vols;
    double spot_index_rate = 0.0;  // observed index level at t = 0
    double tax_rate = 0.0;

    MarketData(ZeroCurve c, VolTermStructure v, double spot, double tax)
        : curve(std::move(c)), vols(std::move(v)), spot_index_rate(spot), tax_rate(tax) {
        if (!(tax_rate >= 0.0 && tax_rate < 1.0)) throw ConfigError("MarketData: tax_rate must lie in [0,1)");
    }
};

// (1 + z(t) + shift)^-t. The shift is an additive spread on the zero rate.
inline double discount_factor(const ZeroCurve& curve, double t, double shift = 0.0) {
    if (t < 0.0) throw DomainError("discount_factor: negative time");
    if (t == 0.0) return 1.0;
    return std::pow(1.0 + curve.zero_rate(t) + shift, -t);
}

// Annualized geometric forward rate fixing at `fix` on an index of length `tenor`.
inline double forward_index_rate(const ZeroCurve& curve, double fix, double tenor) {
    if (!(tenor > 0.0)) throw DomainError("forward_index_rate: tenor must be positive");
    if (fix < 0.0) throw DomainError("forward_index_rate: negative fixing time");
    if (fix == 0.0) return curve.zero_rate(tenor);
    const double ratio = discount_factor(curve, fix) / discount_factor(curve, fix + tenor);
    return std::pow(ratio, 1.0 / tenor) - 1.0;
}

inline double vol_at(const VolTermStructure& vols, double fix) {
    if (vols.empty()) throw ConfigError("vol_at: empty volatility term structure");
    if (fix < 0.0) throw DomainError("vol_at: negative fixing time");
    return detail::interpolate_flat(vols.fixing_times(), vols.vols(), fix);
}

}  // namespace mcev
