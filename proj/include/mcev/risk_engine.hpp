#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mcev/errors.hpp"
#include "mcev/projection.hpp"

namespace mcev {

/// Risk-aversion spread as a function of relative PVFP volatility:
/// spread(v) = a * ln(b * v + c), with c = 1 so that zero risk costs nothing.
struct SpreadFunction {
    double a = 0.0;
    double b = 0.0;
    double c = 1.0;

    double operator()(double rel_vol) const {
        detail::require(rel_vol >= 0.0, "spread: relative volatility must be nonnegative");
        return c == 1.0 ? a * std::log1p(b * rel_vol) : a * std::log(b * rel_vol + c);
    }
};

inline double spread_for(const SpreadFunction& fn, double rel_vol) { return fn(rel_vol); }

struct SpreadPoint {
    double rel_vol = 0.0;
    double spread = 0.0;
};

/// Fits a and b through two (relative vol, spread) points plus the origin.
///
/// The ratio ln(1 + b v2) / ln(1 + b v1) is monotone in b, so b is found by
/// bisection (geometric, since the bracket spans fifteen decades) and a
/// follows from the first point.
inline SpreadFunction calibrate_spread(SpreadPoint p1, SpreadPoint p2, double b_lo = 1e-9, double b_hi = 1e6) {
    detail::require(p1.rel_vol > 0.0 && p1.spread > 0.0 && p2.rel_vol > 0.0 && p2.spread > 0.0,
                    "calibrate_spread: points must have positive coordinates");
    detail::require(p1.rel_vol != p2.rel_vol, "calibrate_spread: points must have distinct volatilities");
    if (p1.rel_vol > p2.rel_vol) std::swap(p1, p2);

    const double target = p2.spread / p1.spread;
    auto residual = [&](double b) { return std::log1p(b * p2.rel_vol) / std::log1p(b * p1.rel_vol) - target; };

    double f_lo = residual(b_lo);
    const double f_hi = residual(b_hi);
    if (f_lo * f_hi > 0.0) {
        throw CalibrationError("calibrate_spread: no root in the b bracket (spread ratio " + std::to_string(target) +
                               " must lie strictly between 1 and the volatility ratio)");
    }

    double lo = b_lo, hi = b_hi;
    double b = std::sqrt(lo * hi);
    for (int iter = 0; iter < 400; ++iter) {
        b = std::sqrt(lo * hi);
        const double f = residual(b);
        if (f == 0.0 || hi / lo - 1.0 < 1e-15) break;
        if ((f > 0.0) == (f_lo > 0.0)) {
            lo = b;
            f_lo = f;
        } else {
            hi = b;
        }
    }
    if (!(std::fabs(residual(b)) < 1e-10)) throw CalibrationError("calibrate_spread: bisection did not converge");

    return {p1.spread / std::log1p(b * p1.rel_vol), b, 1.0};
}

struct PvfpMoments {
    double mean = 0.0;
    double vol = 0.0;  // sample standard deviation
};

inline PvfpMoments pvfp_stats(std::span<const double> samples) {
    detail::require(samples.size() >= 2, "pvfp_stats: need at least two samples");
    double sum = 0.0;
    for (double s : samples) sum += s;
    const double mean = sum / static_cast<double>(samples.size());
    double ss = 0.0;
    for (double s : samples) ss += (s - mean) * (s - mean);
    return {mean, std::sqrt(ss / static_cast<double>(samples.size() - 1))};
}

inline PvfpMoments pvfp_stats(std::span<const PvfpSample> samples) {
    std::vector<double> values(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) values[i] = samples[i].pvfp;
    return pvfp_stats(std::span<const double>(values));
}

// Value lost to underwriting risk: PVFP_TSR - E[PVFP_TSR] * PVFP_{TSR+spread} / PVFP_TSR.
inline double underwriting_risk_cost(double pvfp_tsr, double mean_pvfp, double pvfp_spread) {
    if (pvfp_tsr == 0.0) throw DomainError("underwriting_risk_cost: PVFP at the risk-free rate is zero");
    return pvfp_tsr - mean_pvfp * (pvfp_spread / pvfp_tsr);
}

struct PvfpStatistics {
    std::string portfolio;
    double mean = 0.0;
    double vol = 0.0;
    double rel_vol = 0.0;
    double spread = 0.0;
    double pvfp_tsr = 0.0;
    double pvfp_spread = 0.0;
    double cur = 0.0;
};

// Relative volatility Vol/E; zero when the mean is not positive.
inline double relative_volatility(const PvfpMoments& m) { return m.mean > 0.0 ? m.vol / m.mean : 0.0; }

/// Completes the statistics when PVFP(TSR + spread) is already known
/// (replay of pre-computed figures).
inline PvfpStatistics risk_statistics(std::string portfolio, const PvfpMoments& moments, double pvfp_tsr,
                                      double pvfp_spread, const SpreadFunction& fn) {
    PvfpStatistics s;
    s.portfolio = std::move(portfolio);
    s.mean = moments.mean;
    s.vol = moments.vol;
    s.rel_vol = relative_volatility(moments);
    s.spread = spread_for(fn, s.rel_vol);
    s.pvfp_tsr = pvfp_tsr;
    s.pvfp_spread = pvfp_spread;
    s.cur = underwriting_risk_cost(pvfp_tsr, s.mean, pvfp_spread);
    return s;
}

/// Full chain for a simulated portfolio: moments of the stochastic PVFPs, the
/// spread they imply, and the deterministic PVFP at TSR and TSR + spread.
inline PvfpStatistics risk_statistics(const PortfolioSpec& spec, std::span<const PvfpSample> samples,
                                      const ZeroCurve& curve, const SpreadFunction& fn) {
    const PvfpMoments moments = pvfp_stats(samples);
    const double spread = spread_for(fn, relative_volatility(moments));
    return risk_statistics(spec.id, moments, deterministic_pvfp(spec, curve),
                           deterministic_pvfp(spec, curve, spread), fn);
}

struct RiskTotals {
    double pvfp_tsr = 0.0;
    double cur = 0.0;
};

inline RiskTotals aggregate(std::span<const PvfpStatistics> reports) {
    detail::require(!reports.empty(), "aggregate: no portfolios");
    RiskTotals t;
    for (const auto& r : reports) {
        t.pvfp_tsr += r.pvfp_tsr;
        t.cur += r.cur;
    }
    return t;
}

}  // namespace mcev
