#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "mcev/errors.hpp"
#include "mcev/normal.hpp"
#include "mcev/parallel.hpp"
#include "mcev/random.hpp"

namespace mcev {

enum class RiskLevel { Strong = 0, Moderate = 1, Weak = 2 };

enum class AgeBucket { UnderOneYear = 0, UnderFourYears = 1, FourYearsOrMore = 2 };

enum class Criterion { Homogeneity = 0, TechnicalBasesQuality, Concentration, MoralHazard, Litigation };

inline constexpr std::size_t criterion_count = 5;

inline constexpr std::array<std::string_view, criterion_count> criterion_names{
    "homogeneity", "technical_bases_quality", "concentration", "moral_hazard", "litigation"};

inline constexpr std::array<std::string_view, 3> risk_level_names{"strong", "moderate", "weak"};

inline constexpr std::array<std::string_view, 3> age_bucket_names{"under_1y", "under_4y", "4y_plus"};

inline AgeBucket age_bucket(double portfolio_age) {
    detail::require(portfolio_age >= 0.0, "age_bucket: negative portfolio age");
    if (portfolio_age < 1.0) return AgeBucket::UnderOneYear;
    if (portfolio_age < 4.0) return AgeBucket::UnderFourYears;
    return AgeBucket::FourYearsOrMore;
}

/// Qualitative description of a portfolio's loss-ratio volatility: its age and
/// a risk level for each of the five criteria.
struct RiskCriteria {
    double portfolio_age = 0.0;
    std::array<RiskLevel, criterion_count> ratings{};

    RiskLevel rating(Criterion c) const { return ratings[static_cast<std::size_t>(c)]; }
};

/// Multiplicative weight per grid cell. Cells left unset stay NaN and are
/// reported as configuration errors when a score touches them.
struct WeightMatrix {
    static constexpr double unset = std::numeric_limits<double>::quiet_NaN();

    std::array<double, 3> age{unset, unset, unset};
    std::array<std::array<double, 3>, criterion_count> criteria{{{unset, unset, unset},
                                                                 {unset, unset, unset},
                                                                 {unset, unset, unset},
                                                                 {unset, unset, unset},
                                                                 {unset, unset, unset}}};

    double& cell(Criterion c, RiskLevel level) {
        return criteria[static_cast<std::size_t>(c)][static_cast<std::size_t>(level)];
    }
    double cell(Criterion c, RiskLevel level) const {
        return criteria[static_cast<std::size_t>(c)][static_cast<std::size_t>(level)];
    }

    static WeightMatrix uniform(double value) {
        WeightMatrix w;
        w.age.fill(value);
        for (auto& row : w.criteria) row.fill(value);
        return w;
    }
};

namespace detail {

inline double checked_weight(double w, std::string_view row, std::string_view col) {
    if (!std::isfinite(w) || !(w > 0.0)) {
        throw ConfigError("weight matrix: missing or non-positive cell " + std::string(row) + "/" + std::string(col));
    }
    return w;
}

}  // namespace detail

// Coefficient of variation of S/P as the product of the six selected weights.
inline double volatility_score(const RiskCriteria& criteria, const WeightMatrix& weights) {
    const auto bucket = static_cast<std::size_t>(age_bucket(criteria.portfolio_age));
    double vol = detail::checked_weight(weights.age[bucket], "portfolio_age", age_bucket_names[bucket]);
    for (std::size_t c = 0; c < criterion_count; ++c) {
        const auto level = static_cast<std::size_t>(criteria.ratings[c]);
        vol *= detail::checked_weight(weights.criteria[c][level], criterion_names[c], risk_level_names[level]);
    }
    return vol;
}

/// Parameters of LN(mu, sigma) for the year-1 loss ratio.
struct LognormalParams {
    double mu = 0.0;
    double sigma = 0.0;

    double mean() const { return std::exp(mu + 0.5 * sigma * sigma); }
    double median() const { return std::exp(mu); }
    double coefficient_of_variation() const { return std::sqrt(std::expm1(sigma * sigma)); }
};

// Moment inversion from the mean and the coefficient of variation of S/P.
inline LognormalParams lognormal_params(double mean_sp, double vol_sp) {
    detail::require(mean_sp > 0.0, "lognormal_params: mean loss ratio must be positive");
    detail::require(vol_sp >= 0.0, "lognormal_params: negative volatility");
    const double sigma = std::sqrt(std::log1p(vol_sp * vol_sp));
    return {std::log(mean_sp) - 0.5 * sigma * sigma, sigma};
}

// Same inversion when sigma is supplied directly.
inline LognormalParams lognormal_params_from_sigma(double mean_sp, double sigma) {
    detail::require(mean_sp > 0.0, "lognormal_params: mean loss ratio must be positive");
    detail::require(sigma >= 0.0, "lognormal_params: negative sigma");
    return {std::log(mean_sp) - 0.5 * sigma * sigma, sigma};
}

inline double lognormal_quantile(const LognormalParams& p, double u) { return std::exp(norm_inv(u) * p.sigma + p.mu); }

// S/P_i(1) = exp(norm_inv(u_i) * sigma + mu), u_i from the counter stream.
inline std::vector<double> draw_initial_ratios(const LognormalParams& params, std::size_t n, std::uint64_t seed,
                                               unsigned threads = 1) {
    detail::require(n >= 1, "draw_initial_ratios: need at least one draw");
    const CounterUniform uniform(seed);
    std::vector<double> out(n);
    parallel_for(n, threads, [&](std::size_t i) { out[i] = lognormal_quantile(params, uniform(i)); });
    return out;
}

struct ReversionPath {
    std::vector<double> values;
    std::size_t floored = 0;  // years clamped at zero
};

// path[t] = chronicle[t] + (sp1 - chronicle[0]) * nu^t for t = 0..H-1,
// floored at zero.
inline ReversionPath mean_reversion_path(double sp1, std::span<const double> chronicle, double reversion_speed) {
    detail::require(!chronicle.empty(), "mean_reversion_path: empty chronicle");
    detail::require(reversion_speed > 0.0 && reversion_speed <= 1.0, "mean_reversion_path: speed must lie in (0,1]");
    ReversionPath out;
    out.values.resize(chronicle.size());
    const double gap = sp1 - chronicle[0];
    double decay = 1.0;
    for (std::size_t t = 0; t < chronicle.size(); ++t) {
        const double v = t == 0 ? sp1 : chronicle[t] + gap * decay;
        if (v < 0.0) {
            out.values[t] = 0.0;
            ++out.floored;
        } else {
            out.values[t] = v;
        }
        decay *= reversion_speed;
    }
    return out;
}

struct ScenarioInputs {
    LognormalParams params;
    std::vector<double> chronicle;  // E[S/P(t)], t = 1..H
    double reversion_speed = 0.8;
};

/// N x H matrix of simulated loss ratios, row-major, one row per scenario.
struct LossScenarioSet {
    std::size_t scenario_count = 0;
    std::size_t horizon = 0;
    std::vector<double> values;
    std::uint64_t seed = 0;
    std::vector<double> chronicle;
    double reversion_speed = 0.8;
    std::size_t floor_events = 0;

    std::span<const double> row(std::size_t i) const { return {values.data() + i * horizon, horizon}; }
    double at(std::size_t i, std::size_t t) const { return values[i * horizon + t]; }

    std::vector<double> column(std::size_t t) const {
        std::vector<double> col(scenario_count);
        for (std::size_t i = 0; i < scenario_count; ++i) col[i] = at(i, t);
        return col;
    }
};

inline LossScenarioSet generate_scenarios(const ScenarioInputs& inputs, std::size_t n, std::uint64_t seed,
                                          unsigned threads = 1) {
    detail::require(n >= 1, "generate_scenarios: need at least one scenario");
    detail::require(!inputs.chronicle.empty(), "generate_scenarios: empty chronicle");
    for (double c : inputs.chronicle) detail::require(c > 0.0, "generate_scenarios: chronicle values must be positive");

    LossScenarioSet set;
    set.scenario_count = n;
    set.horizon = inputs.chronicle.size();
    set.values.resize(n * set.horizon);
    set.seed = seed;
    set.chronicle = inputs.chronicle;
    set.reversion_speed = inputs.reversion_speed;

    const CounterUniform uniform(seed);
    std::atomic<std::size_t> floors{0};
    parallel_for(n, threads, [&](std::size_t i) {
        const double sp1 = lognormal_quantile(inputs.params, uniform(i));
        const ReversionPath path = mean_reversion_path(sp1, inputs.chronicle, inputs.reversion_speed);
        std::copy(path.values.begin(), path.values.end(), set.values.begin() + static_cast<std::ptrdiff_t>(i * set.horizon));
        floors.fetch_add(path.floored, std::memory_order_relaxed);
    });
    set.floor_events = floors.load();
    return set;
}

struct HistogramBin {
    double lower = 0.0;
    double upper = 0.0;
    std::size_t count = 0;
};

// Counts per left-closed bin [k*w, (k+1)*w), contiguous from the lower of
// bin 0 and the smallest occupied bin up to the largest occupied bin.
inline std::vector<HistogramBin> histogram(std::span<const double> values, double bin_width) {
    detail::require(bin_width > 0.0, "histogram: bin width must be positive");
    if (values.empty()) return {};

    // Ratios within 1e-9 of an integer count as exact boundaries, so a value
    // printed as 0.3 lands in [0.3, 0.4) with w = 0.1.
    auto bin_of = [bin_width](double v) {
        const double x = v / bin_width;
        const double nearest = std::round(x);
        return static_cast<long long>(std::fabs(x - nearest) < 1e-9 ? nearest : std::floor(x));
    };
    // Bin edges as k / (1/w) when 1/w is an integer, which prints 0.3 rather than 0.30000000000000004.
    const double inverse = 1.0 / bin_width;
    const bool integral_inverse = std::fabs(inverse - std::round(inverse)) < 1e-9;
    auto edge = [&](long long k) {
        return integral_inverse ? static_cast<double>(k) / std::round(inverse) : static_cast<double>(k) * bin_width;
    };

    long long lo = 0, hi = 0;
    std::vector<long long> bins(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        detail::require(std::isfinite(values[i]), "histogram: non-finite value");
        bins[i] = bin_of(values[i]);
        lo = std::min(lo, bins[i]);
        hi = std::max(hi, bins[i]);
    }
    std::vector<HistogramBin> out(static_cast<std::size_t>(hi - lo + 1));
    for (std::size_t b = 0; b < out.size(); ++b) {
        const auto k = lo + static_cast<long long>(b);
        out[b].lower = edge(k);
        out[b].upper = edge(k + 1);
    }
    for (long long k : bins) ++out[static_cast<std::size_t>(k - lo)].count;
    return out;
}

// Linear-interpolation sample quantile (Hyndman-Fan type 7) of sorted data.
inline double sorted_quantile(std::span<const double> sorted, double p) {
    detail::require(!sorted.empty(), "quantile: empty sample");
    detail::require(p >= 0.0 && p <= 1.0, "quantile: probability must lie in [0,1]");
    const double h = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double quantile(std::vector<double> sample, double p) {
    std::sort(sample.begin(), sample.end());
    return sorted_quantile(sample, p);
}

inline constexpr std::array<double, 5> fan_chart_levels{0.01, 0.25, 0.50, 0.75, 0.99};

struct FanChartRow {
    std::size_t year = 0;
    std::array<double, 5> quantiles{};
};

// Per-year q01/q25/q50/q75/q99 of the scenario matrix.
inline std::vector<FanChartRow> fan_chart(const LossScenarioSet& set) {
    std::vector<FanChartRow> rows(set.horizon);
    for (std::size_t t = 0; t < set.horizon; ++t) {
        std::vector<double> col = set.column(t);
        std::sort(col.begin(), col.end());
        rows[t].year = t + 1;
        for (std::size_t q = 0; q < fan_chart_levels.size(); ++q) rows[t].quantiles[q] = sorted_quantile(col, fan_chart_levels[q]);
    }
    return rows;
}

}  // namespace mcev
