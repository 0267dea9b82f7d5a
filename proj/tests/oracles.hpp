#pragma once

// Brute-force references used by the unit and acceptance suites. They share no
// code path with the library under test.

#include <cmath>
#include <cstdint>
#include <random>

namespace oracle {

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

// Risk-neutral simulation of a caplet: F_T = F exp(sigma sqrt(T) Z - sigma^2 T / 2).
inline McEstimate caplet_monte_carlo(double notional, double df, double fwd, double strike, double vol, double t_fix,
                                     double accrual, std::size_t draws, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sd = vol * std::sqrt(t_fix);
    const double scale = notional * accrual * df;
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < draws; ++i) {
        const double ft = fwd * std::exp(sd * normal(rng) - 0.5 * sd * sd);
        const double payoff = scale * std::max(ft - strike, 0.0);
        sum += payoff;
        sum_sq += payoff * payoff;
    }
    const double n = static_cast<double>(draws);
    const double mean = sum / n;
    const double var = (sum_sq - n * mean * mean) / (n - 1.0);
    return {mean, std::sqrt(std::max(var, 0.0) / n)};
}

}  // namespace oracle
