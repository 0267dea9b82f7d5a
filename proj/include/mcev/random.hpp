#pragma once

#include <cstdint>

namespace mcev {

// Counter-based uniform stream: the k-th draw of scenario i under a seed is a
// pure function of (seed, i, k), so results do not depend on evaluation order
// or on how scenarios are split across threads.
class CounterUniform {
public:
    explicit constexpr CounterUniform(std::uint64_t seed) noexcept : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

    // Uniform on the open interval (0,1), 53-bit resolution.
    constexpr double operator()(std::uint64_t scenario, std::uint64_t draw = 0) const noexcept {
        const std::uint64_t bits = mix(mix(key_ + scenario * 0x9e3779b97f4a7c15ULL) ^ (draw + 0xbb67ae8584caa73bULL));
        return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
    }

    // SplitMix64 finalizer.
    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t key_;
};

}  // namespace mcev
