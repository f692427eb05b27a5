#pragma once

// Counter-based random source: every draw is a pure function of
// (seed, session, period, agent, stream), so draws do not depend on the
// order in which sessions or agents are visited.

#include <cstdint>

namespace bubblemarket {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class DrawKey {
public:
    constexpr DrawKey(std::uint64_t seed, std::uint64_t session, std::uint64_t period, std::uint64_t agent)
        : key_(mix64(mix64(mix64(mix64(seed) ^ session) ^ period) ^ agent)) {}

    [[nodiscard]] constexpr std::uint64_t bits(std::uint64_t stream) const { return mix64(key_ ^ mix64(stream)); }

    /// Uniform on [0, 1) with 53 random bits.
    [[nodiscard]] constexpr double uniform(std::uint64_t stream) const {
        return static_cast<double>(bits(stream) >> 11) * 0x1.0p-53;
    }

    [[nodiscard]] constexpr bool bernoulli(std::uint64_t stream, double p) const { return uniform(stream) < p; }

private:
    std::uint64_t key_;
};

}  // namespace bubblemarket
