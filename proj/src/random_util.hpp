#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace cephreg::detail {

// mt19937_64 seeded from (seed, tag) so independent streams can be derived
// from one user seed.
inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t tag) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(tag & 0xffffffffu), static_cast<std::uint32_t>(tag >> 32)};
    return std::mt19937_64(seq);
}

// Uniform in [0,1) with 53 random bits. The standard distributions are not
// specified bit-for-bit, so sampling goes through these helpers.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

// Box-Muller standard normal.
inline double normal01(std::mt19937_64& rng) {
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace cephreg::detail
