// Seeded uniform draws with a fixed bit-level mapping, so results are
// reproducible across standard-library implementations.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace susplab::rng {

/// Uniform double in [0, 1) from the top 53 bits of one engine draw.
inline double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform double in [lo, hi).
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * unit_uniform(rng);
}

/// Standard normal via Box-Muller (two draws per call, no cached spare).
inline double normal(std::mt19937_64& rng) {
    double u1 = unit_uniform(rng);
    while (u1 <= 0.0) u1 = unit_uniform(rng);
    const double u2 = unit_uniform(rng);
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace susplab::rng
