#pragma once

#include <cmath>
#include <cstdint>

namespace fbsde {

// Counter-based Gaussian sampling: each draw is a pure function of
// (seed, a, b, c), so path loops can run in any order or in parallel and
// still reproduce bitwise.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                             std::uint64_t c) {
    std::uint64_t k = splitmix64(seed);
    k = splitmix64(k ^ (a * 0xd1342543de82ef95ULL));
    k = splitmix64(k ^ (b * 0xaf251af3b0f025b5ULL));
    k = splitmix64(k ^ (c * 0x9e3779b97f4a7c15ULL));
    return k;
}

inline double to_unit(std::uint64_t x) {
    // (0, 1], 53-bit resolution; never 0 so log() below is safe
    return (static_cast<double>(x >> 11) + 1.0) * 0x1p-53;
}

/// Standard normal draw keyed on (seed, a, b, c), via Box-Muller.
inline double normal_draw(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c) {
    const std::uint64_t k = mix_key(seed, a, b, c);
    const double u1 = to_unit(k);
    const double u2 = to_unit(splitmix64(k ^ 0x2545f4914f6cdd1dULL));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

/// Uniform draw in [lo, hi) keyed on (seed, a, b, c).
inline double uniform_draw(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                           std::uint64_t c, double lo, double hi) {
    const std::uint64_t k = mix_key(seed, a, b, c);
    return lo + (hi - lo) * (static_cast<double>(k >> 11) * 0x1p-53);
}

}  // namespace fbsde
