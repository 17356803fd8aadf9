#pragma once

#include <cstdint>
#include <cmath>

namespace ewm {

// Counter-based generator: every variate is a pure function of
// (seed, stream, counter), so ensembles are reproducible and
// order-independent under parallel generation.
namespace rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter, std::uint64_t lane) {
    std::uint64_t x = splitmix64(seed ^ 0xA0761D6478BD642FULL);
    x = splitmix64(x ^ stream);
    x = splitmix64(x ^ counter);
    x = splitmix64(x ^ lane);
    return x;
}

// Uniform in the open interval (0, 1).
inline double to_unit(std::uint64_t x) {
    return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

inline double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter, std::uint64_t lane = 0) {
    return to_unit(mix(seed, stream, counter, lane));
}

/// Standard normal keyed by (seed, stream, counter); Box-Muller.
inline double normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    double u1 = to_unit(mix(seed, stream, counter, 0));
    double u2 = to_unit(mix(seed, stream, counter, 1));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

} // namespace rng
} // namespace ewm
