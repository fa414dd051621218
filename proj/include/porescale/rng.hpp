#pragma once

#include <cstdint>

namespace porescale {

/// Counter-based uniform generator. Each (seed, counter) pair maps to one
/// draw, so concurrent evaluation order cannot change the stream.
namespace rng {

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t keyed(std::uint64_t seed, std::uint64_t counter) {
    return mix64(mix64(seed) ^ counter * 0xd6e8feb86659fd93ULL);
}

/// Uniform on [0, 1) with 53-bit resolution.
inline double uniform01(std::uint64_t seed, std::uint64_t counter) {
    return static_cast<double>(keyed(seed, counter) >> 11) * 0x1.0p-53;
}

/// Uniform on [-1, 1].
inline double uniform_sym(std::uint64_t seed, std::uint64_t counter) {
    return 2.0 * uniform01(seed, counter) - 1.0;
}

} // namespace rng
} // namespace porescale
