#pragma once

#include <cstdint>
#include <string>

#include "ielre/types.hpp"

namespace ielre {

/// Additive measurement noise. Uniform noise is drawn from a counter-based
/// generator, so the value at step k depends only on (seed, k).
struct NoiseSpec {
    enum class Kind { None, Uniform };
    Kind kind = Kind::None;
    Real amplitude = 0.0;
    std::uint64_t seed = 1;

    static NoiseSpec none() { return {}; }
    static NoiseSpec uniform(Real amplitude, std::uint64_t seed) { return {Kind::Uniform, amplitude, seed}; }
};

namespace detail {

// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace detail

/// Noise value for step `k`: 0 for None, a value in [-a, a] for Uniform.
///
/// The draw is splitmix64(splitmix64(seed) ^ k), whose top 53 bits give
/// u in [0,1); the output is a * (2u - 1).
inline Real make_noise(const NoiseSpec& spec, std::uint64_t k) {
    if (spec.kind == NoiseSpec::Kind::None || spec.amplitude == 0.0) return 0.0;
    const std::uint64_t bits = detail::splitmix64(detail::splitmix64(spec.seed) ^ k);
    const Real u = static_cast<Real>(bits >> 11) * 0x1.0p-53;
    return spec.amplitude * (2.0 * u - 1.0);
}

inline std::string to_string(const NoiseSpec& n) {
    if (n.kind == NoiseSpec::Kind::None) return "none";
    return "uniform";
}

}  // namespace ielre
