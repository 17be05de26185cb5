#pragma once

// Deterministic hashing and counter-mode random streams. Everything that needs
// randomness in this codebase derives it from these primitives so that a run
// is reproducible bit-for-bit from its seeds, on any host and worker count.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace fusionrec {

// 64-bit avalanche finalizer (Murmur3 / SplitMix style).
inline constexpr std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ULL;
    x ^= x >> 33;
    return x;
}

inline constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Top 53 bits as a double in [0, 1).
inline constexpr double unit_from_bits(std::uint64_t m) {
    return static_cast<double>(m >> 11) * 0x1.0p-53;
}

// Same mapping shifted to (0, 1]; safe as a log argument.
inline constexpr double unit_from_bits_open(std::uint64_t m) {
    return static_cast<double>((m >> 11) + 1) * 0x1.0p-53;
}

// Node-vector initialization value for (label, dimension, seed), uniform on
// (-1, 1). Pinned to FNV-1a + mix64 so independent implementations agree
// bit-for-bit.
inline double hash_init_value(std::string_view label, std::uint64_t dim_index,
                              std::uint64_t seed) {
    const std::uint64_t h0 = fnv1a64(label);
    const std::uint64_t m = mix64(h0 ^ mix64(seed ^ dim_index));
    return 2.0 * unit_from_bits(m) - 1.0;
}

// Keyed counter word: a chain of mix64 rounds over up to four indices. Used
// wherever a value must be addressable by position (hyperplane coordinates,
// parameter init, shuffles) rather than drawn from a shared sequential state.
inline constexpr std::uint64_t counter_mix(std::uint64_t seed, std::uint64_t a,
                                           std::uint64_t b = 0, std::uint64_t c = 0,
                                           std::uint64_t d = 0) {
    std::uint64_t h = mix64(seed ^ 0x9e3779b97f4a7c15ULL);
    h = mix64(h ^ a);
    h = mix64(h ^ b);
    h = mix64(h ^ c);
    h = mix64(h ^ d);
    return h;
}

// Standard normal via Box-Muller over two counter words.
inline double gaussian_at(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c) {
    const double u1 = unit_from_bits_open(counter_mix(seed, a, b, c, 0));
    const double u2 = unit_from_bits(counter_mix(seed, a, b, c, 1));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Sequential deterministic stream: value(i) = mix64(key ^ i) with an advancing
// counter. State is two words, so it can be persisted and replayed.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t counter = 0)
        : key_(mix64(seed ^ 0x9e3779b97f4a7c15ULL)), counter_(counter) {}

    std::uint64_t next_u64() { return mix64(key_ ^ ++counter_); }

    double next_unit() { return unit_from_bits(next_u64()); }        // [0, 1)
    double next_unit_open() { return unit_from_bits_open(next_u64()); }  // (0, 1]

    double next_gaussian() {
        const double u1 = next_unit_open();
        const double u2 = next_unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    // Marsaglia-Tsang; valid for shape >= 1, boosted below 1.
    double next_gamma(double shape) {
        if (shape < 1.0) {
            const double g = next_gamma(shape + 1.0);
            return g * std::pow(next_unit_open(), 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = next_gaussian();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = next_unit_open();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double next_beta(double alpha, double beta) {
        const double ga = next_gamma(alpha);
        const double gb = next_gamma(beta);
        return ga / (ga + gb);
    }

    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

}  // namespace fusionrec
