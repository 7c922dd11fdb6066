#pragma once

// Portable deterministic RNG. Reports and synthetic corpora must be
// byte-identical across platforms and build configurations, so nothing here
// may depend on std::uniform_int_distribution (whose output is
// implementation-defined). SplitMix64 is the stream-derivation and sampling
// engine throughout.

#include <cstdint>
#include <string_view>

namespace editprog {

struct SplitMix64 {
    std::uint64_t state = 0;

    explicit constexpr SplitMix64(std::uint64_t seed = 0) : state(seed) {}

    constexpr std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Unbiased integer in [0, bound) via rejection sampling.
    std::uint64_t below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t v = next();
        while (v >= limit) v = next();
        return v % bound;
    }

    // Inclusive range [lo, hi].
    std::int64_t between(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(
                        below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    double unit() {  // [0, 1)
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }
};

// FNV-1a, used to fold string identifiers into stream seeds.
constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

// Derives an independent substream seed from a root seed plus mixed labels.
// Used by the perturbation study (per case id / epsilon / trial) and the
// synthetic corpus generator so parallel schedules cannot change results.
constexpr std::uint64_t derive_stream(std::uint64_t root, std::string_view label,
                                      std::uint64_t a = 0, std::uint64_t b = 0) {
    SplitMix64 mix(root ^ fnv1a64(label) ^ (a * 0xA24BAED4963EE407ULL) ^
                   (b * 0x9FB21C651E98DF25ULL));
    return mix.next();
}

}  // namespace editprog
