#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace runent {

// splitmix64 finalizer, used to derive independent streams from (seed, stream).
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    return std::mt19937_64(mix64(mix64(seed) ^ mix64(~stream)));
}

// Uniform double in [0,1). std::uniform_real_distribution is
// implementation-defined, and outputs here must be reproducible bit-for-bit
// across compilers, so we derive doubles from the raw engine.
inline double unit_double(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0,n), rejection sampled.
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

// Fisher-Yates; std::shuffle is likewise implementation-defined.
template <typename T>
void shuffle_deterministic(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(bounded(rng, i));
        std::swap(v[i - 1], v[j]);
    }
}

// Knuth's Poisson sampler; adequate for the small means used by the
// workload generator.
inline int poisson(std::mt19937_64& rng, double mean) {
    const double limit = std::exp(-mean);
    double p = 1.0;
    int k = 0;
    do {
        ++k;
        p *= unit_double(rng);
    } while (p > limit);
    return k - 1;
}

}  // namespace runent
