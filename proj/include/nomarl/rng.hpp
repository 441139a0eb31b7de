#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace nomarl {

using Rng = std::mt19937_64;

// Streams keep independent RNG consumers (instance sampling vs. agent
// decisions) from perturbing each other across scenarios.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32)};
    return Rng(seq);
}

// U[0,1) with 53-bit resolution.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform index in {0,...,n-1} via multiply-shift; bias is O(n/2^64).
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(rng()) * static_cast<unsigned __int128>(n)) >> 64);
}

// Uniform integer in [lo, hi] inclusive.
inline int uniform_int(Rng& rng, int lo, int hi) {
    return lo + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(hi - lo + 1)));
}

template <class T>
const T& pick(Rng& rng, const std::vector<T>& values) {
    return values[uniform_index(rng, values.size())];
}

}  // namespace nomarl
