#pragma once

#include <cstdint>
#include <random>

#include "tessera/grid.hpp"

namespace tessera {

/// Uniform [0,1) from the top 53 bits of the generator output. Pinned
/// explicitly (not std::uniform_real_distribution) so seeded fields are
/// bit-identical across standard libraries, which golden files rely on.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Seeds the interior with uniform values in [lo, hi); halo stays as-is.
template <typename T>
void fill_random(BasicGrid<T>& g, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    g.for_each_interior([&](Index i, Index j, Index k) {
        g.set_both(i, j, k, static_cast<T>(lo + (hi - lo) * uniform01(rng)));
    });
}

}  // namespace tessera
