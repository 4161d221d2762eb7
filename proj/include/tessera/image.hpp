#pragma once

#include <string>

#include "tessera/grid.hpp"

namespace tessera {

/// 16-bit binary PGM (P5, big-endian samples) of a 2-D grid's interior,
/// mapping [lo, hi] linearly onto [0, 65535] with clamping.
void write_pgm16(const std::string& path, const Grid& g, double lo, double hi);

/// Binary PPM (P6) diverging difference map of b - a: red for positive
/// differences, green for zero, blue for negative; intensity scaled by
/// the largest |difference| (or `scale` if positive).
template <typename T>
void write_diff_ppm(const std::string& path, const Grid& a, const BasicGrid<T>& b,
                    double scale = 0.0);

}  // namespace tessera
