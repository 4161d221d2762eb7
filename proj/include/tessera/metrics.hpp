#pragma once

#include <cstdint>
#include <span>

#include "tessera/grid.hpp"

namespace tessera {

/// Arithmetic throughput report: point updates per second.
struct RateReport {
    Index points_per_step = 0;
    Index steps = 0;
    double elapsed_seconds = 0.0;
    double stencils_per_second = 0.0;
};

/// stencils/s = Nx*Ny*Nz*T / time. Throws on non-positive elapsed time.
RateReport stencils_per_second(std::span<const Index> extent, Index steps, double elapsed_seconds);

/// Max per-point |a-b| scaled by the reference field's max magnitude
/// (floored at 1 so near-zero fields compare absolutely). Interior only.
double max_rel_deviation(const Grid& a, const Grid& reference);

double max_abs(const Grid& g);

}  // namespace tessera
