#include "tessera/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace tessera {

RateReport stencils_per_second(std::span<const Index> extent, Index steps,
                               double elapsed_seconds) {
    if (!(elapsed_seconds > 0.0))
        throw std::invalid_argument("elapsed time must be positive");
    RateReport r;
    r.points_per_step = 1;
    for (Index e : extent) r.points_per_step *= e;
    r.steps = steps;
    r.elapsed_seconds = elapsed_seconds;
    r.stencils_per_second =
        static_cast<double>(r.points_per_step) * static_cast<double>(steps) / elapsed_seconds;
    return r;
}

double max_abs(const Grid& g) {
    double m = 0.0;
    g.for_each_interior([&](Index i, Index j, Index k) { m = std::max(m, std::fabs(g.at(i, j, k))); });
    return m;
}

double max_rel_deviation(const Grid& a, const Grid& reference) {
    if (a.dims() != reference.dims()) throw std::invalid_argument("grid dimensionality mismatch");
    for (int ax = 0; ax < a.dims(); ++ax)
        if (a.extent(ax) != reference.extent(ax))
            throw std::invalid_argument("grid extent mismatch");
    const double scale = std::max(1.0, max_abs(reference));
    double dev = 0.0;
    reference.for_each_interior([&](Index i, Index j, Index k) {
        dev = std::max(dev, std::fabs(a.at(i, j, k) - reference.at(i, j, k)));
    });
    return dev / scale;
}

}  // namespace tessera
