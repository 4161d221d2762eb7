#include "tessera/tiling.hpp"

#include <algorithm>
#include <atomic>
#include <sstream>
#include <stdexcept>

#include "tessera/parallel.hpp"

namespace tessera {

namespace {

Index segment_right(const TilePlan& plan, int axis, Index k) {
    return k == plan.segments[axis] - 1 ? plan.extent[axis] : (k + 1) * plan.tile[axis];
}

}  // namespace

AxisRange axis_range(const TilePlan& plan, int axis, PieceKind kind, Index index, int step) {
    const Index r = plan.radius;
    const Index shift = static_cast<Index>(step) * r;
    if (kind == PieceKind::upright) {
        // Left edge is always an anchor; the domain's right edge is not.
        const Index lo = index * plan.tile[axis] + shift;
        Index hi = segment_right(plan, axis, index);
        if (index < plan.segments[axis] - 1) hi -= shift;
        return {lo, std::max(lo, hi)};
    }
    const Index anchor = index * plan.tile[axis];
    return {std::max<Index>(0, anchor - shift), std::min(plan.extent[axis], anchor + shift)};
}

Box tile_range(const TilePlan& plan, const Tile& t, int step) {
    Box b;
    for (int a = 0; a < plan.dims; ++a) {
        const AxisRange r = axis_range(plan, a, t.kind[a], t.index[a], step);
        b.lo[a] = r.lo;
        b.hi[a] = r.hi;
    }
    for (int a = plan.dims; a < kMaxDims; ++a) {
        b.lo[a] = 0;
        b.hi[a] = 1;
    }
    return b;
}

TilePlan plan_tiles(const std::vector<Index>& extent, const std::vector<Index>& spatial_tile,
                    int tb, int radius) {
    if (extent.empty() || extent.size() > kMaxDims)
        throw std::invalid_argument("extent must cover 1 to 3 axes");
    if (spatial_tile.size() != extent.size())
        throw std::invalid_argument("tile widths must match extent dimensionality");
    if (tb < 1) throw std::invalid_argument("temporal tile height must be >= 1");
    if (radius < 1) throw std::invalid_argument("radius must be >= 1");

    TilePlan plan;
    plan.dims = static_cast<int>(extent.size());
    plan.tb = tb;
    plan.radius = radius;
    for (int a = 0; a < plan.dims; ++a) {
        plan.extent[a] = extent[a];
        plan.tile[a] = spatial_tile[a];
        if (extent[a] < 1) throw std::invalid_argument("extent must be positive");
        if (spatial_tile[a] < 2 * static_cast<Index>(radius) * tb) {
            std::ostringstream os;
            os << "tile width " << spatial_tile[a] << " on axis " << a
               << " shrinks to empty before " << tb << " steps: need >= " << 2 * radius * tb;
            throw std::invalid_argument(os.str());
        }
        plan.segments[a] = static_cast<int>(std::max<Index>(1, extent[a] / spatial_tile[a]));
    }
    for (int a = plan.dims; a < kMaxDims; ++a) {
        plan.extent[a] = 1;
        plan.tile[a] = 1;
        plan.segments[a] = 1;
    }

    // Every (kind, index) product over the axes; one inverted anchor per
    // segment, sitting at the segment's left edge.
    Tile t{};
    auto emit = [&](auto&& self, int axis) -> void {
        if (axis == plan.dims) {
            t.wave = 0;
            for (int a = 0; a < plan.dims; ++a) t.wave += t.kind[a] == PieceKind::inverted;
            for (int a = 0; a < plan.dims; ++a) t.anchor[a] = t.index[a] * plan.tile[a];
            (t.wave == 0 ? plan.phase_a : plan.phase_b).push_back(t);
            return;
        }
        for (int kind = 0; kind < 2; ++kind) {
            t.kind[axis] = static_cast<PieceKind>(kind);
            for (Index k = 0; k < plan.segments[axis]; ++k) {
                t.index[axis] = k;
                self(self, axis + 1);
            }
        }
    };
    emit(emit, 0);
    std::stable_sort(plan.phase_b.begin(), plan.phase_b.end(),
                     [](const Tile& a, const Tile& b) { return a.wave < b.wave; });
    return plan;
}

std::int32_t CoverageCount::min_count() const {
    return counts.empty() ? 0 : *std::min_element(counts.begin(), counts.end());
}

std::int32_t CoverageCount::max_count() const {
    return counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
}

CoverageCount count_coverage(const TilePlan& plan) {
    CoverageCount cov;
    cov.extent = plan.extent;
    cov.dims = plan.dims;
    cov.tb = plan.tb;
    Index cells = 1;
    for (int a = 0; a < plan.dims; ++a) cells *= plan.extent[a];
    cov.counts.assign(static_cast<size_t>(cells * plan.tb), 0);

    const Index sy = plan.dims > 2 ? plan.extent[2] : 1;
    const Index sx = plan.dims > 1 ? plan.extent[1] * sy : 1;
    auto tally = [&](const Tile& t) {
        for (int s = 0; s < plan.tb; ++s) {
            const Box b = tile_range(plan, t, s);
            for (Index i = b.lo[0]; i < b.hi[0]; ++i)
                for (Index j = b.lo[1]; j < b.hi[1]; ++j)
                    for (Index k = b.lo[2]; k < b.hi[2]; ++k)
                        ++cov.counts[static_cast<size_t>(s * cells + i * sx + j * sy + k)];
        }
    };
    for (const Tile& t : plan.phase_a) tally(t);
    for (const Tile& t : plan.phase_b) tally(t);
    return cov;
}

void run_tessellated(Grid& g, const StencilKernel& k, Index steps, const TilePlan& plan,
                     int threads, TessellateStats* stats) {
    check_applicable(g, k);
    if (k.radius() != plan.radius) throw std::invalid_argument("plan radius differs from kernel radius");
    if (plan.dims != g.dims()) throw std::invalid_argument("plan dimensionality differs from grid");
    for (int a = 0; a < g.dims(); ++a)
        if (plan.extent[a] != g.extent(a))
            throw std::invalid_argument("plan extent differs from grid extent");
    if (steps < 0) throw std::invalid_argument("negative step count");

    const Index rounds = steps / plan.tb;
    const Index trailing = steps % plan.tb;
    std::atomic<Index> updates{0};

    auto run_tiles = [&](const std::vector<Tile>& tiles, size_t begin, size_t end) {
        parallel_for(static_cast<Index>(end - begin), threads, [&](Index idx) {
            const Tile& t = tiles[begin + static_cast<size_t>(idx)];
            Index local = 0;
            const int p0 = g.parity();
            for (int s = 0; s < plan.tb; ++s)
                local += apply_box(g, k, tile_range(plan, t, s), (p0 + s) & 1);
            updates.fetch_add(local, std::memory_order_relaxed);
        });
    };

    for (Index round = 0; round < rounds; ++round) {
        run_tiles(plan.phase_a, 0, plan.phase_a.size());
        // Phase B in dependency waves: all tiles with w inverted axes read
        // only phase A, waves < w, and their own earlier steps.
        size_t lo = 0;
        while (lo < plan.phase_b.size()) {
            size_t hi = lo;
            while (hi < plan.phase_b.size() && plan.phase_b[hi].wave == plan.phase_b[lo].wave) ++hi;
            run_tiles(plan.phase_b, lo, hi);
            lo = hi;
        }
        for (int s = 0; s < plan.tb; ++s) g.flip_parity();
    }
    for (Index s = 0; s < trailing; ++s) {
        updates.fetch_add(apply_box(g, k, full_interior(g), g.parity()), std::memory_order_relaxed);
        g.flip_parity();
    }
    if (stats) {
        stats->point_updates = updates.load();
        stats->rounds = rounds;
        stats->trailing_steps = trailing;
    }
}

}  // namespace tessera
