#pragma once

#include <cstdint>
#include <vector>

#include "tessera/grid.hpp"
#include "tessera/kernel.hpp"
#include "tessera/naive.hpp"

namespace tessera {

/// Per-axis piece of a space-time tile. An upright piece is a base
/// segment that loses `radius` cells per step from each side facing an
/// inverted anchor; an inverted piece grows from its anchor at the same
/// rate, consuming what the uprights release.
enum class PieceKind : std::uint8_t { upright, inverted };

struct Tile {
    std::array<PieceKind, kMaxDims> kind{};
    Coords index{};   // per-axis segment / anchor index
    Coords anchor{};  // per-axis anchor position (segment left edge)
    int wave = 0;     // number of inverted axes; 0 means phase A
};

/// Two-phase tessellation of (space x Tb steps). Phase A holds the
/// upright product tiles; phase B holds every tile with at least one
/// inverted axis, ordered by wave (1..dims). Within a wave, tiles touch
/// pairwise disjoint cells at every step and read only data finalized by
/// earlier waves/phases, so a wave may run fully concurrently. Waves are
/// separated by barriers; so are the two phases and successive rounds.
struct TilePlan {
    int dims = 0;
    Coords extent{};
    Coords tile{};    // base spatial tile width per axis
    int tb = 1;       // temporal tile height in steps
    int radius = 1;
    std::array<int, kMaxDims> segments{};  // upright segment count per axis
    std::vector<Tile> phase_a;
    std::vector<Tile> phase_b;
};

struct AxisRange {
    Index lo = 0;
    Index hi = 0;
    bool empty() const { return lo >= hi; }
};

/// Cells owned on `axis` by a piece at 0-based step `step` of a round.
AxisRange axis_range(const TilePlan& plan, int axis, PieceKind kind, Index index, int step);

/// Owned cell box of a tile at a step; may be empty (inverted pieces own
/// nothing at step 0).
Box tile_range(const TilePlan& plan, const Tile& t, int step);

/// Plans the two-phase tessellation. Requires tile >= 2*radius*tb per
/// axis so upright tiles cannot shrink to nothing before tb steps.
TilePlan plan_tiles(const std::vector<Index>& extent, const std::vector<Index>& spatial_tile,
                    int tb, int radius);

/// Ownership counts per (cell, step), layout [step][row-major cell].
/// A correct plan yields all ones; diagnostic only.
struct CoverageCount {
    Coords extent{};
    int dims = 0;
    int tb = 0;
    std::vector<std::int32_t> counts;
    std::int32_t min_count() const;
    std::int32_t max_count() const;
    bool all_ones() const { return min_count() == 1 && max_count() == 1; }
};
CoverageCount count_coverage(const TilePlan& plan);

struct TessellateStats {
    Index point_updates = 0;  // from tiled rounds and trailing steps
    Index rounds = 0;
    Index trailing_steps = 0;
};

/// Advances the grid T steps: floor(T/tb) tessellated rounds (phase A,
/// barrier, phase B wave by wave) followed by T mod tb reference steps.
/// Equals naive_run on the same input within FP reassociation error.
void run_tessellated(Grid& g, const StencilKernel& k, Index steps, const TilePlan& plan,
                     int threads = 1, TessellateStats* stats = nullptr);

}  // namespace tessera
