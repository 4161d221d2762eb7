#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "tessera/grid.hpp"
#include "tessera/kernel.hpp"

namespace tessera {

// The only matrix product shape the simulated tensor unit supports.
inline constexpr int kMmaM = 8;
inline constexpr int kMmaN = 4;
inline constexpr int kMmaK = 8;

using MatA = std::array<std::array<double, kMmaN>, kMmaM>;  // 8x4 inputs
using MatB = std::array<std::array<double, kMmaK>, kMmaN>;  // 4x8 weights
using MatC = std::array<std::array<double, kMmaK>, kMmaM>;  // 8x8 accumulator

struct MmaFragment {
    MatA a{};
    MatB b{};
    MatC c{};
};

/// D = A*B + C in FP64; each entry starts from C and accumulates the four
/// products in ascending inner index order.
MatC mma(const MmaFragment& frag);

/// One banded weight matrix placed at a fixed displacement of the input
/// fragment relative to the output tile: b[q][c] is the kernel weight of
/// the input cell at fragment column q contributing to output column c.
struct CoefficientFragment {
    int row_offset = 0;  // input row displacement (vertical folding)
    int col_offset = 0;  // input column displacement of the 4-wide fragment
    MatB b{};
};

/// Decomposition of a 2-D kernel (radius <= 2) into banded fragments.
/// Horizontally adjacent fragment placements jointly supply every column
/// dependency of an 8-wide output tile; summing all placements
/// reproduces each kernel weight exactly once.
struct CoefficientFragmentSet {
    int radius = 0;
    std::vector<CoefficientFragment> fragments;  // row offset asc, then col offset asc
};

CoefficientFragmentSet build_coefficient_fragments(const StencilKernel& k);

/// 8x8 two-colored board of 8x8-point tiles (one 64x64 block) over a
/// simulated 32-bank, 8-byte-word shared memory. Each board row belongs
/// to one 32-thread warp; a warp stages its row band through the listed
/// access phases, each phase being one word access per thread.
struct CheckerboardPlan {
    int board = 8;        // tiles per block side
    int tile_points = 8;  // points per tile side
    int banks = 32;
    int word_bytes = 8;
    std::array<int, 8> warp_of_row{};
    std::vector<std::array<int, 32>> access_phases;  // thread -> word address

    int block_points() const { return board * tile_points; }
};

CheckerboardPlan make_checkerboard_plan();

enum class TileColor : std::uint8_t { black, white };

struct TileRef {
    int ti = 0;
    int tj = 0;
};

inline TileColor tile_color(int ti, int tj) {
    return (ti + tj) % 2 == 0 ? TileColor::black : TileColor::white;
}

/// The two update phases of one block: 32 black then 32 white tiles, no
/// two tiles of a phase sharing an edge, covering the board exactly once.
struct ColorPhases {
    std::vector<TileRef> black;
    std::vector<TileRef> white;
};

ColorPhases schedule_colors(const CheckerboardPlan& plan);

struct ConflictReport {
    int phases = 0;
    int max_threads_per_bank = 0;
    std::vector<int> per_phase_max;
    bool conflict_free() const { return max_threads_per_bank <= 1; }
};

/// Simulates every scheduled 32-thread access phase of the plan and
/// reports the worst bank collision (1 = conflict-free).
ConflictReport check_bank_conflicts(const CheckerboardPlan& plan);

struct MmStats {
    Index mma_calls = 0;
    Index fragments_per_tile = 0;
    Index tiles_per_step = 0;
};

/// Closed-form audit value: steps x (rows/8) x (cols/8) x fragment count.
Index expected_mma_calls(const StencilKernel& k, Index rows, Index cols, Index steps);

/// Advances a 2-D grid T steps with every arithmetic update flowing
/// through fixed-shape mma calls, tiles scheduled black phase then white
/// phase per step. Extents must be multiples of the 64-point block.
void run_mm_stencil(Grid& g, const StencilKernel& k, Index steps, const CheckerboardPlan& plan,
                    MmStats* stats = nullptr, int threads = 1);

/// Tile sweep over rows [row_lo, row_hi) without block-size restrictions
/// (used by the heterogeneous worker); cols must be a multiple of 8.
/// Does not flip parity. Returns mma calls made.
Index mm_apply_rows(Grid& g, const CoefficientFragmentSet& frags, Index row_lo, Index row_hi,
                    int read_parity);

}  // namespace tessera
