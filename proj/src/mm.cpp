#include "tessera/mm.hpp"

#include <algorithm>
#include <atomic>
#include <stdexcept>

#include "tessera/parallel.hpp"

namespace tessera {

MatC mma(const MmaFragment& frag) {
    MatC d;
    for (int r = 0; r < kMmaM; ++r) {
        for (int c = 0; c < kMmaK; ++c) {
            double acc = frag.c[r][c];
            for (int q = 0; q < kMmaN; ++q) acc += frag.a[r][q] * frag.b[q][c];
            d[r][c] = acc;
        }
    }
    return d;
}

CoefficientFragmentSet build_coefficient_fragments(const StencilKernel& k) {
    if (k.dims() != 2) throw std::invalid_argument("MM folding supports 2-D kernels");
    if (k.radius() > 2) throw std::invalid_argument("MM folding supports radius <= 2");

    CoefficientFragmentSet set;
    set.radius = k.radius();
    const int r = k.radius();
    for (int dy = -r; dy <= r; ++dy) {
        Offset transverse{};
        transverse[0] = dy;
        const std::vector<double> line = k.line_weights(1, transverse);
        // Four horizontal fragment placements cover the 8+2r input columns
        // an output tile depends on; adjacent placements fold together at
        // the tile edges.
        for (int off : {-kMmaN, 0, kMmaN, 2 * kMmaN}) {
            CoefficientFragment frag;
            frag.row_offset = dy;
            frag.col_offset = off;
            bool any = false;
            for (int q = 0; q < kMmaN; ++q) {
                for (int c = 0; c < kMmaK; ++c) {
                    const int dx = off + q - c;
                    if (dx < -r || dx > r) continue;
                    const double w = line[static_cast<size_t>(dx + r)];
                    if (w == 0.0) continue;
                    frag.b[q][c] = w;
                    any = true;
                }
            }
            if (any) set.fragments.push_back(frag);
        }
    }
    return set;
}

CheckerboardPlan make_checkerboard_plan() {
    CheckerboardPlan plan;
    for (int row = 0; row < plan.board; ++row) plan.warp_of_row[static_cast<size_t>(row)] = row;
    // A warp stages its 8x64 row band word by word: 32 consecutive words
    // per phase, so the 32 threads land in 32 distinct banks.
    const int row_words = plan.block_points();
    for (int row = 0; row < plan.board; ++row) {
        for (int rr = 0; rr < plan.tile_points; ++rr) {
            for (int half = 0; half < row_words / plan.banks; ++half) {
                std::array<int, 32> phase{};
                for (int t = 0; t < 32; ++t)
                    phase[static_cast<size_t>(t)] =
                        (row * plan.tile_points + rr) * row_words + half * plan.banks + t;
                plan.access_phases.push_back(phase);
            }
        }
    }
    return plan;
}

ColorPhases schedule_colors(const CheckerboardPlan& plan) {
    ColorPhases phases;
    for (int ti = 0; ti < plan.board; ++ti) {
        for (int tj = 0; tj < plan.board; ++tj) {
            (tile_color(ti, tj) == TileColor::black ? phases.black : phases.white)
                .push_back({ti, tj});
        }
    }
    return phases;
}

ConflictReport check_bank_conflicts(const CheckerboardPlan& plan) {
    ConflictReport report;
    report.phases = static_cast<int>(plan.access_phases.size());
    report.per_phase_max.reserve(plan.access_phases.size());
    for (const auto& phase : plan.access_phases) {
        std::vector<int> hits(static_cast<size_t>(plan.banks), 0);
        for (int addr : phase) ++hits[static_cast<size_t>(addr % plan.banks)];
        const int worst = *std::max_element(hits.begin(), hits.end());
        report.per_phase_max.push_back(worst);
        report.max_threads_per_bank = std::max(report.max_threads_per_bank, worst);
    }
    return report;
}

Index expected_mma_calls(const StencilKernel& k, Index rows, Index cols, Index steps) {
    const CoefficientFragmentSet set = build_coefficient_fragments(k);
    return steps * (rows / kMmaK) * (cols / kMmaK) * static_cast<Index>(set.fragments.size());
}

namespace {

// Loads an 8x4 input fragment; cells outside the allocated buffer read as
// zero (they only ever pair with zero band weights).
MatA load_fragment(const Grid& g, const double* in, Index r0, Index c0) {
    MatA a{};
    for (int rr = 0; rr < kMmaM; ++rr) {
        const Index r = r0 + rr;
        if (r < -g.halo(0) || r >= g.extent(0) + g.halo(0)) continue;
        for (int q = 0; q < kMmaN; ++q) {
            const Index c = c0 + q;
            if (c < -g.halo(1) || c >= g.extent(1) + g.halo(1)) continue;
            a[rr][q] = in[g.flat(r, c)];
        }
    }
    return a;
}

Index compute_tile(Grid& g, const CoefficientFragmentSet& frags, Index ti, Index tj,
                   int read_parity) {
    const double* in = g.buffer(read_parity);
    double* out = g.buffer(1 - read_parity);
    const Index r0 = ti * kMmaK, c0 = tj * kMmaK;
    MatC d{};
    Index calls = 0;
    for (const CoefficientFragment& f : frags.fragments) {
        MmaFragment frag;
        frag.a = load_fragment(g, in, r0 + f.row_offset, c0 + f.col_offset);
        frag.b = f.b;
        frag.c = d;
        d = mma(frag);
        ++calls;
    }
    for (int rr = 0; rr < kMmaM; ++rr)
        for (int cc = 0; cc < kMmaK; ++cc) out[g.flat(r0 + rr, c0 + cc)] = d[rr][cc];
    return calls;
}

}  // namespace

Index mm_apply_rows(Grid& g, const CoefficientFragmentSet& frags, Index row_lo, Index row_hi,
                    int read_parity) {
    const Index t_lo = (row_lo + kMmaK - 1) / kMmaK;
    const Index t_hi = std::min(row_hi, g.extent(0)) / kMmaK;
    const Index tcols = g.extent(1) / kMmaK;
    Index calls = 0;
    for (Index ti = t_lo; ti < t_hi; ++ti)
        for (Index tj = 0; tj < tcols; ++tj) calls += compute_tile(g, frags, ti, tj, read_parity);
    return calls;
}

void run_mm_stencil(Grid& g, const StencilKernel& k, Index steps, const CheckerboardPlan& plan,
                    MmStats* stats, int threads) {
    if (g.dims() != 2) throw std::invalid_argument("MM path supports 2-D grids");
    for (int a = 0; a < 2; ++a) {
        if (g.halo(a) < k.radius())
            throw std::invalid_argument("grid halo too small for kernel radius");
        if (g.extent(a) % plan.block_points() != 0)
            throw std::invalid_argument("MM path needs extents that are multiples of the block size");
    }
    if (steps < 0) throw std::invalid_argument("negative step count");

    const CoefficientFragmentSet frags = build_coefficient_fragments(k);
    const Index trows = g.extent(0) / kMmaK;
    const Index tcols = g.extent(1) / kMmaK;

    // Tile lists per color phase, board-pattern continued across blocks.
    std::vector<std::pair<Index, Index>> colored[2];
    for (Index ti = 0; ti < trows; ++ti)
        for (Index tj = 0; tj < tcols; ++tj)
            colored[(ti + tj) % 2].push_back({ti, tj});

    std::atomic<Index> calls{0};
    for (Index s = 0; s < steps; ++s) {
        const int parity = g.parity();
        for (const auto& phase : colored) {
            parallel_for(static_cast<Index>(phase.size()), threads, [&](Index idx) {
                const auto [ti, tj] = phase[static_cast<size_t>(idx)];
                calls.fetch_add(compute_tile(g, frags, ti, tj, parity),
                                std::memory_order_relaxed);
            });
        }
        g.flip_parity();
    }
    if (stats) {
        stats->mma_calls = calls.load();
        stats->fragments_per_tile = static_cast<Index>(frags.fragments.size());
        stats->tiles_per_step = trows * tcols;
    }
}

}  // namespace tessera
