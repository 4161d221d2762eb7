#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "tessera/grid.hpp"
#include "tessera/kernel.hpp"

namespace tessera {

/// Half-open coordinate box, interior-based, per axis.
struct Box {
    Coords lo{};
    Coords hi{};
};

template <typename T>
inline Box full_interior(const BasicGrid<T>& g) {
    Box b;
    for (int a = 0; a < kMaxDims; ++a) {
        b.lo[a] = 0;
        b.hi[a] = a < g.dims() ? g.extent(a) : 1;
    }
    return b;
}

template <typename T>
inline void check_applicable(const BasicGrid<T>& g, const StencilKernel& k) {
    if (k.dims() != g.dims()) throw std::invalid_argument("kernel/grid dimensionality mismatch");
    for (int a = 0; a < g.dims(); ++a)
        if (g.halo(a) < k.radius())
            throw std::invalid_argument("grid halo too small for kernel radius");
}

/// Applies one kernel sweep to the cells of `box` (clipped to the
/// interior), reading buffer `read_parity` and writing the other buffer.
/// Taps accumulate in canonical lexicographic order, so results are
/// bit-reproducible. Does not flip parity. Returns the number of point
/// updates performed.
template <typename T>
Index apply_box(BasicGrid<T>& g, const StencilKernel& k, const Box& box, int read_parity) {
    const int dims = g.dims();
    Box b = box;
    for (int a = 0; a < dims; ++a) {
        b.lo[a] = std::max<Index>(b.lo[a], 0);
        b.hi[a] = std::min<Index>(b.hi[a], g.extent(a));
        if (b.lo[a] >= b.hi[a]) return 0;
    }
    for (int a = dims; a < kMaxDims; ++a) {
        b.lo[a] = 0;
        b.hi[a] = 1;
    }

    const size_t nt = k.taps().size();
    std::vector<Index> delta(nt);
    std::vector<T> w(nt);
    for (size_t t = 0; t < nt; ++t) {
        const Offset& off = k.taps()[t].offset;
        Index d = 0;
        for (int a = 0; a < dims; ++a) d += static_cast<Index>(off[a]) * g.stride(a);
        delta[t] = d;
        w[t] = static_cast<T>(k.taps()[t].weight);
    }

    const T* in = g.buffer(read_parity);
    T* out = g.buffer(1 - read_parity);
    Index updates = 0;
    for (Index i = b.lo[0]; i < b.hi[0]; ++i) {
        for (Index j = b.lo[1]; j < b.hi[1]; ++j) {
            const Index base = g.flat(i, j, b.lo[2]);
            T* orow = out + base;
            const T* irow = in + base;
            const Index n = b.hi[2] - b.lo[2];
            for (Index c = 0; c < n; ++c) {
                T acc = T(0);
                for (size_t t = 0; t < nt; ++t) acc += w[t] * irow[c + delta[t]];
                orow[c] = acc;
            }
            updates += n;
        }
    }
    return updates;
}

/// Reference executor: one full Jacobi sweep with Dirichlet halo, then a
/// parity flip. This path is the oracle every optimized executor is
/// verified against.
template <typename T>
void naive_step(BasicGrid<T>& g, const StencilKernel& k) {
    check_applicable(g, k);
    apply_box(g, k, full_interior(g), g.parity());
    g.flip_parity();
}

template <typename T>
void naive_run(BasicGrid<T>& g, const StencilKernel& k, Index steps) {
    if (steps < 0) throw std::invalid_argument("negative step count");
    for (Index s = 0; s < steps; ++s) naive_step(g, k);
}

/// One sweep restricted to rows [lo, hi) of axis 0 (used by the
/// heterogeneous workers on their shrinking valid region). Flips parity.
template <typename T>
Index step_rows(BasicGrid<T>& g, const StencilKernel& k, Index lo, Index hi) {
    check_applicable(g, k);
    Box b = full_interior(g);
    b.lo[0] = lo;
    b.hi[0] = std::min(hi, b.hi[0]);
    const Index n = apply_box(g, k, b, g.parity());
    g.flip_parity();
    return n;
}

}  // namespace tessera
