#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "tessera/kernel.hpp"

namespace tessera {

using Index = std::int64_t;
using Coords = std::array<Index, kMaxDims>;

/// Double-buffered row-major field with a halo ring. Interior coordinates
/// run over [0, extent) per axis; halo cells are addressed with negative
/// coordinates or coordinates >= extent. The halo follows a Dirichlet
/// policy: it is written at initialization and never updated by a step.
///
/// `parity` selects the current read buffer and flips exactly once per
/// completed time step. An instance is safe to hand between threads; a
/// step may be parallelized over disjoint output regions, but no buffer
/// may be mutated while another thread reads it.
template <typename T>
class BasicGrid {
public:
    BasicGrid(int dims, Coords extent, Coords halo) : dims_(dims), extent_(extent), halo_(halo) {
        if (dims < 1 || dims > kMaxDims) throw std::invalid_argument("grid dims must be 1, 2 or 3");
        Index total = 1;
        for (int a = 0; a < dims; ++a) {
            if (halo_[a] < 0) throw std::invalid_argument("negative halo width");
            if (extent_[a] < 2 * halo_[a] + 1) {
                std::ostringstream os;
                os << "degenerate extent " << extent_[a] << " on axis " << a
                   << ": need at least " << 2 * halo_[a] + 1 << " interior points";
                throw std::invalid_argument(os.str());
            }
            total *= extent_[a] + 2 * halo_[a];
        }
        for (int a = dims; a < kMaxDims; ++a) {
            extent_[a] = 1;
            halo_[a] = 0;
        }
        stride_[dims_ - 1] = 1;
        for (int a = dims_ - 2; a >= 0; --a)
            stride_[a] = stride_[a + 1] * (extent_[a + 1] + 2 * halo_[a + 1]);
        for (int a = dims_; a < kMaxDims; ++a) stride_[a] = 0;
        buf_[0].assign(static_cast<size_t>(total), T(0));
        buf_[1].assign(static_cast<size_t>(total), T(0));
    }

    int dims() const { return dims_; }
    Index extent(int axis) const { return extent_[axis]; }
    Index halo(int axis) const { return halo_[axis]; }
    Index stride(int axis) const { return stride_[axis]; }
    const Coords& extents() const { return extent_; }
    const Coords& halos() const { return halo_; }

    int parity() const { return parity_; }
    void flip_parity() { parity_ ^= 1; }

    Index interior_points() const {
        Index n = 1;
        for (int a = 0; a < dims_; ++a) n *= extent_[a];
        return n;
    }
    size_t buffer_size() const { return buf_[0].size(); }

    /// Flat index of interior-based coordinates (halo reachable with
    /// coordinates in [-halo, extent+halo)).
    Index flat(Index i, Index j = 0, Index k = 0) const {
        Index f = (i + halo_[0]) * stride_[0];
        if (dims_ > 1) f += (j + halo_[1]) * stride_[1];
        if (dims_ > 2) f += (k + halo_[2]) * stride_[2];
        return f;
    }

    T* buffer(int which) { return buf_[which].data(); }
    const T* buffer(int which) const { return buf_[which].data(); }
    T* read_data() { return buf_[parity_].data(); }
    const T* read_data() const { return buf_[parity_].data(); }
    T* write_data() { return buf_[1 - parity_].data(); }

    T at(Index i, Index j = 0, Index k = 0) const { return buf_[parity_][flat(i, j, k)]; }

    /// Sets one cell in both buffers (used for initial conditions and the
    /// frozen halo; stepped values diverge between buffers afterwards).
    void set_both(Index i, Index j, Index k, T value) {
        const Index f = flat(i, j, k);
        buf_[0][f] = value;
        buf_[1][f] = value;
    }

    /// Assigns every cell, halo included, in both buffers.
    void fill(T value) {
        buf_[0].assign(buf_[0].size(), value);
        buf_[1].assign(buf_[1].size(), value);
    }

    /// Initializes every cell (halo included) from a coordinate callback;
    /// both buffers receive identical values.
    void initialize(const std::function<T(Index, Index, Index)>& f) {
        for_each_cell([&](Index i, Index j, Index k) { set_both(i, j, k, f(i, j, k)); });
    }

    /// Visits every cell including halo, coordinates interior-based.
    void for_each_cell(const std::function<void(Index, Index, Index)>& fn) const {
        const Index ilo = -halo_[0], ihi = extent_[0] + halo_[0];
        const Index jlo = dims_ > 1 ? -halo_[1] : 0, jhi = dims_ > 1 ? extent_[1] + halo_[1] : 1;
        const Index klo = dims_ > 2 ? -halo_[2] : 0, khi = dims_ > 2 ? extent_[2] + halo_[2] : 1;
        for (Index i = ilo; i < ihi; ++i)
            for (Index j = jlo; j < jhi; ++j)
                for (Index k = klo; k < khi; ++k) fn(i, j, k);
    }

    /// Visits interior cells only.
    void for_each_interior(const std::function<void(Index, Index, Index)>& fn) const {
        for (Index i = 0; i < extent_[0]; ++i)
            for (Index j = 0; j < (dims_ > 1 ? extent_[1] : 1); ++j)
                for (Index k = 0; k < (dims_ > 2 ? extent_[2] : 1); ++k) fn(i, j, k);
    }

private:
    int dims_;
    Coords extent_{};
    Coords halo_{};
    Coords stride_{};
    int parity_ = 0;
    std::vector<T> buf_[2];
};

using Grid = BasicGrid<double>;
using GridF = BasicGrid<float>;

inline Coords make_coords(Index i, Index j = 1, Index k = 1) { return {i, j, k}; }

}  // namespace tessera
