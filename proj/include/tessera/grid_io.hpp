#pragma once

#include <string>

#include "tessera/grid.hpp"

namespace tessera {

/// Binary grid dump, little-endian: magic "TTRS", u32 version=1, u32 dims,
/// u64 extent per axis, u64 halo per axis, then the row-major FP64 payload
/// of the current read buffer, halo included. Golden oracle snapshots use
/// this format.
void dump_grid(const std::string& path, const Grid& g);

/// Loads a dump; both buffers receive the payload and parity is 0.
Grid load_grid(const std::string& path);

}  // namespace tessera
