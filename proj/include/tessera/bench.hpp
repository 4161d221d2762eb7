#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tessera/grid.hpp"
#include "tessera/kernel.hpp"
#include "tessera/scheduler.hpp"

namespace tessera {

/// One benchmark configuration: kernel, problem size and default
/// blocking, with spatial widths and the temporal height kept separate.
struct BenchmarkSpec {
    std::string name;
    StencilKernel kernel;
    std::vector<Index> full_extent;
    Index full_steps = 0;
    std::vector<Index> tile;  // default spatial blocking per axis
    int tb = 1;               // default temporal blocking
};

/// The eight stock benchmarks (Heat-1D ... Box-3D27P) at full problem
/// sizes; desk scale divides extents by 20 and caps T at 1000.
const std::vector<BenchmarkSpec>& benchmark_table();
const BenchmarkSpec& find_benchmark(const std::string& name);

enum class ExecPath : std::uint8_t { naive, tessellate, vector, mm, hetero };
ExecPath path_from_string(const std::string& s);
const char* to_string(ExecPath path);

enum class Scale : std::uint8_t { desk, full };

struct BenchOptions {
    Scale scale = Scale::desk;
    int threads = 1;
    std::uint64_t seed = 1;
    bool verify = true;       // oracle-equivalence check at reduced size first
    Index steps_override = 0; // 0 keeps the scale's step count
};

struct ReportRow {
    std::string name;
    std::string path;
    int dims = 0;
    std::vector<Index> extent;
    Index steps = 0;
    std::vector<Index> tile;
    int tb = 0;
    double elapsed_s = 0.0;
    double stencils_per_s = 0.0;
    std::string verify = "skip";  // pass | fail | skip | unsupported
    std::uint64_t seed = 0;
    Index ghost_recompute_points = 0;
    Index mma_calls = 0;
    Index messages = 0;
};

/// Times one benchmark on one executor path. The row carries an
/// oracle-equivalence verdict computed at a reduced verification size
/// before the timing run. Unsupported path/dimension pairings are
/// reported in the row, not thrown.
ReportRow run_benchmark(const BenchmarkSpec& spec, ExecPath path, const BenchOptions& opt);

std::string csv_header();
std::string csv_row(const ReportRow& row);
void write_csv(std::ostream& os, const std::vector<ReportRow>& rows);
void write_csv_file(const std::string& path, const std::vector<ReportRow>& rows);

/// Largest temporal height the tessellation allows for a tile width.
int clamp_tb(int tb, Index min_tile, int radius);

}  // namespace tessera
