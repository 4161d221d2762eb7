#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tessera/grid.hpp"
#include "tessera/kernel.hpp"

namespace tessera {

enum class WorkerKind : std::uint8_t { cpu_like, accel_like };
enum class StepEngine : std::uint8_t { naive, tessellate, vector, mm };

const char* to_string(WorkerKind kind);
const char* to_string(StepEngine engine);

/// A worker is one of the artifact's step engines plus, optionally, a
/// virtual-clock rate used instead of wall timing so scheduler tests are
/// deterministic.
struct WorkerSpec {
    WorkerKind kind = WorkerKind::cpu_like;
    StepEngine engine = StepEngine::naive;
    std::optional<double> simulated_seconds_per_megastencil;
};

struct WorkerProfile {
    WorkerKind kind = WorkerKind::cpu_like;
    double seconds_per_megastencil = 0.0;
    std::vector<Index> sample_extent;
    int iterations = 0;
    double relative_spread = 0.0;  // (max-min)/mean over the warm iterations

    double megastencils_per_second() const { return 1.0 / seconds_per_megastencil; }
};

/// Times one warm-up run of each worker on a small sample (or reads the
/// simulated rate) and reports throughput. warm_iters must be >= 1.
std::pair<WorkerProfile, WorkerProfile> profile_workers(const WorkerSpec& a, const WorkerSpec& b,
                                                        const StencilKernel& kernel,
                                                        const std::vector<Index>& sample_extent,
                                                        int warm_iters);

/// Two-way split of axis 0. The faster worker owns rows [0, boundary);
/// the boundary is snapped to a tile multiple, ties rounding toward the
/// faster worker. Halo depth is exactly radius*tb, allowing one batched
/// exchange per tb-step round in each direction.
struct PartitionPlan {
    int split_axis = 0;
    Index boundary = 0;
    double ratio = 0.5;  // share of the faster worker before quantization
    Index halo_depth = 0;
    Index tile_width = 0;
    int tb = 1;
    int radius = 1;
    Index bytes_per_exchange = 0;  // halo slab bytes, both directions
    int in_flight = 2;             // rounds of work admitted per worker
    WorkerKind first_worker = WorkerKind::cpu_like;
};

PartitionPlan plan_partition(const WorkerProfile& a, const WorkerProfile& b,
                             const std::vector<Index>& extent, Index tile_width, int tb,
                             int radius);

/// Latency/bandwidth message cost model: a log of k launches of n_b bytes
/// costs k*(alpha + n_b*beta); one batched launch costs alpha + k*n_b*beta.
struct CommCostModel {
    double alpha = 1e-5;  // seconds per launch
    double beta = 1e-9;   // seconds per byte
};

struct CommCosts {
    double per_message_total = 0.0;
    double batched_total = 0.0;
};

CommCosts comm_cost(const CommCostModel& model, Index k, Index bytes_per_message);

struct CommRecord {
    Index round = 0;
    std::string direction;  // "w0_to_w1" or "w1_to_w0"
    Index bytes = 0;
    double modeled_cost_alpha_beta = 0.0;
    double wall_seconds = 0.0;
};

struct CommLog {
    std::vector<CommRecord> records;
    Index ghost_recompute_points = 0;  // seam cells recomputed by both workers
    Index mma_calls = 0;               // from mm-engine workers, if any
};

/// CSV dump: round, direction, bytes, modeled_cost_alpha_beta, wall_seconds.
void dump_comm_log(const std::string& path, const CommLog& log);

enum class HeteroMode : std::uint8_t {
    threaded,   // two worker threads, compute/exchange overlap
    sequential  // single-threaded deterministic drive, same message schedule
};

/// Runs ceil(T/tb) rounds on two workers. Per round each worker sends its
/// seam slab once, starts the round's interior compute before the peer
/// slab arrives, then finishes the seam region; the deep halo
/// (radius*tb) makes intra-round exchanges unnecessary at the price of
/// recomputed seam cells, which are tallied in the log. The grid ends
/// exactly as naive_run would leave it, up to FP reassociation when
/// vector/mm engines are used.
void run_heterogeneous(Grid& g, const StencilKernel& kernel, Index steps,
                       const PartitionPlan& plan, const WorkerSpec& first,
                       const WorkerSpec& second, CommLog* log = nullptr,
                       HeteroMode mode = HeteroMode::threaded,
                       const CommCostModel& model = {});

/// Deep-halo sufficiency instrumentation: poisons (NaN) every local cell
/// beyond each worker's exchanged ghost slab before stepping, so a read
/// of remote data that the per-round exchange did not deliver corrupts
/// the result instead of passing silently.
void run_heterogeneous_instrumented(Grid& g, const StencilKernel& kernel, Index steps,
                                    const PartitionPlan& plan, const WorkerSpec& first,
                                    const WorkerSpec& second, CommLog* log = nullptr,
                                    HeteroMode mode = HeteroMode::threaded,
                                    const CommCostModel& model = {});

}  // namespace tessera
