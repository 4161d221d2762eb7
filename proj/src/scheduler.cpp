#include "tessera/scheduler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "tessera/mm.hpp"
#include "tessera/naive.hpp"
#include "tessera/vector.hpp"

namespace tessera {

const char* to_string(WorkerKind kind) {
    return kind == WorkerKind::cpu_like ? "cpu-like" : "accel-like";
}

const char* to_string(StepEngine engine) {
    switch (engine) {
        case StepEngine::naive: return "naive";
        case StepEngine::tessellate: return "tessellate";
        case StepEngine::vector: return "vector";
        case StepEngine::mm: return "mm";
    }
    return "?";
}

namespace {

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

Index cross_section(const std::vector<Index>& extent) {
    Index c = 1;
    for (size_t a = 1; a < extent.size(); ++a) c *= extent[a];
    return c;
}

}  // namespace

std::pair<WorkerProfile, WorkerProfile> profile_workers(const WorkerSpec& a, const WorkerSpec& b,
                                                        const StencilKernel& kernel,
                                                        const std::vector<Index>& sample_extent,
                                                        int warm_iters) {
    if (warm_iters < 1) throw std::invalid_argument("profiling needs at least one warm iteration");

    auto profile_one = [&](const WorkerSpec& spec) {
        WorkerProfile p;
        p.kind = spec.kind;
        p.sample_extent = sample_extent;
        p.iterations = warm_iters;
        if (spec.simulated_seconds_per_megastencil) {
            p.seconds_per_megastencil = *spec.simulated_seconds_per_megastencil;
            if (!(p.seconds_per_megastencil > 0.0))
                throw std::invalid_argument("simulated worker rate must be positive");
            return p;
        }
        Coords ext{1, 1, 1}, halo{0, 0, 0};
        const int dims = static_cast<int>(sample_extent.size());
        for (int ax = 0; ax < dims; ++ax) {
            ext[ax] = sample_extent[static_cast<size_t>(ax)];
            halo[ax] = kernel.radius();
        }
        if (spec.engine == StepEngine::vector) halo[dims == 1 ? 0 : 1] = 4;
        Grid g(dims, ext, halo);
        g.fill(0.5);
        double points = 1.0;
        for (int ax = 0; ax < dims; ++ax) points *= static_cast<double>(ext[ax]);
        double tmin = 0.0, tmax = 0.0, tsum = 0.0;
        for (int it = 0; it < warm_iters; ++it) {
            const double t0 = now_seconds();
            switch (spec.engine) {
                case StepEngine::vector: run_vectorized(g, kernel, 1); break;
                case StepEngine::mm: {
                    // mm needs block-aligned extents; fall back to the
                    // shared reference sweep for irregular samples.
                    if (dims == 2 && ext[0] % 64 == 0 && ext[1] % 64 == 0) {
                        run_mm_stencil(g, kernel, 1, make_checkerboard_plan());
                    } else {
                        naive_step(g, kernel);
                    }
                    break;
                }
                default: naive_step(g, kernel); break;
            }
            const double dt = std::max(now_seconds() - t0, 1e-9);
            if (it == 0 || dt < tmin) tmin = dt;
            if (it == 0 || dt > tmax) tmax = dt;
            tsum += dt;
        }
        const double mean = tsum / warm_iters;
        p.seconds_per_megastencil = mean / (points / 1e6);
        p.relative_spread = warm_iters > 1 ? (tmax - tmin) / mean : 0.0;
        return p;
    };

    return {profile_one(a), profile_one(b)};
}

PartitionPlan plan_partition(const WorkerProfile& a, const WorkerProfile& b,
                             const std::vector<Index>& extent, Index tile_width, int tb,
                             int radius) {
    if (extent.empty()) throw std::invalid_argument("empty extent");
    if (tile_width < 1) throw std::invalid_argument("tile width must be positive");
    const Index n = extent[0];
    if (n < 2 * tile_width)
        throw std::invalid_argument("extent along the split axis must cover at least 2 tiles");

    PartitionPlan plan;
    plan.tile_width = tile_width;
    plan.tb = tb;
    plan.radius = radius;
    plan.halo_depth = static_cast<Index>(radius) * tb;
    plan.in_flight = 2;

    const double ta = a.megastencils_per_second();
    const double tbps = b.megastencils_per_second();
    const bool a_first = ta >= tbps;
    plan.first_worker = a_first ? a.kind : b.kind;
    plan.ratio = std::max(ta, tbps) / (ta + tbps);

    // Snap to the nearest tile multiple; an exact tie moves the boundary
    // toward the faster worker (which owns [0, boundary)).
    const double raw = plan.ratio * static_cast<double>(n);
    Index k = static_cast<Index>(std::floor(raw / static_cast<double>(tile_width) + 0.5));
    const Index k_max = (n - 1) / tile_width;  // leave the peer at least one (clipped) tile
    k = std::clamp<Index>(k, 1, k_max);
    plan.boundary = k * tile_width;

    plan.bytes_per_exchange = plan.halo_depth * cross_section(extent) * 8 * 2;
    return plan;
}

CommCosts comm_cost(const CommCostModel& model, Index k, Index bytes_per_message) {
    if (k < 1) throw std::invalid_argument("message count must be >= 1");
    CommCosts c;
    const double kd = static_cast<double>(k);
    const double nb = static_cast<double>(bytes_per_message);
    c.per_message_total = kd * (model.alpha + nb * model.beta);
    c.batched_total = model.alpha + kd * nb * model.beta;
    return c;
}

void dump_comm_log(const std::string& path, const CommLog& log) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open comm log for writing: " + path);
    os << "round,direction,bytes,modeled_cost_alpha_beta,wall_seconds\n";
    for (const CommRecord& r : log.records)
        os << r.round << ',' << r.direction << ',' << r.bytes << ',' << r.modeled_cost_alpha_beta
           << ',' << r.wall_seconds << '\n';
}

namespace {

class SlabChannel {
public:
    explicit SlabChannel(size_t capacity) : capacity_(capacity) {}

    void send(std::vector<double> slab, double timeout_s) {
        std::unique_lock<std::mutex> lock(m_);
        if (!cv_.wait_for(lock, std::chrono::duration<double>(timeout_s),
                          [&] { return q_.size() < capacity_; }))
            throw std::runtime_error("halo exchange send timed out (deadlock?)");
        q_.push_back(std::move(slab));
        cv_.notify_all();
    }

    std::vector<double> recv(double timeout_s) {
        std::unique_lock<std::mutex> lock(m_);
        if (!cv_.wait_for(lock, std::chrono::duration<double>(timeout_s),
                          [&] { return !q_.empty(); }))
            throw std::runtime_error("halo exchange receive timed out (deadlock?)");
        std::vector<double> slab = std::move(q_.front());
        q_.pop_front();
        cv_.notify_all();
        return slab;
    }

private:
    size_t capacity_;
    std::mutex m_;
    std::condition_variable cv_;
    std::deque<std::vector<double>> q_;
};

constexpr double kExchangeTimeout = 60.0;

// One worker's subdomain plus its deep ghost slab. The first worker maps
// local rows [0, own+ghost) to global [0, own+ghost); the second maps
// [0, ghost+own) to global [boundary-ghost, N). Seam-side halo rows of
// the local grid are never read (the ghost slab is deep enough), which
// the deep-halo sufficiency test checks by poisoning them.
struct HaloWorker {
    const StencilKernel& kernel;
    StepEngine engine;
    bool first;
    Index own = 0;
    Index ghost = 0;
    Index tile_width = 0;
    Grid local;
    std::vector<VectorProgram> vprog;  // 0 or 1 entries
    CoefficientFragmentSet frags;
    Index ghost_recompute = 0;
    Index mma_calls = 0;
    std::vector<CommRecord> records;

    HaloWorker(const Grid& g, const StencilKernel& k, StepEngine eng, bool is_first, Index own_rows,
               Index ghost_rows, Index tile_w)
        : kernel(k),
          engine(eng),
          first(is_first),
          own(own_rows),
          ghost(ghost_rows),
          tile_width(tile_w),
          local(make_local(g, own_rows + ghost_rows)) {
        copy_from_global(g);
        if (engine == StepEngine::vector) {
            if (g.dims() != 2)
                throw std::invalid_argument("vector worker engine needs a 2-D grid");
            vprog.push_back(build_vector_program(kernel, local.extent(1)));
        }
        if (engine == StepEngine::mm) {
            if (g.dims() != 2) throw std::invalid_argument("mm worker engine needs a 2-D grid");
            frags = build_coefficient_fragments(kernel);
        }
    }

    static Grid make_local(const Grid& g, Index rows) {
        Coords ext = g.extents();
        ext[0] = rows;
        return Grid(g.dims(), ext, g.halos());
    }

    Index global_row(Index local_row, const Grid& g) const {
        return first ? local_row : g.extent(0) - (own + ghost) + local_row;
    }

    void copy_from_global(const Grid& g) {
        const double* src = g.read_data();
        const Index jlo = g.dims() > 1 ? -g.halo(1) : 0;
        const Index jhi = g.dims() > 1 ? g.extent(1) + g.halo(1) : 1;
        const Index klo = g.dims() > 2 ? -g.halo(2) : 0;
        const Index khi = g.dims() > 2 ? g.extent(2) + g.halo(2) : 1;
        for (Index li = -local.halo(0); li < local.extent(0) + local.halo(0); ++li) {
            const Index gi = global_row(li, g);
            if (gi < -g.halo(0) || gi >= g.extent(0) + g.halo(0)) continue;
            for (Index j = jlo; j < jhi; ++j)
                for (Index k = klo; k < khi; ++k) {
                    const double v = src[g.flat(gi, j, k)];
                    local.buffer(0)[local.flat(li, j, k)] = v;
                    local.buffer(1)[local.flat(li, j, k)] = v;
                }
        }
    }

    Index slab_cells() const {
        Index c = ghost;
        for (int a = 1; a < local.dims(); ++a) c *= local.extent(a);
        return c;
    }

    // Own seam rows at the current level, interior columns only.
    std::vector<double> make_slab() const {
        std::vector<double> slab;
        slab.reserve(static_cast<size_t>(slab_cells()));
        const double* data = local.buffer(local.parity());
        const Index lo = first ? own - ghost : ghost;
        for (Index r = lo; r < lo + ghost; ++r)
            for (Index j = 0; j < (local.dims() > 1 ? local.extent(1) : 1); ++j)
                for (Index k = 0; k < (local.dims() > 2 ? local.extent(2) : 1); ++k)
                    slab.push_back(data[local.flat(r, j, k)]);
        return slab;
    }

    void install_slab(const std::vector<double>& slab) {
        double* data = local.buffer(local.parity());
        const Index lo = first ? own : 0;
        size_t idx = 0;
        for (Index r = lo; r < lo + ghost; ++r)
            for (Index j = 0; j < (local.dims() > 1 ? local.extent(1) : 1); ++j)
                for (Index k = 0; k < (local.dims() > 2 ? local.extent(2) : 1); ++k)
                    data[local.flat(r, j, k)] = slab[idx++];
    }

    // Engine dispatch for one sweep of rows [lo, hi) at the current
    // parity; no flip.
    void apply_rows(Index lo, Index hi) {
        if (lo >= hi) return;
        const int parity = local.parity();
        switch (engine) {
            case StepEngine::naive: {
                Box b = full_interior(local);
                b.lo[0] = lo;
                b.hi[0] = hi;
                apply_box(local, kernel, b, parity);
                break;
            }
            case StepEngine::tessellate: {
                // Range sweeps stay spatially chunked at the tile width.
                for (Index c = lo; c < hi; c += tile_width) {
                    Box b = full_interior(local);
                    b.lo[0] = c;
                    b.hi[0] = std::min(hi, c + tile_width);
                    apply_box(local, kernel, b, parity);
                }
                break;
            }
            case StepEngine::vector: {
                for (Index r = lo; r < hi; ++r) execute_vector_program(vprog.front(), local, r);
                break;
            }
            case StepEngine::mm: {
                const Index t_lo = (lo + kMmaK - 1) / kMmaK * kMmaK;
                const Index t_hi = hi / kMmaK * kMmaK;
                if (t_lo >= t_hi) {
                    Box b = full_interior(local);
                    b.lo[0] = lo;
                    b.hi[0] = hi;
                    apply_box(local, kernel, b, parity);
                    break;
                }
                mma_calls += mm_apply_rows(local, frags, t_lo, t_hi, parity);
                Box b = full_interior(local);
                b.lo[0] = lo;
                b.hi[0] = t_lo;
                apply_box(local, kernel, b, parity);
                b.lo[0] = t_hi;
                b.hi[0] = hi;
                apply_box(local, kernel, b, parity);
                const Index ccols = local.extent(1) / kMmaK * kMmaK;
                if (ccols < local.extent(1)) {
                    b.lo[0] = t_lo;
                    b.hi[0] = t_hi;
                    b.lo[1] = ccols;
                    b.hi[1] = local.extent(1);
                    apply_box(local, kernel, b, parity);
                }
                break;
            }
        }
    }

    // Valid compute range for 0-based step s of a round.
    std::pair<Index, Index> step_range(int s) const {
        const Index shrink = static_cast<Index>(kernel.radius()) * (s + 1);
        if (first) return {0, own + ghost - shrink};
        return {shrink, ghost + own};
    }

    void tally_ghost(Index lo, Index hi) {
        const Index glo = first ? std::max(lo, own) : lo;
        const Index ghi = first ? hi : std::min(hi, ghost);
        if (glo < ghi) {
            Index cells = ghi - glo;
            for (int a = 1; a < local.dims(); ++a) cells *= local.extent(a);
            ghost_recompute += cells;
        }
    }

    // One round: send the seam slab, overlap the interior of step 0 with
    // the exchange, finish step 0 once the peer slab landed, then run the
    // remaining steps locally.
    void run_round(Index round, int steps_this_round, SlabChannel& to_peer,
                   SlabChannel& from_peer) {
        to_peer.send(make_slab(), kExchangeTimeout);

        auto [lo0, hi0] = step_range(0);
        const Index r = kernel.radius();
        const Index int_lo = first ? lo0 : ghost + r;
        const Index int_hi = first ? own - r : hi0;
        apply_rows(int_lo, int_hi);

        const double t0 = now_seconds();
        const std::vector<double> slab = from_peer.recv(kExchangeTimeout);
        const double waited = now_seconds() - t0;
        CommRecord rec;
        rec.round = round;
        rec.direction = first ? "w1_to_w0" : "w0_to_w1";
        rec.bytes = static_cast<Index>(slab.size() * sizeof(double));
        rec.wall_seconds = waited;
        records.push_back(rec);
        install_slab(slab);

        if (first) {
            apply_rows(own - r, hi0);
        } else {
            apply_rows(lo0, ghost + r);
        }
        tally_ghost(lo0, hi0);
        local.flip_parity();

        for (int s = 1; s < steps_this_round; ++s) {
            auto [lo, hi] = step_range(s);
            apply_rows(lo, hi);
            tally_ghost(lo, hi);
            local.flip_parity();
        }
    }

    // Fills the local rows beyond the exchanged ghost slab with NaN: the
    // seam-side halo ring plus, for safety, nothing else is reachable.
    void poison_seam_halo() {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        const Index lo = first ? own + ghost : -local.halo(0);
        const Index hi = first ? own + ghost + local.halo(0) : 0;
        for (Index r = lo; r < hi; ++r)
            for (Index j = -local.halo(1); j < local.extent(1) + local.halo(1); ++j)
                for (Index k = (local.dims() > 2 ? -local.halo(2) : 0);
                     k < (local.dims() > 2 ? local.extent(2) + local.halo(2) : 1); ++k) {
                    local.buffer(0)[local.flat(r, j, k)] = nan;
                    local.buffer(1)[local.flat(r, j, k)] = nan;
                }
    }

    // Writes the worker's own rows back into the global grid.
    void scatter(Grid& g) const {
        const double* src = local.buffer(local.parity());
        double* dst = g.buffer(g.parity());
        const Index lo = first ? 0 : ghost;
        for (Index r = lo; r < lo + own; ++r) {
            const Index gi = global_row(r, g);
            for (Index j = 0; j < (g.dims() > 1 ? g.extent(1) : 1); ++j)
                for (Index k = 0; k < (g.dims() > 2 ? g.extent(2) : 1); ++k)
                    dst[g.flat(gi, j, k)] = src[local.flat(r, j, k)];
        }
    }
};

}  // namespace

namespace {

void run_heterogeneous_impl(Grid& g, const StencilKernel& kernel, Index steps,
                            const PartitionPlan& plan, const WorkerSpec& first,
                            const WorkerSpec& second, CommLog* log, HeteroMode mode,
                            const CommCostModel& model, bool poison_beyond_exchange) {
    check_applicable(g, kernel);
    if (steps < 0) throw std::invalid_argument("negative step count");
    if (kernel.radius() != plan.radius)
        throw std::invalid_argument("partition plan radius differs from kernel radius");
    if (plan.halo_depth != static_cast<Index>(plan.radius) * plan.tb)
        throw std::invalid_argument("partition plan halo depth must be radius*tb");
    const Index n = g.extent(0);
    const Index b = plan.boundary;
    if (b <= 0 || b >= n) throw std::invalid_argument("partition boundary outside the grid");
    if (b < plan.halo_depth || n - b < plan.halo_depth)
        throw std::invalid_argument("subdomain smaller than the halo depth");
    if (log) *log = CommLog{};
    if (steps == 0) return;

    HaloWorker w0(g, kernel, first.engine, true, b, plan.halo_depth, plan.tile_width);
    HaloWorker w1(g, kernel, second.engine, false, n - b, plan.halo_depth, plan.tile_width);
    if (poison_beyond_exchange) {
        w0.poison_seam_halo();
        w1.poison_seam_halo();
    }

    const Index rounds = (steps + plan.tb - 1) / plan.tb;
    SlabChannel ch01(static_cast<size_t>(plan.in_flight));
    SlabChannel ch10(static_cast<size_t>(plan.in_flight));

    auto drive = [&](HaloWorker& w, SlabChannel& to_peer, SlabChannel& from_peer) {
        for (Index round = 0; round < rounds; ++round) {
            const int tb_r =
                static_cast<int>(std::min<Index>(plan.tb, steps - round * plan.tb));
            w.run_round(round, tb_r, to_peer, from_peer);
        }
    };

    if (mode == HeteroMode::threaded) {
        std::exception_ptr err0, err1;
        std::thread t0([&] {
            try {
                drive(w0, ch01, ch10);
            } catch (...) {
                err0 = std::current_exception();
            }
        });
        std::thread t1([&] {
            try {
                drive(w1, ch10, ch01);
            } catch (...) {
                err1 = std::current_exception();
            }
        });
        t0.join();
        t1.join();
        if (err0) std::rethrow_exception(err0);
        if (err1) std::rethrow_exception(err1);
    } else {
        // Deterministic single-thread drive: both sends precede both
        // receives of a round, so the queues never starve.
        for (Index round = 0; round < rounds; ++round) {
            const int tb_r =
                static_cast<int>(std::min<Index>(plan.tb, steps - round * plan.tb));
            ch01.send(w0.make_slab(), kExchangeTimeout);
            ch10.send(w1.make_slab(), kExchangeTimeout);
            auto run_half = [&](HaloWorker& w, SlabChannel& from_peer) {
                auto [lo0, hi0] = w.step_range(0);
                const Index r = kernel.radius();
                const Index int_lo = w.first ? lo0 : w.ghost + r;
                const Index int_hi = w.first ? w.own - r : hi0;
                w.apply_rows(int_lo, int_hi);
                const std::vector<double> slab = from_peer.recv(kExchangeTimeout);
                CommRecord rec;
                rec.round = round;
                rec.direction = w.first ? "w1_to_w0" : "w0_to_w1";
                rec.bytes = static_cast<Index>(slab.size() * sizeof(double));
                rec.wall_seconds = 0.0;
                w.records.push_back(rec);
                w.install_slab(slab);
                if (w.first)
                    w.apply_rows(w.own - r, hi0);
                else
                    w.apply_rows(lo0, w.ghost + r);
                w.tally_ghost(lo0, hi0);
                w.local.flip_parity();
                for (int s = 1; s < tb_r; ++s) {
                    auto [lo, hi] = w.step_range(s);
                    w.apply_rows(lo, hi);
                    w.tally_ghost(lo, hi);
                    w.local.flip_parity();
                }
            };
            run_half(w0, ch10);
            run_half(w1, ch01);
        }
    }

    for (Index s = 0; s < steps; ++s) g.flip_parity();
    w0.scatter(g);
    w1.scatter(g);

    if (log) {
        log->records = w0.records;
        log->records.insert(log->records.end(), w1.records.begin(), w1.records.end());
        std::sort(log->records.begin(), log->records.end(),
                  [](const CommRecord& a, const CommRecord& b) {
                      return a.round != b.round ? a.round < b.round : a.direction < b.direction;
                  });
        for (CommRecord& r : log->records)
            r.modeled_cost_alpha_beta = model.alpha + static_cast<double>(r.bytes) * model.beta;
        log->ghost_recompute_points = w0.ghost_recompute + w1.ghost_recompute;
        log->mma_calls = w0.mma_calls + w1.mma_calls;
    }
}

}  // namespace

void run_heterogeneous(Grid& g, const StencilKernel& kernel, Index steps,
                       const PartitionPlan& plan, const WorkerSpec& first,
                       const WorkerSpec& second, CommLog* log, HeteroMode mode,
                       const CommCostModel& model) {
    run_heterogeneous_impl(g, kernel, steps, plan, first, second, log, mode, model, false);
}

void run_heterogeneous_instrumented(Grid& g, const StencilKernel& kernel, Index steps,
                                    const PartitionPlan& plan, const WorkerSpec& first,
                                    const WorkerSpec& second, CommLog* log, HeteroMode mode,
                                    const CommCostModel& model) {
    run_heterogeneous_impl(g, kernel, steps, plan, first, second, log, mode, model, true);
}

}  // namespace tessera
