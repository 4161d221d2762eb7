#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tessera/bench.hpp"
#include "tessera/case_study.hpp"
#include "tessera/grid_io.hpp"
#include "tessera/kernel.hpp"
#include "tessera/metrics.hpp"
#include "tessera/mm.hpp"
#include "tessera/naive.hpp"
#include "tessera/random.hpp"
#include "tessera/scheduler.hpp"
#include "tessera/tiling.hpp"
#include "tessera/vector.hpp"

namespace py = pybind11;
using namespace tessera;

namespace {

Offset to_offset(const std::vector<int>& v) {
    if (v.empty() || v.size() > kMaxDims)
        throw std::invalid_argument("offset needs 1 to 3 components");
    Offset o{};
    for (size_t a = 0; a < v.size(); ++a) o[a] = v[a];
    return o;
}

KernelShape shape_from_string(const std::string& s) {
    if (s == "star") return KernelShape::star;
    if (s == "box") return KernelShape::box;
    throw std::invalid_argument("kernel shape must be 'star' or 'box'");
}

py::array_t<double> grid_to_numpy(const Grid& g) {
    std::vector<py::ssize_t> shape;
    for (int a = 0; a < g.dims(); ++a) shape.push_back(static_cast<py::ssize_t>(g.extent(a)));
    py::array_t<double> out(shape);
    auto buf = out.mutable_unchecked();
    double* data = static_cast<double*>(out.request().ptr);
    py::ssize_t idx = 0;
    (void)buf;
    g.for_each_interior([&](Index i, Index j, Index k) { data[idx++] = g.at(i, j, k); });
    return out;
}

Grid grid_from_numpy(py::array_t<double, py::array::c_style | py::array::forcecast> arr,
                     std::vector<Index> halo, double halo_value) {
    const auto info = arr.request();
    const int dims = static_cast<int>(info.ndim);
    if (dims < 1 || dims > kMaxDims) throw std::invalid_argument("array must be 1-D to 3-D");
    if (halo.empty()) halo.assign(static_cast<size_t>(dims), 1);
    if (static_cast<int>(halo.size()) != dims)
        throw std::invalid_argument("halo must match array dimensionality");
    Coords ext{1, 1, 1}, h{0, 0, 0};
    for (int a = 0; a < dims; ++a) {
        ext[a] = static_cast<Index>(info.shape[static_cast<size_t>(a)]);
        h[a] = halo[static_cast<size_t>(a)];
    }
    Grid g(dims, ext, h);
    g.fill(halo_value);
    const double* data = static_cast<const double*>(info.ptr);
    Index idx = 0;
    g.for_each_interior([&](Index i, Index j, Index k) { g.set_both(i, j, k, data[idx++]); });
    return g;
}

VectorValue to_vv(const std::array<double, 4>& slots) { return VectorValue{slots}; }

MatC numpy_to_matc(py::array_t<double, py::array::c_style | py::array::forcecast> arr, int rows,
                   int cols, const char* name) {
    const auto info = arr.request();
    if (info.ndim != 2 || info.shape[0] != rows || info.shape[1] != cols)
        throw std::invalid_argument(std::string(name) + " must have the fixed MMA shape");
    MatC m{};
    const double* p = static_cast<const double*>(info.ptr);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m[r][c] = p[r * cols + c];
    return m;
}

}  // namespace

PYBIND11_MODULE(_tessera, m) {
    m.doc() = "Stencil computation engine: tessellated, vectorized, matrix-multiply and "
              "heterogeneous execution paths with a reference oracle.";

    py::class_<StencilKernel>(m, "StencilKernel")
        .def_property_readonly("dims", &StencilKernel::dims)
        .def_property_readonly("radius", &StencilKernel::radius)
        .def_property_readonly("shape",
                               [](const StencilKernel& k) { return to_string(k.shape()); })
        .def_property_readonly("weight_sum", &StencilKernel::weight_sum)
        .def("taps",
             [](const StencilKernel& k) {
                 std::vector<std::pair<std::vector<int>, double>> out;
                 for (const KernelTap& t : k.taps()) {
                     std::vector<int> off(t.offset.begin(), t.offset.begin() + k.dims());
                     out.push_back({off, t.weight});
                 }
                 return out;
             })
        .def("__repr__", [](const StencilKernel& k) {
            return "<StencilKernel " + to_string(k.shape()) + " dims=" + std::to_string(k.dims()) +
                   " radius=" + std::to_string(k.radius()) +
                   " taps=" + std::to_string(k.taps().size()) + ">";
        });

    m.def(
        "make_kernel",
        [](int dims, const std::string& shape, int radius,
           const std::vector<std::pair<std::vector<int>, double>>& weights) {
            std::vector<std::pair<Offset, double>> w;
            for (const auto& [off, wt] : weights) w.push_back({to_offset(off), wt});
            return make_kernel(dims, shape_from_string(shape), radius, w);
        },
        py::arg("dims"), py::arg("shape"), py::arg("radius"), py::arg("weights"));
    m.def("heat_coefficients", &heat_coefficients, py::arg("mu"));

    py::class_<Grid>(m, "Grid")
        .def(py::init([](const std::vector<Index>& extent, const std::vector<Index>& halo) {
                 if (extent.empty() || extent.size() > kMaxDims || halo.size() != extent.size())
                     throw std::invalid_argument("extent/halo must cover 1 to 3 matching axes");
                 Coords e{1, 1, 1}, h{0, 0, 0};
                 for (size_t a = 0; a < extent.size(); ++a) {
                     e[a] = extent[a];
                     h[a] = halo[a];
                 }
                 return Grid(static_cast<int>(extent.size()), e, h);
             }),
             py::arg("extent"), py::arg("halo"))
        .def_property_readonly("dims", &Grid::dims)
        .def_property_readonly("parity", &Grid::parity)
        .def_property_readonly("extent",
                               [](const Grid& g) {
                                   std::vector<Index> e;
                                   for (int a = 0; a < g.dims(); ++a) e.push_back(g.extent(a));
                                   return e;
                               })
        .def_property_readonly("halo",
                               [](const Grid& g) {
                                   std::vector<Index> h;
                                   for (int a = 0; a < g.dims(); ++a) h.push_back(g.halo(a));
                                   return h;
                               })
        .def("fill", &Grid::fill)
        .def("at", [](const Grid& g, Index i, Index j, Index k) { return g.at(i, j, k); },
             py::arg("i"), py::arg("j") = 0, py::arg("k") = 0)
        .def("to_numpy", &grid_to_numpy)
        .def("__repr__", [](const Grid& g) {
            std::string s = "<Grid ";
            for (int a = 0; a < g.dims(); ++a)
                s += (a ? "x" : "") + std::to_string(g.extent(a));
            return s + " parity=" + std::to_string(g.parity()) + ">";
        });

    m.def("grid_from_numpy", &grid_from_numpy, py::arg("array"),
          py::arg("halo") = std::vector<Index>{}, py::arg("halo_value") = 0.0);
    m.def("fill_random",
          [](Grid& g, std::uint64_t seed, double lo, double hi) { fill_random(g, seed, lo, hi); },
          py::arg("grid"), py::arg("seed"), py::arg("lo") = 0.0, py::arg("hi") = 1.0);

    m.def("naive_step", [](Grid& g, const StencilKernel& k) { naive_step(g, k); });
    m.def("naive_run", [](Grid& g, const StencilKernel& k, Index t) { naive_run(g, k, t); });
    m.def("max_rel_deviation", &max_rel_deviation, py::arg("grid"), py::arg("reference"));
    m.def("dump_grid", &dump_grid);
    m.def("load_grid", &load_grid);

    py::class_<RateReport>(m, "RateReport")
        .def_readonly("points_per_step", &RateReport::points_per_step)
        .def_readonly("steps", &RateReport::steps)
        .def_readonly("elapsed_seconds", &RateReport::elapsed_seconds)
        .def_readonly("stencils_per_second", &RateReport::stencils_per_second);
    m.def("stencils_per_second",
          [](const std::vector<Index>& extent, Index steps, double elapsed) {
              return stencils_per_second({extent.data(), extent.size()}, steps, elapsed);
          });

    py::class_<TilePlan>(m, "TilePlan")
        .def_readonly("dims", &TilePlan::dims)
        .def_readonly("tb", &TilePlan::tb)
        .def_readonly("radius", &TilePlan::radius)
        .def_property_readonly("upright_tiles",
                               [](const TilePlan& p) { return p.phase_a.size(); })
        .def_property_readonly("inverted_tiles",
                               [](const TilePlan& p) { return p.phase_b.size(); });
    m.def("plan_tiles", &plan_tiles, py::arg("extent"), py::arg("spatial_tile"), py::arg("tb"),
          py::arg("radius"));
    m.def("count_coverage", [](const TilePlan& p) {
        const CoverageCount c = count_coverage(p);
        return py::make_tuple(c.all_ones(), c.min_count(), c.max_count());
    });
    m.def(
        "run_tessellated",
        [](Grid& g, const StencilKernel& k, Index steps, const TilePlan& plan, int threads) {
            TessellateStats stats;
            run_tessellated(g, k, steps, plan, threads, &stats);
            return py::make_tuple(stats.point_updates, stats.rounds, stats.trailing_steps);
        },
        py::arg("grid"), py::arg("kernel"), py::arg("steps"), py::arg("plan"),
        py::arg("threads") = 1);

    m.def("skewed_swizzle", [](const std::array<double, 4>& a, const std::array<double, 4>& b) {
        const auto [x, y] = skewed_swizzle(to_vv(a), to_vv(b));
        return py::make_tuple(x.slots, y.slots);
    });
    m.def("convert_stacking", [](const std::array<double, 4>& a, const std::array<double, 4>& b) {
        const auto [x, y] = convert_stacking(to_vv(a), to_vv(b));
        return py::make_tuple(x.slots, y.slots);
    });

    py::class_<VectorCost>(m, "VectorCost")
        .def_readonly("latency1", &VectorCost::latency1)
        .def_readonly("latency3", &VectorCost::latency3)
        .def("count", [](const VectorCost& c, const std::string& op) {
            for (int i = 0; i < kOpcodeCount; ++i)
                if (op == opcode_name(static_cast<Opcode>(i)))
                    return c.per_opcode[static_cast<size_t>(i)];
            throw std::invalid_argument("unknown opcode: " + op);
        });
    py::class_<VectorProgram>(m, "VectorProgram")
        .def_readonly("row_length", &VectorProgram::row_length)
        .def_readonly("max_live", &VectorProgram::max_live)
        .def_readonly("register_budget", &VectorProgram::register_budget)
        .def_property_readonly("instructions",
                               [](const VectorProgram& p) { return p.code.size(); })
        .def("cost", &VectorProgram::cost)
        .def("trace", &VectorProgram::trace);
    m.def("build_vector_program", &build_vector_program, py::arg("kernel"), py::arg("row_length"),
          py::arg("register_budget") = 16);
    m.def("execute_vector_program", &execute_vector_program, py::arg("program"), py::arg("grid"),
          py::arg("row") = 0);
    m.def("vector_step", &vector_step);
    m.def("run_vectorized", [](Grid& g, const StencilKernel& k, Index steps) {
        VectorCost cost;
        run_vectorized(g, k, steps, &cost);
        return cost;
    });

    m.def("mma", [](py::array_t<double, py::array::c_style | py::array::forcecast> a,
                    py::array_t<double, py::array::c_style | py::array::forcecast> b,
                    py::array_t<double, py::array::c_style | py::array::forcecast> c) {
        MmaFragment frag;
        {
            const auto ia = a.request();
            if (ia.ndim != 2 || ia.shape[0] != kMmaM || ia.shape[1] != kMmaN)
                throw std::invalid_argument("A must be 8x4");
            const double* p = static_cast<const double*>(ia.ptr);
            for (int r = 0; r < kMmaM; ++r)
                for (int q = 0; q < kMmaN; ++q) frag.a[r][q] = p[r * kMmaN + q];
        }
        {
            const auto ib = b.request();
            if (ib.ndim != 2 || ib.shape[0] != kMmaN || ib.shape[1] != kMmaK)
                throw std::invalid_argument("B must be 4x8");
            const double* p = static_cast<const double*>(ib.ptr);
            for (int q = 0; q < kMmaN; ++q)
                for (int cc = 0; cc < kMmaK; ++cc) frag.b[q][cc] = p[q * kMmaK + cc];
        }
        frag.c = numpy_to_matc(c, kMmaM, kMmaK, "C");
        const MatC d = mma(frag);
        py::array_t<double> out({kMmaM, kMmaK});
        double* p = static_cast<double*>(out.request().ptr);
        for (int r = 0; r < kMmaM; ++r)
            for (int cc = 0; cc < kMmaK; ++cc) p[r * kMmaK + cc] = d[r][cc];
        return out;
    });

    py::class_<CoefficientFragmentSet>(m, "CoefficientFragmentSet")
        .def_readonly("radius", &CoefficientFragmentSet::radius)
        .def_property_readonly("count",
                               [](const CoefficientFragmentSet& s) { return s.fragments.size(); })
        .def("offsets", [](const CoefficientFragmentSet& s) {
            std::vector<std::pair<int, int>> out;
            for (const auto& f : s.fragments) out.push_back({f.row_offset, f.col_offset});
            return out;
        });
    m.def("build_coefficient_fragments", &build_coefficient_fragments);

    py::class_<CheckerboardPlan>(m, "CheckerboardPlan")
        .def_readonly("board", &CheckerboardPlan::board)
        .def_readonly("tile_points", &CheckerboardPlan::tile_points)
        .def_readonly("banks", &CheckerboardPlan::banks)
        .def_property_readonly("phases",
                               [](const CheckerboardPlan& p) { return p.access_phases.size(); });
    m.def("make_checkerboard_plan", &make_checkerboard_plan);
    py::class_<ConflictReport>(m, "ConflictReport")
        .def_readonly("phases", &ConflictReport::phases)
        .def_readonly("max_threads_per_bank", &ConflictReport::max_threads_per_bank)
        .def("conflict_free", &ConflictReport::conflict_free);
    m.def("check_bank_conflicts", &check_bank_conflicts);
    m.def("schedule_colors", [](const CheckerboardPlan& plan) {
        const ColorPhases phases = schedule_colors(plan);
        std::vector<std::pair<int, int>> black, white;
        for (const TileRef& t : phases.black) black.push_back({t.ti, t.tj});
        for (const TileRef& t : phases.white) white.push_back({t.ti, t.tj});
        return py::make_tuple(black, white);
    });
    m.def(
        "run_mm_stencil",
        [](Grid& g, const StencilKernel& k, Index steps, int threads) {
            MmStats stats;
            run_mm_stencil(g, k, steps, make_checkerboard_plan(), &stats, threads);
            return py::make_tuple(stats.mma_calls, stats.fragments_per_tile,
                                  stats.tiles_per_step);
        },
        py::arg("grid"), py::arg("kernel"), py::arg("steps"), py::arg("threads") = 1);
    m.def("expected_mma_calls", &expected_mma_calls);

    py::enum_<WorkerKind>(m, "WorkerKind")
        .value("cpu_like", WorkerKind::cpu_like)
        .value("accel_like", WorkerKind::accel_like);
    py::enum_<StepEngine>(m, "StepEngine")
        .value("naive", StepEngine::naive)
        .value("tessellate", StepEngine::tessellate)
        .value("vector", StepEngine::vector)
        .value("mm", StepEngine::mm);
    py::class_<WorkerSpec>(m, "WorkerSpec")
        .def(py::init([](WorkerKind kind, StepEngine engine, std::optional<double> simulated) {
                 return WorkerSpec{kind, engine, simulated};
             }),
             py::arg("kind"), py::arg("engine") = StepEngine::naive,
             py::arg("simulated_seconds_per_megastencil") = std::nullopt)
        .def_readwrite("kind", &WorkerSpec::kind)
        .def_readwrite("engine", &WorkerSpec::engine);
    py::class_<WorkerProfile>(m, "WorkerProfile")
        .def_readonly("seconds_per_megastencil", &WorkerProfile::seconds_per_megastencil)
        .def_readonly("iterations", &WorkerProfile::iterations)
        .def_readonly("relative_spread", &WorkerProfile::relative_spread)
        .def("megastencils_per_second", &WorkerProfile::megastencils_per_second);
    m.def("profile_workers", &profile_workers, py::arg("a"), py::arg("b"), py::arg("kernel"),
          py::arg("sample_extent"), py::arg("warm_iters"));
    py::class_<PartitionPlan>(m, "PartitionPlan")
        .def_readonly("boundary", &PartitionPlan::boundary)
        .def_readonly("ratio", &PartitionPlan::ratio)
        .def_readonly("halo_depth", &PartitionPlan::halo_depth)
        .def_readonly("bytes_per_exchange", &PartitionPlan::bytes_per_exchange)
        .def_readonly("in_flight", &PartitionPlan::in_flight)
        .def_readonly("first_worker", &PartitionPlan::first_worker);
    m.def("plan_partition", &plan_partition, py::arg("a"), py::arg("b"), py::arg("extent"),
          py::arg("tile_width"), py::arg("tb"), py::arg("radius"));
    py::class_<CommCostModel>(m, "CommCostModel")
        .def(py::init([](double alpha, double beta) { return CommCostModel{alpha, beta}; }),
             py::arg("alpha"), py::arg("beta"))
        .def_readwrite("alpha", &CommCostModel::alpha)
        .def_readwrite("beta", &CommCostModel::beta);
    m.def("comm_cost", [](const CommCostModel& model, Index k, Index bytes) {
        const CommCosts c = comm_cost(model, k, bytes);
        return py::make_tuple(c.per_message_total, c.batched_total);
    });
    py::class_<CommLog>(m, "CommLog")
        .def_property_readonly("messages", [](const CommLog& l) { return l.records.size(); })
        .def_readonly("ghost_recompute_points", &CommLog::ghost_recompute_points)
        .def("rounds_and_bytes", [](const CommLog& l) {
            std::vector<std::tuple<Index, std::string, Index>> out;
            for (const CommRecord& r : l.records) out.push_back({r.round, r.direction, r.bytes});
            return out;
        });
    m.def(
        "run_heterogeneous",
        [](Grid& g, const StencilKernel& k, Index steps, const PartitionPlan& plan,
           const WorkerSpec& first, const WorkerSpec& second, bool threaded) {
            CommLog log;
            run_heterogeneous(g, k, steps, plan, first, second, &log,
                              threaded ? HeteroMode::threaded : HeteroMode::sequential);
            return log;
        },
        py::arg("grid"), py::arg("kernel"), py::arg("steps"), py::arg("plan"), py::arg("first"),
        py::arg("second"), py::arg("threaded") = true);

    py::class_<ErrorTable>(m, "ErrorTable")
        .def_readonly("abs_thresholds", &ErrorTable::abs_thresholds)
        .def_readonly("rel_thresholds", &ErrorTable::rel_thresholds)
        .def_readonly("abs_exceed_pct", &ErrorTable::abs_exceed_pct)
        .def_readonly("rel_exceed_pct", &ErrorTable::rel_exceed_pct);
    m.def("compare_precision",
          [](const Grid& a, const Grid& b) { return compare_precision(a, b); });

    m.def("benchmark_names", [] {
        std::vector<std::string> names;
        for (const BenchmarkSpec& s : benchmark_table()) names.push_back(s.name);
        return names;
    });
    m.def(
        "run_benchmark",
        [](const std::string& name, const std::string& path, const std::string& scale,
           int threads, std::uint64_t seed, Index steps) {
            BenchOptions opt;
            opt.scale = scale == "full" ? Scale::full : Scale::desk;
            opt.threads = threads;
            opt.seed = seed;
            opt.steps_override = steps;
            const ReportRow row = run_benchmark(find_benchmark(name), path_from_string(path), opt);
            py::dict d;
            d["name"] = row.name;
            d["path"] = row.path;
            d["extent"] = row.extent;
            d["T"] = row.steps;
            d["elapsed_s"] = row.elapsed_s;
            d["stencils_per_s"] = row.stencils_per_s;
            d["verify"] = row.verify;
            d["mma_calls"] = row.mma_calls;
            d["messages"] = row.messages;
            d["ghost_recompute_points"] = row.ghost_recompute_points;
            return d;
        },
        py::arg("name"), py::arg("path") = "tessellate", py::arg("scale") = "desk",
        py::arg("threads") = 1, py::arg("seed") = 1, py::arg("steps") = 0);
}
