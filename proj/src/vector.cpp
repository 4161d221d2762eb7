#include "tessera/vector.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tessera {

VectorValue vv_unpack_lo(const VectorValue& a, const VectorValue& b) {
    return {{a.slots[0], b.slots[0], a.slots[2], b.slots[2]}};
}

VectorValue vv_unpack_hi(const VectorValue& a, const VectorValue& b) {
    return {{a.slots[1], b.slots[1], a.slots[3], b.slots[3]}};
}

VectorValue vv_permute_lanes(const VectorValue& a, const VectorValue& b, int imm) {
    auto lane = [&](int sel) -> std::array<double, 2> {
        switch (sel & 3) {
            case 0: return {a.slots[0], a.slots[1]};
            case 1: return {a.slots[2], a.slots[3]};
            case 2: return {b.slots[0], b.slots[1]};
            default: return {b.slots[2], b.slots[3]};
        }
    };
    const auto lo = lane(imm & 0xF);
    const auto hi = lane((imm >> 4) & 0xF);
    return {{lo[0], lo[1], hi[0], hi[1]}};
}

VectorValue vv_permute_var(const VectorValue& a, int idx) {
    VectorValue r;
    for (int i = 0; i < 4; ++i) r.slots[i] = a.slots[(idx >> (2 * i)) & 3];
    return r;
}

std::pair<VectorValue, VectorValue> skewed_swizzle(const VectorValue& a, const VectorValue& b) {
    return {vv_unpack_lo(a, b), vv_unpack_hi(a, b)};
}

std::pair<VectorValue, VectorValue> convert_stacking(const VectorValue& v0, const VectorValue& v1) {
    return {v0, vv_permute_lanes(v1, v1, 0x01)};
}

int latency_class(Opcode op) { return op == Opcode::permute_var ? 3 : 1; }

const char* opcode_name(Opcode op) {
    switch (op) {
        case Opcode::load: return "load";
        case Opcode::store: return "store";
        case Opcode::fmadd: return "fmadd";
        case Opcode::mul: return "mul";
        case Opcode::add: return "add";
        case Opcode::unpack_lo_lane: return "unpack_lo_lane";
        case Opcode::unpack_hi_lane: return "unpack_hi_lane";
        case Opcode::permute_lanes: return "permute_lanes";
        case Opcode::permute_var: return "permute_var";
    }
    return "?";
}

void VectorCost::record(Opcode op) {
    ++per_opcode[static_cast<size_t>(op)];
    (latency_class(op) == 3 ? latency3 : latency1) += 1;
}

VectorCost& VectorCost::operator+=(const VectorCost& o) {
    for (size_t i = 0; i < per_opcode.size(); ++i) per_opcode[i] += o.per_opcode[i];
    latency1 += o.latency1;
    latency3 += o.latency3;
    return *this;
}

VectorCost VectorProgram::cost() const {
    VectorCost c;
    for (const VectorInstruction& inst : code) c.record(inst.op);
    return c;
}

std::string VectorProgram::trace() const {
    std::ostringstream os;
    for (const VectorInstruction& inst : code) {
        os << opcode_name(inst.op);
        switch (inst.op) {
            case Opcode::load:
                os << " r" << inst.dst;
                if (inst.coef_load)
                    os << " coef[" << inst.imm << ']';
                else
                    os << " row[" << inst.mem.dy << "][" << inst.mem.col << ']';
                break;
            case Opcode::store:
                os << " out[" << inst.mem.col << "] r" << inst.src0;
                break;
            case Opcode::mul:
            case Opcode::add:
            case Opcode::fmadd:
                os << " r" << inst.dst << " r" << inst.src0 << " r" << inst.src1;
                break;
            case Opcode::unpack_lo_lane:
            case Opcode::unpack_hi_lane:
                os << " r" << inst.dst << " r" << inst.src0 << " r" << inst.src1;
                break;
            case Opcode::permute_lanes:
                os << " r" << inst.dst << " r" << inst.src0 << " r" << inst.src1 << " 0x" << std::hex
                   << inst.imm << std::dec;
                break;
            case Opcode::permute_var:
                os << " r" << inst.dst << " r" << inst.src0 << " 0x" << std::hex << inst.imm
                   << std::dec;
                break;
        }
        os << " #latency=" << latency_class(inst.op) << '\n';
    }
    return os.str();
}

namespace {

class RegAlloc {
public:
    explicit RegAlloc(int budget) : used_(static_cast<size_t>(budget), false) {}

    int alloc() {
        for (size_t r = 0; r < used_.size(); ++r) {
            if (!used_[r]) {
                used_[r] = true;
                ++live_;
                high_ = std::max(high_, live_);
                return static_cast<int>(r);
            }
        }
        throw std::runtime_error("vector register budget exceeded");
    }

    void release(int r) {
        if (r < 0) return;
        used_[static_cast<size_t>(r)] = false;
        --live_;
    }

    int high_water() const { return high_; }

private:
    std::vector<bool> used_;
    int live_ = 0;
    int high_ = 0;
};

struct Line {
    int dy = 0;
    std::vector<std::pair<int, int>> taps;  // (dx, coefficient index), dx ascending
};

bool is_identity(const StencilKernel& k) {
    for (const KernelTap& t : k.taps()) {
        const bool center = t.offset == Offset{0, 0, 0};
        if (center && t.weight != 1.0) return false;
        if (!center && t.weight != 0.0) return false;
    }
    return true;
}

class Compiler {
public:
    Compiler(const StencilKernel& k, Index row_length, int budget)
        : kernel_(k), ra_(budget) {
        prog_.register_budget = budget;
        prog_.dims = k.dims();
        prog_.radius = k.radius();
        prog_.row_length = row_length;
    }

    VectorProgram run() {
        const Index nvec = prog_.row_length / 4;
        if (is_identity(kernel_)) {
            for (Index j = 0; j < nvec; ++j) {
                const int v = emit_load(0, 4 * j);
                emit_store(4 * j, v);
                ra_.release(v);
            }
        } else {
            collect_lines();
            // Quadruple pipelining: output vectors grouped in quads of four
            // streams, emitted in lexicographic stream order.
            for (Index q = 0; q < nvec; q += 4)
                for (Index j = q; j < std::min(q + 4, nvec); ++j) emit_stream(4 * j);
        }
        prog_.max_live = ra_.high_water();
        return std::move(prog_);
    }

private:
    void collect_lines() {
        const int vrad = kernel_.dims() == 2 ? kernel_.radius() : 0;
        const int col_axis = kernel_.dims() == 2 ? 1 : 0;
        for (int dy = -vrad; dy <= vrad; ++dy) {
            Offset transverse{};
            transverse[0] = dy;
            const std::vector<double> w = kernel_.line_weights(col_axis, transverse);
            Line line;
            line.dy = dy;
            for (int dx = -kernel_.radius(); dx <= kernel_.radius(); ++dx) {
                const double weight = w[static_cast<size_t>(dx + kernel_.radius())];
                if (weight == 0.0) continue;
                line.taps.push_back({dx, static_cast<int>(prog_.coefficients.size())});
                prog_.coefficients.push_back(weight);
            }
            if (!line.taps.empty()) lines_.push_back(std::move(line));
        }
    }

    int emit_load(int dy, Index col) {
        const int r = ra_.alloc();
        prog_.code.push_back({Opcode::load, r, -1, -1, 0, false, {dy, col}});
        return r;
    }
    int emit_coef(int coef) {
        const int r = ra_.alloc();
        prog_.code.push_back({Opcode::load, r, -1, -1, coef, true, {}});
        return r;
    }
    void emit_store(Index col, int src) {
        prog_.code.push_back({Opcode::store, -1, src, -1, 0, false, {0, col}});
    }
    int emit3(Opcode op, int a, int b, int imm = 0) {
        const int r = ra_.alloc();
        prog_.code.push_back({op, r, a, b, imm, false, {}});
        return r;
    }
    void emit_acc(bool& first, int acc, int v, int c) {
        if (first) {
            prog_.code.push_back({Opcode::mul, acc, v, c, 0, false, {}});
            first = false;
        } else {
            prog_.code.push_back({Opcode::fmadd, acc, v, c, 0, false, {}});
        }
    }

    // One output vector: gathers every neighbor vector from 4-aligned
    // loads plus lane-local realignment, then accumulates through the
    // taps in canonical (dy, dx) order.
    void emit_stream(Index col) {
        const int acc = ra_.alloc();
        bool first = true;
        for (const Line& line : lines_) {
            const bool axis_only = line.taps.size() == 1 && line.taps[0].first == 0;
            if (axis_only) {
                const int v = emit_load(line.dy, col);
                const int c = emit_coef(line.taps[0].second);
                emit_acc(first, acc, v, c);
                ra_.release(c);
                ra_.release(v);
                continue;
            }
            bool need_prev = false, need_next = false, need_m1 = false, need_p1 = false;
            for (const auto& [dx, ci] : line.taps) {
                need_prev |= dx < 0;
                need_next |= dx > 0;
                need_m1 |= dx == -1;
                need_p1 |= dx == 1;
            }
            const int a_cur = emit_load(line.dy, col);
            const int a_prev = need_prev ? emit_load(line.dy, col - 4) : -1;
            const int a_next = need_next ? emit_load(line.dy, col + 4) : -1;
            // pm spans cells col-2..col+1, mp spans col+2..col+5: the
            // skewed backward/forward stacking mates of a_cur.
            const int pm = need_prev ? emit3(Opcode::permute_lanes, a_prev, a_cur, 0x21) : -1;
            const int mp = need_next ? emit3(Opcode::permute_lanes, a_cur, a_next, 0x21) : -1;
            int n_m1 = -1, n_p1 = -1;
            if (need_m1) {
                const int t = emit3(Opcode::unpack_lo_lane, pm, a_cur);
                n_m1 = emit3(Opcode::unpack_hi_lane, pm, t);
                ra_.release(t);
            }
            if (need_p1) {
                const int t = emit3(Opcode::unpack_lo_lane, a_cur, mp);
                n_p1 = emit3(Opcode::unpack_hi_lane, a_cur, t);
                ra_.release(t);
            }
            for (const auto& [dx, ci] : line.taps) {
                int v = -1;
                switch (dx) {
                    case -2: v = pm; break;
                    case -1: v = n_m1; break;
                    case 0: v = a_cur; break;
                    case 1: v = n_p1; break;
                    case 2: v = mp; break;
                    default: throw std::runtime_error("unsupported tap distance");
                }
                const int c = emit_coef(ci);
                emit_acc(first, acc, v, c);
                ra_.release(c);
            }
            for (int r : {n_p1, n_m1, mp, pm, a_next, a_prev, a_cur}) ra_.release(r);
        }
        emit_store(col, acc);
        ra_.release(acc);
    }

    const StencilKernel& kernel_;
    RegAlloc ra_;
    VectorProgram prog_;
    std::vector<Line> lines_;
};

}  // namespace

VectorProgram build_vector_program(const StencilKernel& k, Index row_length, int register_budget) {
    if (k.dims() > 2) throw std::invalid_argument("vector pipeline supports 1-D and 2-D kernels");
    if (k.radius() > 2) throw std::invalid_argument("vector pipeline supports radius <= 2");
    if (row_length < 4 || row_length % 4 != 0)
        throw std::invalid_argument("row length must be a positive multiple of 4");
    if (register_budget < 4) throw std::invalid_argument("register budget too small");
    return Compiler(k, row_length, register_budget).run();
}

namespace {

struct Machine {
    const VectorProgram& p;
    Grid& g;
    Index row;
    std::vector<VectorValue> regs;

    Machine(const VectorProgram& prog, Grid& grid, Index out_row)
        : p(prog), g(grid), row(out_row), regs(static_cast<size_t>(prog.register_budget)) {}

    VectorValue& reg(int r) {
        if (r < 0 || r >= p.register_budget) throw std::out_of_range("bad register index");
        return regs[static_cast<size_t>(r)];
    }

    Index flat_checked(int dy, Index col, bool writing) const {
        const int col_axis = p.dims == 1 ? 0 : 1;
        Index r = 0;
        if (p.dims == 1) {
            if (dy != 0) throw std::out_of_range("1-D program with row displacement");
        } else {
            r = row + dy;
            if (r < -g.halo(0) || r >= g.extent(0) + g.halo(0))
                throw std::out_of_range("vector access outside row band");
        }
        if (writing) {
            if (col < 0 || col + 4 > p.row_length)
                throw std::out_of_range("vector store outside the output row");
        } else if (col < -g.halo(col_axis) || col + 4 > g.extent(col_axis) + g.halo(col_axis)) {
            throw std::out_of_range("vector load out of bounds");
        }
        return p.dims == 1 ? g.flat(col) : g.flat(r, col);
    }

    void run(VectorCost& cost) {
        const double* in = g.read_data();
        double* out = g.write_data();
        for (const VectorInstruction& inst : p.code) {
            cost.record(inst.op);
            switch (inst.op) {
                case Opcode::load: {
                    VectorValue v;
                    if (inst.coef_load) {
                        const double c = p.coefficients.at(static_cast<size_t>(inst.imm));
                        v.slots = {c, c, c, c};
                    } else {
                        const Index f = flat_checked(inst.mem.dy, inst.mem.col, false);
                        for (int i = 0; i < 4; ++i) v.slots[static_cast<size_t>(i)] = in[f + i];
                    }
                    reg(inst.dst) = v;
                    break;
                }
                case Opcode::store: {
                    const Index f = flat_checked(0, inst.mem.col, true);
                    const VectorValue v = reg(inst.src0);
                    for (int i = 0; i < 4; ++i) out[f + i] = v.slots[static_cast<size_t>(i)];
                    break;
                }
                case Opcode::mul: {
                    const VectorValue a = reg(inst.src0), b = reg(inst.src1);
                    VectorValue r;
                    for (int i = 0; i < 4; ++i) r.slots[i] = a.slots[i] * b.slots[i];
                    reg(inst.dst) = r;
                    break;
                }
                case Opcode::add: {
                    const VectorValue a = reg(inst.src0), b = reg(inst.src1);
                    VectorValue r;
                    for (int i = 0; i < 4; ++i) r.slots[i] = a.slots[i] + b.slots[i];
                    reg(inst.dst) = r;
                    break;
                }
                case Opcode::fmadd: {
                    // Latency-1 class per the cost model; arithmetic is a
                    // rounded multiply then add, matching the scalar path.
                    const VectorValue a = reg(inst.src0), b = reg(inst.src1);
                    VectorValue& d = reg(inst.dst);
                    for (int i = 0; i < 4; ++i) {
                        const double prod = a.slots[i] * b.slots[i];
                        d.slots[i] = d.slots[i] + prod;
                    }
                    break;
                }
                case Opcode::unpack_lo_lane:
                    reg(inst.dst) = vv_unpack_lo(reg(inst.src0), reg(inst.src1));
                    break;
                case Opcode::unpack_hi_lane:
                    reg(inst.dst) = vv_unpack_hi(reg(inst.src0), reg(inst.src1));
                    break;
                case Opcode::permute_lanes:
                    reg(inst.dst) = vv_permute_lanes(reg(inst.src0), reg(inst.src1), inst.imm);
                    break;
                case Opcode::permute_var:
                    reg(inst.dst) = vv_permute_var(reg(inst.src0), inst.imm);
                    break;
            }
        }
    }
};

void check_vector_grid(const VectorProgram& p, const Grid& g) {
    if (g.dims() != p.dims) throw std::invalid_argument("program dimensionality differs from grid");
    const int col_axis = p.dims == 1 ? 0 : 1;
    if (g.extent(col_axis) != p.row_length)
        throw std::invalid_argument("program built for a different row length");
}

}  // namespace

VectorCost execute_vector_program(const VectorProgram& p, Grid& g, Index row) {
    check_vector_grid(p, g);
    if (p.dims == 2 && (row < 0 || row >= g.extent(0)))
        throw std::out_of_range("output row outside the grid");
    VectorCost cost;
    Machine(p, g, row).run(cost);
    return cost;
}

VectorCost vector_step(Grid& g, const VectorProgram& p) {
    check_vector_grid(p, g);
    VectorCost cost;
    const Index rows = p.dims == 1 ? 1 : g.extent(0);
    for (Index r = 0; r < rows; ++r) {
        Machine m(p, g, r);
        m.run(cost);
    }
    g.flip_parity();
    return cost;
}

void run_vectorized(Grid& g, const StencilKernel& k, Index steps, VectorCost* total) {
    const int col_axis = k.dims() == 1 ? 0 : 1;
    if (g.halo(col_axis) < 4)
        throw std::invalid_argument("vector path needs halo >= 4 along the row axis");
    for (int a = 0; a < g.dims(); ++a)
        if (a != col_axis && g.halo(a) < k.radius())
            throw std::invalid_argument("grid halo too small for kernel radius");
    const VectorProgram p = build_vector_program(k, g.extent(col_axis));
    VectorCost cost;
    for (Index s = 0; s < steps; ++s) cost += vector_step(g, p);
    if (total) *total = cost;
}

void dump_trace(const std::string& path, const VectorProgram& p) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open trace for writing: " + path);
    os << p.trace();
}

}  // namespace tessera
