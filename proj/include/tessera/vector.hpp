#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tessera/grid.hpp"
#include "tessera/kernel.hpp"

namespace tessera {

/// One 4-slot FP64 vector. Slots {0,1} form lane 0 and slots {2,3} form
/// lane 1; the lane boundary is structural, not data.
struct VectorValue {
    std::array<double, 4> slots{};
    bool operator==(const VectorValue&) const = default;
};

// Lane-local interleaves: outputs in lane L derive only from inputs'
// lane L, mirroring 128-bit-lane unpack behavior.
VectorValue vv_unpack_lo(const VectorValue& a, const VectorValue& b);  // (a0,b0,a2,b2)
VectorValue vv_unpack_hi(const VectorValue& a, const VectorValue& b);  // (a1,b1,a3,b3)

/// Whole-lane selection; imm nibble 0 picks a.lane0, 1 a.lane1, 2 b.lane0,
/// 3 b.lane1 (low nibble = dst lane 0, high nibble = dst lane 1).
VectorValue vv_permute_lanes(const VectorValue& a, const VectorValue& b, int imm);

/// Arbitrary slot gather (the expensive cross-lane shuffle); idx packs
/// four 2-bit source slot indices.
VectorValue vv_permute_var(const VectorValue& a, int idx);

/// Interleaves matching slot positions of each lane of two vectors:
/// (A,B,C,D),(E,F,G,H) -> (A,E,C,G),(B,F,D,H). Lane ops only; involution.
std::pair<VectorValue, VectorValue> skewed_swizzle(const VectorValue& a, const VectorValue& b);

/// Flips a consecutive forward-stacked pair to backward stacking by
/// swapping the lanes of the second vector; costs one permute_lanes per
/// two vectors. Applying it again restores the pair.
std::pair<VectorValue, VectorValue> convert_stacking(const VectorValue& v0, const VectorValue& v1);

enum class Opcode : std::uint8_t {
    load,
    store,
    fmadd,
    mul,
    add,
    unpack_lo_lane,
    unpack_hi_lane,
    permute_lanes,
    permute_var,
};
inline constexpr int kOpcodeCount = 9;

/// Instruction latency class: cheap lane-local and arithmetic ops are 1,
/// the general cross-lane permute is 3.
int latency_class(Opcode op);

const char* opcode_name(Opcode op);

/// Grid memory operand: a 4-slot row segment at `col` (4-aligned,
/// interior-based, halo reachable) of the row `dy` above/below the
/// program's output row.
struct MemRef {
    int dy = 0;
    Index col = 0;
};

struct VectorInstruction {
    Opcode op = Opcode::load;
    int dst = -1;
    int src0 = -1;
    int src1 = -1;
    int imm = 0;
    bool coef_load = false;  // load broadcasts coefficients[imm]
    MemRef mem{};
};

struct VectorCost {
    std::array<Index, kOpcodeCount> per_opcode{};
    Index latency1 = 0;
    Index latency3 = 0;
    Index count(Opcode op) const { return per_opcode[static_cast<size_t>(op)]; }
    void record(Opcode op);
    VectorCost& operator+=(const VectorCost& o);
};

/// A compiled one-step row pass for the abstract machine, plus its
/// broadcast coefficient table. `max_live` is the register high-water
/// mark reached during compilation; it never exceeds the budget.
struct VectorProgram {
    int register_budget = 16;
    int dims = 1;
    int radius = 1;
    Index row_length = 0;
    std::vector<double> coefficients;
    std::vector<VectorInstruction> code;
    int max_live = 0;

    VectorCost cost() const;
    std::string trace() const;  // one instruction per line: "opcode dst src... #latency=k"
};

/// Compiles the skewed-swizzle quadruple-pipelined row pass for a 1-D
/// kernel or the row direction of a 2-D kernel (radius <= 2). Generated
/// code contains no latency-3 instructions; all neighbor realignment is
/// done with aligned loads, lane unpacks and whole-lane permutes.
/// Streams are scheduled in quads in lexicographic order. Throws if the
/// row length is not a multiple of 4 or the register budget is exceeded.
VectorProgram build_vector_program(const StencilKernel& k, Index row_length,
                                   int register_budget = 16);

/// Runs a program on the band around output row `row` (ignored in 1-D):
/// reads the current read buffer, writes the row's new values to the
/// write buffer. Parity is not flipped; a full step flips once after all
/// rows (see vector_step). The simulator traps out-of-bounds accesses and
/// bad register indices.
VectorCost execute_vector_program(const VectorProgram& p, Grid& g, Index row = 0);

/// One full stencil step through the vector machine (all rows + parity
/// flip). Requires halo >= 4 along the row axis.
VectorCost vector_step(Grid& g, const VectorProgram& p);

/// T steps through the vector machine; accumulates instruction costs.
void run_vectorized(Grid& g, const StencilKernel& k, Index steps, VectorCost* total = nullptr);

/// Round-trip helpers for trace golden tests.
void dump_trace(const std::string& path, const VectorProgram& p);

}  // namespace tessera
