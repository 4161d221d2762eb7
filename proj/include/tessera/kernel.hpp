#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace tessera {

inline constexpr int kMaxDims = 3;

/// Neighbor offset in grid cells. Components beyond the kernel's
/// dimensionality are zero.
using Offset = std::array<int, kMaxDims>;

enum class KernelShape { star, box };

struct KernelTap {
    Offset offset{};
    double weight = 0.0;
};

/// A fixed neighbor pattern with FP64 weights, applied to every interior
/// point of a grid once per time step. Taps are kept in canonical
/// lexicographic offset order so that reference summation is reproducible.
class StencilKernel {
public:
    StencilKernel() = default;
    StencilKernel(int dims, KernelShape shape, int radius, std::vector<KernelTap> taps);

    int dims() const { return dims_; }
    KernelShape shape() const { return shape_; }
    int radius() const { return radius_; }
    const std::vector<KernelTap>& taps() const { return taps_; }
    double weight_sum() const { return weight_sum_; }

    /// Weight at an exact offset; zero if the offset is not a tap.
    double weight_at(const Offset& off) const;

    /// Weights of the 1-D sub-kernel along `axis` at a fixed transverse
    /// offset, indexed by [-radius, radius] -> [0, 2*radius].
    std::vector<double> line_weights(int axis, const Offset& transverse) const;

private:
    int dims_ = 0;
    KernelShape shape_ = KernelShape::star;
    int radius_ = 0;
    std::vector<KernelTap> taps_;
    double weight_sum_ = 0.0;
};

/// Builds a kernel after validating that `weights` covers exactly the
/// offset lattice implied by (dims, shape, radius). Throws
/// std::invalid_argument on a mismatched offset set or non-finite weight.
StencilKernel make_kernel(int dims, KernelShape shape, int radius,
                          const std::vector<std::pair<Offset, double>>& weights);

/// 2-D 5-point heat kernel for CFL number `mu`: center 1-4*mu, axis
/// neighbors mu. Requires 0 < mu <= 0.25 (explicit-scheme stability).
StencilKernel heat_coefficients(double mu);

std::string to_string(KernelShape shape);

}  // namespace tessera
