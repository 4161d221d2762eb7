#include "tessera/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace tessera {

namespace {

bool offset_less(const Offset& a, const Offset& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// Enumerates the exact offset lattice for (dims, shape, radius) in
// lexicographic order.
std::vector<Offset> lattice_offsets(int dims, KernelShape shape, int radius) {
    std::vector<Offset> out;
    Offset cur{};
    const int lo = -radius, hi = radius;
    auto recurse = [&](auto&& self, int axis) -> void {
        if (axis == dims) {
            if (shape == KernelShape::box) {
                out.push_back(cur);
            } else {
                int nonzero = 0;
                for (int a = 0; a < dims; ++a) nonzero += cur[a] != 0;
                if (nonzero <= 1) out.push_back(cur);
            }
            return;
        }
        for (int v = lo; v <= hi; ++v) {
            cur[axis] = v;
            self(self, axis + 1);
        }
        cur[axis] = 0;
    };
    recurse(recurse, 0);
    std::sort(out.begin(), out.end(), offset_less);
    return out;
}

std::string offset_str(const Offset& off, int dims) {
    std::ostringstream os;
    os << '(';
    for (int a = 0; a < dims; ++a) os << (a ? "," : "") << off[a];
    os << ')';
    return os.str();
}

}  // namespace

StencilKernel::StencilKernel(int dims, KernelShape shape, int radius,
                             std::vector<KernelTap> taps)
    : dims_(dims), shape_(shape), radius_(radius), taps_(std::move(taps)) {
    for (const KernelTap& t : taps_) weight_sum_ += t.weight;
}

double StencilKernel::weight_at(const Offset& off) const {
    for (const KernelTap& t : taps_)
        if (t.offset == off) return t.weight;
    return 0.0;
}

std::vector<double> StencilKernel::line_weights(int axis, const Offset& transverse) const {
    std::vector<double> w(2 * radius_ + 1, 0.0);
    for (const KernelTap& t : taps_) {
        bool match = true;
        for (int a = 0; a < dims_; ++a)
            if (a != axis && t.offset[a] != transverse[a]) match = false;
        if (match) w[t.offset[axis] + radius_] = t.weight;
    }
    return w;
}

StencilKernel make_kernel(int dims, KernelShape shape, int radius,
                          const std::vector<std::pair<Offset, double>>& weights) {
    if (dims < 1 || dims > kMaxDims)
        throw std::invalid_argument("kernel dims must be 1, 2 or 3");
    if (radius < 1)
        throw std::invalid_argument("kernel radius must be positive");

    const std::vector<Offset> lattice = lattice_offsets(dims, shape, radius);
    if (weights.size() != lattice.size()) {
        std::ostringstream os;
        os << "kernel offset count mismatch: expected " << lattice.size()
           << " offsets for " << to_string(shape) << " radius " << radius
           << " in " << dims << "D, got " << weights.size();
        throw std::invalid_argument(os.str());
    }

    std::vector<KernelTap> taps;
    taps.reserve(weights.size());
    for (const auto& [off, w] : weights) {
        for (int a = dims; a < kMaxDims; ++a)
            if (off[a] != 0)
                throw std::invalid_argument("offset uses components beyond kernel dims");
        if (!std::isfinite(w))
            throw std::invalid_argument("non-finite kernel weight at offset " +
                                        offset_str(off, dims));
        taps.push_back({off, w});
    }
    std::sort(taps.begin(), taps.end(),
              [](const KernelTap& a, const KernelTap& b) { return offset_less(a.offset, b.offset); });

    for (size_t i = 0; i < taps.size(); ++i) {
        if (taps[i].offset != lattice[i]) {
            throw std::invalid_argument("offset set does not match the " + to_string(shape) +
                                        " lattice (unexpected " +
                                        offset_str(taps[i].offset, dims) + ")");
        }
    }
    return StencilKernel(dims, shape, radius, std::move(taps));
}

StencilKernel heat_coefficients(double mu) {
    if (!(mu > 0.0) || mu > 0.25)
        throw std::invalid_argument(
            "heat CFL number outside stability range: need 0 < mu <= 0.25");
    return make_kernel(2, KernelShape::star, 1,
                       {{{0, 0, 0}, 1.0 - 4.0 * mu},
                        {{-1, 0, 0}, mu},
                        {{1, 0, 0}, mu},
                        {{0, -1, 0}, mu},
                        {{0, 1, 0}, mu}});
}

std::string to_string(KernelShape shape) {
    return shape == KernelShape::star ? "star" : "box";
}

}  // namespace tessera
