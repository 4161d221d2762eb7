#include "tessera/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace tessera {

namespace {

std::ofstream open_binary(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open image for writing: " + path);
    return os;
}

void require_2d(const Grid& g) {
    if (g.dims() != 2) throw std::invalid_argument("heatmap output needs a 2-D grid");
}

}  // namespace

void write_pgm16(const std::string& path, const Grid& g, double lo, double hi) {
    require_2d(g);
    if (!(hi > lo)) throw std::invalid_argument("empty heatmap value range");
    std::ofstream os = open_binary(path);
    const Index h = g.extent(0), w = g.extent(1);
    os << "P5\n" << w << ' ' << h << "\n65535\n";
    std::vector<unsigned char> rowbuf(static_cast<size_t>(w) * 2);
    for (Index i = 0; i < h; ++i) {
        for (Index j = 0; j < w; ++j) {
            const double t = std::clamp((g.at(i, j) - lo) / (hi - lo), 0.0, 1.0);
            const auto v = static_cast<std::uint16_t>(std::lround(t * 65535.0));
            rowbuf[static_cast<size_t>(j) * 2] = static_cast<unsigned char>(v >> 8);
            rowbuf[static_cast<size_t>(j) * 2 + 1] = static_cast<unsigned char>(v & 0xFF);
        }
        os.write(reinterpret_cast<const char*>(rowbuf.data()),
                 static_cast<std::streamsize>(rowbuf.size()));
    }
    if (!os) throw std::runtime_error("failed writing heatmap: " + path);
}

template <typename T>
void write_diff_ppm(const std::string& path, const Grid& a, const BasicGrid<T>& b, double scale) {
    require_2d(a);
    if (b.dims() != 2 || b.extent(0) != a.extent(0) || b.extent(1) != a.extent(1))
        throw std::invalid_argument("difference map needs matching 2-D extents");
    const Index h = a.extent(0), w = a.extent(1);
    double max_abs_diff = 0.0;
    for (Index i = 0; i < h; ++i)
        for (Index j = 0; j < w; ++j)
            max_abs_diff =
                std::max(max_abs_diff, std::fabs(static_cast<double>(b.at(i, j)) - a.at(i, j)));
    const double denom = scale > 0.0 ? scale : (max_abs_diff > 0.0 ? max_abs_diff : 1.0);

    std::ofstream os = open_binary(path);
    os << "P6\n" << w << ' ' << h << "\n255\n";
    std::vector<unsigned char> rowbuf(static_cast<size_t>(w) * 3);
    for (Index i = 0; i < h; ++i) {
        for (Index j = 0; j < w; ++j) {
            const double d = static_cast<double>(b.at(i, j)) - a.at(i, j);
            const int mag =
                static_cast<int>(std::lround(std::clamp(std::fabs(d) / denom, 0.0, 1.0) * 255.0));
            unsigned char r = 0, gch = 0, bch = 0;
            if (d > 0.0) {
                r = static_cast<unsigned char>(mag);
                gch = static_cast<unsigned char>(255 - mag);
            } else if (d < 0.0) {
                bch = static_cast<unsigned char>(mag);
                gch = static_cast<unsigned char>(255 - mag);
            } else {
                gch = 255;
            }
            rowbuf[static_cast<size_t>(j) * 3] = r;
            rowbuf[static_cast<size_t>(j) * 3 + 1] = gch;
            rowbuf[static_cast<size_t>(j) * 3 + 2] = bch;
        }
        os.write(reinterpret_cast<const char*>(rowbuf.data()),
                 static_cast<std::streamsize>(rowbuf.size()));
    }
    if (!os) throw std::runtime_error("failed writing difference map: " + path);
}

template void write_diff_ppm<double>(const std::string&, const Grid&, const BasicGrid<double>&,
                                     double);
template void write_diff_ppm<float>(const std::string&, const Grid&, const BasicGrid<float>&,
                                    double);

}  // namespace tessera
