#include "tessera/grid_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace tessera {

namespace {

constexpr char kMagic[4] = {'T', 'T', 'R', 'S'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "grid dump writer assumes a little-endian host");

template <typename T>
void put(std::ofstream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T get(std::ifstream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!is) throw std::runtime_error("truncated grid dump");
    return v;
}

}  // namespace

void dump_grid(const std::string& path, const Grid& g) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open grid dump for writing: " + path);
    os.write(kMagic, 4);
    put<std::uint32_t>(os, kVersion);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(g.dims()));
    for (int a = 0; a < g.dims(); ++a) put<std::uint64_t>(os, static_cast<std::uint64_t>(g.extent(a)));
    for (int a = 0; a < g.dims(); ++a) put<std::uint64_t>(os, static_cast<std::uint64_t>(g.halo(a)));
    os.write(reinterpret_cast<const char*>(g.read_data()),
             static_cast<std::streamsize>(g.buffer_size() * sizeof(double)));
    if (!os) throw std::runtime_error("failed writing grid dump: " + path);
}

Grid load_grid(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open grid dump: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("bad grid dump magic: " + path);
    if (get<std::uint32_t>(is) != kVersion) throw std::runtime_error("unsupported grid dump version");
    const auto dims = get<std::uint32_t>(is);
    if (dims < 1 || dims > 3) throw std::runtime_error("bad grid dump dimensionality");
    Coords extent{1, 1, 1}, halo{0, 0, 0};
    for (std::uint32_t a = 0; a < dims; ++a) extent[a] = static_cast<Index>(get<std::uint64_t>(is));
    for (std::uint32_t a = 0; a < dims; ++a) halo[a] = static_cast<Index>(get<std::uint64_t>(is));
    Grid g(static_cast<int>(dims), extent, halo);
    std::vector<double> payload(g.buffer_size());
    is.read(reinterpret_cast<char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(double)));
    if (!is) throw std::runtime_error("truncated grid dump payload: " + path);
    std::memcpy(g.buffer(0), payload.data(), payload.size() * sizeof(double));
    std::memcpy(g.buffer(1), payload.data(), payload.size() * sizeof(double));
    return g;
}

}  // namespace tessera
