#include "neurodec/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "neurodec/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "MKT1 writer assumes a little-endian host");

namespace neurodec {

namespace {
constexpr char kMagic[4] = {'M', 'K', 'T', '1'};
}

void write_tensor_file(const std::filesystem::path& path, const TensorFile& t) {
    if (t.data.size() != t.numel())
        throw DimensionError("tensor file: dims/payload mismatch for " + path.string());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for write: " + path.string());
    out.write(kMagic, 4);
    const uint32_t rank = static_cast<uint32_t>(t.dims.size());
    out.write(reinterpret_cast<const char*>(&rank), sizeof(rank));
    out.write(reinterpret_cast<const char*>(t.dims.data()),
              static_cast<std::streamsize>(t.dims.size() * sizeof(uint64_t)));
    out.write(reinterpret_cast<const char*>(t.data.data()),
              static_cast<std::streamsize>(t.data.size() * sizeof(double)));
    if (!out) throw IoError("short write: " + path.string());
}

TensorFile read_tensor_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw IoError("not an MKT1 tensor file: " + path.string());
    uint32_t rank = 0;
    in.read(reinterpret_cast<char*>(&rank), sizeof(rank));
    if (!in || rank > 8) throw IoError("bad tensor rank in " + path.string());
    TensorFile t;
    t.dims.resize(rank);
    in.read(reinterpret_cast<char*>(t.dims.data()),
            static_cast<std::streamsize>(rank * sizeof(uint64_t)));
    if (!in) throw IoError("truncated dims in " + path.string());
    const uint64_t n = t.numel();
    t.data.resize(n);
    in.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw IoError("truncated payload in " + path.string());
    return t;
}

void write_vector_file(const std::filesystem::path& path, const std::vector<double>& v) {
    write_tensor_file(path, TensorFile{{v.size()}, v});
}

void write_matrix_file(const std::filesystem::path& path, uint64_t rows, uint64_t cols,
                       const std::vector<double>& v) {
    write_tensor_file(path, TensorFile{{rows, cols}, v});
}

}  // namespace neurodec
