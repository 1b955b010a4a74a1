#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace neurodec {

// MKT1 binary tensor container. Layout: magic "MKT1", u32 rank,
// rank x u64 dims, then little-endian f64 payload in row-major order.
// Used for checkpoints, dataset voxel files and emitted features.

struct TensorFile {
    std::vector<uint64_t> dims;
    std::vector<double> data;

    uint64_t numel() const {
        uint64_t n = 1;
        for (uint64_t d : dims) n *= d;
        return n;
    }
};

void write_tensor_file(const std::filesystem::path& path, const TensorFile& t);
TensorFile read_tensor_file(const std::filesystem::path& path);

void write_vector_file(const std::filesystem::path& path, const std::vector<double>& v);
void write_matrix_file(const std::filesystem::path& path, uint64_t rows, uint64_t cols,
                       const std::vector<double>& v);

}  // namespace neurodec
