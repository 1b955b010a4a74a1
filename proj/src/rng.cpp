#include "neurodec/rng.hpp"

#include <algorithm>

namespace neurodec {

std::vector<size_t> Rng::sample_without_replacement(size_t n, size_t k) {
    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = i;
    for (size_t i = 0; i < k && i + 1 < n; ++i) {
        size_t j = i + static_cast<size_t>(uniform_int(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(std::min(k, n));
    std::sort(idx.begin(), idx.end());
    return idx;
}

uint64_t derive_seed(uint64_t base, std::string_view tag) {
    uint64_t h = 1469598103934665603ULL;
    for (char c : tag) {
        h ^= static_cast<uint8_t>(c);
        h *= 1099511628211ULL;
    }
    uint64_t z = base + 0x9e3779b97f4a7c15ULL + h;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace neurodec
