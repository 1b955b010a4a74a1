#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace neurodec {

// Seeded random source with all distributions implemented in-house, so a
// (seed, call sequence) pair produces the same stream on every platform.
// std::mt19937_64 is standardized bit-for-bit; the distribution adapters in
// <random> are not, hence the hand-rolled ones below.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // Uniform double in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). Rejection sampling keeps it unbiased.
    uint64_t uniform_int(uint64_t n) {
        const uint64_t threshold = (0ULL - n) % n;
        for (;;) {
            uint64_t r = engine_();
            if (r >= threshold) return r % n;
        }
    }

    // Standard normal via Box-Muller; caches the second deviate.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Fisher-Yates with the portable uniform_int.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Draws k distinct indices from [0, n), returned in increasing order.
    std::vector<size_t> sample_without_replacement(size_t n, size_t k);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Derives a per-purpose seed from a run seed and a tag, so independent
// pipeline stages never share an RNG stream (FNV-1a over the tag, mixed
// with splitmix64).
uint64_t derive_seed(uint64_t base, std::string_view tag);

}  // namespace neurodec
