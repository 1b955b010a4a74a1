#include "neurodec/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "neurodec/errors.hpp"

namespace neurodec {

StandardizationStats fit_standardization(const std::vector<VoxelRecord>& train_records) {
    std::map<size_t, std::vector<const VoxelRecord*>> by_subject;
    for (const auto& rec : train_records) by_subject[rec.subject_id].push_back(&rec);

    StandardizationStats stats;
    for (const auto& [subject, recs] : by_subject) {
        if (recs.size() < 2)
            throw DataError("standardization: subject " + std::to_string(subject) +
                            " has fewer than 2 training records");
        const size_t len = recs.front()->voxels.size();
        for (const auto* r : recs)
            if (r->voxels.size() != len)
                throw DataError("standardization: subject " + std::to_string(subject) +
                                " has inconsistent voxel lengths");
        StandardizationStats::Moments m;
        m.mean.assign(len, 0.0);
        m.stddev.assign(len, 0.0);
        const double inv = 1.0 / static_cast<double>(recs.size());
        for (const auto* r : recs)
            for (size_t i = 0; i < len; ++i) m.mean[i] += r->voxels[i];
        for (size_t i = 0; i < len; ++i) m.mean[i] *= inv;
        for (const auto* r : recs)
            for (size_t i = 0; i < len; ++i) {
                const double d = r->voxels[i] - m.mean[i];
                m.stddev[i] += d * d;
            }
        for (size_t i = 0; i < len; ++i)
            m.stddev[i] = std::max(std::sqrt(m.stddev[i] * inv),
                                   StandardizationStats::kStdFloor);
        stats.by_subject.emplace(subject, std::move(m));
    }
    return stats;
}

VoxelRecord apply_standardization(const VoxelRecord& record,
                                  const StandardizationStats& stats) {
    auto it = stats.by_subject.find(record.subject_id);
    if (it == stats.by_subject.end())
        throw DataError("standardization: no stats for subject " +
                        std::to_string(record.subject_id));
    const auto& m = it->second;
    if (m.mean.size() != record.voxels.size())
        throw DataError("standardization: length mismatch for subject " +
                        std::to_string(record.subject_id) + " (" +
                        std::to_string(m.mean.size()) + " vs " +
                        std::to_string(record.voxels.size()) + ")");
    VoxelRecord out = record;
    for (size_t i = 0; i < out.voxels.size(); ++i)
        out.voxels[i] = (out.voxels[i] - m.mean[i]) / m.stddev[i];
    return out;
}

std::vector<size_t> PaddingPlan::copies_of(size_t source_index) const {
    std::vector<size_t> copies;
    for (size_t j = source_length + source_index; j < target_length; j += source_length)
        copies.push_back(j);
    return copies;
}

std::pair<std::vector<double>, PaddingPlan> pad_wraparound(const std::vector<double>& voxels,
                                                           size_t target_length,
                                                           size_t patch_size) {
    const size_t source = voxels.size();
    if (source == 0) throw ConfigError("pad_wraparound: empty voxel vector");
    if (target_length < source)
        throw ConfigError("pad_wraparound: target length " + std::to_string(target_length) +
                          " below source length " + std::to_string(source));
    if (patch_size == 0 || target_length % patch_size != 0)
        throw ConfigError("pad_wraparound: target length " + std::to_string(target_length) +
                          " not divisible by patch size " + std::to_string(patch_size));
    std::vector<double> padded(target_length);
    for (size_t j = 0; j < target_length; ++j) padded[j] = voxels[j % source];
    return {std::move(padded), PaddingPlan{source, target_length}};
}

size_t compute_target_length(const std::vector<size_t>& lengths, size_t patch_size) {
    if (lengths.empty()) throw ConfigError("compute_target_length: no lengths given");
    if (patch_size == 0) throw ConfigError("compute_target_length: zero patch size");
    const size_t longest = *std::max_element(lengths.begin(), lengths.end());
    return (longest + patch_size - 1) / patch_size * patch_size;
}

}  // namespace neurodec
