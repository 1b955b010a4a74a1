#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "neurodec/synth.hpp"

namespace neurodec {

// Per-subject, per-voxel training-set moments. Population (biased) standard
// deviation, floored so constant voxels stay finite under division.
struct StandardizationStats {
    struct Moments {
        std::vector<double> mean;
        std::vector<double> stddev;  // >= kStdFloor
    };
    std::map<size_t, Moments> by_subject;

    static constexpr double kStdFloor = 1e-8;
};

StandardizationStats fit_standardization(const std::vector<VoxelRecord>& train_records);
VoxelRecord apply_standardization(const VoxelRecord& record,
                                  const StandardizationStats& stats);

// Cyclic wrap-around padding plan. padded[j] = voxels[j mod L_s] for
// j >= L_s; origin(j) names the real voxel each padded position copies.
struct PaddingPlan {
    size_t source_length = 0;
    size_t target_length = 0;

    size_t origin(size_t padded_index) const { return padded_index % source_length; }

    // Padded positions that copy real voxel i, in increasing order.
    std::vector<size_t> copies_of(size_t source_index) const;
};

std::pair<std::vector<double>, PaddingPlan> pad_wraparound(const std::vector<double>& voxels,
                                                           size_t target_length,
                                                           size_t patch_size);

// Smallest multiple of patch_size covering every subject's voxel count.
size_t compute_target_length(const std::vector<size_t>& lengths, size_t patch_size);

}  // namespace neurodec
