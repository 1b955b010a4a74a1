#pragma once

#include <filesystem>

#include "neurodec/decoder.hpp"
#include "neurodec/encoder.hpp"
#include "neurodec/preprocess.hpp"

namespace neurodec {

// Everything eval and attribution need to reproduce preprocessing exactly:
// training-set standardization moments, per-subject lengths, and the
// uniform padded length.
struct PreprocessState {
    StandardizationStats stats;
    std::vector<size_t> subject_lengths;  // indexed by subject id
    size_t padded_length = 0;

    PaddingPlan plan_for(size_t subject_id) const;
};

// Checkpoints are directories: checkpoint.json describing configs and
// parameter shapes, params/*.mkt tensors, stats/*.mkt moments.

void save_stage1_checkpoint(const std::filesystem::path& dir, const MaeEncoder& encoder,
                            const PreprocessState& prep);

struct Stage1Checkpoint {
    MaeEncoder encoder;
    PreprocessState prep;
};
Stage1Checkpoint load_stage1_checkpoint(const std::filesystem::path& dir);

void save_stage2_checkpoint(const std::filesystem::path& dir, const DualDecoderModel& model,
                            const PreprocessState& prep);

struct Stage2Checkpoint {
    DualDecoderModel model;
    PreprocessState prep;
};
Stage2Checkpoint load_stage2_checkpoint(const std::filesystem::path& dir);

}  // namespace neurodec
