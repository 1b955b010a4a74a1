#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "neurodec/decoder.hpp"
#include "neurodec/preprocess.hpp"

namespace neurodec {

// Voxel-level attribution: GradCAM token scores on the object feature map,
// attention rollout through the encoder, their product, patchwise
// upsampling, and restoration through the padding origin map.

struct AttributionConfig {
    // Averages 0.5*(A + I) per layer before the rollout product.
    bool rollout_residual = false;
    // "median" (robust, the per-voxel default) or "mean".
    std::string statistic = "median";
    // Sigmoid-probability threshold qualifying a sample as a true positive.
    double threshold = 0.5;
};

// GradCAM adapted to 1D token maps: channel weights are the token-mean of
// d(logit_c)/d(Z_obj), scores the relu of the weighted channel sum.
// Gradients are taken at the chosen logit before the sigmoid.
std::vector<double> gradcam_token_scores(const DualDecoderModel& model,
                                         const DecodingSample& sample, size_t class_id);

// Ordered product A^(l) ... A^(1) of per-layer attention matrices. Inputs
// must be row-stochastic to 1e-6.
Mat attention_rollout(const std::vector<Mat>& per_layer, bool residual = false);

// T = t * A^l (row vector times matrix).
std::vector<double> voxel_scores(const std::vector<double>& token_scores, const Mat& rollout);

// Replicates each token score across its patch.
std::vector<double> upsample_patchwise(const std::vector<double>& token_scores,
                                       size_t patch_size);

// Real voxels keep their activation or the maximum over all padded copies
// tracing back to them; never decreases a real voxel's score.
std::vector<double> restore_activation(const std::vector<double>& upsampled,
                                       const PaddingPlan& plan);

struct AttributionMap {
    std::vector<double> scores;  // length L_s, real voxels only
    size_t class_id = 0;
    size_t subject_id = 0;
    std::string statistic;
    size_t sample_count = 0;
};

// Aggregates restored per-sample maps over all true positives of
// (class_id, subject_id) in the given set. Returns nullopt when no sample
// qualifies (an empty-result signal, not an error).
std::optional<AttributionMap> aggregate_fingerprint(const DualDecoderModel& model,
                                                    const std::vector<DecodingSample>& samples,
                                                    size_t class_id, size_t subject_id,
                                                    const PaddingPlan& plan,
                                                    const AttributionConfig& cfg = {});

// Partition of scores by integer ROI label, keyed in label order.
std::map<int64_t, std::vector<std::pair<size_t, double>>> roi_group(
    const AttributionMap& map, const std::vector<int64_t>& roi_labels);

}  // namespace neurodec
