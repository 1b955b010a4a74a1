#include "neurodec/attribution.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "neurodec/errors.hpp"

namespace neurodec {

namespace {

// Shared core: runs backward from the class logit of an existing forward
// pass and scores each token by the relu'd gradient-weighted channel sum.
std::vector<double> gradcam_from_forward(const DualDecoderModel::Forward& fwd,
                                         size_t class_id) {
    slice(fwd.object_logits, Axis::Cols, class_id, 1).backward();

    const Tensor& z = fwd.object_tokens;  // N x d_obj
    const auto& grad = z.grad();
    const size_t tokens = z.rows(), channels = z.cols();
    std::vector<double> channel_weight(channels, 0.0);
    for (size_t j = 0; j < tokens; ++j)
        for (size_t k = 0; k < channels; ++k) channel_weight[k] += grad[j * channels + k];
    for (auto& w : channel_weight) w /= static_cast<double>(tokens);

    std::vector<double> scores(tokens, 0.0);
    for (size_t j = 0; j < tokens; ++j) {
        double acc = 0.0;
        for (size_t k = 0; k < channels; ++k)
            acc += channel_weight[k] * z.values()[j * channels + k];
        scores[j] = std::max(acc, 0.0);
    }
    return scores;
}

}  // namespace

std::vector<double> gradcam_token_scores(const DualDecoderModel& model,
                                         const DecodingSample& sample, size_t class_id) {
    if (class_id >= model.config().num_classes)
        throw DimensionError("gradcam: class id out of range");
    auto fwd = model.forward(sample.padded, sample.vision);
    return gradcam_from_forward(fwd, class_id);
}

Mat attention_rollout(const std::vector<Mat>& per_layer, bool residual) {
    if (per_layer.empty()) throw DataError("attention_rollout: no layers");
    const size_t n = per_layer.front().rows;

    auto prepared = [&](const Mat& a) {
        if (a.rows != n || a.cols != n)
            throw DataError("attention_rollout: inconsistent matrix shapes");
        for (size_t i = 0; i < n; ++i) {
            double row_sum = 0.0;
            for (size_t j = 0; j < n; ++j) row_sum += a.at(i, j);
            if (std::abs(row_sum - 1.0) > 1e-6)
                throw DataError("attention_rollout: row " + std::to_string(i) +
                                " sums to " + std::to_string(row_sum) +
                                ", not row-stochastic");
        }
        if (!residual) return a;
        Mat mixed(n, n);
        for (size_t i = 0; i < n; ++i) {
            double row_sum = 0.0;
            for (size_t j = 0; j < n; ++j) {
                mixed.at(i, j) = 0.5 * (a.at(i, j) + (i == j ? 1.0 : 0.0));
                row_sum += mixed.at(i, j);
            }
            for (size_t j = 0; j < n; ++j) mixed.at(i, j) /= row_sum;
        }
        return mixed;
    };

    Mat rollout = prepared(per_layer.front());
    for (size_t l = 1; l < per_layer.size(); ++l)
        rollout = matmul(prepared(per_layer[l]), rollout);
    return rollout;
}

std::vector<double> voxel_scores(const std::vector<double>& token_scores, const Mat& rollout) {
    if (token_scores.size() != rollout.rows)
        throw DimensionError("voxel_scores: " + std::to_string(token_scores.size()) +
                             " scores for " + std::to_string(rollout.rows) + " rollout rows");
    std::vector<double> out(rollout.cols, 0.0);
    for (size_t i = 0; i < rollout.rows; ++i)
        for (size_t j = 0; j < rollout.cols; ++j)
            out[j] += token_scores[i] * rollout.at(i, j);
    return out;
}

std::vector<double> upsample_patchwise(const std::vector<double>& token_scores,
                                       size_t patch_size) {
    std::vector<double> out;
    out.reserve(token_scores.size() * patch_size);
    for (double score : token_scores)
        out.insert(out.end(), patch_size, score);
    return out;
}

std::vector<double> restore_activation(const std::vector<double>& upsampled,
                                       const PaddingPlan& plan) {
    if (upsampled.size() != plan.target_length)
        throw DimensionError("restore_activation: activation length " +
                             std::to_string(upsampled.size()) + " does not match plan (" +
                             std::to_string(plan.target_length) + ")");
    std::vector<double> restored(upsampled.begin(),
                                 upsampled.begin() + static_cast<long>(plan.source_length));
    for (size_t j = plan.source_length; j < plan.target_length; ++j) {
        const size_t origin = plan.origin(j);
        restored[origin] = std::max(restored[origin], upsampled[j]);
    }
    return restored;
}

std::optional<AttributionMap> aggregate_fingerprint(const DualDecoderModel& model,
                                                    const std::vector<DecodingSample>& samples,
                                                    size_t class_id, size_t subject_id,
                                                    const PaddingPlan& plan,
                                                    const AttributionConfig& cfg) {
    if (cfg.statistic != "median" && cfg.statistic != "mean")
        throw ConfigError("attribution: statistic must be 'median' or 'mean'");
    const size_t patch = model.encoder().config().patch_size;

    std::vector<std::vector<double>> maps;
    for (const auto& sample : samples) {
        if (sample.subject_id != subject_id) continue;
        if (class_id >= sample.labels.size() || !sample.labels[class_id]) continue;

        std::vector<Mat> attention;
        auto fwd = model.forward(sample.padded, sample.vision, &attention);
        const double prob =
            1.0 / (1.0 + std::exp(-fwd.object_logits.values()[class_id]));
        if (!(prob > cfg.threshold)) continue;  // true positives only

        std::vector<double> token_scores = gradcam_from_forward(fwd, class_id);
        Mat rollout = attention_rollout(attention, cfg.rollout_residual);
        maps.push_back(
            restore_activation(upsample_patchwise(voxel_scores(token_scores, rollout), patch),
                               plan));
    }
    if (maps.empty()) return std::nullopt;

    AttributionMap result;
    result.class_id = class_id;
    result.subject_id = subject_id;
    result.statistic = cfg.statistic;
    result.sample_count = maps.size();
    result.scores.assign(plan.source_length, 0.0);
    std::vector<double> column(maps.size());
    for (size_t i = 0; i < plan.source_length; ++i) {
        for (size_t s = 0; s < maps.size(); ++s) column[s] = maps[s][i];
        if (cfg.statistic == "mean") {
            double acc = 0.0;
            for (double v : column) acc += v;
            result.scores[i] = acc / static_cast<double>(column.size());
        } else {
            std::sort(column.begin(), column.end());
            const size_t mid = column.size() / 2;
            result.scores[i] = column.size() % 2 == 1
                                   ? column[mid]
                                   : 0.5 * (column[mid - 1] + column[mid]);
        }
    }
    return result;
}

std::map<int64_t, std::vector<std::pair<size_t, double>>> roi_group(
    const AttributionMap& map, const std::vector<int64_t>& roi_labels) {
    if (roi_labels.size() != map.scores.size())
        throw DimensionError("roi_group: " + std::to_string(roi_labels.size()) +
                             " labels for " + std::to_string(map.scores.size()) + " voxels");
    std::map<int64_t, std::vector<std::pair<size_t, double>>> groups;
    for (size_t i = 0; i < roi_labels.size(); ++i)
        groups[roi_labels[i]].emplace_back(i, map.scores[i]);
    return groups;
}

}  // namespace neurodec
