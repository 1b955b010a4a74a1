#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "neurodec/attribution.hpp"
#include "neurodec/baselines.hpp"
#include "neurodec/checkpoint.hpp"
#include "neurodec/config.hpp"
#include "neurodec/data.hpp"
#include "neurodec/decoder.hpp"
#include "neurodec/encoder.hpp"

namespace neurodec {

// Resolved run configuration for every pipeline stage, assembled from a
// FlatConfig against the known-key registry. The global seed fans out to
// per-stage seeds through derive_seed.
struct PipelineConfig {
    uint64_t seed = 42;
    GeneratorConfig synth;
    EncoderConfig encoder;
    Stage1Config stage1;
    Stage2Config stage2;
    size_t object_dim = 0;     // 0 resolves to 7/8 of encoder dim
    size_t cross_heads = 4;
    bool use_cross_attention = true;
    double eval_threshold = 0.5;
    bool eval_micro_auc = false;
    AttributionConfig attribution;
    LinearBaselineConfig linear_baseline;
    size_t kmeans_restarts = 10;
    size_t kmeans_max_iter = 300;
    double kmeans_tol = 1e-6;

    size_t resolved_object_dim() const {
        return object_dim != 0 ? object_dim : encoder.dim * 7 / 8;
    }
};

PipelineConfig parse_pipeline_config(const FlatConfig& cfg);

// Creates <out>/<name> when a run name is given (append-only: an existing
// directory is an error) or a fresh timestamped <out>/<command>-<stamp>[-k]
// otherwise. Writes the verbatim config echo and the resolved entries.
std::filesystem::path prepare_run_dir(const std::filesystem::path& out,
                                      const std::string& command, const std::string& run_name,
                                      const FlatConfig& cfg, uint64_t seed);

// Standardize (training moments) -> average repetitions -> wrap-around pad,
// plus per-record frozen vision features.
struct PreparedData {
    std::vector<DecodingSample> train;
    std::vector<DecodingSample> test;
    PreprocessState prep;
    GeneratorConfig dataset_config;
};
PreparedData prepare_data(const LoadedDataset& ds, size_t patch_size);

// ---- stages -----------------------------------------------------------------

struct SynthOutcome {
    std::filesystem::path dataset_dir;
    size_t train_records = 0;
    size_t test_records = 0;
};
SynthOutcome run_synth(const PipelineConfig& cfg, const std::filesystem::path& run_dir);

struct PretrainOutcome {
    std::filesystem::path checkpoint_dir;
    double initial_loss = 0.0;
    double final_loss = 0.0;
};
PretrainOutcome run_pretrain(const PipelineConfig& cfg,
                             const std::filesystem::path& dataset_dir,
                             const std::filesystem::path& run_dir);

struct TrainOutcome {
    std::filesystem::path checkpoint_dir;
    EvalReport final_metrics;
};
TrainOutcome run_train(const PipelineConfig& cfg, const std::filesystem::path& dataset_dir,
                       const std::filesystem::path& stage1_dir,
                       const std::filesystem::path& run_dir);

struct EvalOutcome {
    EvalReport report;
    std::filesystem::path report_path;
};
EvalOutcome run_eval(const PipelineConfig& cfg, const std::filesystem::path& checkpoint_dir,
                     const std::filesystem::path& dataset_dir,
                     const std::filesystem::path& run_dir);

struct AttributeOutcome {
    bool empty_result = false;
    size_t sample_count = 0;
    std::filesystem::path csv_path;
};
AttributeOutcome run_attribute(const PipelineConfig& cfg,
                               const std::filesystem::path& checkpoint_dir,
                               const std::filesystem::path& dataset_dir, size_t class_id,
                               size_t subject_id,
                               const std::optional<std::filesystem::path>& roi_path,
                               const std::filesystem::path& run_dir);

struct BaselinesOutcome {
    AlignedClusteringReport kmeans_euclidean;
    AlignedClusteringReport kmeans_cosine;
    LinearBaselines linear;
    std::filesystem::path report_path;
};
BaselinesOutcome run_baselines(const PipelineConfig& cfg,
                               const std::filesystem::path& dataset_dir,
                               const std::filesystem::path& run_dir);

// Deterministic JSON/CSV float formatting shared by all emitters.
std::string format_double(double v);

}  // namespace neurodec
