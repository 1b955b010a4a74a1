#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "neurodec/disentangle.hpp"
#include "neurodec/encoder.hpp"
#include "neurodec/metrics.hpp"

namespace neurodec {

struct CrossAttentionConfig {
    size_t heads = 4;
    size_t query_dim = 32;  // d_x
    size_t kv_dim = 56;     // d_obj

    size_t head_dim() const { return kv_dim / heads; }
    void validate() const;
};

// Single multi-head cross-attention block: vision tokens query the
// object-specific neural tokens (keys and values). No residual or MLP;
// output re-projected to kv_dim.
struct CrossAttention {
    CrossAttentionConfig cfg;
    LinearLayer query, key, value, out;

    static CrossAttention init(CrossAttentionConfig cfg, Rng& rng);
    Tensor forward(const Tensor& vision, const Tensor& object_tokens) const;
    void collect(const std::string& prefix, NamedParams& params) const;
};

// GAP over tokens: the class-token builder both heads share.
inline Tensor global_average_pool(const Tensor& tokens) { return mean(tokens, Axis::Rows); }

struct DualDecoderConfig {
    size_t num_subjects = 4;
    size_t num_classes = 8;
    size_t object_dim = 56;  // d_obj; d_subj = d - d_obj
    size_t cross_heads = 4;
    size_t vision_tokens = 17;
    size_t vision_dim = 32;
    bool use_cross_attention = true;

    void validate(size_t encoder_dim) const;
};

// Stage-2 model: the pretrained encoder, the learnable basis, the biometric
// head over Z_subj, and the semantic path (cross-attention + classifier)
// over Z_obj.
class DualDecoderModel {
public:
    DualDecoderModel(MaeEncoder encoder, DualDecoderConfig cfg, uint64_t seed);

    struct Forward {
        Tensor subject_logits;  // 1 x S
        Tensor object_logits;   // 1 x C
        Tensor object_tokens;   // N x d_obj, before cross-attention
        Tensor subject_tokens;  // N x d_subj
    };

    // vision may be empty when cross-attention is disabled.
    Forward forward(const std::vector<double>& padded, const Mat& vision,
                    std::vector<Mat>* attention = nullptr) const;

    // Semantic logits from an externally supplied object feature map
    // (used by the wiring tests).
    Tensor semantic_from_object_tokens(const Tensor& object_tokens, const Mat& vision) const;

    MaeEncoder& encoder() { return encoder_; }
    const MaeEncoder& encoder() const { return encoder_; }
    Basis& basis() { return basis_; }
    const Basis& basis() const { return basis_; }
    const DualDecoderConfig& config() const { return cfg_; }
    const CrossAttention& cross_attention() const { return cross_; }
    const LinearLayer& subject_head() const { return subject_head_; }
    const LinearLayer& object_head() const { return object_head_; }

    NamedParams named_params() const;

private:
    MaeEncoder encoder_;
    DualDecoderConfig cfg_;
    Basis basis_;
    LinearLayer subject_head_;  // d_subj -> S
    CrossAttention cross_;
    LinearLayer object_head_;   // d_obj -> C
};

// Combined objective with per-component breakdown for logging and the
// ablation toggles. Disabled components contribute zero but are still
// reported.
struct TotalLoss {
    Tensor total;
    double subject = 0.0;
    double object = 0.0;
    double orth = 0.0;
};

TotalLoss total_loss(const Tensor& subject_logits, size_t subject_target,
                     const Tensor& object_logits, const std::vector<uint8_t>& labels,
                     const Basis& basis, double lambda, bool use_subject_loss,
                     bool use_orth_loss);

struct DecodingSample {
    std::vector<double> padded;
    size_t subject_id = 0;
    std::vector<uint8_t> labels;
    Mat vision;  // N_x x d_x
};

struct Stage2Config {
    size_t epochs = 15;
    size_t batch_size = 100;
    double learning_rate = 7.5e-4;
    double warmup_frac = 0.1;
    double weight_decay = 0.05;
    double lambda = 0.1;
    bool use_subject_loss = true;
    bool use_orth_loss = true;
    double threshold = 0.5;  // multi-label decision on sigmoid probability
    uint64_t seed = 42;
};

struct EpochMetrics {
    double loss_subject = 0.0;
    double loss_object = 0.0;
    double loss_orth = 0.0;
    double loss_total = 0.0;
    double val_acc = 0.0;
    double val_map = 0.0;
};

struct Stage2Result {
    std::vector<EpochMetrics> history;
};

// End-to-end optimization of encoder, basis, heads and cross-attention with
// AdamW under a cosine schedule. Deterministic under cfg.seed. On a
// non-finite loss the model is rolled back to the last epoch snapshot and a
// NumericalError is thrown.
Stage2Result train_stage2(DualDecoderModel& model, const std::vector<DecodingSample>& train,
                          const std::vector<DecodingSample>& val, const Stage2Config& cfg);

struct EvalOutputs {
    std::vector<size_t> subject_pred;
    std::vector<size_t> subject_true;
    Mat object_probs;   // M x C sigmoid probabilities
    Mat object_binary;  // thresholded predictions
    Mat object_true;
    EvalReport report;
};

EvalOutputs evaluate_model(const DualDecoderModel& model,
                           const std::vector<DecodingSample>& samples,
                           double threshold = 0.5);

}  // namespace neurodec
