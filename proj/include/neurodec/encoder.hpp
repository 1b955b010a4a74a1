#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "neurodec/linalg.hpp"
#include "neurodec/optim.hpp"
#include "neurodec/rng.hpp"
#include "neurodec/tensor.hpp"

namespace neurodec {

using NamedParams = std::vector<std::pair<std::string, Tensor>>;

struct EncoderConfig {
    size_t patch_size = 16;
    size_t dim = 64;
    size_t layers = 4;
    size_t heads = 4;
    size_t decoder_dim = 48;
    size_t decoder_layers = 2;
    size_t decoder_heads = 4;
    double mask_ratio = 0.75;

    void validate() const;  // throws ConfigError
};

struct LinearLayer {
    Tensor weight;  // in x out
    Tensor bias;    // 1 x out

    static LinearLayer init(size_t in, size_t out, Rng& rng);
    Tensor forward(const Tensor& x) const { return add_bias(matmul(x, weight), bias); }
    void collect(const std::string& prefix, NamedParams& out) const;
};

struct LayerNormLayer {
    Tensor gain;
    Tensor bias;

    static LayerNormLayer init(size_t dim);
    Tensor forward(const Tensor& x) const { return layer_norm(x, gain, bias); }
    void collect(const std::string& prefix, NamedParams& out) const;
};

// Pre-norm block: x + Attn(LN(x)), then x + MLP(LN(x)), GELU MLP at 4x
// expansion. When `attention` is non-null the head-averaged attention
// probabilities are copied there.
struct TransformerBlock {
    size_t heads = 1;
    LayerNormLayer ln1, ln2;
    LinearLayer query, key, value, out;
    LinearLayer mlp_in, mlp_out;

    static TransformerBlock init(size_t dim, size_t heads, Rng& rng);
    Tensor forward(const Tensor& x, Mat* attention = nullptr) const;
    void collect(const std::string& prefix, NamedParams& out) const;
};

// Fixed sinusoidal position table, one row per token.
Mat sinusoidal_positions(size_t count, size_t dim);

// floor(count * ratio) masked indices, uniform without replacement;
// returns (visible, masked), both sorted ascending.
std::pair<std::vector<size_t>, std::vector<size_t>> random_mask(size_t count, double ratio,
                                                                Rng& rng);

// ViT-style encoder over voxel patches. After masked-autoencoder
// pretraining it serves as the feature extractor producing N x d tokens.
class MaeEncoder {
public:
    MaeEncoder(EncoderConfig cfg, size_t padded_length, uint64_t seed);

    // Linear patch projection plus fixed positions; padded length must be
    // seq_len * patch_size.
    Tensor patch_embed(const std::vector<double>& padded) const;

    // Runs the block stack and final norm over an already-embedded token
    // set (possibly a visible subset during pretraining).
    Tensor forward_tokens(const Tensor& tokens, std::vector<Mat>* attention = nullptr) const;

    // Full unmasked forward: the neural feature map F.
    Tensor encode(const std::vector<double>& padded,
                  std::vector<Mat>* attention = nullptr) const;

    size_t seq_len() const { return seq_len_; }
    size_t padded_length() const { return padded_length_; }
    const EncoderConfig& config() const { return cfg_; }

    void collect(const std::string& prefix, NamedParams& out) const;

private:
    EncoderConfig cfg_;
    size_t padded_length_ = 0;
    size_t seq_len_ = 0;
    LinearLayer patch_proj_;
    Tensor pos_enc_;  // constant seq_len x dim
    std::vector<TransformerBlock> blocks_;
    LayerNormLayer final_norm_;
};

// Reconstruction decoder used only during stage-1; discarded afterwards.
class MaeDecoder {
public:
    MaeDecoder(const EncoderConfig& cfg, size_t seq_len, uint64_t seed);

    // visible_tokens: encoder output rows for `visible` indices. Returns
    // per-token patch reconstructions (seq_len x patch_size).
    Tensor reconstruct(const Tensor& visible_tokens,
                       const std::vector<size_t>& visible) const;

    void collect(const std::string& prefix, NamedParams& out) const;

private:
    size_t seq_len_ = 0;
    LinearLayer embed_;
    Tensor mask_token_;  // 1 x decoder_dim
    Tensor pos_enc_;     // constant seq_len x decoder_dim
    std::vector<TransformerBlock> blocks_;
    LayerNormLayer final_norm_;
    LinearLayer predict_;
};

struct Stage1Config {
    size_t epochs = 30;
    size_t batch_size = 100;
    double learning_rate = 1e-3;
    double warmup_frac = 0.1;
    double weight_decay = 0.05;
    uint64_t seed = 42;
};

struct Stage1Result {
    std::vector<double> epoch_loss;  // running-mean masked-patch MSE per epoch
    double initial_loss = 0.0;       // eval pass before any update
    double final_loss = 0.0;         // eval pass after training
};

// Self-supervised reconstruction training; optimizes encoder and decoder
// in place. Loss is computed on masked patches only.
Stage1Result pretrain_stage1(MaeEncoder& encoder, MaeDecoder& decoder,
                             const std::vector<std::vector<double>>& padded_train,
                             const Stage1Config& cfg);

}  // namespace neurodec
