#include "neurodec/encoder.hpp"

#include <algorithm>
#include <cmath>

#include "neurodec/errors.hpp"

namespace neurodec {

void EncoderConfig::validate() const {
    if (patch_size == 0) throw ConfigError("encoder: patch_size must be positive");
    if (dim == 0 || dim % heads != 0)
        throw ConfigError("encoder: dim " + std::to_string(dim) +
                          " must be divisible by heads " + std::to_string(heads));
    if (decoder_dim == 0 || decoder_dim % decoder_heads != 0)
        throw ConfigError("encoder: decoder_dim " + std::to_string(decoder_dim) +
                          " must be divisible by decoder_heads " +
                          std::to_string(decoder_heads));
    if (layers == 0 || decoder_layers == 0)
        throw ConfigError("encoder: layer counts must be positive");
    if (!(mask_ratio > 0.0 && mask_ratio < 1.0))
        throw ConfigError("encoder: mask_ratio must lie in (0, 1)");
}

LinearLayer LinearLayer::init(size_t in, size_t out, Rng& rng) {
    LinearLayer l;
    l.weight = Tensor::randn(in, out, rng, 1.0 / std::sqrt(static_cast<double>(in)), true);
    l.bias = Tensor::zeros(1, out, true);
    return l;
}

void LinearLayer::collect(const std::string& prefix, NamedParams& out) const {
    out.emplace_back(prefix + ".weight", weight);
    out.emplace_back(prefix + ".bias", bias);
}

LayerNormLayer LayerNormLayer::init(size_t dim) {
    LayerNormLayer l;
    l.gain = Tensor::full(1, dim, 1.0);
    l.gain.node()->requires_grad = true;
    l.bias = Tensor::zeros(1, dim, true);
    return l;
}

void LayerNormLayer::collect(const std::string& prefix, NamedParams& out) const {
    out.emplace_back(prefix + ".gain", gain);
    out.emplace_back(prefix + ".bias", bias);
}

TransformerBlock TransformerBlock::init(size_t dim, size_t heads, Rng& rng) {
    TransformerBlock b;
    b.heads = heads;
    b.ln1 = LayerNormLayer::init(dim);
    b.ln2 = LayerNormLayer::init(dim);
    b.query = LinearLayer::init(dim, dim, rng);
    b.key = LinearLayer::init(dim, dim, rng);
    b.value = LinearLayer::init(dim, dim, rng);
    b.out = LinearLayer::init(dim, dim, rng);
    b.mlp_in = LinearLayer::init(dim, 4 * dim, rng);
    b.mlp_out = LinearLayer::init(4 * dim, dim, rng);
    return b;
}

Tensor TransformerBlock::forward(const Tensor& x, Mat* attention) const {
    const size_t tokens = x.rows();
    const size_t dim = x.cols();
    const size_t head_dim = dim / heads;
    const double att_scale = 1.0 / std::sqrt(static_cast<double>(head_dim));

    Tensor h = ln1.forward(x);
    Tensor q = query.forward(h);
    Tensor k = key.forward(h);
    Tensor v = value.forward(h);

    if (attention) *attention = Mat(tokens, tokens);
    std::vector<Tensor> head_outputs;
    head_outputs.reserve(heads);
    for (size_t hd = 0; hd < heads; ++hd) {
        Tensor qh = slice(q, Axis::Cols, hd * head_dim, head_dim);
        Tensor kh = slice(k, Axis::Cols, hd * head_dim, head_dim);
        Tensor vh = slice(v, Axis::Cols, hd * head_dim, head_dim);
        Tensor scores = scale(matmul(qh, transpose(kh)), att_scale);
        Tensor probs = softmax(scores, Axis::Cols);
        if (attention)
            for (size_t i = 0; i < tokens * tokens; ++i)
                attention->data[i] += probs.values()[i] / static_cast<double>(heads);
        head_outputs.push_back(matmul(probs, vh));
    }
    Tensor attended = out.forward(concat(head_outputs, Axis::Cols));
    Tensor mid = add(x, attended);

    Tensor h2 = ln2.forward(mid);
    Tensor expanded = gelu(mlp_in.forward(h2));
    return add(mid, mlp_out.forward(expanded));
}

void TransformerBlock::collect(const std::string& prefix, NamedParams& out_params) const {
    ln1.collect(prefix + ".ln1", out_params);
    ln2.collect(prefix + ".ln2", out_params);
    query.collect(prefix + ".query", out_params);
    key.collect(prefix + ".key", out_params);
    value.collect(prefix + ".value", out_params);
    out.collect(prefix + ".out", out_params);
    mlp_in.collect(prefix + ".mlp_in", out_params);
    mlp_out.collect(prefix + ".mlp_out", out_params);
}

Mat sinusoidal_positions(size_t count, size_t dim) {
    Mat pe(count, dim);
    for (size_t p = 0; p < count; ++p) {
        for (size_t i = 0; i < dim; i += 2) {
            const double rate = std::pow(10000.0, -static_cast<double>(i) /
                                                      static_cast<double>(dim));
            pe.at(p, i) = std::sin(static_cast<double>(p) * rate);
            if (i + 1 < dim) pe.at(p, i + 1) = std::cos(static_cast<double>(p) * rate);
        }
    }
    return pe;
}

std::pair<std::vector<size_t>, std::vector<size_t>> random_mask(size_t count, double ratio,
                                                                Rng& rng) {
    if (!(ratio > 0.0 && ratio < 1.0))
        throw ConfigError("random_mask: ratio must lie in (0, 1)");
    const size_t n_masked = static_cast<size_t>(std::floor(static_cast<double>(count) * ratio));
    std::vector<size_t> masked = rng.sample_without_replacement(count, n_masked);
    std::vector<size_t> visible;
    visible.reserve(count - masked.size());
    size_t next = 0;
    for (size_t i = 0; i < count; ++i) {
        if (next < masked.size() && masked[next] == i)
            ++next;
        else
            visible.push_back(i);
    }
    return {std::move(visible), std::move(masked)};
}

MaeEncoder::MaeEncoder(EncoderConfig cfg, size_t padded_length, uint64_t seed)
    : cfg_(cfg), padded_length_(padded_length) {
    cfg_.validate();
    if (padded_length_ == 0 || padded_length_ % cfg_.patch_size != 0)
        throw ConfigError("encoder: padded length " + std::to_string(padded_length_) +
                          " not divisible by patch size " + std::to_string(cfg_.patch_size));
    seq_len_ = padded_length_ / cfg_.patch_size;

    Rng rng(derive_seed(seed, "encoder-init"));
    patch_proj_ = LinearLayer::init(cfg_.patch_size, cfg_.dim, rng);
    Mat pe = sinusoidal_positions(seq_len_, cfg_.dim);
    pos_enc_ = Tensor::from_values(seq_len_, cfg_.dim, pe.data);
    blocks_.reserve(cfg_.layers);
    for (size_t l = 0; l < cfg_.layers; ++l)
        blocks_.push_back(TransformerBlock::init(cfg_.dim, cfg_.heads, rng));
    final_norm_ = LayerNormLayer::init(cfg_.dim);
}

Tensor MaeEncoder::patch_embed(const std::vector<double>& padded) const {
    if (padded.size() != padded_length_)
        throw DimensionError("patch_embed: got " + std::to_string(padded.size()) +
                             " voxels, expected " + std::to_string(padded_length_));
    Tensor patches = Tensor::from_values(seq_len_, cfg_.patch_size, padded);
    return add(patch_proj_.forward(patches), pos_enc_);
}

Tensor MaeEncoder::forward_tokens(const Tensor& tokens, std::vector<Mat>* attention) const {
    Tensor x = tokens;
    for (const auto& block : blocks_) {
        Mat probs;
        x = block.forward(x, attention ? &probs : nullptr);
        if (attention) attention->push_back(std::move(probs));
    }
    return final_norm_.forward(x);
}

Tensor MaeEncoder::encode(const std::vector<double>& padded,
                          std::vector<Mat>* attention) const {
    return forward_tokens(patch_embed(padded), attention);
}

void MaeEncoder::collect(const std::string& prefix, NamedParams& out) const {
    patch_proj_.collect(prefix + ".patch_proj", out);
    for (size_t l = 0; l < blocks_.size(); ++l)
        blocks_[l].collect(prefix + ".block" + std::to_string(l), out);
    final_norm_.collect(prefix + ".final_norm", out);
}

MaeDecoder::MaeDecoder(const EncoderConfig& cfg, size_t seq_len, uint64_t seed)
    : seq_len_(seq_len) {
    Rng rng(derive_seed(seed, "decoder-init"));
    embed_ = LinearLayer::init(cfg.dim, cfg.decoder_dim, rng);
    mask_token_ = Tensor::randn(1, cfg.decoder_dim, rng, 0.02, true);
    Mat pe = sinusoidal_positions(seq_len_, cfg.decoder_dim);
    pos_enc_ = Tensor::from_values(seq_len_, cfg.decoder_dim, pe.data);
    blocks_.reserve(cfg.decoder_layers);
    for (size_t l = 0; l < cfg.decoder_layers; ++l)
        blocks_.push_back(TransformerBlock::init(cfg.decoder_dim, cfg.decoder_heads, rng));
    final_norm_ = LayerNormLayer::init(cfg.decoder_dim);
    predict_ = LinearLayer::init(cfg.decoder_dim, cfg.patch_size, rng);
}

Tensor MaeDecoder::reconstruct(const Tensor& visible_tokens,
                               const std::vector<size_t>& visible) const {
    Tensor embedded = embed_.forward(visible_tokens);
    Tensor base = matmul(Tensor::full(seq_len_, 1, 1.0), mask_token_);
    Tensor full = add(scatter_rows(base, visible, embedded), pos_enc_);
    for (const auto& block : blocks_) full = block.forward(full);
    return predict_.forward(final_norm_.forward(full));
}

void MaeDecoder::collect(const std::string& prefix, NamedParams& out) const {
    embed_.collect(prefix + ".embed", out);
    out.emplace_back(prefix + ".mask_token", mask_token_);
    for (size_t l = 0; l < blocks_.size(); ++l)
        blocks_[l].collect(prefix + ".block" + std::to_string(l), out);
    final_norm_.collect(prefix + ".final_norm", out);
    predict_.collect(prefix + ".predict", out);
}

Stage1Result pretrain_stage1(MaeEncoder& encoder, MaeDecoder& decoder,
                             const std::vector<std::vector<double>>& padded_train,
                             const Stage1Config& cfg) {
    if (padded_train.empty()) throw DataError("stage1: empty training set");

    NamedParams named;
    encoder.collect("encoder", named);
    decoder.collect("decoder", named);
    std::vector<Tensor> params;
    params.reserve(named.size());
    for (auto& [name, p] : named) params.push_back(p);

    AdamW opt(params, {0.9, 0.999, 1e-8, cfg.weight_decay});
    Rng order_rng(derive_seed(cfg.seed, "stage1-order"));
    Rng mask_rng(derive_seed(cfg.seed, "stage1-mask"));

    const size_t n = padded_train.size();
    const size_t batches_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
    const size_t total_steps = cfg.epochs * batches_per_epoch;
    const size_t patch = encoder.config().patch_size;

    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;

    // Masked MSE of the current weights over (a sample of) the data; the
    // pre/post pair is what loss-halving checks compare.
    auto eval_loss = [&](uint64_t eval_seed) {
        Rng eval_rng(eval_seed);
        const size_t count = std::min<size_t>(n, 200);
        double total = 0.0;
        for (size_t i = 0; i < count; ++i) {
            const auto& padded = padded_train[i];
            Tensor tokens = encoder.patch_embed(padded);
            auto [visible, masked] =
                random_mask(encoder.seq_len(), encoder.config().mask_ratio, eval_rng);
            Tensor enc_out = encoder.forward_tokens(gather_rows(tokens, visible));
            Tensor pred = decoder.reconstruct(enc_out, visible);
            Tensor target = Tensor::from_values(encoder.seq_len(), patch, padded);
            Tensor masked_diff = gather_rows(sub(pred, target), masked);
            total += frobenius_norm_sq(masked_diff).scalar_value() /
                     static_cast<double>(masked.size() * patch);
        }
        return total / static_cast<double>(count);
    };

    Stage1Result result;
    result.initial_loss = eval_loss(derive_seed(cfg.seed, "stage1-eval"));
    size_t step = 0;
    for (size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        order_rng.shuffle(order);
        double epoch_loss = 0.0;
        for (size_t begin = 0; begin < n; begin += cfg.batch_size) {
            const size_t end = std::min(begin + cfg.batch_size, n);
            const double inv_batch = 1.0 / static_cast<double>(end - begin);
            opt.zero_grad();
            for (size_t i = begin; i < end; ++i) {
                const auto& padded = padded_train[order[i]];
                Tensor tokens = encoder.patch_embed(padded);
                auto [visible, masked] =
                    random_mask(encoder.seq_len(), encoder.config().mask_ratio, mask_rng);
                Tensor enc_out = encoder.forward_tokens(gather_rows(tokens, visible));
                Tensor pred = decoder.reconstruct(enc_out, visible);
                Tensor target = Tensor::from_values(encoder.seq_len(), patch, padded);
                Tensor masked_diff = gather_rows(sub(pred, target), masked);
                const double denom = static_cast<double>(masked.size() * patch);
                Tensor loss = scale(frobenius_norm_sq(masked_diff), 1.0 / denom);
                const double loss_value = loss.scalar_value();
                if (!std::isfinite(loss_value))
                    throw NumericalError("stage1: non-finite loss at epoch " +
                                         std::to_string(epoch) + ", sample " +
                                         std::to_string(order[i]));
                epoch_loss += loss_value;
                scale(loss, inv_batch).backward();
            }
            opt.step(cosine_lr(step, total_steps, cfg.learning_rate, cfg.warmup_frac));
            ++step;
        }
        result.epoch_loss.push_back(epoch_loss / static_cast<double>(n));
    }
    result.final_loss = eval_loss(derive_seed(cfg.seed, "stage1-eval"));
    return result;
}

}  // namespace neurodec
