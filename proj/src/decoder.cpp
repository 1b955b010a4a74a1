#include "neurodec/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "neurodec/errors.hpp"

namespace neurodec {

void CrossAttentionConfig::validate() const {
    if (heads == 0 || kv_dim % heads != 0)
        throw ConfigError("cross-attention: kv_dim " + std::to_string(kv_dim) +
                          " must be divisible by heads " + std::to_string(heads));
    if (query_dim == 0) throw ConfigError("cross-attention: query_dim must be positive");
}

CrossAttention CrossAttention::init(CrossAttentionConfig cfg, Rng& rng) {
    cfg.validate();
    CrossAttention c;
    c.cfg = cfg;
    c.query = LinearLayer::init(cfg.query_dim, cfg.kv_dim, rng);
    c.key = LinearLayer::init(cfg.kv_dim, cfg.kv_dim, rng);
    c.value = LinearLayer::init(cfg.kv_dim, cfg.kv_dim, rng);
    c.out = LinearLayer::init(cfg.kv_dim, cfg.kv_dim, rng);
    return c;
}

Tensor CrossAttention::forward(const Tensor& vision, const Tensor& object_tokens) const {
    if (vision.cols() != cfg.query_dim)
        throw DimensionError("cross-attention: query tokens have " +
                             std::to_string(vision.cols()) + " dims, expected " +
                             std::to_string(cfg.query_dim));
    if (object_tokens.cols() != cfg.kv_dim)
        throw DimensionError("cross-attention: key/value tokens have " +
                             std::to_string(object_tokens.cols()) + " dims, expected " +
                             std::to_string(cfg.kv_dim));
    const size_t head_dim = cfg.head_dim();
    const double att_scale = 1.0 / std::sqrt(static_cast<double>(head_dim));

    Tensor q = query.forward(vision);
    Tensor k = key.forward(object_tokens);
    Tensor v = value.forward(object_tokens);

    std::vector<Tensor> heads_out;
    heads_out.reserve(cfg.heads);
    for (size_t h = 0; h < cfg.heads; ++h) {
        Tensor qh = slice(q, Axis::Cols, h * head_dim, head_dim);
        Tensor kh = slice(k, Axis::Cols, h * head_dim, head_dim);
        Tensor vh = slice(v, Axis::Cols, h * head_dim, head_dim);
        Tensor probs = softmax(scale(matmul(qh, transpose(kh)), att_scale), Axis::Cols);
        heads_out.push_back(matmul(probs, vh));
    }
    return out.forward(concat(heads_out, Axis::Cols));
}

void CrossAttention::collect(const std::string& prefix, NamedParams& params) const {
    query.collect(prefix + ".query", params);
    key.collect(prefix + ".key", params);
    value.collect(prefix + ".value", params);
    out.collect(prefix + ".out", params);
}

void DualDecoderConfig::validate(size_t encoder_dim) const {
    if (num_subjects == 0 || num_classes == 0)
        throw ConfigError("decoder: subject and class counts must be positive");
    if (object_dim == 0 || object_dim >= encoder_dim)
        throw ConfigError("decoder: object_dim " + std::to_string(object_dim) +
                          " must lie in (0, " + std::to_string(encoder_dim) + ")");
    CrossAttentionConfig{cross_heads, vision_dim, object_dim}.validate();
}

DualDecoderModel::DualDecoderModel(MaeEncoder encoder, DualDecoderConfig cfg, uint64_t seed)
    : encoder_(std::move(encoder)), cfg_(cfg) {
    cfg_.validate(encoder_.config().dim);
    basis_ = Basis::init_random_orthonormal(encoder_.config().dim, cfg_.object_dim, seed);
    Rng rng(derive_seed(seed, "decoder-heads"));
    subject_head_ = LinearLayer::init(basis_.subject_dim(), cfg_.num_subjects, rng);
    cross_ = CrossAttention::init({cfg_.cross_heads, cfg_.vision_dim, cfg_.object_dim}, rng);
    object_head_ = LinearLayer::init(cfg_.object_dim, cfg_.num_classes, rng);
}

DualDecoderModel::Forward DualDecoderModel::forward(const std::vector<double>& padded,
                                                    const Mat& vision,
                                                    std::vector<Mat>* attention) const {
    Forward f;
    Tensor features = encoder_.encode(padded, attention);
    DisentangledFeatures z = split(features, basis_);
    f.subject_tokens = z.subject;
    f.object_tokens = z.object;
    f.subject_logits = subject_head_.forward(global_average_pool(z.subject));
    f.object_logits = semantic_from_object_tokens(z.object, vision);
    return f;
}

Tensor DualDecoderModel::semantic_from_object_tokens(const Tensor& object_tokens,
                                                     const Mat& vision) const {
    if (!cfg_.use_cross_attention)
        return object_head_.forward(global_average_pool(object_tokens));
    if (vision.rows != cfg_.vision_tokens || vision.cols != cfg_.vision_dim)
        throw DimensionError("decoder: vision features are " + std::to_string(vision.rows) +
                             "x" + std::to_string(vision.cols) + ", expected " +
                             std::to_string(cfg_.vision_tokens) + "x" +
                             std::to_string(cfg_.vision_dim));
    Tensor fx = Tensor::from_values(vision.rows, vision.cols, vision.data);
    Tensor fused = cross_.forward(fx, object_tokens);
    return object_head_.forward(global_average_pool(fused));
}

NamedParams DualDecoderModel::named_params() const {
    NamedParams params;
    encoder_.collect("encoder", params);
    params.emplace_back("basis.matrix", basis_.matrix);
    subject_head_.collect("subject_head", params);
    if (cfg_.use_cross_attention) cross_.collect("cross_attention", params);
    object_head_.collect("object_head", params);
    return params;
}

TotalLoss total_loss(const Tensor& subject_logits, size_t subject_target,
                     const Tensor& object_logits, const std::vector<uint8_t>& labels,
                     const Basis& basis, double lambda, bool use_subject_loss,
                     bool use_orth_loss) {
    if (lambda < 0.0) throw ConfigError("total_loss: lambda must be non-negative");
    std::vector<double> target_bits(labels.begin(), labels.end());
    Tensor obj_loss = binary_cross_entropy_with_logits(
        object_logits, Tensor::from_values(1, labels.size(), std::move(target_bits)));

    TotalLoss breakdown;
    breakdown.object = obj_loss.scalar_value();
    Tensor total = obj_loss;
    if (use_subject_loss) {
        Tensor subj_loss = cross_entropy(subject_logits, {subject_target});
        breakdown.subject = subj_loss.scalar_value();
        total = add(total, subj_loss);
    }
    if (use_orth_loss) {
        Tensor orth = orthonormal_loss(basis);
        breakdown.orth = orth.scalar_value();
        total = add(total, scale(orth, lambda));
    }
    breakdown.total = total;
    return breakdown;
}

namespace {

std::vector<std::vector<double>> snapshot_params(const NamedParams& params) {
    std::vector<std::vector<double>> snap;
    snap.reserve(params.size());
    for (const auto& [name, p] : params) snap.push_back(p.values());
    return snap;
}

void restore_params(NamedParams& params, const std::vector<std::vector<double>>& snap) {
    for (size_t i = 0; i < params.size(); ++i) params[i].second.mutable_values() = snap[i];
}

}  // namespace

Stage2Result train_stage2(DualDecoderModel& model, const std::vector<DecodingSample>& train,
                          const std::vector<DecodingSample>& val, const Stage2Config& cfg) {
    if (train.empty()) throw DataError("stage2: empty training set");

    NamedParams named = model.named_params();
    std::vector<Tensor> params;
    std::vector<uint8_t> decay_mask;
    params.reserve(named.size());
    for (auto& [name, p] : named) {
        params.push_back(p);
        // Weight decay would keep shrinking the basis columns below unit
        // norm, directly fighting the orthonormality penalty; exempt it.
        decay_mask.push_back(name == "basis.matrix" ? 0 : 1);
    }
    AdamW opt(params, {0.9, 0.999, 1e-8, cfg.weight_decay}, std::move(decay_mask));

    Rng order_rng(derive_seed(cfg.seed, "stage2-order"));
    const size_t n = train.size();
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    const size_t batches = (n + cfg.batch_size - 1) / cfg.batch_size;
    const size_t total_steps = cfg.epochs * batches;

    Stage2Result result;
    auto last_good = snapshot_params(named);
    size_t step = 0;
    for (size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        order_rng.shuffle(order);
        EpochMetrics metrics;
        for (size_t begin = 0; begin < n; begin += cfg.batch_size) {
            const size_t end = std::min(begin + cfg.batch_size, n);
            const double inv_batch = 1.0 / static_cast<double>(end - begin);
            opt.zero_grad();
            double batch_subject = 0.0, batch_object = 0.0;
            for (size_t i = begin; i < end; ++i) {
                const DecodingSample& sample = train[order[i]];
                auto fwd = model.forward(sample.padded, sample.vision);
                std::vector<double> bits(sample.labels.begin(), sample.labels.end());
                Tensor obj_loss = binary_cross_entropy_with_logits(
                    fwd.object_logits,
                    Tensor::from_values(1, sample.labels.size(), std::move(bits)));
                Tensor sample_loss = obj_loss;
                batch_object += obj_loss.scalar_value();
                if (cfg.use_subject_loss) {
                    Tensor subj_loss = cross_entropy(fwd.subject_logits, {sample.subject_id});
                    batch_subject += subj_loss.scalar_value();
                    sample_loss = add(sample_loss, subj_loss);
                }
                scale(sample_loss, inv_batch).backward();
            }
            double orth_value = 0.0;
            if (cfg.use_orth_loss) {
                Tensor orth = orthonormal_loss(model.basis());
                orth_value = orth.scalar_value();
                scale(orth, cfg.lambda).backward();
            }
            const double batch_total =
                (batch_subject + batch_object) * inv_batch + cfg.lambda * orth_value;
            if (!std::isfinite(batch_total)) {
                restore_params(named, last_good);
                throw NumericalError("stage2: non-finite loss at epoch " +
                                     std::to_string(epoch) + "; rolled back to last epoch");
            }
            metrics.loss_subject += batch_subject;
            metrics.loss_object += batch_object;
            metrics.loss_orth += orth_value;
            metrics.loss_total += batch_total * static_cast<double>(end - begin);
            opt.step(cosine_lr(step, total_steps, cfg.learning_rate, cfg.warmup_frac));
            ++step;
        }
        metrics.loss_subject /= static_cast<double>(n);
        metrics.loss_object /= static_cast<double>(n);
        metrics.loss_orth /= static_cast<double>(batches);
        metrics.loss_total /= static_cast<double>(n);

        if (!val.empty()) {
            EvalOutputs eval = evaluate_model(model, val, cfg.threshold);
            metrics.val_acc = eval.report.acc;
            metrics.val_map = eval.report.map;
        }
        result.history.push_back(metrics);
        last_good = snapshot_params(named);
    }
    return result;
}

EvalOutputs evaluate_model(const DualDecoderModel& model,
                           const std::vector<DecodingSample>& samples, double threshold) {
    if (samples.empty()) throw DataError("evaluate_model: no samples");
    const size_t num_classes = model.config().num_classes;
    EvalOutputs out;
    out.object_probs = Mat(samples.size(), num_classes);
    out.object_binary = Mat(samples.size(), num_classes);
    out.object_true = Mat(samples.size(), num_classes);
    for (size_t i = 0; i < samples.size(); ++i) {
        const auto& sample = samples[i];
        auto fwd = model.forward(sample.padded, sample.vision);
        size_t best = 0;
        for (size_t s = 1; s < model.config().num_subjects; ++s)
            if (fwd.subject_logits.values()[s] > fwd.subject_logits.values()[best]) best = s;
        out.subject_pred.push_back(best);
        out.subject_true.push_back(sample.subject_id);
        for (size_t c = 0; c < num_classes; ++c) {
            const double prob = 1.0 / (1.0 + std::exp(-fwd.object_logits.values()[c]));
            out.object_probs.at(i, c) = prob;
            out.object_binary.at(i, c) = prob > threshold ? 1.0 : 0.0;
            out.object_true.at(i, c) = sample.labels[c];
        }
    }
    out.report.acc = accuracy(out.subject_pred, out.subject_true);
    out.report.mcc =
        matthews_corrcoef(out.subject_pred, out.subject_true, model.config().num_subjects);
    ApReport ap = mean_average_precision(out.object_probs, out.object_true);
    out.report.map = ap.mean_ap;
    out.report.per_class_ap = ap.per_class;
    out.report.auc = roc_auc(out.object_probs, out.object_true).macro;
    out.report.hamming = hamming_distance(out.object_binary, out.object_true);
    return out;
}

}  // namespace neurodec
