#include "neurodec/optim.hpp"

#include <cmath>

#include "neurodec/errors.hpp"

namespace neurodec {

double cosine_lr(size_t step, size_t total_steps, double base_lr, double warmup_frac) {
    if (total_steps == 0) return 0.0;
    const double warmup = warmup_frac * static_cast<double>(total_steps);
    const double t = static_cast<double>(step);
    if (warmup > 0.0 && t < warmup) return base_lr * t / warmup;
    const double span = static_cast<double>(total_steps) - warmup;
    if (span <= 0.0) return base_lr;
    const double progress = (t - warmup) / span;
    return base_lr * 0.5 * (1.0 + std::cos(3.14159265358979323846 * progress));
}

AdamW::AdamW(std::vector<Tensor> params, AdamWConfig cfg, std::vector<uint8_t> decay_mask)
    : params_(std::move(params)), decay_mask_(std::move(decay_mask)), cfg_(cfg) {
    if (!decay_mask_.empty() && decay_mask_.size() != params_.size())
        throw DimensionError("AdamW: decay mask size does not match parameter count");
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const auto& p : params_) {
        m_.emplace_back(p.numel(), 0.0);
        v_.emplace_back(p.numel(), 0.0);
    }
}

void AdamW::step(double lr) {
    ++step_count_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_count_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_count_));
    for (size_t k = 0; k < params_.size(); ++k) {
        auto& p = params_[k];
        if (!p.has_grad()) continue;  // parameter untouched by this graph
        const double wd =
            (decay_mask_.empty() || decay_mask_[k]) ? cfg_.weight_decay : 0.0;
        const auto& g = p.grad();
        auto& val = p.mutable_values();
        auto& m = m_[k];
        auto& v = v_[k];
        for (size_t i = 0; i < val.size(); ++i) {
            m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
            v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            val[i] -= lr * (mhat / (std::sqrt(vhat) + cfg_.eps) + wd * val[i]);
        }
    }
}

void AdamW::zero_grad() {
    for (auto& p : params_) p.zero_grad();
}

}  // namespace neurodec
