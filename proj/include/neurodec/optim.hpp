#pragma once

#include <cstddef>
#include <vector>

#include "neurodec/tensor.hpp"

namespace neurodec {

// Cosine learning-rate schedule with linear warmup, as a pure function of
// the step index. Decays to zero at total_steps.
double cosine_lr(size_t step, size_t total_steps, double base_lr, double warmup_frac);

struct AdamWConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.05;
};

// Decoupled-weight-decay Adam over a fixed parameter list. State shapes
// mirror parameter shapes; updates are deterministic functions of
// (params, grads, state, lr). decay_mask, when non-empty, marks which
// parameters receive weight decay (norm-constrained parameters such as the
// basis are exempt).
class AdamW {
public:
    AdamW(std::vector<Tensor> params, AdamWConfig cfg,
          std::vector<uint8_t> decay_mask = {});

    void step(double lr);
    void zero_grad();

    size_t step_count() const { return step_count_; }
    const std::vector<Tensor>& params() const { return params_; }

private:
    std::vector<Tensor> params_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
    std::vector<uint8_t> decay_mask_;
    AdamWConfig cfg_;
    size_t step_count_ = 0;
};

}  // namespace neurodec
