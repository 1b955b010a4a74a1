#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "neurodec/rng.hpp"

namespace neurodec {

// Reverse-mode autodiff over dense row-major matrices of doubles.
//
// Every tensor is rank 2; scalars are 1x1 and row vectors 1xn. Ops build an
// implicit tape: each result node records its parents and an adjoint
// closure. backward() linearizes the reachable graph in topological order
// and replays the adjoints once per node, in reverse. Values are treated as
// immutable once an op has consumed them.

struct TensorNode {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<double> value;
    std::vector<double> grad;  // sized lazily by backward()
    bool requires_grad = false;
    std::vector<std::shared_ptr<TensorNode>> parents;
    std::function<void(TensorNode&)> backward_fn;

    size_t numel() const { return rows * cols; }
    void ensure_grad() {
        if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
    }
};

class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(size_t rows, size_t cols, bool requires_grad = false);
    static Tensor full(size_t rows, size_t cols, double fill);
    static Tensor from_values(size_t rows, size_t cols, std::vector<double> data,
                              bool requires_grad = false);
    static Tensor scalar(double v);
    static Tensor identity(size_t n);
    static Tensor randn(size_t rows, size_t cols, Rng& rng, double stddev = 1.0,
                        bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }
    size_t rows() const { return node_->rows; }
    size_t cols() const { return node_->cols; }
    size_t numel() const { return node_->numel(); }

    const std::vector<double>& values() const { return node_->value; }
    std::vector<double>& mutable_values() { return node_->value; }
    double at(size_t r, size_t c) const { return node_->value[r * node_->cols + c]; }
    double scalar_value() const;

    bool requires_grad() const { return node_->requires_grad; }
    bool has_grad() const { return node_->grad.size() == node_->value.size(); }
    const std::vector<double>& grad() const;
    void zero_grad();

    // Runs reverse-mode accumulation from this scalar. Gradients add onto
    // whatever is already stored, so successive backward calls over graphs
    // sharing leaves accumulate (zero_grad between optimizer steps).
    void backward();

    // Same value, cut off from the graph.
    Tensor detach() const;

    std::shared_ptr<TensorNode> node() const { return node_; }

private:
    explicit Tensor(std::shared_ptr<TensorNode> node) : node_(std::move(node)) {}
    std::shared_ptr<TensorNode> node_;

    friend Tensor make_op(size_t rows, size_t cols, std::vector<Tensor> parents,
                          std::function<void(TensorNode&)> backward_fn);
};

enum class Axis { Rows = 0, Cols = 1 };

// ---- core ops -------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor add_bias(const Tensor& a, const Tensor& bias);  // bias is 1 x cols

Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor gelu(const Tensor& a);

// Max-subtraction stabilized; rows (axis=Cols reduces across columns, i.e.
// each row sums to one) or columns.
Tensor softmax(const Tensor& a, Axis axis);

// Row-wise layer norm with per-column affine parameters (1 x cols each).
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps = 1e-5);

// Mean over an axis: Axis::Rows collapses rows (1 x cols result),
// Axis::Cols collapses columns (rows x 1 result).
Tensor mean(const Tensor& a, Axis axis);

Tensor concat(const std::vector<Tensor>& parts, Axis axis);
Tensor slice(const Tensor& a, Axis axis, size_t start, size_t len);
Tensor gather_rows(const Tensor& a, const std::vector<size_t>& indices);
// base with rows[indices[t]] replaced by rows.row(t); indices must be unique.
Tensor scatter_rows(const Tensor& base, const std::vector<size_t>& indices,
                    const Tensor& rows);

// ---- reductions / losses ---------------------------------------------------

Tensor frobenius_norm_sq(const Tensor& a);

// Mean over the batch of -log softmax(logits)[target]; logits is B x S.
Tensor cross_entropy(const Tensor& logits, const std::vector<size_t>& targets);

// Mean over all B x C entries, computed in the stable log-sum-exp form.
Tensor binary_cross_entropy_with_logits(const Tensor& logits, const Tensor& targets);

// ---- raw kernels (exposed for non-graph numerics and oracles) --------------

namespace kernels {
// c += a (m x k) * b (k x n)
void mm_nn(const double* a, const double* b, double* c, size_t m, size_t k, size_t n);
// c += a (m x k) * b^T, b stored (n x k)
void mm_nt(const double* a, const double* b, double* c, size_t m, size_t k, size_t n);
// c += a^T * b, a stored (k x m), b (k x n)
void mm_tn(const double* a, const double* b, double* c, size_t m, size_t k, size_t n);
}  // namespace kernels

}  // namespace neurodec
