#include "neurodec/tensor.hpp"

#include <algorithm>
#include <vector>
#include <cmath>
#include <string>
#include <unordered_set>

#include "neurodec/errors.hpp"

namespace neurodec {

namespace {

std::string shape_str(size_t r, size_t c) {
    return std::to_string(r) + "x" + std::to_string(c);
}

std::string shape_str(const Tensor& t) { return shape_str(t.rows(), t.cols()); }

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a) +
                             " vs " + shape_str(b));
    }
}

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

}  // namespace

namespace kernels {

void mm_nn(const double* a, const double* b, double* c, size_t m, size_t k, size_t n) {
    for (size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            const double* brow = b + p * n;
            for (size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

void mm_nt(const double* a, const double* b, double* c, size_t m, size_t k, size_t n) {
    // b arrives n x k; transposing it once turns the inner loop into the
    // same contiguous accumulation mm_nn vectorizes well.
    thread_local std::vector<double> scratch;
    scratch.resize(k * n);
    for (size_t j = 0; j < n; ++j)
        for (size_t p = 0; p < k; ++p) scratch[p * n + j] = b[j * k + p];
    mm_nn(a, scratch.data(), c, m, k, n);
}

void mm_tn(const double* a, const double* b, double* c, size_t m, size_t k, size_t n) {
    // a stored k x m, result m x n
    for (size_t p = 0; p < k; ++p) {
        const double* arow = a + p * m;
        const double* brow = b + p * n;
        for (size_t i = 0; i < m; ++i) {
            const double av = arow[i];
            double* crow = c + i * n;
            for (size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

}  // namespace kernels

// ---- construction -----------------------------------------------------------

Tensor make_op(size_t rows, size_t cols, std::vector<Tensor> parents,
               std::function<void(TensorNode&)> backward_fn) {
    auto node = std::make_shared<TensorNode>();
    node->rows = rows;
    node->cols = cols;
    node->value.assign(rows * cols, 0.0);
    bool needs = false;
    for (const auto& p : parents) {
        if (p.node()->requires_grad) needs = true;
        node->parents.push_back(p.node());
    }
    node->requires_grad = needs;
    if (needs) node->backward_fn = std::move(backward_fn);
    return Tensor(std::move(node));
}

Tensor Tensor::zeros(size_t rows, size_t cols, bool requires_grad) {
    auto node = std::make_shared<TensorNode>();
    node->rows = rows;
    node->cols = cols;
    node->value.assign(rows * cols, 0.0);
    node->requires_grad = requires_grad;
    return Tensor(std::move(node));
}

Tensor Tensor::full(size_t rows, size_t cols, double fill) {
    Tensor t = zeros(rows, cols, false);
    std::fill(t.node_->value.begin(), t.node_->value.end(), fill);
    return t;
}

Tensor Tensor::from_values(size_t rows, size_t cols, std::vector<double> data,
                           bool requires_grad) {
    if (data.size() != rows * cols) {
        throw DimensionError("from_values: " + std::to_string(data.size()) +
                             " values for shape " + shape_str(rows, cols));
    }
    auto node = std::make_shared<TensorNode>();
    node->rows = rows;
    node->cols = cols;
    node->value = std::move(data);
    node->requires_grad = requires_grad;
    return Tensor(std::move(node));
}

Tensor Tensor::scalar(double v) { return from_values(1, 1, {v}); }

Tensor Tensor::identity(size_t n) {
    Tensor t = zeros(n, n, false);
    for (size_t i = 0; i < n; ++i) t.node_->value[i * n + i] = 1.0;
    return t;
}

Tensor Tensor::randn(size_t rows, size_t cols, Rng& rng, double stddev,
                     bool requires_grad) {
    Tensor t = zeros(rows, cols, requires_grad);
    for (auto& v : t.node_->value) v = rng.normal() * stddev;
    return t;
}

double Tensor::scalar_value() const {
    if (numel() != 1) throw DimensionError("scalar_value on " + shape_str(*this));
    return node_->value[0];
}

const std::vector<double>& Tensor::grad() const {
    if (!has_grad()) throw NumericalError("gradient not populated; call backward()");
    return node_->grad;
}

void Tensor::zero_grad() {
    if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::detach() const {
    auto node = std::make_shared<TensorNode>();
    node->rows = rows();
    node->cols = cols();
    node->value = node_->value;
    return Tensor(std::move(node));
}

// ---- backward ---------------------------------------------------------------

void Tensor::backward() {
    if (numel() != 1) throw DimensionError("backward() requires a scalar root");
    if (!node_->requires_grad) return;

    // Iterative post-order DFS; the resulting list is the replay tape. Each
    // node appears exactly once, parents before children.
    std::vector<TensorNode*> order;
    std::unordered_set<TensorNode*> visited;
    std::vector<std::pair<TensorNode*, size_t>> stack;
    stack.emplace_back(node_.get(), 0);
    visited.insert(node_.get());
    while (!stack.empty()) {
        auto& [node, next_child] = stack.back();
        bool descended = false;
        while (next_child < node->parents.size()) {
            TensorNode* p = node->parents[next_child++].get();
            if (p->requires_grad && !visited.count(p)) {
                visited.insert(p);
                stack.emplace_back(p, 0);
                descended = true;
                break;
            }
        }
        if (!descended && (stack.back().second >= stack.back().first->parents.size())) {
            order.push_back(stack.back().first);
            stack.pop_back();
        }
    }

    // Interior nodes get fresh adjoints every replay; only leaves accumulate
    // across backward calls (that is the cross-graph contract the optimizer
    // relies on).
    for (TensorNode* n : order)
        if (n->backward_fn) n->grad.assign(n->value.size(), 0.0);

    node_->ensure_grad();
    node_->grad[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        TensorNode* n = *it;
        if (n->backward_fn) n->backward_fn(*n);
    }
}

// ---- ops --------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows()) {
        throw DimensionError("matmul: inner dimensions disagree, " + shape_str(a) +
                             " * " + shape_str(b));
    }
    const size_t m = a.rows(), k = a.cols(), n = b.cols();
    Tensor out = make_op(m, n, {a, b}, [m, k, n](TensorNode& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        if (pa.requires_grad) {
            pa.ensure_grad();
            kernels::mm_nt(self.grad.data(), pb.value.data(), pa.grad.data(), m, n, k);
        }
        if (pb.requires_grad) {
            pb.ensure_grad();
            kernels::mm_tn(pa.value.data(), self.grad.data(), pb.grad.data(), k, m, n);
        }
    });
    kernels::mm_nn(a.values().data(), b.values().data(), out.mutable_values().data(),
                   m, k, n);
    return out;
}

Tensor transpose(const Tensor& a) {
    const size_t m = a.rows(), n = a.cols();
    Tensor out = make_op(n, m, {a}, [m, n](TensorNode& self) {
        auto& pa = *self.parents[0];
        pa.ensure_grad();
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < m; ++j) pa.grad[j * n + i] += self.grad[i * m + j];
    });
    auto& v = out.mutable_values();
    const auto& src = a.values();
    for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < n; ++j) v[j * m + i] = src[i * n + j];
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    Tensor out = make_op(a.rows(), a.cols(), {a, b}, [](TensorNode& self) {
        for (size_t side = 0; side < 2; ++side) {
            auto& p = *self.parents[side];
            if (!p.requires_grad) continue;
            p.ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += self.grad[i];
        }
    });
    auto& v = out.mutable_values();
    for (size_t i = 0; i < v.size(); ++i) v[i] = a.values()[i] + b.values()[i];
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    Tensor out = make_op(a.rows(), a.cols(), {a, b}, [](TensorNode& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        if (pa.requires_grad) {
            pa.ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += self.grad[i];
        }
        if (pb.requires_grad) {
            pb.ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) pb.grad[i] -= self.grad[i];
        }
    });
    auto& v = out.mutable_values();
    for (size_t i = 0; i < v.size(); ++i) v[i] = a.values()[i] - b.values()[i];
    return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    Tensor out = make_op(a.rows(), a.cols(), {a, b}, [](TensorNode& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        if (pa.requires_grad) {
            pa.ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i)
                pa.grad[i] += self.grad[i] * pb.value[i];
        }
        if (pb.requires_grad) {
            pb.ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i)
                pb.grad[i] += self.grad[i] * pa.value[i];
        }
    });
    auto& v = out.mutable_values();
    for (size_t i = 0; i < v.size(); ++i) v[i] = a.values()[i] * b.values()[i];
    return out;
}

Tensor scale(const Tensor& a, double s) {
    Tensor out = make_op(a.rows(), a.cols(), {a}, [s](TensorNode& self) {
        auto& pa = *self.parents[0];
        pa.ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += s * self.grad[i];
    });
    auto& v = out.mutable_values();
    for (size_t i = 0; i < v.size(); ++i) v[i] = s * a.values()[i];
    return out;
}

Tensor add_bias(const Tensor& a, const Tensor& bias) {
    if (bias.rows() != 1 || bias.cols() != a.cols()) {
        throw DimensionError("add_bias: bias " + shape_str(bias) + " for input " +
                             shape_str(a));
    }
    const size_t m = a.rows(), n = a.cols();
    Tensor out = make_op(m, n, {a, bias}, [m, n](TensorNode& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        if (pa.requires_grad) {
            pa.ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += self.grad[i];
        }
        if (pb.requires_grad) {
            pb.ensure_grad();
            for (size_t i = 0; i < m; ++i)
                for (size_t j = 0; j < n; ++j) pb.grad[j] += self.grad[i * n + j];
        }
    });
    auto& v = out.mutable_values();
    for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < n; ++j) v[i * n + j] = a.values()[i * n + j] + bias.values()[j];
    return out;
}

Tensor relu(const Tensor& a) {
    Tensor out = make_op(a.rows(), a.cols(), {a}, [](TensorNode& self) {
        auto& pa = *self.parents[0];
        pa.ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i)
            if (pa.value[i] > 0.0) pa.grad[i] += self.grad[i];
    });
    auto& v = out.mutable_values();
    for (size_t i = 0; i < v.size(); ++i) v[i] = a.values()[i] > 0.0 ? a.values()[i] : 0.0;
    return out;
}

Tensor sigmoid(const Tensor& a) {
    Tensor out = make_op(a.rows(), a.cols(), {a}, [](TensorNode& self) {
        auto& pa = *self.parents[0];
        pa.ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) {
            const double s = self.value[i];
            pa.grad[i] += self.grad[i] * s * (1.0 - s);
        }
    });
    auto& v = out.mutable_values();
    for (size_t i = 0; i < v.size(); ++i) v[i] = 1.0 / (1.0 + std::exp(-a.values()[i]));
    return out;
}

Tensor gelu(const Tensor& a) {
    Tensor out = make_op(a.rows(), a.cols(), {a}, [](TensorNode& self) {
        auto& pa = *self.parents[0];
        pa.ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) {
            const double x = pa.value[i];
            const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
            const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
            pa.grad[i] += self.grad[i] * (cdf + x * pdf);
        }
    });
    auto& v = out.mutable_values();
    for (size_t i = 0; i < v.size(); ++i) {
        const double x = a.values()[i];
        v[i] = 0.5 * x * (1.0 + std::erf(x * kInvSqrt2));
    }
    return out;
}

namespace {

// Shared softmax forward over strided lanes: `count` lanes, each of `len`
// entries spaced by `stride`, starting at lane * lane_stride.
void softmax_lanes(const std::vector<double>& in, std::vector<double>& out,
                   size_t count, size_t len, size_t stride, size_t lane_stride) {
    for (size_t lane = 0; lane < count; ++lane) {
        const size_t base = lane * lane_stride;
        double mx = in[base];
        for (size_t i = 1; i < len; ++i) mx = std::max(mx, in[base + i * stride]);
        double sum = 0.0;
        for (size_t i = 0; i < len; ++i) {
            const double e = std::exp(in[base + i * stride] - mx);
            out[base + i * stride] = e;
            sum += e;
        }
        for (size_t i = 0; i < len; ++i) out[base + i * stride] /= sum;
    }
}

}  // namespace

Tensor softmax(const Tensor& a, Axis axis) {
    const size_t m = a.rows(), n = a.cols();
    // Axis::Cols: each row is a lane; Axis::Rows: each column is a lane.
    const size_t count = axis == Axis::Cols ? m : n;
    const size_t len = axis == Axis::Cols ? n : m;
    const size_t stride = axis == Axis::Cols ? 1 : n;
    const size_t lane_stride = axis == Axis::Cols ? n : 1;

    Tensor out = make_op(m, n, {a}, [count, len, stride, lane_stride](TensorNode& self) {
        auto& pa = *self.parents[0];
        pa.ensure_grad();
        for (size_t lane = 0; lane < count; ++lane) {
            const size_t base = lane * lane_stride;
            double dot = 0.0;
            for (size_t i = 0; i < len; ++i) {
                const size_t ix = base + i * stride;
                dot += self.grad[ix] * self.value[ix];
            }
            for (size_t i = 0; i < len; ++i) {
                const size_t ix = base + i * stride;
                pa.grad[ix] += self.value[ix] * (self.grad[ix] - dot);
            }
        }
    });
    softmax_lanes(a.values(), out.mutable_values(), count, len, stride, lane_stride);
    return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
    const size_t m = x.rows(), n = x.cols();
    if (gain.rows() != 1 || gain.cols() != n || bias.rows() != 1 || bias.cols() != n) {
        throw DimensionError("layer_norm: affine params must be 1x" + std::to_string(n));
    }
    Tensor out = make_op(m, n, {x, gain, bias}, [m, n, eps](TensorNode& self) {
        auto& px = *self.parents[0];
        auto& pg = *self.parents[1];
        auto& pb = *self.parents[2];
        if (px.requires_grad) px.ensure_grad();
        if (pg.requires_grad) pg.ensure_grad();
        if (pb.requires_grad) pb.ensure_grad();
        std::vector<double> y(n);
        for (size_t i = 0; i < m; ++i) {
            const double* xr = px.value.data() + i * n;
            const double* gr = self.grad.data() + i * n;
            double mu = 0.0;
            for (size_t j = 0; j < n; ++j) mu += xr[j];
            mu /= static_cast<double>(n);
            double var = 0.0;
            for (size_t j = 0; j < n; ++j) var += (xr[j] - mu) * (xr[j] - mu);
            var /= static_cast<double>(n);
            const double inv_s = 1.0 / std::sqrt(var + eps);
            for (size_t j = 0; j < n; ++j) y[j] = (xr[j] - mu) * inv_s;

            if (pg.requires_grad)
                for (size_t j = 0; j < n; ++j) pg.grad[j] += gr[j] * y[j];
            if (pb.requires_grad)
                for (size_t j = 0; j < n; ++j) pb.grad[j] += gr[j];
            if (px.requires_grad) {
                double mean_dy = 0.0, mean_dyy = 0.0;
                for (size_t j = 0; j < n; ++j) {
                    const double dy = gr[j] * pg.value[j];
                    mean_dy += dy;
                    mean_dyy += dy * y[j];
                }
                mean_dy /= static_cast<double>(n);
                mean_dyy /= static_cast<double>(n);
                double* xg = px.grad.data() + i * n;
                for (size_t j = 0; j < n; ++j) {
                    const double dy = gr[j] * pg.value[j];
                    xg[j] += (dy - mean_dy - y[j] * mean_dyy) * inv_s;
                }
            }
        }
    });
    auto& v = out.mutable_values();
    for (size_t i = 0; i < m; ++i) {
        const double* xr = x.values().data() + i * n;
        double mu = 0.0;
        for (size_t j = 0; j < n; ++j) mu += xr[j];
        mu /= static_cast<double>(n);
        double var = 0.0;
        for (size_t j = 0; j < n; ++j) var += (xr[j] - mu) * (xr[j] - mu);
        var /= static_cast<double>(n);
        const double inv_s = 1.0 / std::sqrt(var + eps);
        for (size_t j = 0; j < n; ++j)
            v[i * n + j] = (xr[j] - mu) * inv_s * gain.values()[j] + bias.values()[j];
    }
    return out;
}

Tensor mean(const Tensor& a, Axis axis) {
    const size_t m = a.rows(), n = a.cols();
    if (axis == Axis::Rows) {
        Tensor out = make_op(1, n, {a}, [m, n](TensorNode& self) {
            auto& pa = *self.parents[0];
            pa.ensure_grad();
            const double inv = 1.0 / static_cast<double>(m);
            for (size_t i = 0; i < m; ++i)
                for (size_t j = 0; j < n; ++j) pa.grad[i * n + j] += self.grad[j] * inv;
        });
        auto& v = out.mutable_values();
        for (size_t i = 0; i < m; ++i)
            for (size_t j = 0; j < n; ++j) v[j] += a.values()[i * n + j];
        for (size_t j = 0; j < n; ++j) v[j] /= static_cast<double>(m);
        return out;
    }
    Tensor out = make_op(m, 1, {a}, [m, n](TensorNode& self) {
        auto& pa = *self.parents[0];
        pa.ensure_grad();
        const double inv = 1.0 / static_cast<double>(n);
        for (size_t i = 0; i < m; ++i)
            for (size_t j = 0; j < n; ++j) pa.grad[i * n + j] += self.grad[i] * inv;
    });
    auto& v = out.mutable_values();
    for (size_t i = 0; i < m; ++i) {
        double acc = 0.0;
        for (size_t j = 0; j < n; ++j) acc += a.values()[i * n + j];
        v[i] = acc / static_cast<double>(n);
    }
    return out;
}

Tensor concat(const std::vector<Tensor>& parts, Axis axis) {
    if (parts.empty()) throw DimensionError("concat: no inputs");
    const size_t fixed = axis == Axis::Rows ? parts[0].cols() : parts[0].rows();
    size_t total = 0;
    for (const auto& p : parts) {
        const size_t f = axis == Axis::Rows ? p.cols() : p.rows();
        if (f != fixed) throw DimensionError("concat: inconsistent shapes");
        total += axis == Axis::Rows ? p.rows() : p.cols();
    }
    const size_t m = axis == Axis::Rows ? total : fixed;
    const size_t n = axis == Axis::Rows ? fixed : total;

    std::vector<size_t> extents(parts.size());
    for (size_t k = 0; k < parts.size(); ++k)
        extents[k] = axis == Axis::Rows ? parts[k].rows() : parts[k].cols();

    Tensor out = make_op(m, n, parts, [axis, extents, m, n](TensorNode& self) {
        size_t offset = 0;
        for (size_t k = 0; k < self.parents.size(); ++k) {
            auto& p = *self.parents[k];
            if (p.requires_grad) {
                p.ensure_grad();
                if (axis == Axis::Rows) {
                    for (size_t i = 0; i < extents[k]; ++i)
                        for (size_t j = 0; j < n; ++j)
                            p.grad[i * n + j] += self.grad[(offset + i) * n + j];
                } else {
                    for (size_t i = 0; i < m; ++i)
                        for (size_t j = 0; j < extents[k]; ++j)
                            p.grad[i * extents[k] + j] += self.grad[i * n + offset + j];
                }
            }
            offset += extents[k];
        }
    });
    auto& v = out.mutable_values();
    size_t offset = 0;
    for (size_t k = 0; k < parts.size(); ++k) {
        const auto& src = parts[k].values();
        if (axis == Axis::Rows) {
            std::copy(src.begin(), src.end(), v.begin() + offset * n);
        } else {
            for (size_t i = 0; i < m; ++i)
                for (size_t j = 0; j < extents[k]; ++j)
                    v[i * n + offset + j] = src[i * extents[k] + j];
        }
        offset += extents[k];
    }
    return out;
}

Tensor slice(const Tensor& a, Axis axis, size_t start, size_t len) {
    const size_t m = a.rows(), n = a.cols();
    const size_t limit = axis == Axis::Rows ? m : n;
    if (start + len > limit) {
        throw DimensionError("slice: [" + std::to_string(start) + ", " +
                             std::to_string(start + len) + ") exceeds extent " +
                             std::to_string(limit));
    }
    const size_t om = axis == Axis::Rows ? len : m;
    const size_t on = axis == Axis::Rows ? n : len;
    Tensor out = make_op(om, on, {a}, [axis, start, om, on, n](TensorNode& self) {
        auto& pa = *self.parents[0];
        pa.ensure_grad();
        if (axis == Axis::Rows) {
            for (size_t i = 0; i < om; ++i)
                for (size_t j = 0; j < on; ++j)
                    pa.grad[(start + i) * n + j] += self.grad[i * on + j];
        } else {
            for (size_t i = 0; i < om; ++i)
                for (size_t j = 0; j < on; ++j)
                    pa.grad[i * n + start + j] += self.grad[i * on + j];
        }
    });
    auto& v = out.mutable_values();
    if (axis == Axis::Rows) {
        std::copy(a.values().begin() + start * n, a.values().begin() + (start + len) * n,
                  v.begin());
    } else {
        for (size_t i = 0; i < om; ++i)
            for (size_t j = 0; j < on; ++j) v[i * on + j] = a.values()[i * n + start + j];
    }
    return out;
}

Tensor gather_rows(const Tensor& a, const std::vector<size_t>& indices) {
    const size_t n = a.cols();
    for (size_t ix : indices)
        if (ix >= a.rows())
            throw DimensionError("gather_rows: index " + std::to_string(ix) +
                                 " out of range for " + std::to_string(a.rows()) + " rows");
    Tensor out = make_op(indices.size(), n, {a}, [indices, n](TensorNode& self) {
        auto& pa = *self.parents[0];
        pa.ensure_grad();
        for (size_t t = 0; t < indices.size(); ++t)
            for (size_t j = 0; j < n; ++j)
                pa.grad[indices[t] * n + j] += self.grad[t * n + j];
    });
    auto& v = out.mutable_values();
    for (size_t t = 0; t < indices.size(); ++t)
        std::copy(a.values().begin() + indices[t] * n,
                  a.values().begin() + (indices[t] + 1) * n, v.begin() + t * n);
    return out;
}

Tensor scatter_rows(const Tensor& base, const std::vector<size_t>& indices,
                    const Tensor& rows) {
    const size_t m = base.rows(), n = base.cols();
    if (rows.rows() != indices.size() || rows.cols() != n) {
        throw DimensionError("scatter_rows: rows " + shape_str(rows) + " for " +
                             std::to_string(indices.size()) + " indices into " +
                             shape_str(base));
    }
    std::unordered_set<size_t> seen;
    for (size_t ix : indices) {
        if (ix >= m) throw DimensionError("scatter_rows: index out of range");
        if (!seen.insert(ix).second) throw DimensionError("scatter_rows: duplicate index");
    }
    Tensor out = make_op(m, n, {base, rows}, [indices, m, n](TensorNode& self) {
        auto& pb = *self.parents[0];
        auto& pr = *self.parents[1];
        if (pb.requires_grad) {
            pb.ensure_grad();
            std::vector<bool> replaced(m, false);
            for (size_t ix : indices) replaced[ix] = true;
            for (size_t i = 0; i < m; ++i) {
                if (replaced[i]) continue;
                for (size_t j = 0; j < n; ++j) pb.grad[i * n + j] += self.grad[i * n + j];
            }
        }
        if (pr.requires_grad) {
            pr.ensure_grad();
            for (size_t t = 0; t < indices.size(); ++t)
                for (size_t j = 0; j < n; ++j)
                    pr.grad[t * n + j] += self.grad[indices[t] * n + j];
        }
    });
    auto& v = out.mutable_values();
    v = base.values();
    for (size_t t = 0; t < indices.size(); ++t)
        std::copy(rows.values().begin() + t * n, rows.values().begin() + (t + 1) * n,
                  v.begin() + indices[t] * n);
    return out;
}

Tensor frobenius_norm_sq(const Tensor& a) {
    Tensor out = make_op(1, 1, {a}, [](TensorNode& self) {
        auto& pa = *self.parents[0];
        pa.ensure_grad();
        const double g = self.grad[0];
        for (size_t i = 0; i < pa.value.size(); ++i) pa.grad[i] += 2.0 * pa.value[i] * g;
    });
    double acc = 0.0;
    for (double v : a.values()) acc += v * v;
    out.mutable_values()[0] = acc;
    return out;
}

Tensor cross_entropy(const Tensor& logits, const std::vector<size_t>& targets) {
    const size_t m = logits.rows(), s = logits.cols();
    if (targets.size() != m) {
        throw DimensionError("cross_entropy: " + std::to_string(targets.size()) +
                             " targets for " + std::to_string(m) + " rows");
    }
    for (size_t t : targets)
        if (t >= s)
            throw std::out_of_range("cross_entropy: target " + std::to_string(t) +
                                    " outside [0, " + std::to_string(s) + ")");
    Tensor out = make_op(1, 1, {logits}, [targets, m, s](TensorNode& self) {
        auto& pa = *self.parents[0];
        pa.ensure_grad();
        const double g = self.grad[0] / static_cast<double>(m);
        std::vector<double> p(s);
        for (size_t i = 0; i < m; ++i) {
            const double* row = pa.value.data() + i * s;
            double mx = row[0];
            for (size_t j = 1; j < s; ++j) mx = std::max(mx, row[j]);
            double sum = 0.0;
            for (size_t j = 0; j < s; ++j) {
                p[j] = std::exp(row[j] - mx);
                sum += p[j];
            }
            for (size_t j = 0; j < s; ++j) {
                double soft = p[j] / sum;
                pa.grad[i * s + j] += g * (soft - (j == targets[i] ? 1.0 : 0.0));
            }
        }
    });
    double loss = 0.0;
    for (size_t i = 0; i < m; ++i) {
        const double* row = logits.values().data() + i * s;
        double mx = row[0];
        for (size_t j = 1; j < s; ++j) mx = std::max(mx, row[j]);
        double sum = 0.0;
        for (size_t j = 0; j < s; ++j) sum += std::exp(row[j] - mx);
        loss += std::log(sum) + mx - row[targets[i]];
    }
    out.mutable_values()[0] = loss / static_cast<double>(m);
    return out;
}

Tensor binary_cross_entropy_with_logits(const Tensor& logits, const Tensor& targets) {
    require_same_shape(logits, targets, "binary_cross_entropy_with_logits");
    for (double y : targets.values())
        if (y != 0.0 && y != 1.0)
            throw DataError("binary_cross_entropy_with_logits: targets must be 0 or 1");
    const size_t total = logits.numel();
    Tensor out = make_op(1, 1, {logits, targets}, [total](TensorNode& self) {
        auto& pa = *self.parents[0];
        auto& pt = *self.parents[1];
        if (!pa.requires_grad) return;
        pa.ensure_grad();
        const double g = self.grad[0] / static_cast<double>(total);
        for (size_t i = 0; i < total; ++i) {
            const double sig = 1.0 / (1.0 + std::exp(-pa.value[i]));
            pa.grad[i] += g * (sig - pt.value[i]);
        }
    });
    double loss = 0.0;
    for (size_t i = 0; i < total; ++i) {
        const double x = logits.values()[i];
        const double y = targets.values()[i];
        loss += std::max(x, 0.0) - x * y + std::log1p(std::exp(-std::abs(x)));
    }
    out.mutable_values()[0] = loss / static_cast<double>(total);
    return out;
}

}  // namespace neurodec
