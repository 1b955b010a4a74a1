#include "neurodec/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "neurodec/errors.hpp"
#include "neurodec/metrics.hpp"
#include "neurodec/optim.hpp"
#include "neurodec/rng.hpp"
#include "neurodec/tensor.hpp"

namespace neurodec {

namespace {

double sq_euclidean(const double* a, const double* b, size_t n) {
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

double norm2(const double* a, size_t n) {
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) acc += a[i] * a[i];
    return std::sqrt(acc);
}

// Cosine distance 1 - cos(a, b); centroids are kept unit-norm.
double cosine_distance(const double* a, const double* b, size_t n, double a_norm) {
    if (a_norm == 0.0) return 1.0;
    double dot = 0.0;
    for (size_t i = 0; i < n; ++i) dot += a[i] * b[i];
    return 1.0 - dot / a_norm;
}

struct LloydRun {
    std::vector<size_t> assignments;
    Mat centroids;
    double objective = std::numeric_limits<double>::infinity();
    size_t iterations = 0;
};

LloydRun lloyd_once(const Mat& points, size_t k, KMeansMetric metric, Rng& rng,
                    size_t max_iter, double tol) {
    const size_t n = points.rows, dim = points.cols;
    std::vector<double> point_norm(n, 0.0);
    if (metric == KMeansMetric::Cosine)
        for (size_t i = 0; i < n; ++i) point_norm[i] = norm2(&points.data[i * dim], dim);

    auto distance = [&](size_t point, const double* centroid) {
        const double* p = &points.data[point * dim];
        return metric == KMeansMetric::Euclidean
                   ? sq_euclidean(p, centroid, dim)
                   : cosine_distance(p, centroid, dim, point_norm[point]);
    };

    // k-means++ seeding.
    Mat centroids(k, dim);
    std::vector<double> best_dist(n, std::numeric_limits<double>::infinity());
    size_t first = static_cast<size_t>(rng.uniform_int(n));
    std::copy_n(&points.data[first * dim], dim, &centroids.data[0]);
    if (metric == KMeansMetric::Cosine) {
        const double nrm = norm2(&centroids.data[0], dim);
        if (nrm > 0)
            for (size_t j = 0; j < dim; ++j) centroids.data[j] /= nrm;
    }
    for (size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (size_t i = 0; i < n; ++i) {
            best_dist[i] = std::min(best_dist[i], distance(i, &centroids.data[(c - 1) * dim]));
            total += best_dist[i];
        }
        size_t chosen = n - 1;
        if (total > 0.0) {
            double target = rng.uniform() * total;
            double acc = 0.0;
            for (size_t i = 0; i < n; ++i) {
                acc += best_dist[i];
                if (acc >= target) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = static_cast<size_t>(rng.uniform_int(n));
        }
        std::copy_n(&points.data[chosen * dim], dim, &centroids.data[c * dim]);
        if (metric == KMeansMetric::Cosine) {
            const double nrm = norm2(&centroids.data[c * dim], dim);
            if (nrm > 0)
                for (size_t j = 0; j < dim; ++j) centroids.data[c * dim + j] /= nrm;
        }
    }

    LloydRun run;
    run.assignments.assign(n, 0);
    std::vector<size_t> counts(k, 0);
    for (size_t iter = 0; iter < max_iter; ++iter) {
        run.iterations = iter + 1;
        double objective = 0.0;
        for (size_t i = 0; i < n; ++i) {
            size_t best = 0;
            double best_d = distance(i, &centroids.data[0]);
            for (size_t c = 1; c < k; ++c) {
                const double d = distance(i, &centroids.data[c * dim]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            run.assignments[i] = best;
            objective += best_d;
        }
        run.objective = objective;

        Mat next(k, dim);
        std::fill(counts.begin(), counts.end(), 0);
        for (size_t i = 0; i < n; ++i) {
            ++counts[run.assignments[i]];
            for (size_t j = 0; j < dim; ++j)
                next.data[run.assignments[i] * dim + j] += points.data[i * dim + j];
        }
        for (size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                // Re-seed from the point farthest from its centroid.
                size_t far = 0;
                double far_d = -1.0;
                for (size_t i = 0; i < n; ++i) {
                    const double d =
                        distance(i, &centroids.data[run.assignments[i] * dim]);
                    if (d > far_d) {
                        far_d = d;
                        far = i;
                    }
                }
                std::copy_n(&points.data[far * dim], dim, &next.data[c * dim]);
                counts[c] = 1;
            }
            const double inv = 1.0 / static_cast<double>(counts[c]);
            for (size_t j = 0; j < dim; ++j) next.data[c * dim + j] *= inv;
            if (metric == KMeansMetric::Cosine) {
                const double nrm = norm2(&next.data[c * dim], dim);
                if (nrm > 0)
                    for (size_t j = 0; j < dim; ++j) next.data[c * dim + j] /= nrm;
            }
        }

        double movement = 0.0;
        for (size_t i = 0; i < k * dim; ++i)
            movement = std::max(movement, std::abs(next.data[i] - centroids.data[i]));
        centroids = std::move(next);
        if (movement < tol) break;
    }
    run.centroids = std::move(centroids);
    return run;
}

}  // namespace

KMeansResult kmeans(const Mat& points, size_t k, KMeansMetric metric, uint64_t seed,
                    size_t restarts, size_t max_iter, double tol) {
    if (k == 0 || points.rows < k)
        throw ConfigError("kmeans: need at least k points, got " +
                          std::to_string(points.rows) + " for k=" + std::to_string(k));
    LloydRun best;
    for (size_t r = 0; r < restarts; ++r) {
        Rng rng(derive_seed(seed, "kmeans-restart-" + std::to_string(r)));
        LloydRun run = lloyd_once(points, k, metric, rng, max_iter, tol);
        if (run.objective < best.objective) best = std::move(run);
    }
    return {std::move(best.assignments), std::move(best.centroids), best.objective,
            best.iterations};
}

std::vector<size_t> assign_clusters(const Mat& points, const Mat& centroids,
                                    KMeansMetric metric) {
    if (points.cols != centroids.cols)
        throw DimensionError("assign_clusters: dimension mismatch");
    const size_t n = points.rows, dim = points.cols, k = centroids.rows;
    std::vector<size_t> assignments(n, 0);
    for (size_t i = 0; i < n; ++i) {
        const double* p = &points.data[i * dim];
        const double p_norm = metric == KMeansMetric::Cosine ? norm2(p, dim) : 0.0;
        double best_d = std::numeric_limits<double>::infinity();
        for (size_t c = 0; c < k; ++c) {
            const double* ctr = &centroids.data[c * dim];
            const double d = metric == KMeansMetric::Euclidean
                                 ? sq_euclidean(p, ctr, dim)
                                 : cosine_distance(p, ctr, dim, p_norm);
            if (d < best_d) {
                best_d = d;
                assignments[i] = c;
            }
        }
    }
    return assignments;
}

std::vector<size_t> hungarian_max_assignment(const Mat& weights) {
    if (weights.rows != weights.cols || weights.rows == 0)
        throw DimensionError("hungarian: square nonempty matrix required");
    const size_t n = weights.rows;
    // Classic potentials formulation on the minimization problem.
    double top = 0.0;
    for (double v : weights.data) top = std::max(top, v);
    auto cost = [&](size_t i, size_t j) { return top - weights.at(i, j); };

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<size_t> match(n + 1, 0);  // column -> row (1-based)
    std::vector<size_t> way(n + 1, 0);
    for (size_t i = 1; i <= n; ++i) {
        match[0] = i;
        size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const size_t i0 = match[j0];
            double delta = inf;
            size_t j1 = 0;
            for (size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<size_t> row_to_col(n, 0);
    for (size_t j = 1; j <= n; ++j)
        if (match[j] != 0) row_to_col[match[j] - 1] = j - 1;
    return row_to_col;
}

AlignedClusteringReport align_clusters(const std::vector<size_t>& assignments,
                                       const std::vector<size_t>& truth, size_t k) {
    if (assignments.size() != truth.size() || truth.empty())
        throw DimensionError("align_clusters: size mismatch or empty input");
    Mat contingency(k, k);
    for (size_t i = 0; i < truth.size(); ++i) {
        if (assignments[i] >= k || truth[i] >= k)
            throw DimensionError("align_clusters: id outside [0, k)");
        contingency.at(assignments[i], truth[i]) += 1.0;
    }
    AlignedClusteringReport report;
    report.cluster_to_class = hungarian_max_assignment(contingency);
    std::vector<size_t> mapped(truth.size());
    for (size_t i = 0; i < truth.size(); ++i)
        mapped[i] = report.cluster_to_class[assignments[i]];
    report.acc = accuracy(mapped, truth);
    report.mcc = matthews_corrcoef(mapped, truth, k);
    return report;
}

Mat least_squares_weights(const Mat& train_x, const std::vector<size_t>& train_y,
                          size_t num_subjects, double ridge) {
    const size_t n = train_x.rows, dim = train_x.cols;
    if (n == 0) throw DataError("least squares baseline: empty training set");
    // Augmented design [X 1].
    Mat x(n, dim + 1);
    for (size_t i = 0; i < n; ++i) {
        std::copy_n(&train_x.data[i * dim], dim, &x.data[i * (dim + 1)]);
        x.at(i, dim) = 1.0;
    }
    Mat onehot(n, num_subjects);
    for (size_t i = 0; i < n; ++i) onehot.at(i, train_y[i]) = 1.0;
    Mat xtx = matmul(transpose(x), x);
    for (size_t j = 0; j < xtx.rows; ++j) xtx.at(j, j) += ridge;
    return cholesky_solve(xtx, matmul(transpose(x), onehot));
}

namespace {

std::vector<size_t> argmax_rows(const Mat& scores) {
    std::vector<size_t> out(scores.rows);
    for (size_t i = 0; i < scores.rows; ++i) {
        size_t best = 0;
        for (size_t j = 1; j < scores.cols; ++j)
            if (scores.at(i, j) > scores.at(i, best)) best = j;
        out[i] = best;
    }
    return out;
}

Mat apply_affine(const Mat& x, const Mat& w) {
    // w is (dim+1) x S with the bias in the last row.
    Mat scores(x.rows, w.cols);
    for (size_t i = 0; i < x.rows; ++i)
        for (size_t j = 0; j < w.cols; ++j) {
            double acc = w.at(x.cols, j);
            for (size_t d = 0; d < x.cols; ++d) acc += x.at(i, d) * w.at(d, j);
            scores.at(i, j) = acc;
        }
    return scores;
}

}  // namespace

LinearBaselines linear_subject_baselines(const Mat& train_x,
                                         const std::vector<size_t>& train_y,
                                         const Mat& test_x,
                                         const std::vector<size_t>& test_y,
                                         size_t num_subjects,
                                         const LinearBaselineConfig& cfg) {
    LinearBaselines out;

    Mat w = least_squares_weights(train_x, train_y, num_subjects, cfg.ridge);
    const auto ls_pred = argmax_rows(apply_affine(test_x, w));
    out.least_squares.acc = accuracy(ls_pred, test_y);
    out.least_squares.mcc = matthews_corrcoef(ls_pred, test_y, num_subjects);

    // Same architecture trained with cross-entropy.
    const size_t dim = train_x.cols;
    Rng init_rng(derive_seed(cfg.seed, "linear-ce-init"));
    Tensor weight = Tensor::randn(dim, num_subjects, init_rng,
                                  1.0 / std::sqrt(static_cast<double>(dim)), true);
    Tensor bias = Tensor::zeros(1, num_subjects, true);
    AdamW opt({weight, bias}, {0.9, 0.999, 1e-8, 0.0});

    Rng order_rng(derive_seed(cfg.seed, "linear-ce-order"));
    std::vector<size_t> order(train_x.rows);
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    const size_t batches = (order.size() + cfg.batch_size - 1) / cfg.batch_size;
    const size_t total_steps = cfg.epochs * batches;
    size_t step = 0;
    for (size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        order_rng.shuffle(order);
        for (size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
            const size_t end = std::min(begin + cfg.batch_size, order.size());
            std::vector<double> batch;
            std::vector<size_t> targets;
            batch.reserve((end - begin) * dim);
            for (size_t i = begin; i < end; ++i) {
                const size_t row = order[i];
                batch.insert(batch.end(), &train_x.data[row * dim],
                             &train_x.data[(row + 1) * dim]);
                targets.push_back(train_y[row]);
            }
            Tensor x = Tensor::from_values(end - begin, dim, std::move(batch));
            Tensor logits = add_bias(matmul(x, weight), bias);
            opt.zero_grad();
            cross_entropy(logits, targets).backward();
            opt.step(cosine_lr(step, total_steps, cfg.learning_rate, 0.1));
            ++step;
        }
    }
    Tensor test = Tensor::from_values(test_x.rows, test_x.cols, test_x.data);
    Tensor logits = add_bias(matmul(test, weight), bias);
    const auto ce_pred = argmax_rows(Mat(test_x.rows, num_subjects, logits.values()));
    out.cross_entropy.acc = accuracy(ce_pred, test_y);
    out.cross_entropy.mcc = matthews_corrcoef(ce_pred, test_y, num_subjects);
    return out;
}

}  // namespace neurodec
