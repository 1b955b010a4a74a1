#include "neurodec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "neurodec/errors.hpp"

namespace neurodec {

namespace {

void require_binary(const Mat& m, const char* what) {
    for (double v : m.data)
        if (v != 0.0 && v != 1.0)
            throw DataError(std::string(what) + ": entries must be 0 or 1");
}

void require_same_shape(const Mat& a, const Mat& b, const char* what) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw DimensionError(std::string(what) + ": shape mismatch");
}

}  // namespace

ApReport mean_average_precision(const Mat& scores, const Mat& targets) {
    require_same_shape(scores, targets, "mean_average_precision");
    require_binary(targets, "mean_average_precision targets");
    const size_t m = scores.rows, c = scores.cols;

    ApReport report;
    report.per_class.assign(c, std::numeric_limits<double>::quiet_NaN());
    double sum = 0.0;
    size_t evaluable = 0;
    std::vector<size_t> order(m);
    for (size_t cls = 0; cls < c; ++cls) {
        size_t positives = 0;
        for (size_t i = 0; i < m; ++i) positives += targets.at(i, cls) != 0.0;
        if (positives == 0) {
            report.skipped.push_back(cls);
            continue;
        }
        std::iota(order.begin(), order.end(), size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            return scores.at(a, cls) > scores.at(b, cls);
        });
        double ap = 0.0;
        size_t hits = 0;
        for (size_t rank = 0; rank < m; ++rank) {
            if (targets.at(order[rank], cls) != 0.0) {
                ++hits;
                ap += static_cast<double>(hits) / static_cast<double>(rank + 1);
            }
        }
        ap /= static_cast<double>(positives);
        report.per_class[cls] = ap;
        sum += ap;
        ++evaluable;
    }
    if (evaluable == 0)
        throw MetricError("mean_average_precision: no class has a positive target");
    report.mean_ap = sum / static_cast<double>(evaluable);
    return report;
}

AucReport roc_auc(const Mat& scores, const Mat& targets) {
    require_same_shape(scores, targets, "roc_auc");
    require_binary(targets, "roc_auc targets");
    const size_t m = scores.rows, c = scores.cols;

    // Mid-rank AUC over one score/label column pair.
    auto column_auc = [](const std::vector<double>& s, const std::vector<uint8_t>& y,
                         double* out) {
        const size_t n = s.size();
        size_t pos = 0;
        for (uint8_t v : y) pos += v;
        if (pos == 0 || pos == n) return false;
        std::vector<size_t> order(n);
        std::iota(order.begin(), order.end(), size_t{0});
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return s[a] < s[b]; });
        double rank_sum_pos = 0.0;
        size_t i = 0;
        while (i < n) {
            size_t j = i;
            while (j + 1 < n && s[order[j + 1]] == s[order[i]]) ++j;
            const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
            for (size_t k = i; k <= j; ++k)
                if (y[order[k]]) rank_sum_pos += midrank;
            i = j + 1;
        }
        const double np = static_cast<double>(pos);
        const double nn = static_cast<double>(n - pos);
        *out = (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
        return true;
    };

    AucReport report;
    report.per_class.assign(c, std::numeric_limits<double>::quiet_NaN());
    double sum = 0.0;
    size_t evaluable = 0;
    std::vector<double> col(m);
    std::vector<uint8_t> lab(m);
    for (size_t cls = 0; cls < c; ++cls) {
        for (size_t i = 0; i < m; ++i) {
            col[i] = scores.at(i, cls);
            lab[i] = targets.at(i, cls) != 0.0;
        }
        double auc = 0.0;
        if (!column_auc(col, lab, &auc)) {
            report.skipped.push_back(cls);
            continue;
        }
        report.per_class[cls] = auc;
        sum += auc;
        ++evaluable;
    }
    if (evaluable == 0) throw MetricError("roc_auc: no evaluable class");
    report.macro = sum / static_cast<double>(evaluable);

    std::vector<double> flat_scores;
    std::vector<uint8_t> flat_labels;
    flat_scores.reserve(m * c);
    flat_labels.reserve(m * c);
    for (size_t i = 0; i < m; ++i)
        for (size_t cls = 0; cls < c; ++cls) {
            flat_scores.push_back(scores.at(i, cls));
            flat_labels.push_back(targets.at(i, cls) != 0.0);
        }
    if (!column_auc(flat_scores, flat_labels, &report.micro)) report.micro = 0.5;
    return report;
}

double hamming_distance(const Mat& predictions, const Mat& targets) {
    require_same_shape(predictions, targets, "hamming_distance");
    require_binary(predictions, "hamming_distance predictions");
    require_binary(targets, "hamming_distance targets");
    size_t mismatches = 0;
    for (size_t i = 0; i < predictions.data.size(); ++i)
        mismatches += predictions.data[i] != targets.data[i];
    return static_cast<double>(mismatches) / static_cast<double>(predictions.data.size());
}

double accuracy(const std::vector<size_t>& predicted, const std::vector<size_t>& truth) {
    if (predicted.size() != truth.size() || truth.empty())
        throw DimensionError("accuracy: size mismatch or empty input");
    size_t correct = 0;
    for (size_t i = 0; i < truth.size(); ++i) correct += predicted[i] == truth[i];
    return static_cast<double>(correct) / static_cast<double>(truth.size());
}

double matthews_corrcoef(const std::vector<size_t>& predicted,
                         const std::vector<size_t>& truth, size_t num_classes) {
    if (predicted.size() != truth.size() || truth.empty())
        throw DimensionError("matthews_corrcoef: size mismatch or empty input");
    Mat confusion(num_classes, num_classes);
    for (size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] >= num_classes || predicted[i] >= num_classes)
            throw DimensionError("matthews_corrcoef: label outside [0, S)");
        confusion.at(truth[i], predicted[i]) += 1.0;
    }
    const double s = static_cast<double>(truth.size());
    double trace = 0.0;
    for (size_t k = 0; k < num_classes; ++k) trace += confusion.at(k, k);
    double dot_pt = 0.0, sum_p2 = 0.0, sum_t2 = 0.0;
    for (size_t k = 0; k < num_classes; ++k) {
        double t_k = 0.0, p_k = 0.0;
        for (size_t j = 0; j < num_classes; ++j) {
            t_k += confusion.at(k, j);
            p_k += confusion.at(j, k);
        }
        dot_pt += p_k * t_k;
        sum_p2 += p_k * p_k;
        sum_t2 += t_k * t_k;
    }
    const double denom = std::sqrt((s * s - sum_p2) * (s * s - sum_t2));
    if (denom == 0.0) return 0.0;  // single-class degenerate case
    return (trace * s - dot_pt) / denom;
}

}  // namespace neurodec
