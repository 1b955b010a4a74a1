#pragma once

#include <cstddef>
#include <vector>

#include "neurodec/linalg.hpp"

namespace neurodec {

// Multi-label ranking metrics over an M x C score matrix against binary
// targets. Classes with no positives (or no negatives, for AUC) cannot be
// scored; they are skipped and reported rather than silently dropped.

struct ApReport {
    double mean_ap = 0.0;
    std::vector<double> per_class;     // NaN for skipped classes
    std::vector<size_t> skipped;
};

// Exact precision-at-each-positive averaging, no interpolation. Ties break
// by original sample index so results are reproducible.
ApReport mean_average_precision(const Mat& scores, const Mat& targets);

struct AucReport {
    double macro = 0.0;
    double micro = 0.0;
    std::vector<double> per_class;
    std::vector<size_t> skipped;
};

// Rank-statistic (Mann-Whitney) formulation with tie mid-ranks.
AucReport roc_auc(const Mat& scores, const Mat& targets);

// Fraction of mismatched bits over all M x C entries.
double hamming_distance(const Mat& predictions, const Mat& targets);

double accuracy(const std::vector<size_t>& predicted, const std::vector<size_t>& truth);

// Multiclass Matthews correlation from the confusion matrix (covariance
// form). A degenerate denominator yields 0 by convention.
double matthews_corrcoef(const std::vector<size_t>& predicted,
                         const std::vector<size_t>& truth, size_t num_classes);

struct EvalReport {
    double map = 0.0;
    double auc = 0.0;
    double hamming = 0.0;
    double acc = 0.0;
    double mcc = 0.0;
    std::vector<double> per_class_ap;
};

}  // namespace neurodec
