#pragma once

#include <cstdint>
#include <vector>

#include "neurodec/linalg.hpp"

namespace neurodec {

enum class KMeansMetric { Euclidean, Cosine };

struct KMeansResult {
    std::vector<size_t> assignments;
    Mat centroids;
    double objective = 0.0;  // within-cluster sum of distances
    size_t iterations = 0;
};

// Lloyd iterations with k-means++ seeding, multiple restarts keeping the
// best objective. Cosine runs as spherical k-means (unit centroids,
// assignment by similarity). Empty clusters re-seed from the farthest
// point.
KMeansResult kmeans(const Mat& points, size_t k, KMeansMetric metric, uint64_t seed,
                    size_t restarts = 10, size_t max_iter = 300, double tol = 1e-6);

// Nearest-centroid assignment for held-out points.
std::vector<size_t> assign_clusters(const Mat& points, const Mat& centroids,
                                    KMeansMetric metric);

// Maximum-weight perfect matching on a square matrix (Hungarian method);
// returns column assigned to each row.
std::vector<size_t> hungarian_max_assignment(const Mat& weights);

struct AlignedClusteringReport {
    double acc = 0.0;
    double mcc = 0.0;
    std::vector<size_t> cluster_to_class;
};

// Optimally aligns cluster ids with ground-truth classes via the Hungarian
// method on the contingency matrix, then scores the aligned labels.
AlignedClusteringReport align_clusters(const std::vector<size_t>& assignments,
                                       const std::vector<size_t>& truth, size_t k);

struct SubjectBaselineReport {
    double acc = 0.0;
    double mcc = 0.0;
};

struct LinearBaselineConfig {
    double ridge = 1e-8;
    size_t epochs = 30;
    size_t batch_size = 100;
    double learning_rate = 1e-2;
    uint64_t seed = 42;
};

struct LinearBaselines {
    SubjectBaselineReport least_squares;
    SubjectBaselineReport cross_entropy;
};

// (a) ridge-regularized least squares onto one-hot subject ids with argmax
// decision; (b) the same single linear layer trained with cross-entropy.
LinearBaselines linear_subject_baselines(const Mat& train_x,
                                         const std::vector<size_t>& train_y,
                                         const Mat& test_x,
                                         const std::vector<size_t>& test_y,
                                         size_t num_subjects,
                                         const LinearBaselineConfig& cfg = {});

// The closed-form half of (a), exposed for the normal-equations oracle.
Mat least_squares_weights(const Mat& train_x, const std::vector<size_t>& train_y,
                          size_t num_subjects, double ridge);

}  // namespace neurodec
