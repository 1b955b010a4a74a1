#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "neurodec/baselines.hpp"
#include "neurodec/errors.hpp"
#include "neurodec/metrics.hpp"
#include "neurodec/rng.hpp"

using namespace neurodec;

namespace {

// O(n^2) pairwise AUC oracle with half-credit ties.
double pairwise_auc(const std::vector<double>& scores, const std::vector<uint8_t>& labels) {
    double wins = 0.0;
    size_t pairs = 0;
    for (size_t i = 0; i < scores.size(); ++i) {
        if (!labels[i]) continue;
        for (size_t j = 0; j < scores.size(); ++j) {
            if (labels[j]) continue;
            ++pairs;
            if (scores[i] > scores[j])
                wins += 1.0;
            else if (scores[i] == scores[j])
                wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

// Brute-force ranked-list AP oracle.
double ranked_ap(const std::vector<double>& scores, const std::vector<uint8_t>& labels) {
    std::vector<size_t> order(scores.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return scores[a] > scores[b]; });
    double ap = 0.0;
    size_t hits = 0, positives = 0;
    for (uint8_t l : labels) positives += l;
    for (size_t rank = 0; rank < order.size(); ++rank)
        if (labels[order[rank]]) {
            ++hits;
            ap += static_cast<double>(hits) / static_cast<double>(rank + 1);
        }
    return ap / static_cast<double>(positives);
}

}  // namespace

TEST_CASE("average precision: hand cases") {
    // Perfect ranking.
    Mat scores(3, 1, {0.9, 0.5, 0.1});
    Mat targets(3, 1, {1, 1, 0});
    CHECK(mean_average_precision(scores, targets).mean_ap == doctest::Approx(1.0));

    // The worked single-class example: AP = (1/1 + 2/3)/2 = 5/6.
    Mat s2(3, 1, {0.9, 0.8, 0.1});
    Mat t2(3, 1, {1, 0, 1});
    CHECK(mean_average_precision(s2, t2).mean_ap == doctest::Approx(5.0 / 6.0));

    // Inverted ranking with a single positive among n: AP = 1/n.
    Mat s3(4, 1, {0.9, 0.8, 0.7, 0.1});
    Mat t3(4, 1, {0, 0, 0, 1});
    CHECK(mean_average_precision(s3, t3).mean_ap == doctest::Approx(0.25));

    // Positive-free classes are skipped and reported.
    Mat s4(2, 2, {0.3, 0.8, 0.6, 0.1});
    Mat t4(2, 2, {1, 0, 0, 0});
    auto report = mean_average_precision(s4, t4);
    CHECK(report.skipped == std::vector<size_t>{1});
    CHECK(std::isnan(report.per_class[1]));

    Mat none(2, 1, {0.1, 0.2});
    Mat empty(2, 1, {0, 0});
    CHECK_THROWS_AS(mean_average_precision(none, empty), MetricError);
}

TEST_CASE("auc: separation, ties, and the pairwise oracle") {
    Mat s(4, 1, {0.9, 0.8, 0.2, 0.1});
    Mat t(4, 1, {1, 1, 0, 0});
    CHECK(roc_auc(s, t).macro == doctest::Approx(1.0));

    Mat tied(4, 1, {0.5, 0.5, 0.5, 0.5});
    CHECK(roc_auc(tied, t).macro == doctest::Approx(0.5));

    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> scores(20);
        std::vector<uint8_t> labels(20);
        bool has_pos = false, has_neg = false;
        for (size_t i = 0; i < 20; ++i) {
            // Coarse quantization forces plenty of ties.
            scores[i] = std::floor(rng.uniform() * 5.0) / 5.0;
            labels[i] = rng.uniform() < 0.4;
            (labels[i] ? has_pos : has_neg) = true;
        }
        if (!has_pos || !has_neg) continue;
        Mat sm(20, 1, scores);
        Mat tm(20, 1, std::vector<double>(labels.begin(), labels.end()));
        CHECK(std::abs(roc_auc(sm, tm).macro - pairwise_auc(scores, labels)) <= 1e-12);
    }
}

TEST_CASE("hamming distance counting") {
    Mat a(2, 5, {1, 0, 1, 0, 1, 0, 1, 0, 1, 0});
    CHECK(hamming_distance(a, a) == 0.0);
    Mat b = a;
    for (auto& v : b.data) v = 1.0 - v;
    CHECK(hamming_distance(a, b) == 1.0);
    Mat c = a;
    c.data[3] = 1.0 - c.data[3];
    CHECK(hamming_distance(a, c) == doctest::Approx(0.1));
    Mat bad = a;
    bad.data[0] = 0.5;
    CHECK_THROWS_AS(hamming_distance(bad, a), DataError);
}

TEST_CASE("mcc: perfect, independent, formula oracle, relabel symmetry") {
    std::vector<size_t> y{0, 1, 2, 0, 1, 2};
    CHECK(matthews_corrcoef(y, y, 3) == doctest::Approx(1.0));

    // Uniform confusion: prediction independent of truth.
    std::vector<size_t> truth, pred;
    for (size_t t = 0; t < 3; ++t)
        for (size_t p = 0; p < 3; ++p) {
            truth.push_back(t);
            pred.push_back(p);
        }
    CHECK(std::abs(matthews_corrcoef(pred, truth, 3)) <= 1e-12);

    // Random case against the direct confusion-matrix formula.
    Rng rng(7);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<size_t> t30(30), p30(30);
        for (size_t i = 0; i < 30; ++i) {
            t30[i] = rng.uniform_int(3);
            p30[i] = rng.uniform_int(3);
        }
        double confusion[3][3] = {};
        for (size_t i = 0; i < 30; ++i) confusion[t30[i]][p30[i]] += 1.0;
        double c = confusion[0][0] + confusion[1][1] + confusion[2][2];
        double s = 30.0, dot = 0.0, p2 = 0.0, t2 = 0.0;
        for (int k = 0; k < 3; ++k) {
            double tk = 0.0, pk = 0.0;
            for (int j = 0; j < 3; ++j) {
                tk += confusion[k][j];
                pk += confusion[j][k];
            }
            dot += tk * pk;
            p2 += pk * pk;
            t2 += tk * tk;
        }
        const double denom = std::sqrt((s * s - p2) * (s * s - t2));
        const double expected = denom == 0.0 ? 0.0 : (c * s - dot) / denom;
        CHECK(std::abs(matthews_corrcoef(p30, t30, 3) - expected) <= 1e-12);

        // Consistent relabeling leaves MCC unchanged.
        auto relabel = [](std::vector<size_t> v) {
            for (auto& x : v) x = (x + 1) % 3;
            return v;
        };
        CHECK(matthews_corrcoef(relabel(p30), relabel(t30), 3) ==
              doctest::Approx(matthews_corrcoef(p30, t30, 3)).epsilon(1e-12));
    }

    // Single-class degenerate denominator reports 0.
    std::vector<size_t> ones(5, 1);
    CHECK(matthews_corrcoef(ones, ones, 3) == 0.0);
}

TEST_CASE("metric invariance under strictly increasing transforms") {
    Rng rng(11);
    Mat scores(15, 2);
    Mat targets(15, 2);
    for (size_t i = 0; i < 15; ++i)
        for (size_t c = 0; c < 2; ++c) {
            scores.at(i, c) = rng.normal();
            targets.at(i, c) = rng.uniform() < 0.5 ? 1.0 : 0.0;
        }
    targets.at(0, 0) = 1.0;
    targets.at(1, 0) = 0.0;
    targets.at(0, 1) = 1.0;
    targets.at(1, 1) = 0.0;
    Mat warped = scores;
    for (auto& v : warped.data) v = std::tanh(v) * 3.0 + 7.0;

    CHECK(mean_average_precision(scores, targets).mean_ap ==
          doctest::Approx(mean_average_precision(warped, targets).mean_ap).epsilon(1e-12));
    CHECK(roc_auc(scores, targets).macro ==
          doctest::Approx(roc_auc(warped, targets).macro).epsilon(1e-12));
}

TEST_CASE("kmeans separable blobs and cosine scale invariance") {
    Rng rng(13);
    Mat points(40, 3);
    std::vector<size_t> truth(40);
    for (size_t i = 0; i < 40; ++i) {
        const bool second = i >= 20;
        truth[i] = second;
        for (size_t j = 0; j < 3; ++j)
            points.at(i, j) = rng.normal() * 0.2 + (second ? 4.0 : -4.0);
    }
    KMeansResult km = kmeans(points, 2, KMeansMetric::Euclidean, 17);
    auto aligned = align_clusters(km.assignments, truth, 2);
    CHECK(aligned.acc == doctest::Approx(1.0));

    // Cosine assignments ignore per-sample positive scaling.
    Mat scaled = points;
    Rng scale_rng(19);
    for (size_t i = 0; i < 40; ++i) {
        const double factor = 0.5 + 3.0 * scale_rng.uniform();
        for (size_t j = 0; j < 3; ++j) scaled.at(i, j) *= factor;
    }
    KMeansResult base = kmeans(points, 2, KMeansMetric::Cosine, 23);
    auto assign_orig = assign_clusters(points, base.centroids, KMeansMetric::Cosine);
    auto assign_scaled = assign_clusters(scaled, base.centroids, KMeansMetric::Cosine);
    CHECK(assign_orig == assign_scaled);
}

TEST_CASE("kmeans objective is non-increasing across iterations") {
    Rng rng(29);
    Mat points = Mat::gaussian(60, 4, rng);
    double prev = std::numeric_limits<double>::infinity();
    for (size_t iters = 1; iters <= 8; ++iters) {
        KMeansResult km =
            kmeans(points, 3, KMeansMetric::Euclidean, 41, /*restarts=*/1, iters, 0.0);
        CHECK(km.objective <= prev + 1e-9);
        prev = km.objective;
    }
}

TEST_CASE("hungarian alignment matches the exhaustive oracle") {
    Rng rng(31);
    for (int trial = 0; trial < 25; ++trial) {
        const size_t k = 2 + rng.uniform_int(4);  // up to 5x5
        Mat w(k, k);
        for (auto& v : w.data) v = std::floor(rng.uniform() * 20.0);

        auto assignment = hungarian_max_assignment(w);
        double got = 0.0;
        for (size_t i = 0; i < k; ++i) got += w.at(i, assignment[i]);

        // Exhaustive best assignment.
        std::vector<size_t> perm(k);
        std::iota(perm.begin(), perm.end(), size_t{0});
        double best = -1.0;
        do {
            double total = 0.0;
            for (size_t i = 0; i < k; ++i) total += w.at(i, perm[i]);
            best = std::max(best, total);
        } while (std::next_permutation(perm.begin(), perm.end()));
        CHECK(got == doctest::Approx(best));
    }

    // The 12-point 2-cluster alignment case.
    std::vector<size_t> assignments{0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1};
    std::vector<size_t> truth{1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 1};
    auto report = align_clusters(assignments, truth, 2);
    // Exhaustive: mapping {0->1, 1->0} scores 10/12; the other 2/12.
    CHECK(report.acc == doctest::Approx(10.0 / 12.0));
}

TEST_CASE("linear baselines: uninformative features and normal equations") {
    Rng rng(37);

    // Constant features: accuracy equals the majority-class rate.
    Mat constant(30, 4);
    for (auto& v : constant.data) v = 1.0;
    std::vector<size_t> labels(30);
    for (size_t i = 0; i < 30; ++i) labels[i] = i < 18 ? 0 : 1;  // 60% class 0
    LinearBaselineConfig cfg;
    cfg.epochs = 5;
    LinearBaselines reports =
        linear_subject_baselines(constant, labels, constant, labels, 2, cfg);
    CHECK(reports.least_squares.acc == doctest::Approx(0.6));

    // Separable data: the closed form solves it.
    Mat x(40, 3);
    std::vector<size_t> y(40);
    for (size_t i = 0; i < 40; ++i) {
        y[i] = i % 2;
        for (size_t j = 0; j < 3; ++j)
            x.at(i, j) = rng.normal() * 0.1 + (y[i] ? 2.0 : -2.0);
    }
    LinearBaselines sep = linear_subject_baselines(x, y, x, y, 2, cfg);
    CHECK(sep.least_squares.acc == doctest::Approx(1.0));

    // Normal equations residual of the closed-form weights.
    Mat w = least_squares_weights(x, y, 2, 1e-8);
    Mat design(40, 4);
    for (size_t i = 0; i < 40; ++i) {
        for (size_t j = 0; j < 3; ++j) design.at(i, j) = x.at(i, j);
        design.at(i, 3) = 1.0;
    }
    Mat onehot(40, 2);
    for (size_t i = 0; i < 40; ++i) onehot.at(i, y[i]) = 1.0;
    Mat xtx = matmul(transpose(design), design);
    for (size_t j = 0; j < 4; ++j) xtx.at(j, j) += 1e-8;
    Mat lhs = matmul(xtx, w);
    Mat rhs = matmul(transpose(design), onehot);
    double scale = 0.0;
    for (double v : rhs.data) scale = std::max(scale, std::abs(v));
    for (size_t i = 0; i < lhs.data.size(); ++i)
        CHECK(std::abs(lhs.data[i] - rhs.data[i]) / scale <= 1e-8);
}
