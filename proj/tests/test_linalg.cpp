#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "neurodec/errors.hpp"
#include "neurodec/linalg.hpp"

using namespace neurodec;

namespace {
Eigen::MatrixXd to_eigen(const Mat& m) {
    Eigen::MatrixXd e(m.rows, m.cols);
    for (size_t i = 0; i < m.rows; ++i)
        for (size_t j = 0; j < m.cols; ++j) e(i, j) = m.at(i, j);
    return e;
}
}  // namespace

TEST_CASE("random orthonormal matrices are orthonormal") {
    Rng rng(3);
    for (size_t n : {2, 5, 16}) {
        Mat q = random_orthonormal(n, rng);
        CHECK(orthonormality_defect(q) <= 1e-12);
    }
    Mat rows = random_orthonormal_rows(3, 8, rng);
    Mat gram = matmul(rows, transpose(rows));
    for (size_t i = 0; i < 3; ++i)
        for (size_t j = 0; j < 3; ++j)
            CHECK(gram.at(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-10));
}

TEST_CASE("lu solve against Eigen") {
    Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        Mat a = Mat::gaussian(6, 6, rng);
        std::vector<double> b(6);
        for (auto& v : b) v = rng.normal();
        auto x = lu_solve(lu_factor(a), b);
        Eigen::VectorXd be(6);
        for (size_t i = 0; i < 6; ++i) be(static_cast<long>(i)) = b[i];
        Eigen::VectorXd xe = to_eigen(a).fullPivLu().solve(be);
        for (size_t i = 0; i < 6; ++i)
            CHECK(x[i] == doctest::Approx(xe(static_cast<long>(i))).epsilon(1e-9));
    }
}

TEST_CASE("condition check rejects near-singular bases") {
    Mat a = Mat::identity(4);
    a.at(3, 3) = 1e-14;
    CHECK_THROWS_AS(solve_coordinates(a, {1, 2, 3, 4}), NumericalError);

    Mat singular(3, 3);  // rank 1
    for (size_t j = 0; j < 3; ++j) singular.at(0, j) = singular.at(1, j) = singular.at(2, j) = 1.0;
    CHECK_THROWS_AS(solve_coordinates(singular, {1, 1, 1}), NumericalError);
}

TEST_CASE("cholesky solve against Eigen") {
    Rng rng(11);
    Mat g = Mat::gaussian(8, 5, rng);
    Mat a = matmul(transpose(g), g);
    for (size_t i = 0; i < 5; ++i) a.at(i, i) += 0.5;
    Mat b = Mat::gaussian(5, 2, rng);
    Mat x = cholesky_solve(a, b);
    Eigen::MatrixXd xe = to_eigen(a).ldlt().solve(to_eigen(b));
    for (size_t i = 0; i < 5; ++i)
        for (size_t j = 0; j < 2; ++j)
            CHECK(x.at(i, j) == doctest::Approx(xe(static_cast<long>(i), static_cast<long>(j)))
                                    .epsilon(1e-9));
}

TEST_CASE("polar factor matches the SVD-based oracle") {
    Rng rng(13);

    // Fixed point: an orthonormal input comes back unchanged.
    Mat q = random_orthonormal(5, rng);
    Mat pq = polar_orthonormal_factor(q);
    for (size_t i = 0; i < q.data.size(); ++i)
        CHECK(pq.data[i] == doctest::Approx(q.data[i]).epsilon(1e-12));

    // Pure scaling is stripped.
    Mat scaled = Mat::identity(3);
    for (auto& v : scaled.data) v *= 2.0;
    Mat ps = polar_orthonormal_factor(scaled);
    for (size_t i = 0; i < 3; ++i)
        for (size_t j = 0; j < 3; ++j)
            CHECK(ps.at(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));

    // Random full-rank inputs: result orthonormal and equal to U V^T from
    // the SVD, which is the nearest orthogonal matrix in Frobenius norm.
    for (int trial = 0; trial < 10; ++trial) {
        Mat a = Mat::gaussian(6, 6, rng);
        Mat p = polar_orthonormal_factor(a);
        CHECK(orthonormality_defect(p) <= 1e-10);

        Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(a),
                                              Eigen::ComputeFullU | Eigen::ComputeFullV);
        Eigen::MatrixXd uv = svd.matrixU() * svd.matrixV().transpose();
        for (size_t i = 0; i < 6; ++i)
            for (size_t j = 0; j < 6; ++j)
                CHECK(p.at(i, j) ==
                      doctest::Approx(uv(static_cast<long>(i), static_cast<long>(j)))
                          .epsilon(1e-8));
    }

    Mat rank_deficient(4, 4);  // all zeros
    CHECK_THROWS_AS(polar_orthonormal_factor(rank_deficient), NumericalError);
}
