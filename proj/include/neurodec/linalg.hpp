#pragma once

#include <cstddef>
#include <vector>

#include "neurodec/rng.hpp"

namespace neurodec {

// Plain row-major matrix for non-graph numerics (generators, solves,
// analysis). Training math lives in the autodiff Tensor instead.
struct Mat {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<double> data;

    Mat() = default;
    Mat(size_t r, size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    Mat(size_t r, size_t c, std::vector<double> d);

    double& at(size_t i, size_t j) { return data[i * cols + j]; }
    double at(size_t i, size_t j) const { return data[i * cols + j]; }

    static Mat identity(size_t n);
    static Mat gaussian(size_t r, size_t c, Rng& rng, double stddev = 1.0);
};

Mat matmul(const Mat& a, const Mat& b);
Mat transpose(const Mat& a);
std::vector<double> matvec(const Mat& a, const std::vector<double>& x);

double frobenius_norm(const Mat& a);
// ||A A^T - I||_F, the orthonormality defect.
double orthonormality_defect(const Mat& a);

// Random orthonormal square matrix: QR of a Gaussian draw, with the sign
// convention R_ii > 0 so the distribution is Haar and the result unique.
Mat random_orthonormal(size_t n, Rng& rng);

// Gram-Schmidt orthonormal rows (count <= dim), for embedding tables.
Mat random_orthonormal_rows(size_t count, size_t dim, Rng& rng);

// LU decomposition with partial pivoting, reusable across solves.
struct LuFactors {
    Mat lu;
    std::vector<size_t> perm;
    int sign = 1;
};
LuFactors lu_factor(const Mat& a);  // throws NumericalError if singular
std::vector<double> lu_solve(const LuFactors& f, const std::vector<double>& b);

// Exact 1-norm condition number via d solves; fine at desk scale.
double condition_number_1(const Mat& a, const LuFactors& f);

// Solves B w = v; rejects ill-conditioned B (cond_1 > max_cond).
std::vector<double> solve_coordinates(const Mat& basis, const std::vector<double>& v,
                                      double max_cond = 1e12);

// SPD solve via Cholesky, used for ridge least squares.
// a is overwritten conceptually; pass by value.
Mat cholesky_solve(Mat a, const Mat& b);

// Orthogonal polar factor by Newton iteration X <- (X + X^-T)/2.
// Converges quadratically for full-rank input; throws NumericalError
// otherwise.
Mat polar_orthonormal_factor(const Mat& a, double tol = 1e-14, size_t max_iter = 100);

}  // namespace neurodec
