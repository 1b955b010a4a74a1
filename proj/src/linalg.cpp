#include "neurodec/linalg.hpp"

#include <cmath>
#include <string>

#include "neurodec/errors.hpp"
#include "neurodec/tensor.hpp"

namespace neurodec {

Mat::Mat(size_t r, size_t c, std::vector<double> d) : rows(r), cols(c), data(std::move(d)) {
    if (data.size() != rows * cols) throw DimensionError("Mat: data size mismatch");
}

Mat Mat::identity(size_t n) {
    Mat m(n, n);
    for (size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

Mat Mat::gaussian(size_t r, size_t c, Rng& rng, double stddev) {
    Mat m(r, c);
    for (auto& v : m.data) v = rng.normal() * stddev;
    return m;
}

Mat matmul(const Mat& a, const Mat& b) {
    if (a.cols != b.rows)
        throw DimensionError("Mat matmul: " + std::to_string(a.cols) + " vs " +
                             std::to_string(b.rows));
    Mat c(a.rows, b.cols);
    kernels::mm_nn(a.data.data(), b.data.data(), c.data.data(), a.rows, a.cols, b.cols);
    return c;
}

Mat transpose(const Mat& a) {
    Mat t(a.cols, a.rows);
    for (size_t i = 0; i < a.rows; ++i)
        for (size_t j = 0; j < a.cols; ++j) t.at(j, i) = a.at(i, j);
    return t;
}

std::vector<double> matvec(const Mat& a, const std::vector<double>& x) {
    if (x.size() != a.cols) throw DimensionError("matvec: length mismatch");
    std::vector<double> y(a.rows, 0.0);
    for (size_t i = 0; i < a.rows; ++i) {
        double acc = 0.0;
        for (size_t j = 0; j < a.cols; ++j) acc += a.at(i, j) * x[j];
        y[i] = acc;
    }
    return y;
}

double frobenius_norm(const Mat& a) {
    double acc = 0.0;
    for (double v : a.data) acc += v * v;
    return std::sqrt(acc);
}

double orthonormality_defect(const Mat& a) {
    Mat g = matmul(a, transpose(a));
    for (size_t i = 0; i < g.rows; ++i) g.at(i, i) -= 1.0;
    return frobenius_norm(g);
}

Mat random_orthonormal(size_t n, Rng& rng) {
    // Householder-free modified Gram-Schmidt on Gaussian columns.
    Mat g = Mat::gaussian(n, n, rng);
    Mat q(n, n);
    for (size_t j = 0; j < n; ++j) {
        std::vector<double> col(n);
        for (size_t i = 0; i < n; ++i) col[i] = g.at(i, j);
        for (size_t k = 0; k < j; ++k) {
            double dot = 0.0;
            for (size_t i = 0; i < n; ++i) dot += q.at(i, k) * col[i];
            for (size_t i = 0; i < n; ++i) col[i] -= dot * q.at(i, k);
        }
        double norm = 0.0;
        for (double v : col) norm += v * v;
        norm = std::sqrt(norm);
        if (norm < 1e-12) throw NumericalError("random_orthonormal: degenerate draw");
        for (size_t i = 0; i < n; ++i) q.at(i, j) = col[i] / norm;
    }
    return q;
}

Mat random_orthonormal_rows(size_t count, size_t dim, Rng& rng) {
    if (count > dim)
        throw ConfigError("orthonormal rows: " + std::to_string(count) +
                          " rows requested in dimension " + std::to_string(dim));
    Mat q = random_orthonormal(dim, rng);
    Mat out(count, dim);
    for (size_t i = 0; i < count; ++i)
        for (size_t j = 0; j < dim; ++j) out.at(i, j) = q.at(j, i);
    return out;
}

LuFactors lu_factor(const Mat& a) {
    if (a.rows != a.cols) throw DimensionError("lu_factor: square matrix required");
    const size_t n = a.rows;
    LuFactors f{a, std::vector<size_t>(n), 1};
    for (size_t i = 0; i < n; ++i) f.perm[i] = i;
    for (size_t k = 0; k < n; ++k) {
        size_t piv = k;
        double best = std::abs(f.lu.at(k, k));
        for (size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(f.lu.at(i, k));
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best == 0.0) throw NumericalError("lu_factor: singular matrix");
        if (piv != k) {
            for (size_t j = 0; j < n; ++j) std::swap(f.lu.at(piv, j), f.lu.at(k, j));
            std::swap(f.perm[piv], f.perm[k]);
            f.sign = -f.sign;
        }
        const double d = f.lu.at(k, k);
        for (size_t i = k + 1; i < n; ++i) {
            f.lu.at(i, k) /= d;
            const double l = f.lu.at(i, k);
            for (size_t j = k + 1; j < n; ++j) f.lu.at(i, j) -= l * f.lu.at(k, j);
        }
    }
    return f;
}

std::vector<double> lu_solve(const LuFactors& f, const std::vector<double>& b) {
    const size_t n = f.lu.rows;
    if (b.size() != n) throw DimensionError("lu_solve: length mismatch");
    std::vector<double> y(n);
    for (size_t i = 0; i < n; ++i) {
        double acc = b[f.perm[i]];
        for (size_t j = 0; j < i; ++j) acc -= f.lu.at(i, j) * y[j];
        y[i] = acc;
    }
    for (size_t ii = n; ii-- > 0;) {
        double acc = y[ii];
        for (size_t j = ii + 1; j < n; ++j) acc -= f.lu.at(ii, j) * y[j];
        y[ii] = acc / f.lu.at(ii, ii);
    }
    return y;
}

namespace {
double norm1(const Mat& a) {
    double best = 0.0;
    for (size_t j = 0; j < a.cols; ++j) {
        double s = 0.0;
        for (size_t i = 0; i < a.rows; ++i) s += std::abs(a.at(i, j));
        best = std::max(best, s);
    }
    return best;
}
}  // namespace

double condition_number_1(const Mat& a, const LuFactors& f) {
    const size_t n = a.rows;
    double inv_norm = 0.0;
    std::vector<double> e(n, 0.0);
    for (size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        const auto col = lu_solve(f, e);
        e[j] = 0.0;
        double s = 0.0;
        for (double v : col) s += std::abs(v);
        inv_norm = std::max(inv_norm, s);
    }
    return norm1(a) * inv_norm;
}

std::vector<double> solve_coordinates(const Mat& basis, const std::vector<double>& v,
                                      double max_cond) {
    LuFactors f = lu_factor(basis);
    const double cond = condition_number_1(basis, f);
    if (cond > max_cond)
        throw NumericalError("basis is ill-conditioned (cond_1 ~ " + std::to_string(cond) +
                             ")");
    return lu_solve(f, v);
}

Mat cholesky_solve(Mat a, const Mat& b) {
    const size_t n = a.rows;
    if (a.cols != n || b.rows != n) throw DimensionError("cholesky_solve: shape mismatch");
    // In-place lower Cholesky.
    for (size_t j = 0; j < n; ++j) {
        double d = a.at(j, j);
        for (size_t k = 0; k < j; ++k) d -= a.at(j, k) * a.at(j, k);
        if (d <= 0.0) throw NumericalError("cholesky_solve: matrix not positive definite");
        const double l = std::sqrt(d);
        a.at(j, j) = l;
        for (size_t i = j + 1; i < n; ++i) {
            double acc = a.at(i, j);
            for (size_t k = 0; k < j; ++k) acc -= a.at(i, k) * a.at(j, k);
            a.at(i, j) = acc / l;
        }
    }
    Mat x(n, b.cols);
    std::vector<double> y(n);
    for (size_t c = 0; c < b.cols; ++c) {
        for (size_t i = 0; i < n; ++i) {
            double acc = b.at(i, c);
            for (size_t k = 0; k < i; ++k) acc -= a.at(i, k) * y[k];
            y[i] = acc / a.at(i, i);
        }
        for (size_t ii = n; ii-- > 0;) {
            double acc = y[ii];
            for (size_t k = ii + 1; k < n; ++k) acc -= a.at(k, ii) * x.at(k, c);
            x.at(ii, c) = acc / a.at(ii, ii);
        }
    }
    return x;
}

Mat polar_orthonormal_factor(const Mat& a, double tol, size_t max_iter) {
    if (a.rows != a.cols)
        throw DimensionError("polar factor: square matrix required");
    Mat x = a;
    for (size_t it = 0; it < max_iter; ++it) {
        LuFactors f;
        try {
            f = lu_factor(x);
        } catch (const NumericalError&) {
            throw NumericalError("polar factor: rank-deficient matrix");
        }
        // X^-T columns via solves against unit vectors.
        const size_t n = x.rows;
        Mat inv_t(n, n);
        std::vector<double> e(n, 0.0);
        for (size_t j = 0; j < n; ++j) {
            e[j] = 1.0;
            const auto col = lu_solve(f, e);
            e[j] = 0.0;
            for (size_t i = 0; i < n; ++i) inv_t.at(j, i) = col[i];  // transpose on the fly
        }
        double delta = 0.0;
        for (size_t i = 0; i < n * n; ++i) {
            const double next = 0.5 * (x.data[i] + inv_t.data[i]);
            delta = std::max(delta, std::abs(next - x.data[i]));
            x.data[i] = next;
        }
        if (delta < tol && orthonormality_defect(x) < 10 * tol) return x;
    }
    if (orthonormality_defect(x) < 1e-10) return x;
    throw NumericalError("polar factor: no convergence");
}

}  // namespace neurodec
