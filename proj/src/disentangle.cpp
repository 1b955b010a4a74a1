#include "neurodec/disentangle.hpp"

#include <string>

#include "neurodec/errors.hpp"
#include "neurodec/rng.hpp"

namespace neurodec {

Basis Basis::init_random_orthonormal(size_t dim, size_t object_dim, uint64_t seed) {
    if (object_dim == 0 || object_dim >= dim)
        throw ConfigError("basis: object_dim " + std::to_string(object_dim) +
                          " must lie in (0, " + std::to_string(dim) + ")");
    Rng rng(derive_seed(seed, "basis-init"));
    Mat q = random_orthonormal(dim, rng);
    Basis b;
    b.matrix = Tensor::from_values(dim, dim, q.data, /*requires_grad=*/true);
    b.object_dim = object_dim;
    return b;
}

Tensor Basis::subject_columns() const {
    return slice(matrix, Axis::Cols, 0, subject_dim());
}

Tensor Basis::object_columns() const {
    return slice(matrix, Axis::Cols, subject_dim(), object_dim);
}

void Basis::load(const Mat& values) {
    if (values.rows != matrix.rows() || values.cols != matrix.cols())
        throw DimensionError("basis: cannot load matrix of different shape");
    matrix.mutable_values() = values.data;
}

DisentangledFeatures split(const Tensor& features, const Basis& basis) {
    if (features.cols() != basis.dim())
        throw DimensionError("split: features have " + std::to_string(features.cols()) +
                             " columns, basis spans " + std::to_string(basis.dim()));
    return {matmul(features, basis.subject_columns()),
            matmul(features, basis.object_columns())};
}

Tensor orthonormal_loss(const Basis& basis) {
    const Tensor& b = basis.matrix;
    Tensor gram = matmul(b, transpose(b));
    return frobenius_norm_sq(sub(gram, Tensor::identity(b.rows())));
}

std::vector<double> change_of_basis_coords(const Mat& basis, const std::vector<double>& v,
                                           double max_cond) {
    if (basis.rows != basis.cols || basis.rows != v.size())
        throw DimensionError("change_of_basis_coords: basis/vector shape mismatch");
    return solve_coordinates(basis, v, max_cond);
}

Mat project_to_orthonormal(const Mat& basis) {
    return polar_orthonormal_factor(basis);
}

}  // namespace neurodec
