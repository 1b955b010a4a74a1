#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "neurodec/linalg.hpp"
#include "neurodec/tensor.hpp"

namespace neurodec {

// Learnable basis B = [B_subj | B_obj] of the shared latent space. The
// partition is positional: the first d - d_obj columns span the
// subject-specific subspace, the rest the object-specific one. Training
// keeps B near-orthonormal through the soft penalty; an exact polar
// retraction is available afterwards.
struct Basis {
    Tensor matrix;      // d x d, trainable
    size_t object_dim;  // d_obj

    static Basis init_random_orthonormal(size_t dim, size_t object_dim, uint64_t seed);

    size_t dim() const { return matrix.rows(); }
    size_t subject_dim() const { return dim() - object_dim; }

    Tensor subject_columns() const;  // d x d_subj
    Tensor object_columns() const;   // d x d_obj

    Mat snapshot() const { return Mat(dim(), dim(), matrix.values()); }
    void load(const Mat& values);
};

struct DisentangledFeatures {
    Tensor subject;  // N x d_subj
    Tensor object;   // N x d_obj
};

// Z_subj = F B_subj, Z_obj = F B_obj; differentiable through both F and B.
DisentangledFeatures split(const Tensor& features, const Basis& basis);

// || B B^T - I ||_F^2 as a differentiable penalty.
Tensor orthonormal_loss(const Basis& basis);

// Coordinates of v in the (not necessarily orthonormal) column basis B:
// solves B w = v. Rejects ill-conditioned bases.
std::vector<double> change_of_basis_coords(const Mat& basis, const std::vector<double>& v,
                                           double max_cond = 1e12);

// Nearest orthonormal matrix (polar factor); see linalg.
Mat project_to_orthonormal(const Mat& basis);

}  // namespace neurodec
