#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "neurodec/disentangle.hpp"
#include "neurodec/errors.hpp"
#include "neurodec/rng.hpp"
#include "oracles.hpp"

using namespace neurodec;

TEST_CASE("split with identity and rotation bases") {
    // Identity basis: subject part is the first column, object the rest.
    Basis identity;
    identity.matrix = Tensor::identity(4);
    identity.object_dim = 3;
    Rng rng(2);
    Tensor f = Tensor::randn(5, 4, rng);
    auto z = split(f, identity);
    CHECK(z.subject.cols() == 1);
    CHECK(z.object.cols() == 3);
    for (size_t i = 0; i < 5; ++i) {
        CHECK(z.subject.at(i, 0) == f.at(i, 0));
        for (size_t j = 0; j < 3; ++j) CHECK(z.object.at(i, j) == f.at(i, j + 1));
    }

    // 2-d rotation, f = (1, 0): z = B^T f = (0, -1).
    Basis rotation;
    rotation.matrix = Tensor::from_values(2, 2, {0, -1, 1, 0});
    rotation.object_dim = 1;
    Tensor single = Tensor::from_values(1, 2, {1, 0});
    auto zr = split(single, rotation);
    CHECK(zr.subject.at(0, 0) == doctest::Approx(0.0));
    CHECK(zr.object.at(0, 0) == doctest::Approx(-1.0));

    CHECK_THROWS_AS(split(Tensor::zeros(3, 5), identity), DimensionError);
}

TEST_CASE("orthonormal split reconstructs the features") {
    Rng rng(7);
    Mat q = random_orthonormal(8, rng);
    Basis basis;
    basis.matrix = Tensor::from_values(8, 8, q.data);
    basis.object_dim = 5;

    Tensor f = Tensor::randn(6, 8, rng);
    auto z = split(f, basis);
    // Rotate back: f ~= z_subj B_subj^T + z_obj B_obj^T.
    Tensor rebuilt = add(matmul(z.subject, transpose(basis.subject_columns())),
                         matmul(z.object, transpose(basis.object_columns())));
    for (size_t i = 0; i < f.numel(); ++i)
        CHECK(std::abs(rebuilt.values()[i] - f.values()[i]) <= 1e-10);

    // Norm preservation per token.
    for (size_t i = 0; i < 6; ++i) {
        double f_norm = 0.0, z_norm = 0.0;
        for (size_t j = 0; j < 8; ++j) f_norm += f.at(i, j) * f.at(i, j);
        for (size_t j = 0; j < 3; ++j) z_norm += z.subject.at(i, j) * z.subject.at(i, j);
        for (size_t j = 0; j < 5; ++j) z_norm += z.object.at(i, j) * z.object.at(i, j);
        CHECK(std::abs(std::sqrt(f_norm) - std::sqrt(z_norm)) <= 1e-10);
    }

    // Subspace complementarity: B_subj^T B_obj = 0.
    Tensor crossed = matmul(transpose(basis.subject_columns()), basis.object_columns());
    for (double v : crossed.values()) CHECK(std::abs(v) <= 1e-12);
}

TEST_CASE("orthonormal loss values and gradient") {
    Basis eye;
    eye.matrix = Tensor::identity(3);
    eye.object_dim = 2;
    CHECK(orthonormal_loss(eye).scalar_value() == doctest::Approx(0.0));

    Basis doubled;
    doubled.matrix = scale(Tensor::identity(2), 2.0);
    doubled.object_dim = 1;
    CHECK(orthonormal_loss(doubled).scalar_value() == doctest::Approx(18.0));

    Rng rng(11);
    std::vector<double> b0(25);
    for (auto& v : b0) v = rng.normal();
    double err = oracles::gradcheck(5, 5, b0, [](const Tensor& b) {
        Basis basis;
        basis.matrix = b;
        basis.object_dim = 2;
        return orthonormal_loss(basis);
    });
    CHECK(err <= 1e-5);
}

TEST_CASE("change-of-basis coordinates: identity, orthonormal, residual oracle") {
    std::vector<double> v{1.5, -2.0, 3.25};
    auto coords = change_of_basis_coords(Mat::identity(3), v);
    for (size_t i = 0; i < 3; ++i) CHECK(coords[i] == doctest::Approx(v[i]));

    // Orthonormal basis: coordinates equal B^T v.
    Rng rng(13);
    Mat q = random_orthonormal(6, rng);
    std::vector<double> v6(6);
    for (auto& x : v6) x = rng.normal();
    auto w = change_of_basis_coords(q, v6);
    auto bt_v = matvec(transpose(q), v6);
    for (size_t i = 0; i < 6; ++i) CHECK(std::abs(w[i] - bt_v[i]) <= 1e-10);

    // Random invertible basis: B w reconstructs v.
    for (int trial = 0; trial < 20; ++trial) {
        Mat basis = Mat::gaussian(6, 6, rng);
        std::vector<double> target(6);
        for (auto& x : target) x = rng.normal();
        auto coeffs = change_of_basis_coords(basis, target);
        auto rebuilt = matvec(basis, coeffs);
        for (size_t i = 0; i < 6; ++i) CHECK(std::abs(rebuilt[i] - target[i]) <= 1e-9);
    }
}

TEST_CASE("theorem property: 1000 random (v, B) pairs reconstruct") {
    Rng rng(17);
    size_t checked = 0;
    while (checked < 1000) {
        const size_t dim = 2 + rng.uniform_int(9);
        Mat basis = Mat::gaussian(dim, dim, rng);
        std::vector<double> v(dim);
        for (auto& x : v) x = rng.normal();
        std::vector<double> coords;
        try {
            coords = change_of_basis_coords(basis, v);
        } catch (const NumericalError&) {
            continue;  // skip the rare ill-conditioned draw
        }
        auto rebuilt = matvec(basis, coords);
        double residual = 0.0;
        for (size_t i = 0; i < dim; ++i)
            residual = std::max(residual, std::abs(rebuilt[i] - v[i]));
        CHECK(residual <= 1e-9);
        ++checked;
    }
}

TEST_CASE("basis initialization starts orthonormal") {
    Basis b = Basis::init_random_orthonormal(16, 14, 99);
    CHECK(orthonormality_defect(b.snapshot()) <= 1e-10);
    CHECK(b.subject_dim() == 2);
    CHECK_THROWS_AS(Basis::init_random_orthonormal(8, 8, 1), ConfigError);
}

TEST_CASE("polar retraction through the basis interface") {
    Rng rng(23);
    Mat noisy = random_orthonormal(6, rng);
    for (auto& v : noisy.data) v += 0.05 * rng.normal();
    Mat retracted = project_to_orthonormal(noisy);
    CHECK(orthonormality_defect(retracted) <= 1e-10);
}
