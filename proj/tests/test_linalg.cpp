#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "povmforge/linalg.hpp"

using namespace povmforge;
using namespace povmforge::testing;
using linalg::max_abs;

TEST_CASE("pseudo_inverse identity and rank-deficient diagonal") {
    Matrix id = Matrix::Identity(4, 4);
    CHECK(max_abs(linalg::pseudo_inverse(id) - id) < 1e-12);

    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 1.0;
    CHECK(max_abs(linalg::pseudo_inverse(d) - d) < 1e-12);
}

TEST_CASE("pseudo_inverse satisfies the Penrose conditions on random rank-2 input") {
    SplitMix64 rng(11);
    Matrix a = random_matrix(4, 2, rng);
    Matrix b = random_matrix(2, 4, rng);
    Matrix m = a * b;  // rank 2
    Matrix p = linalg::pseudo_inverse(m);
    CHECK(max_abs(m * p * m - m) < 1e-8);
    CHECK(max_abs(p * m * p - p) < 1e-8);
    CHECK(max_abs((m * p) - (m * p).adjoint()) < 1e-8);
    CHECK(max_abs((p * m) - (p * m).adjoint()) < 1e-8);
}

TEST_CASE("pseudo_inverse rejects non-finite input") {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS((void)linalg::pseudo_inverse(m), std::invalid_argument);
}

TEST_CASE("hermitian_eigen on known spectra") {
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = 1.0;
    auto e = linalg::hermitian_eigen(d);
    CHECK(e.values(0) == doctest::Approx(1.0));
    CHECK(e.values(1) == doctest::Approx(2.0));

    Matrix x(2, 2);
    x << 0, 1, 1, 0;  // Pauli X
    auto ex = linalg::hermitian_eigen(x);
    CHECK(ex.values(0) == doctest::Approx(-1.0));
    CHECK(ex.values(1) == doctest::Approx(1.0));
}

TEST_CASE("hermitian_eigen reconstructs and rejects non-Hermitian") {
    SplitMix64 rng(12);
    Matrix h = random_hermitian(6, rng);
    auto e = linalg::hermitian_eigen(h);
    Matrix rec = e.vectors * e.values.asDiagonal().toDenseMatrix().cast<Cplx>() * e.vectors.adjoint();
    CHECK(max_abs(rec - h) < 1e-9);
    CHECK(max_abs(e.vectors.adjoint() * e.vectors - Matrix::Identity(6, 6)) < 1e-10);

    Matrix bad = random_matrix(3, 3, rng);
    bad(0, 1) += Cplx(2, 1);
    CHECK_THROWS_AS((void)linalg::hermitian_eigen(bad), std::invalid_argument);
}

TEST_CASE("eigenvalue sum equals trace") {
    SplitMix64 rng(13);
    for (int t = 0; t < 20; ++t) {
        Matrix h = random_hermitian(5, rng);
        auto e = linalg::hermitian_eigen(h);
        CHECK(std::abs(e.values.sum() - h.trace().real()) < 1e-9 * (1 + e.values.cwiseAbs().sum()));
    }
}

TEST_CASE("matrix_sqrt_psd") {
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 4.0;
    d(1, 1) = 9.0;
    Matrix s = linalg::matrix_sqrt_psd(d);
    CHECK(s(0, 0).real() == doctest::Approx(2.0));
    CHECK(s(1, 1).real() == doctest::Approx(3.0));

    CHECK(max_abs(linalg::matrix_sqrt_psd(Matrix::Identity(3, 3)) - Matrix::Identity(3, 3)) < 1e-12);

    SplitMix64 rng(14);
    Matrix p = random_psd(5, rng);
    Matrix sp = linalg::matrix_sqrt_psd(p);
    CHECK(max_abs(sp * sp - p) < 1e-8 * (1 + max_abs(p)));

    Matrix neg = Matrix::Identity(2, 2);
    neg(1, 1) = -0.5;
    CHECK_THROWS_AS((void)linalg::matrix_sqrt_psd(neg), std::invalid_argument);
}

TEST_CASE("kron basics and the mixed-product property") {
    Matrix i2 = Matrix::Identity(2, 2);
    CHECK(max_abs(linalg::kron(i2, i2) - Matrix::Identity(4, 4)) < 1e-15);

    Ket e0(2), e1(2);
    e0 << 1, 0;
    e1 << 0, 1;
    Matrix p01 = linalg::kron(linalg::projector(e0), linalg::projector(e1));
    Matrix expect = Matrix::Zero(4, 4);
    expect(1, 1) = 1.0;
    CHECK(max_abs(p01 - expect) < 1e-15);

    SplitMix64 rng(15);
    Matrix a = random_matrix(2, 2, rng), b = random_matrix(2, 2, rng);
    Matrix c = random_matrix(2, 2, rng), d = random_matrix(2, 2, rng);
    CHECK(max_abs(linalg::kron(a, b) * linalg::kron(c, d) - linalg::kron(a * c, b * d)) < 1e-12);
}

TEST_CASE("kron is associative") {
    SplitMix64 rng(17);
    Matrix a = random_matrix(2, 2, rng), b = random_matrix(2, 3, rng), c = random_matrix(3, 2, rng);
    CHECK(max_abs(linalg::kron(linalg::kron(a, b), c) - linalg::kron(a, linalg::kron(b, c))) < 1e-14);
}

TEST_CASE("numerical_rank") {
    SplitMix64 rng(16);
    Matrix a = random_matrix(5, 3, rng);
    Matrix m = a * a.adjoint();
    CHECK(linalg::numerical_rank(m) == 3);
    CHECK(linalg::numerical_rank(Matrix::Zero(4, 4)) == 0);
}
