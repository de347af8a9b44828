#pragma once

#include <Eigen/Dense>
#include <complex>
#include <utility>
#include <vector>

namespace povmforge {

using Cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Ket = Eigen::VectorXcd;

namespace linalg {

// Default relative singular-value cutoff for rank decisions. The compiler
// tracks effective dimensions symbolically, so this only guards float noise.
inline constexpr double kRankTol = 1e-9;
inline constexpr double kHermTol = 1e-10;

bool is_hermitian(const Matrix& m, double tol = kHermTol);

// Largest absolute entry of m (the tolerance norm used throughout).
double max_abs(const Matrix& m);

// Moore-Penrose pseudoinverse; singular values below tol * sigma_max are
// treated as zero. Throws std::invalid_argument on non-finite input.
Matrix pseudo_inverse(const Matrix& m, double tol = kRankTol);

int numerical_rank(const Matrix& m, double tol = kRankTol);

struct HermitianEigen {
    Eigen::VectorXd values;   // ascending
    Matrix vectors;           // columns are orthonormal eigenvectors
};

// Eigendecomposition of a Hermitian matrix. Throws std::invalid_argument if
// the input is not Hermitian within kHermTol.
HermitianEigen hermitian_eigen(const Matrix& m);

// Principal square root of a PSD matrix; eigenvalues in [-1e-9, 0) are
// clamped to zero, below -1e-6 is an error.
Matrix matrix_sqrt_psd(const Matrix& m);

Matrix kron(const Matrix& a, const Matrix& b);

Matrix dagger(const Matrix& m);

// |v><v|
Matrix projector(const Ket& v);

}  // namespace linalg
}  // namespace povmforge
