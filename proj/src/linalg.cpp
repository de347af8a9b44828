#include "povmforge/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

namespace povmforge::linalg {

bool is_hermitian(const Matrix& m, double tol) {
    if (m.rows() != m.cols()) return false;
    return max_abs(m - m.adjoint()) <= tol;
}

double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

Matrix pseudo_inverse(const Matrix& m, double tol) {
    if (!m.allFinite()) throw std::invalid_argument("pseudo_inverse: non-finite entries");
    if (tol <= 0) throw std::invalid_argument("pseudo_inverse: tol must be positive");
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    if (s.size() == 0) return Matrix::Zero(m.cols(), m.rows());
    const double cutoff = tol * s(0);
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
    for (Eigen::Index k = 0; k < s.size(); ++k)
        if (s(k) > cutoff) inv(k) = 1.0 / s(k);
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

int numerical_rank(const Matrix& m, double tol) {
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return 0;
    int r = 0;
    for (Eigen::Index k = 0; k < s.size(); ++k)
        if (s(k) > tol * s(0)) ++r;
    return r;
}

HermitianEigen hermitian_eigen(const Matrix& m) {
    if (!is_hermitian(m))
        throw std::invalid_argument("hermitian_eigen: input is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("hermitian_eigen: decomposition failed");
    return {es.eigenvalues(), es.eigenvectors()};
}

Matrix matrix_sqrt_psd(const Matrix& m) {
    auto eig = hermitian_eigen(m);
    Eigen::VectorXd d = eig.values;
    for (Eigen::Index k = 0; k < d.size(); ++k) {
        if (d(k) < -1e-6)
            throw std::invalid_argument("matrix_sqrt_psd: input is not PSD");
        d(k) = std::sqrt(std::max(0.0, d(k)));
    }
    return eig.vectors * d.asDiagonal() * eig.vectors.adjoint();
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Matrix dagger(const Matrix& m) { return m.adjoint(); }

Matrix projector(const Ket& v) { return v * v.adjoint(); }

}  // namespace povmforge::linalg
