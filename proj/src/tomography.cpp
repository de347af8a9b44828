#include "povmforge/tomography.hpp"

#include <cmath>
#include <stdexcept>

namespace povmforge {

int probe_operator_rank(const StateSet& probes) {
    const int d = probes.dim;
    const int m = static_cast<int>(probes.states.size());
    Matrix vecs(d * d, m);
    for (int j = 0; j < m; ++j) {
        Matrix p = linalg::projector(probes.states[j]);
        vecs.col(j) = Eigen::Map<Ket>(p.data(), d * d);
    }
    return linalg::numerical_rank(vecs, 1e-8);
}

MleResult mle_reconstruct(const StateSet& probes, const CountTable& counts,
                          const MleOptions& opts) {
    const int d = probes.dim;
    const int n = counts.n_outcomes;
    const int m = counts.n_probes;
    if (m != static_cast<int>(probes.states.size()))
        throw std::invalid_argument("mle_reconstruct: probe count mismatch");
    if ((counts.rows.array() < 0).any())
        throw std::invalid_argument("mle_reconstruct: negative counts");
    for (int j = 0; j < m; ++j)
        if (counts.rows.col(j).sum() <= 0)
            throw std::invalid_argument("mle_reconstruct: all-zero counts column");
    if (probe_operator_rank(probes) < d * d)
        throw std::invalid_argument("mle_reconstruct: probes not informationally complete");

    std::vector<Matrix> rho(m);
    for (int j = 0; j < m; ++j) rho[j] = linalg::projector(probes.states[j]);

    // frequencies, floored so the likelihood stays finite
    Eigen::MatrixXd f = counts.normalized().rows.cwiseMax(1e-12);
    // renormalize columns after flooring
    for (int j = 0; j < m; ++j) f.col(j) /= f.col(j).sum();

    // interior start proportional to outcome totals
    Eigen::VectorXd totals = counts.rows.rowwise().sum();
    const double grand = totals.sum();
    std::vector<Matrix> e(n);
    for (int i = 0; i < n; ++i) {
        double share = (totals(i) + 1e-6 * grand) / (grand * (1.0 + 1e-6 * n));
        e[i] = share * Matrix::Identity(d, d);
    }

    auto loglik = [&](const std::vector<Matrix>& est) {
        double ll = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) {
                double p = std::max(1e-12, (est[i] * rho[j]).trace().real());
                ll += f(i, j) * std::log(p);
            }
        return ll;
    };

    double ll = loglik(e);
    MleResult result;
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        // R_i = sum_j f_ij / p_ij rho_j
        std::vector<Matrix> r(n);
        Matrix lag = Matrix::Zero(d, d);
        for (int i = 0; i < n; ++i) {
            r[i] = Matrix::Zero(d, d);
            for (int j = 0; j < m; ++j) {
                const double p = std::max(1e-12, (e[i] * rho[j]).trace().real());
                r[i] += (f(i, j) / p) * rho[j];
            }
            lag += r[i] * e[i] * r[i];
        }
        const Matrix lag_isqrt = linalg::pseudo_inverse(
            linalg::matrix_sqrt_psd(0.5 * (lag + lag.adjoint())));
        double delta = 0.0;
        for (int i = 0; i < n; ++i) {
            Matrix en = lag_isqrt * r[i] * e[i] * r[i] * lag_isqrt;
            en = 0.5 * (en + en.adjoint());
            delta = std::max(delta, linalg::max_abs(en - e[i]));
            e[i] = en;
        }
        const double ll_new = loglik(e);
        if (ll_new < ll - 1e-9 * (1 + std::abs(ll)))
            throw std::runtime_error("mle_reconstruct: likelihood decreased");
        const double rel = std::abs(ll_new - ll) / (1 + std::abs(ll_new));
        ll = ll_new;
        if ((it + 1) % opts.invariant_check_stride == 0) {
            Matrix sum = Matrix::Zero(d, d);
            for (const auto& ei : e) {
                sum += ei;
                if (linalg::hermitian_eigen(ei).values(0) < -1e-9)
                    throw std::runtime_error("mle_reconstruct: positivity drift");
            }
            if (linalg::max_abs(sum - Matrix::Identity(d, d)) > 1e-8)
                throw std::runtime_error("mle_reconstruct: completeness drift");
        }
        if (rel < opts.loglik_rel_tol) {
            result.converged = true;
            ++it;
            break;
        }
    }
    result.povm = Povm::from_matrices(d, std::move(e));
    result.log_likelihood = ll;
    result.iterations = it;
    return result;
}

double uhlmann_fidelity(const Matrix& rho, const Matrix& sigma) {
    const Matrix sr = linalg::matrix_sqrt_psd(rho);
    const Matrix inner = sr * sigma * sr;
    auto eig = linalg::hermitian_eigen(0.5 * (inner + inner.adjoint()));
    double tr = 0.0;
    for (Eigen::Index k = 0; k < eig.values.size(); ++k)
        tr += std::sqrt(std::max(0.0, eig.values(k)));
    return tr * tr;
}

double measurement_fidelity(const Povm& exp_povm, const Povm& ideal_povm) {
    if (exp_povm.dim() != ideal_povm.dim() || exp_povm.size() != ideal_povm.size())
        throw std::invalid_argument("measurement_fidelity: shape mismatch");
    const int d = exp_povm.dim();
    double acc = 0.0;
    for (int i = 0; i < exp_povm.size(); ++i) {
        const Matrix& a = exp_povm.element(i);
        const Matrix& b = ideal_povm.element(i);
        const double ta = a.trace().real();
        const double tb = b.trace().real();
        if (ta <= 1e-14 || tb <= 1e-14) continue;  // w_i = 0 convention
        const double w = std::sqrt(ta * tb) / d;
        const double fi = uhlmann_fidelity(a / ta, b / tb);
        acc += w * std::sqrt(std::max(0.0, fi));
    }
    return acc * acc;
}

}  // namespace povmforge
