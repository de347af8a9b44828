#include "povmforge/simulator.hpp"

#include <cmath>
#include <stdexcept>

#include "povmforge/rng.hpp"

namespace povmforge {

double PhaseError::max_abs() const {
    double m = 0.0;
    for (const auto& [k, v] : deviations) m = std::max(m, std::abs(v));
    return m;
}

CountTable CountTable::normalized() const {
    CountTable out = *this;
    for (int j = 0; j < n_probes; ++j) {
        const double s = rows.col(j).sum();
        if (s > 0) out.rows.col(j) /= s;
    }
    return out;
}

Eigen::VectorXd simulate(const CircuitProgram& prog, const Ket& phi, const PhaseError* err) {
    const int d = prog.dim;
    const int n = prog.n_outcomes;
    if (phi.size() != d) throw std::invalid_argument("simulate: probe dimension mismatch");
    if (static_cast<int>(prog.modules.size()) != n - 1)
        throw std::invalid_argument("simulate: program needs n-1 modules");
    for (const auto& settings : prog.modules)
        if (static_cast<int>(settings.size()) != d)
            throw std::invalid_argument("simulate: each module needs d settings");

    Ket amp = Ket::Zero(d + 1);
    amp.head(d) = phi;
    Eigen::VectorXd probs(n);
    for (int m = 0; m < static_cast<int>(prog.modules.size()); ++m) {
        const auto& settings = prog.modules[m];
        for (int j = 1; j <= d; ++j) {
            MziSetting s = settings[j - 1];
            if (err) {
                s.alpha += err->get(m + 1, j, PhaseError::Shifter::Alpha);
                s.beta += err->get(m + 1, j, PhaseError::Shifter::Beta);
            }
            const Matrix c = mzi_unitary(s);
            const int r0 = (j < d) ? j - 1 : d - 1;
            const int r1 = (j < d) ? j : d;
            const Cplx a0 = amp(r0), a1 = amp(r1);
            amp(r0) = c(0, 0) * a0 + c(0, 1) * a1;
            amp(r1) = c(1, 0) * a0 + c(1, 1) * a1;
        }
        probs(m) = std::norm(amp(d));
        amp(d) = 0.0;
    }
    probs(n - 1) = amp.head(d).squaredNorm();
    return probs;
}

CountTable sample_counts(const CircuitProgram& prog, const StateSet& probes,
                         std::int64_t shots_per_state, std::uint64_t seed,
                         const PhaseError* err) {
    if (shots_per_state < 1) throw std::invalid_argument("sample_counts: shots must be >= 1");
    const int n = prog.n_outcomes;
    const int m = static_cast<int>(probes.states.size());
    CountTable table(n, m);
    SplitMix64 rng(seed);
    for (int j = 0; j < m; ++j) {
        Eigen::VectorXd p = simulate(prog, probes.states[j], err);
        for (std::int64_t shot = 0; shot < shots_per_state; ++shot) {
            double u = rng.uniform();
            int outcome = n - 1;
            for (int i = 0; i < n; ++i) {
                u -= p(i);
                if (u < 0) { outcome = i; break; }
            }
            table.rows(outcome, j) += 1.0;
        }
    }
    return table;
}

namespace {

// flat parameter layout: 2 entries (alpha, beta) per mzi per module
std::vector<PhaseError::Key> parameter_keys(const CircuitProgram& prog) {
    std::vector<PhaseError::Key> keys;
    for (int m = 1; m <= static_cast<int>(prog.modules.size()); ++m)
        for (int j = 1; j <= prog.dim; ++j) {
            keys.push_back({m, j, PhaseError::Shifter::Alpha});
            keys.push_back({m, j, PhaseError::Shifter::Beta});
        }
    return keys;
}

PhaseError vector_to_error(const std::vector<PhaseError::Key>& keys, const Eigen::VectorXd& x) {
    PhaseError e;
    for (size_t k = 0; k < keys.size(); ++k)
        if (x(k) != 0.0) e.deviations[keys[k]] = x(k);
    return e;
}

Eigen::VectorXd residual_vector(const CircuitProgram& prog, const StateSet& probes,
                                const Eigen::MatrixXd& target,
                                const std::vector<PhaseError::Key>& keys,
                                const Eigen::VectorXd& x) {
    PhaseError e = vector_to_error(keys, x);
    const int n = prog.n_outcomes;
    const int m = static_cast<int>(probes.states.size());
    Eigen::VectorXd r(n * m);
    for (int j = 0; j < m; ++j)
        r.segment(static_cast<Eigen::Index>(j) * n, n) =
            simulate(prog, probes.states[j], &e) - target.col(j);
    return r;
}

}  // namespace

namespace {

// Damped least squares with a Tikhonov minimum-norm bias; the residual
// callback owns the model evaluation.
struct LmOutcome {
    Eigen::VectorXd x;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

LmOutcome lm_minimize(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& residual_of,
                      int np, const CalibrationOptions& opts) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(np);
    Eigen::VectorXd r = residual_of(x);
    const double eps2 = opts.gauge_regularization * opts.gauge_regularization;
    auto total_cost = [&](const Eigen::VectorXd& res, const Eigen::VectorXd& xv) {
        return res.squaredNorm() + eps2 * xv.squaredNorm();
    };
    double cost = total_cost(r, x);
    double lambda = opts.lambda_init;
    int it = 0;
    for (; it < opts.max_iterations && r.squaredNorm() > opts.residual_tol; ++it) {
        Eigen::MatrixXd jac(r.size(), np);
        for (int k = 0; k < np; ++k) {
            Eigen::VectorXd xp = x, xm = x;
            xp(k) += opts.fd_step;
            xm(k) -= opts.fd_step;
            jac.col(k) = (residual_of(xp) - residual_of(xm)) / (2 * opts.fd_step);
        }
        Eigen::MatrixXd jtj = jac.transpose() * jac;
        jtj.diagonal().array() += eps2;
        const Eigen::VectorXd jtr = jac.transpose() * r + eps2 * x;
        bool accepted = false;
        for (int tries = 0; tries < 20; ++tries) {
            Eigen::MatrixXd damped = jtj;
            damped.diagonal().array() += lambda;
            Eigen::VectorXd step = damped.ldlt().solve(jtr);
            Eigen::VectorXd xn = x - step;
            Eigen::VectorXd rn = residual_of(xn);
            const double cn = total_cost(rn, xn);
            if (cn < cost) {
                const bool stalled = cost - cn < 1e-16 * (1 + cost);
                x = xn;
                r = rn;
                cost = cn;
                lambda = std::max(lambda / 10, 1e-12);
                accepted = !stalled;
                break;
            }
            lambda *= 10;
        }
        if (!accepted) break;
    }
    LmOutcome out;
    out.x = x;
    out.residual = r.squaredNorm();
    out.iterations = it;
    out.converged = out.residual <= opts.residual_tol || it < opts.max_iterations;
    return out;
}

}  // namespace

CalibrationResult calibrate(const CircuitProgram& prog, const StateSet& probes,
                            const CountTable& observed, const CalibrationOptions& opts) {
    if (observed.n_outcomes != prog.n_outcomes ||
        observed.n_probes != static_cast<int>(probes.states.size()))
        throw std::invalid_argument("calibrate: table dimensions mismatch");
    const Eigen::MatrixXd target = observed.normalized().rows;
    const auto keys = parameter_keys(prog);
    const int np = static_cast<int>(keys.size());

    auto res = lm_minimize(
        [&](const Eigen::VectorXd& x) { return residual_vector(prog, probes, target, keys, x); },
        np, opts);

    CalibrationResult result;
    result.deviations = vector_to_error(keys, res.x);
    result.residual = res.residual;
    result.iterations = res.iterations;
    result.converged = res.converged;
    return result;
}

CalibrationResult calibrate_feedback(const CircuitProgram& prog, const StateSet& probes,
                                     const MeasureFn& measure, const CalibrationOptions& opts) {
    const auto keys = parameter_keys(prog);
    const int np = static_cast<int>(keys.size());
    const int n = prog.n_outcomes;
    const int m = static_cast<int>(probes.states.size());

    Eigen::MatrixXd target(n, m);
    for (int j = 0; j < m; ++j) target.col(j) = simulate(prog, probes.states[j]);

    auto res = lm_minimize(
        [&](const Eigen::VectorXd& x) {
            const CircuitProgram corrected = apply_correction(prog, vector_to_error(keys, x));
            const Eigen::MatrixXd measured = measure(corrected).normalized().rows;
            Eigen::VectorXd r(static_cast<Eigen::Index>(n) * m);
            for (int j = 0; j < m; ++j)
                r.segment(static_cast<Eigen::Index>(j) * n, n) = measured.col(j) - target.col(j);
            return r;
        },
        np, opts);

    CalibrationResult result;
    result.deviations = vector_to_error(keys, res.x);
    result.residual = res.residual;
    result.iterations = res.iterations;
    result.converged = res.converged;
    return result;
}

CircuitProgram apply_correction(const CircuitProgram& prog, const PhaseError& dphi) {
    CircuitProgram out = prog;
    for (int m = 1; m <= static_cast<int>(out.modules.size()); ++m)
        for (int j = 1; j <= out.dim; ++j) {
            out.modules[m - 1][j - 1].alpha -= dphi.get(m, j, PhaseError::Shifter::Alpha);
            out.modules[m - 1][j - 1].beta -= dphi.get(m, j, PhaseError::Shifter::Beta);
        }
    return out;
}

}  // namespace povmforge
