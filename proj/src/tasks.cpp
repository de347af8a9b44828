#include "povmforge/tasks.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace povmforge::tasks {

using std::numbers::pi;
constexpr double kLn2 = 0.6931471805599453094172321214581766;

// ---------------------------------------------------------------------------
// state discrimination
// ---------------------------------------------------------------------------

UsdResult usd_optimize(const StateSet& states, const sdp::Options& opts) {
    if (states.states.size() != 4 || states.dim != 4)
        throw std::invalid_argument("usd_optimize: need four 4-dimensional states");
    if (gram_det(states) <= 1e-8)
        throw std::invalid_argument("usd_optimize: states linearly dependent, unambiguous discrimination impossible");

    UsdResult out;
    // Phi_j: unit null vector of the other three bras, phase-fixed
    for (int j = 0; j < 4; ++j) {
        Matrix others(3, 4);
        int r = 0;
        for (int k = 0; k < 4; ++k)
            if (k != j) others.row(r++) = states.states[k].adjoint();
        Eigen::JacobiSVD<Matrix> svd(others, Eigen::ComputeFullV);
        Ket phi = svd.matrixV().col(3);
        for (int t = 0; t < 4; ++t)
            if (std::abs(phi(t)) > 1e-8) {
                phi *= std::polar(1.0, -std::arg(phi(t)));
                break;
            }
        out.discriminators.push_back(phi);
    }

    sdp::Problem prob;
    std::array<int, 4> a_blk{};
    std::array<double, 4> ov{};
    std::array<Matrix, 4> proj;
    for (int j = 0; j < 4; ++j) {
        a_blk[j] = prob.add_block(1);
        ov[j] = std::norm(states.states[j].dot(out.discriminators[j]));
        proj[j] = linalg::projector(out.discriminators[j]);
    }
    const int s_blk = prob.add_block(4);
    // S + sum_j a_j |Phi_j><Phi_j| = 1, expanded over the Hermitian basis
    for (int r = 0; r < 4; ++r) {
        sdp::LinearExpr e;
        e.add(s_blk, r, r, 1.0);
        for (int j = 0; j < 4; ++j) e.add(a_blk[j], 0, 0, proj[j](r, r).real());
        prob.add_equality(std::move(e), 1.0);
        for (int c = r + 1; c < 4; ++c) {
            sdp::LinearExpr re, im;
            re.add(s_blk, r, c, 1.0);
            im.add(s_blk, r, c, Cplx(0, 1));
            for (int j = 0; j < 4; ++j) {
                re.add(a_blk[j], 0, 0, 2 * proj[j](r, c).real());
                im.add(a_blk[j], 0, 0, 2 * proj[j](r, c).imag());
            }
            prob.add_equality(std::move(re), 0.0);
            prob.add_equality(std::move(im), 0.0);
        }
    }
    sdp::LinearExpr obj;
    for (int j = 0; j < 4; ++j) obj.add(a_blk[j], 0, 0, 0.25 * ov[j]);
    prob.set_objective(sdp::Sense::Maximize, std::move(obj));
    for (int j = 0; j < 4; ++j) {
        sdp::LinearExpr le;
        le.add(a_blk[j], 0, 0, 1.0);
        prob.add_leq(std::move(le), 1.0);
    }
    auto sol = sdp::solve(prob, opts);
    if (sol.status != sdp::Status::Optimal && sol.status != sdp::Status::MaxIterations)
        throw std::runtime_error("usd_optimize: SDP failed (" + sol.message + ")");

    for (int j = 0; j < 4; ++j)
        out.coefficients[j] = std::clamp(sol.blocks[a_blk[j]](0, 0).real(), 0.0, 1.0);
    out.p_inconclusive = 1.0 - sol.primal_value;

    std::vector<Matrix> elems;
    Matrix incn = Matrix::Identity(4, 4);
    for (int j = 0; j < 4; ++j) {
        Matrix e = out.coefficients[j] * linalg::projector(out.discriminators[j]);
        incn -= e;
        elems.push_back(std::move(e));
    }
    elems.push_back(incn);
    out.povm = Povm::from_matrices(4, std::move(elems));
    return out;
}

double mesd_min_error(const StateSet& states, const sdp::Options& opts) {
    if (states.states.size() != 4 || states.dim != 4)
        throw std::invalid_argument("mesd_min_error: need four 4-dimensional states");
    sdp::Problem prob;
    std::array<int, 4> blk{};
    for (int j = 0; j < 4; ++j) blk[j] = prob.add_block(4);
    // completeness rows over the Hermitian basis
    for (int r = 0; r < 4; ++r) {
        sdp::LinearExpr e;
        for (int j = 0; j < 4; ++j) e.add(blk[j], r, r, 1.0);
        prob.add_equality(std::move(e), 1.0);
        for (int c = r + 1; c < 4; ++c) {
            sdp::LinearExpr re, im;
            for (int j = 0; j < 4; ++j) {
                re.add(blk[j], r, c, 1.0);
                im.add(blk[j], r, c, Cplx(0, 1));
            }
            prob.add_equality(std::move(re), 0.0);
            prob.add_equality(std::move(im), 0.0);
        }
    }
    sdp::LinearExpr obj;
    for (int j = 0; j < 4; ++j)
        obj.add_matrix(blk[j], linalg::projector(states.states[j]), 0, 0, 0.25);
    prob.set_objective(sdp::Sense::Maximize, std::move(obj));
    auto sol = sdp::solve(prob, opts);
    if (sol.status != sdp::Status::Optimal && sol.status != sdp::Status::MaxIterations)
        throw std::runtime_error("mesd_min_error: SDP failed (" + sol.message + ")");
    return 1.0 - sol.primal_value;
}

// ---------------------------------------------------------------------------
// two-copy estimation
// ---------------------------------------------------------------------------

Ket bloch_ket(const Eigen::Vector3d& n) {
    const double theta = std::acos(std::clamp(n.z() / n.norm(), -1.0, 1.0));
    const double phi = std::atan2(n.y(), n.x());
    Ket k(2);
    k << std::cos(theta / 2), std::polar(std::sin(theta / 2), phi);
    return k;
}

Eigen::Vector3d bloch_vector(const Ket& psi) {
    const Cplx a = psi(0), b = psi(1);
    return {2 * (std::conj(a) * b).real(), 2 * (std::conj(a) * b).imag(),
            std::norm(a) - std::norm(b)};
}

EstimationMeasurement two_copy_optimal_povm() {
    EstimationMeasurement m;
    const std::array<Eigen::Vector3d, 6> dirs = {
        Eigen::Vector3d{0, 0, 1},  Eigen::Vector3d{0, 0, -1}, Eigen::Vector3d{1, 0, 0},
        Eigen::Vector3d{-1, 0, 0}, Eigen::Vector3d{0, 1, 0},  Eigen::Vector3d{0, -1, 0}};
    std::vector<Matrix> elems;
    Matrix rest = Matrix::Identity(4, 4);
    for (const auto& d : dirs) {
        Ket two = linalg::kron(bloch_ket(d), bloch_ket(d));
        Matrix e = 0.5 * linalg::projector(two);
        rest -= e;
        elems.push_back(std::move(e));
        m.estimates.push_back(d);
        m.random_estimate.push_back(false);
    }
    elems.push_back(rest);
    m.estimates.push_back({0, 0, 0});
    m.random_estimate.push_back(true);
    m.povm = Povm::from_matrices(4, std::move(elems));
    return m;
}

EstimationMeasurement massar_popescu_povm() {
    EstimationMeasurement m;
    Ket singlet(4);
    singlet << 0, 1 / std::sqrt(2.0), -1 / std::sqrt(2.0), 0;
    const Cplx i(0, 1);
    const double s2 = std::sqrt(2.0), s3 = std::sqrt(3.0);
    std::vector<Ket> dirs(4, Ket(2));
    dirs[0] << 1, 0;
    dirs[1] << i / s3, i * s2 / s3;
    dirs[2] << i / s3, i * std::exp(Cplx(0, 2 * pi / 3)) * s2 / s3;
    dirs[3] << -i / s3, i * std::exp(Cplx(0, pi / 3)) * s2 / s3;
    std::vector<Matrix> elems;
    for (const auto& d : dirs) {
        Ket v = 0.5 * singlet + (s3 / 2) * linalg::kron(d, d);
        elems.push_back(linalg::projector(v));
        m.estimates.push_back(bloch_vector(d));
        m.random_estimate.push_back(false);
    }
    m.povm = Povm::from_matrices(4, std::move(elems));
    return m;
}

double estimation_fidelity(const EstimationMeasurement& m, const Eigen::Vector3d& n) {
    Ket two = linalg::kron(bloch_ket(n), bloch_ket(n));
    double f = 0.0;
    for (int idx = 0; idx < m.povm.size(); ++idx) {
        const double p = (two.adjoint() * m.povm.element(idx) * two)(0).real();
        const double overlap = m.random_estimate[idx] ? 0.0 : n.dot(m.estimates[idx]);
        f += p * (1 + overlap) / 2;
    }
    return f;
}

double average_estimation_fidelity(const EstimationMeasurement& m, int polar_points) {
    // Gauss-Legendre in cos(theta), uniform in phi
    const int nphi = 2 * polar_points;
    Eigen::VectorXd x, w;
    {
        // Golub-Welsch for Legendre on [-1,1]
        const int n = polar_points;
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
        for (int k = 1; k < n; ++k) {
            const double bk = k / std::sqrt(4.0 * k * k - 1.0);
            J(k - 1, k) = J(k, k - 1) = bk;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
        x = es.eigenvalues();
        w = 2.0 * es.eigenvectors().row(0).transpose().array().square();
    }
    double acc = 0.0;
    for (int a = 0; a < polar_points; ++a) {
        const double ct = x(a), st = std::sqrt(std::max(0.0, 1 - ct * ct));
        for (int b = 0; b < nphi; ++b) {
            const double phi = 2 * pi * (b + 0.5) / nphi;
            acc += w(a) * estimation_fidelity(m, {st * std::cos(phi), st * std::sin(phi), ct});
        }
    }
    return acc / (2.0 * nphi);
}

double worst_case_estimation_fidelity(const EstimationMeasurement& m, int grid) {
    double best = 1e300;
    Eigen::Vector3d argbest{0, 0, 1};
    for (int a = 0; a <= grid; ++a) {
        const double theta = pi * a / grid;
        for (int b = 0; b < 2 * grid; ++b) {
            const double phi = 2 * pi * b / (2 * grid);
            Eigen::Vector3d n{std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                              std::cos(theta)};
            const double f = estimation_fidelity(m, n);
            if (f < best) {
                best = f;
                argbest = n;
            }
        }
    }
    // local refinement: shrinking neighborhood search on the sphere
    double step = pi / grid;
    for (int round = 0; round < 40; ++round) {
        bool improved = false;
        for (int dx = -1; dx <= 1; ++dx)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dz = -1; dz <= 1; ++dz) {
                    if (!dx && !dy && !dz) continue;
                    Eigen::Vector3d cand = argbest + step * Eigen::Vector3d(dx, dy, dz);
                    cand.normalize();
                    const double f = estimation_fidelity(m, cand);
                    if (f < best) {
                        best = f;
                        argbest = cand;
                        improved = true;
                    }
                }
        if (!improved) step /= 2;
        if (step < 1e-10) break;
    }
    return best;
}

// ---------------------------------------------------------------------------
// SIC witness and N-outcome certification
// ---------------------------------------------------------------------------

double sic_witness(const Povm& p) {
    if (p.size() != 16 || p.dim() != 4)
        throw std::invalid_argument("sic_witness: need a 16-outcome POVM on dimension 4");
    const auto sic = sic_states_d4();
    double acc = 0.0;
    for (int x = 0; x < 16; ++x)
        acc += (sic.states[x].adjoint() * p.element(x) * sic.states[x])(0).real();
    return acc / 16.0;
}

namespace {

// max p_suc over POVMs supported on the index subset
double psuc_subset(const StateSet& sic, const std::vector<int>& subset,
                   const sdp::Options& opts) {
    sdp::Problem prob;
    const int n = static_cast<int>(subset.size());
    std::vector<int> blk(n);
    for (int j = 0; j < n; ++j) blk[j] = prob.add_block(4);
    for (int r = 0; r < 4; ++r) {
        sdp::LinearExpr e;
        for (int j = 0; j < n; ++j) e.add(blk[j], r, r, 1.0);
        prob.add_equality(std::move(e), 1.0);
        for (int c = r + 1; c < 4; ++c) {
            sdp::LinearExpr re, im;
            for (int j = 0; j < n; ++j) {
                re.add(blk[j], r, c, 1.0);
                im.add(blk[j], r, c, Cplx(0, 1));
            }
            prob.add_equality(std::move(re), 0.0);
            prob.add_equality(std::move(im), 0.0);
        }
    }
    sdp::LinearExpr obj;
    for (int j = 0; j < n; ++j)
        obj.add_matrix(blk[j], linalg::projector(sic.states[subset[j]]), 0, 0, 1.0 / 16.0);
    prob.set_objective(sdp::Sense::Maximize, std::move(obj));
    auto sol = sdp::solve(prob, opts);
    if (sol.status != sdp::Status::Optimal && sol.status != sdp::Status::MaxIterations)
        throw std::runtime_error("max_psuc_n_outcomes: SDP failed");
    return sol.primal_value;
}

void enumerate_subsets(int n, int k, const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    while (true) {
        fn(idx);
        int i = k - 1;
        while (i >= 0 && idx[i] == n - k + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

}  // namespace

double max_psuc_n_outcomes(int n_outcomes, const NOutcomeOptions& opts) {
    if (n_outcomes < 1 || n_outcomes > 16)
        throw std::invalid_argument("max_psuc_n_outcomes: N must be in 1..16");
    if (n_outcomes == 1) return 1.0 / 16.0;   // completeness forces E = identity
    if (n_outcomes == 16) return 0.25;        // attained by the SIC itself
    const auto sic = sic_states_d4();
    std::vector<std::vector<int>> subsets;
    enumerate_subsets(16, n_outcomes, [&](const std::vector<int>& s) { subsets.push_back(s); });
    std::vector<double> vals(subsets.size(), 0.0);
    std::atomic<size_t> next{0};
    const int threads = std::max(1, opts.threads);
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (size_t i = next.fetch_add(1); i < subsets.size(); i = next.fetch_add(1))
                vals[i] = psuc_subset(sic, subsets[i], opts.sdp);
        });
    for (auto& th : pool) th.join();
    return *std::max_element(vals.begin(), vals.end());
}

// ---------------------------------------------------------------------------
// randomness certification
// ---------------------------------------------------------------------------

MinEntropyResult min_entropy(double witness, const sdp::Options& opts) {
    if (witness < 0.0 || witness > 0.25 + 1e-12)
        throw std::invalid_argument("min_entropy: witness outside [0, 0.25]");
    const auto sic = sic_states_d4();
    const int n = 16;
    sdp::Problem prob;
    // blocks M[lambda][b]
    std::vector<std::vector<int>> blk(n, std::vector<int>(n));
    for (int lam = 0; lam < n; ++lam)
        for (int b = 0; b < n; ++b) blk[lam][b] = prob.add_block(4);

    // per-strategy: sum_b M_b^lam proportional to identity
    for (int lam = 0; lam < n; ++lam) {
        std::vector<sdp::Problem::Region> parts;
        for (int b = 0; b < n; ++b) parts.push_back({blk[lam][b], 0, 0, 1.0});
        prob.add_identity_proportional(parts, 4);
    }
    // normalization sum_lam q(lam) = 1, i.e. total trace = d
    {
        sdp::LinearExpr e;
        for (int lam = 0; lam < n; ++lam)
            for (int b = 0; b < n; ++b)
                for (int r = 0; r < 4; ++r) e.add(blk[lam][b], r, r, 1.0);
        prob.add_equality(std::move(e), 4.0);
    }
    // witness
    {
        sdp::LinearExpr e;
        for (int lam = 0; lam < n; ++lam)
            for (int x = 0; x < n; ++x)
                e.add_matrix(blk[lam][x], linalg::projector(sic.states[x]), 0, 0, 1.0 / 16.0);
        prob.add_geq(std::move(e), witness);
    }
    // objective: guessing probability with rho* = I/4
    sdp::LinearExpr obj;
    for (int lam = 0; lam < n; ++lam)
        for (int r = 0; r < 4; ++r) obj.add(blk[lam][lam], r, r, 0.25);
    prob.set_objective(sdp::Sense::Maximize, std::move(obj));

    auto sol = sdp::solve(prob, opts);
    if (sol.status != sdp::Status::Optimal && sol.status != sdp::Status::MaxIterations)
        throw std::runtime_error("min_entropy: SDP failed (" + sol.message + ")");
    MinEntropyResult r;
    r.guessing_probability = std::min(1.0, sol.primal_value);
    r.h_min = -std::log2(r.guessing_probability);
    return r;
}

Quadrature gauss_radau(int m) {
    if (m < 2) throw std::invalid_argument("gauss_radau: need m >= 2");
    // monic Legendre recurrence on [-1,1], Radau modification fixing x = 1
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd beta(m);
    beta(0) = 2.0;
    for (int k = 1; k < m; ++k) beta(k) = k * k / (4.0 * k * k - 1.0);
    double pm2 = 0.0, pm1 = 1.0;
    for (int k = 0; k < m - 1; ++k) {
        const double p = (1.0 - alpha(k)) * pm1 - (k > 0 ? beta(k) : 0.0) * pm2;
        pm2 = pm1;
        pm1 = p;
    }
    alpha(m - 1) = 1.0 - beta(m - 1) * pm2 / pm1;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, m);
    for (int k = 0; k < m; ++k) J(k, k) = alpha(k);
    for (int k = 1; k < m; ++k) J(k - 1, k) = J(k, k - 1) = std::sqrt(beta(k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    Quadrature q;
    q.nodes = (es.eigenvalues().array() + 1.0) / 2.0;
    // weights: beta_0 v0^2 = 2 v0^2 on [-1,1], halved by the map to [0,1]
    q.weights = es.eigenvectors().row(0).transpose().array().square();
    // snap the fixed node
    q.nodes(m - 1) = 1.0;
    return q;
}

ShannonBoundResult shannon_bound(double witness, int m, int k, const ShannonBoundOptions& opts) {
    if (k != 1)
        throw std::invalid_argument("shannon_bound: only relaxation order 2k = 2 is supported");
    StateSet states = opts.states ? *opts.states : sic_states_d4();
    const int d = states.dim;
    const int n = static_cast<int>(states.states.size());
    const auto quad = gauss_radau(m);

    Eigen::VectorXd tau(m);
    for (int i = 0; i < m; ++i) tau(i) = quad.weights(i) / (quad.nodes(i) * kLn2);
    double c_m = 0.0;
    for (int i = 0; i < m - 1; ++i) c_m += tau(i);

    sdp::Problem prob;
    // shared measurement as free Hermitian matrices E_b
    std::vector<int> efree(n);
    for (int b = 0; b < n; ++b) efree[b] = prob.add_free_hermitian(d);

    // completeness sum_b E_b = 1 over the free entries
    for (int r = 0; r < d; ++r) {
        sdp::LinearExpr e;
        for (int b = 0; b < n; ++b) e.add_free(efree[b] + r, 1.0);
        prob.add_equality(std::move(e), 1.0);
        for (int c = r + 1; c < d; ++c) {
            const int p = d + 2 * ((r * (2 * d - r - 1)) / 2 + (c - r - 1));
            sdp::LinearExpr re, im;
            for (int b = 0; b < n; ++b) {
                re.add_free(efree[b] + p, 1.0);
                im.add_free(efree[b] + p + 1, 1.0);
            }
            prob.add_equality(std::move(re), 0.0);
            prob.add_equality(std::move(im), 0.0);
        }
    }
    // witness (1/n) sum_x <psi_x| E_x |psi_x> >= W
    {
        sdp::LinearExpr e;
        for (int x = 0; x < n; ++x) {
            const Matrix h = linalg::projector(states.states[x]) / n;
            for (int r = 0; r < d; ++r) {
                e.add_free(efree[x] + r, h(r, r).real());
                for (int c = r + 1; c < d; ++c) {
                    const int p = d + 2 * ((r * (2 * d - r - 1)) / 2 + (c - r - 1));
                    e.add_free(efree[x] + p, 2 * h(r, c).real());
                    e.add_free(efree[x] + p + 1, 2 * h(r, c).imag());
                }
            }
        }
        prob.add_geq(std::move(e), witness);
    }

    // moment blocks G_b^{ia} = [[E_b, Y],[Y, Z]] per node and guess index
    sdp::LinearExpr obj;
    std::vector<std::vector<double>> node_term_coeff;  // for reporting
    for (int i = 0; i < m - 1; ++i) {
        const double t = quad.nodes(i);
        for (int a = 0; a < n; ++a) {
            std::vector<sdp::Problem::Region> y_parts, z_parts;
            for (int b = 0; b < n; ++b) {
                const int g = prob.add_block(2 * d);
                prob.add_corner_equals_free(g, 0, 0, efree[b], d);
                prob.add_hermitian_tie(g, 0, d, d);
                y_parts.push_back({g, 0, d, 1.0});
                z_parts.push_back({g, d, d, 1.0});
                // objective: tau_i [ 2 delta_ab Tr(rho* Y) + ((1-t) delta_ab + t) Tr(rho* Z) ]
                const double zc = tau(i) * (((a == b) ? (1 - t) : 0.0) + t) / d;
                for (int r = 0; r < d; ++r) {
                    if (a == b) {
                        // Tr(rho* Y) with rho* = I/d: Re of Y diagonal
                        obj.add(g, r, d + r, tau(i) * 2.0 / d * 0.5);
                        // entry (r, d+r) counts twice via the mirror; 0.5 keeps Re Tr Y
                    }
                    obj.add(g, d + r, d + r, zc);
                }
            }
            prob.add_identity_proportional(y_parts, d);
            prob.add_identity_proportional(z_parts, d);
        }
    }
    (void)node_term_coeff;
    prob.set_objective(sdp::Sense::Minimize, std::move(obj));

    auto sol = sdp::solve(prob, opts.sdp);
    if (sol.status != sdp::Status::Optimal && sol.status != sdp::Status::MaxIterations)
        throw std::runtime_error("shannon_bound: SDP failed (" + sol.message + ")");

    ShannonBoundResult out;
    out.c_m = c_m;
    out.bound = c_m + sol.primal_value;
    // recover per-node contributions from the solved blocks
    out.node_terms.assign(m - 1, 0.0);
    int g = 0;
    for (int i = 0; i < m - 1; ++i) {
        const double t = quad.nodes(i);
        double term = 0.0;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b, ++g) {
                const Matrix& gm = sol.blocks[g];
                double try_ = 0.0, trz = 0.0;
                for (int r = 0; r < d; ++r) {
                    try_ += gm(r, d + r).real();
                    trz += gm(d + r, d + r).real();
                }
                if (a == b) term += tau(i) * (2 * try_ + (1 - t) * trz) / d;
                term += tau(i) * t * trz / d;
            }
        out.node_terms[i] = term;
    }
    return out;
}

EatResult eat_rate(const EatParams& p) {
    if (p.n_rounds < 1) throw std::invalid_argument("eat_rate: N must be >= 1");
    if (p.epsilon <= 0 || p.epsilon >= 1) throw std::invalid_argument("eat_rate: epsilon outside (0,1)");
    const double alpha = p.alpha ? *p.alpha : 1.0 + 1.0 / std::sqrt(p.n_rounds);
    if (alpha <= 1.0 || alpha >= 2.0) throw std::invalid_argument("eat_rate: alpha outside (1,2)");

    auto fmin = [&](double w) { return p.c_m + p.r_tilde + p.s_tilde * w; };
    const double f_obs = fmin(p.w_obs);
    const double f_max = fmin(p.w_obs + p.var_w);
    const double f_min_ = fmin(p.w_obs - p.var_w);
    const double var_f = p.s_tilde * p.s_tilde * p.var_w;

    const double g_eps = -std::log2(1.0 - std::sqrt(1.0 - p.epsilon * p.epsilon));
    const double v = std::log2(2.0 * p.d_a * p.d_a + 1.0) + std::sqrt(2.0 + var_f);
    const double spread = 2.0 * std::log2(p.d_a) + f_max - f_min_;
    const double kprime = std::pow(2.0 - alpha, 3) / (6.0 * std::pow(3.0 - 2.0 * alpha, 3) * kLn2) *
                          std::pow(2.0, (alpha - 1.0) / (2.0 - alpha) * spread) *
                          std::pow(std::log(std::pow(2.0, spread) + std::exp(2.0)), 3);

    const double term1 = (alpha - 1.0) / (2.0 - alpha) * (kLn2 / 2.0) * v * v;
    const double term2 = (g_eps + alpha * std::log2(1.0 / p.prob_omega)) / (p.n_rounds * (alpha - 1.0));
    const double term3 = std::pow((alpha - 1.0) / (2.0 - alpha), 2) * kprime;

    EatResult r;
    r.f_min_at_w = f_obs;
    r.correction = term1 + term2 + term3;
    r.rate = f_obs - r.correction;
    return r;
}

}  // namespace povmforge::tasks
