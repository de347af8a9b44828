#pragma once

#include <array>
#include <optional>
#include <vector>

#include "povmforge/povm.hpp"
#include "povmforge/sdp.hpp"

namespace povmforge::tasks {

// ---- unambiguous / minimum-error state discrimination ----------------------

struct UsdResult {
    std::array<double, 4> coefficients;  // a_j
    std::vector<Ket> discriminators;     // Phi_j, <Phi_j|Psi_k> = 0 for j != k
    double p_inconclusive = 0.0;
    Povm povm;                           // 5 outcomes, E_incn last (general form)
};

// Optimal unambiguous discrimination of four linearly independent states with
// equal priors. Throws std::invalid_argument when the states are linearly
// dependent (discrimination impossible).
UsdResult usd_optimize(const StateSet& states, const sdp::Options& opts = {});

// Minimum-error discrimination probability for four equiprobable states.
double mesd_min_error(const StateSet& states, const sdp::Options& opts = {});

// ---- two-copy state estimation ---------------------------------------------

struct EstimationMeasurement {
    Povm povm;                                   // on dim 4 = 2 (x) 2
    std::vector<Eigen::Vector3d> estimates;      // Bloch vector per outcome
    std::vector<bool> random_estimate;           // outcome scored as 1/2
};

// Seven-outcome optimal measurement: six half-weight two-copy projectors onto
// the Pauli eigenstates plus the antisymmetric-subspace remainder.
EstimationMeasurement two_copy_optimal_povm();

// Massar-Popescu four-outcome projective measurement on two copies.
EstimationMeasurement massar_popescu_povm();

Ket bloch_ket(const Eigen::Vector3d& n);
Eigen::Vector3d bloch_vector(const Ket& psi);

// F(n) = 1/2 + 1/2 sum_i p_i(n) n . m_i on the two-copy input |n><n|^(x2).
double estimation_fidelity(const EstimationMeasurement& m, const Eigen::Vector3d& n);

// Average over the sphere (product Gauss-Legendre x uniform grid) and minimum
// (grid scan plus local refinement).
double average_estimation_fidelity(const EstimationMeasurement& m, int polar_points = 64);
double worst_case_estimation_fidelity(const EstimationMeasurement& m, int grid = 72);

// ---- SIC witness and N-outcome certification --------------------------------

// p_suc = (1/16) sum_x <psi_x|E_x|psi_x> against the d=4 SIC states.
double sic_witness(const Povm& p);

struct NOutcomeOptions {
    sdp::Options sdp;
    int threads = 1;
};

// Largest witness achievable with at most N outcomes: maximum over all
// C(16, N) subset-restricted SDPs.
double max_psuc_n_outcomes(int n_outcomes, const NOutcomeOptions& opts = {});

// ---- randomness certification -----------------------------------------------

struct MinEntropyResult {
    double guessing_probability = 0.0;
    double h_min = 0.0;  // bits
};

// Guessing-probability SDP (strategy-per-outcome reduction) at witness W for
// the d=4 SIC ensemble with the maximally mixed generation state.
MinEntropyResult min_entropy(double witness, const sdp::Options& opts = {});

struct Quadrature {
    Eigen::VectorXd nodes;    // ascending, last = 1
    Eigen::VectorXd weights;
};

// Gauss-Radau rule on (0, 1] with a fixed node at t = 1; exact for
// polynomials up to degree 2m-2.
Quadrature gauss_radau(int m);

struct ShannonBoundOptions {
    sdp::Options sdp;
    // ensemble; defaults to the d=4 SIC states with rho* = I/4
    std::optional<StateSet> states;
};

struct ShannonBoundResult {
    double bound = 0.0;    // bits
    double c_m = 0.0;
    std::vector<double> node_terms;  // per quadrature node (already tau-weighted)
};

// Gauss-Radau/SDP lower bound on the adversarial Shannon entropy at witness W
// (joint program over all quadrature nodes sharing the measurement).
// Only relaxation order 2k = 2 (k = 1) is supported.
ShannonBoundResult shannon_bound(double witness, int m, int k = 1,
                                 const ShannonBoundOptions& opts = {});

struct EatParams {
    double c_m = 0.0;
    double r_tilde = 0.0;
    double s_tilde = 0.0;
    double w_obs = 0.0;
    double var_w = 0.0;
    double n_rounds = 0.0;
    double epsilon = 0.0;
    double d_a = 4.0;
    double prob_omega = 0.0;
    std::optional<double> alpha;  // default 1 + 1/sqrt(N)
};

struct EatResult {
    double f_min_at_w = 0.0;
    double correction = 0.0;
    double rate = 0.0;  // bits per round
};

// Finite-size certified randomness per round from the entropy accumulation
// bound with an affine min-tradeoff function.
EatResult eat_rate(const EatParams& p);

}  // namespace povmforge::tasks
