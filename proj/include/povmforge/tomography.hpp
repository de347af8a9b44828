#pragma once

#include "povmforge/povm.hpp"
#include "povmforge/simulator.hpp"

namespace povmforge {

struct MleOptions {
    int max_iterations = 5000;
    double loglik_rel_tol = 1e-12;
    // completeness/positivity re-checked every this many iterations
    int invariant_check_stride = 100;
};

struct MleResult {
    Povm povm;                 // general PSD form
    double log_likelihood = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Iterative maximum-likelihood POVM reconstruction from count statistics
// (Lagrange-normalized R E R updates). Probes must be informationally
// complete; every probe column must carry counts.
MleResult mle_reconstruct(const StateSet& probes, const CountTable& counts,
                          const MleOptions& opts = {});

// Uhlmann fidelity of two PSD matrices normalized to unit trace.
double uhlmann_fidelity(const Matrix& rho, const Matrix& sigma);

// Measurement fidelity F = (sum_i w_i sqrt(F_i))^2 with F_i the Uhlmann
// fidelity of trace-normalized elements and w_i = sqrt(Tr E_i Tr E'_i)/d.
// Zero-trace elements contribute weight zero.
double measurement_fidelity(const Povm& exp_povm, const Povm& ideal_povm);

// Rank of the Gram matrix of vectorized probe projectors; informational
// completeness for dimension d means rank d^2.
int probe_operator_rank(const StateSet& probes);

}  // namespace povmforge
