#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "povmforge/linalg.hpp"
#include "povmforge/rng.hpp"

namespace povmforge {

// Weighted rank-1 measurement element a |psi><psi|, weight in (0, 1].
struct Rank1Element {
    double weight;
    Ket ket;
    Matrix matrix() const { return weight * linalg::projector(ket); }
};

// A POVM, either in rank-1 form (the compiler's input) or as general PSD
// matrices (tomography output, task constructions).
class Povm {
public:
    Povm() = default;
    static Povm from_rank1(int dim, std::vector<Rank1Element> elements);
    static Povm from_matrices(int dim, std::vector<Matrix> elements);

    int dim() const { return dim_; }
    int size() const { return static_cast<int>(matrices_.size()); }
    bool is_rank1_form() const { return !rank1_.empty(); }

    const std::vector<Matrix>& matrices() const { return matrices_; }
    const Matrix& element(int i) const { return matrices_.at(i); }
    const std::vector<Rank1Element>& rank1_elements() const;

    // Born-rule probability of outcome i on |phi><phi|.
    double born_probability(int i, const Ket& phi) const;

private:
    int dim_ = 0;
    std::vector<Rank1Element> rank1_;   // empty when general form
    std::vector<Matrix> matrices_;      // always populated
};

struct StateSet {
    int dim = 0;
    std::vector<Ket> states;
};

struct PovmValidation {
    double completeness_deviation = 0.0;  // max-abs entry of sum(E) - 1
    double min_eigenvalue = 0.0;          // across all elements
    bool pass = false;
    std::string message;
};

PovmValidation validate_povm(const Povm& p);

// n rows of a Haar-random n x n unitary restricted to the first d columns;
// complete by construction. Deterministic per seed (SplitMix64).
Povm random_rank1_povm(int d, int n, std::uint64_t seed);

// det of the Gram matrix G_ij = <Psi_i|Psi_j>; real and >= 0 up to noise.
double gram_det(const StateSet& s);

// The 16-outcome SIC-POVM in dimension 4 (Weyl-Heisenberg orbit of the
// standard fiducial; elements |psi_i><psi_i| / 4).
Povm sic_povm_d4();
StateSet sic_states_d4();

// Displacement operator D_{jk} of the d=4 Weyl-Heisenberg group.
Matrix displacement_d4(int j, int k);

// 20 probe states from the five mutually unbiased bases of dimension 4,
// columns in the listed order (first basis is computational).
StateSet mub_probe_states_d4();

// The three four-state sets used for unambiguous discrimination, transcribed
// at 4 printed decimals and renormalized on load.
std::array<StateSet, 3> usd_state_sets();

// Split general PSD elements into weighted rank-1 pieces (eigendecomposition,
// eigenvalues below tol dropped). outcome_of[k] maps each rank-1 piece back
// to its original outcome index.
struct Rank1Refinement {
    Povm povm;
    std::vector<int> outcome_of;
};
Rank1Refinement rank1_refinement(const Povm& p, double tol = 1e-10);

// Haar-random unitary via QR of a complex Ginibre matrix with phase-fixed R
// diagonal.
Matrix haar_unitary(int n, SplitMix64& rng);

}  // namespace povmforge
