#pragma once

#include <vector>

#include "povmforge/povm.hpp"

namespace povmforge {

// One Mach-Zehnder interferometer setting. The realized two-mode unitary is
//   C(alpha, beta) = i e^{i beta/2} [ e^{i alpha} sin(beta/2)   cos(beta/2) ]
//                                   [ e^{i alpha} cos(beta/2)  -sin(beta/2) ]
// (two phase shifters on the upper arm, before and between the splitters).
struct MziSetting {
    double alpha = 0.0;  // [0, 2pi)
    double beta = 0.0;   // [0, 2pi)
};

Matrix mzi_unitary(const MziSetting& s);

// Compiled circuit: n-1 modules of d MZIs each. The detector for outcome
// i < n sits on the ancilla port after module i; outcome n is read from the
// residual system ports after the last module.
struct CircuitProgram {
    int dim = 0;
    int n_outcomes = 0;
    std::vector<std::vector<MziSetting>> modules;
};

// Per-module compilation record: the cumulative evolution operator entering
// the module, its effective dimension, the steering norm and ket, and the
// zeroing-sweep unitary.
struct CompileStage {
    Matrix k_in;
    int l = 0;
    double b = 0.0;
    Ket eta;
    Matrix sweep;
};

struct CompileTrace {
    std::vector<CompileStage> stages;
    Matrix k_final;
};

// Embedding of a two-mode unitary into d modes at position j in 1..d.
// For j < d it acts on modes (j-1, j); for j = d only c00 survives at
// (d-1, d-1) because the partner mode is the ancilla.
Matrix embed_two_mode(const Matrix& c, int j, int d);

// Setting with <j-1| U |xi> = 0, i.e. e^{i alpha} sin(beta/2) xi_{j-1}
//  + cos(beta/2) xi_j = 0. Degenerate input (both amplitudes ~0) yields the
// pass-through setting (alpha=0, beta=pi).
MziSetting zeroing_setting(const Ket& xi, int j);

struct CompileResult {
    CircuitProgram program;
    CompileTrace trace;
};

// Lower a rank-1 POVM to MZI settings. Throws std::invalid_argument when the
// POVM fails validation and std::runtime_error on numeric infeasibility
// (b_i sqrt(a_i) > 1 + 1e-6 or effective dimension exhausted early).
CompileResult compile(const Povm& p);

}  // namespace povmforge
