#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <tuple>
#include <vector>

#include "povmforge/compiler.hpp"

namespace povmforge {

// Phase-shifter deviations, keyed by (module index from 1, mzi index from 1,
// shifter). Missing entries mean zero.
struct PhaseError {
    enum class Shifter { Alpha, Beta };
    using Key = std::tuple<int, int, Shifter>;
    std::map<Key, double> deviations;

    double get(int module, int mzi, Shifter s) const {
        auto it = deviations.find({module, mzi, s});
        return it == deviations.end() ? 0.0 : it->second;
    }
    void set(int module, int mzi, Shifter s, double v) { deviations[{module, mzi, s}] = v; }
    double max_abs() const;
};

// Outcome-by-probe count or frequency table; rows are outcomes.
struct CountTable {
    int n_outcomes = 0;
    int n_probes = 0;
    Eigen::MatrixXd rows;  // n_outcomes x n_probes

    CountTable() = default;
    CountTable(int outcomes, int probes)
        : n_outcomes(outcomes), n_probes(probes), rows(Eigen::MatrixXd::Zero(outcomes, probes)) {}

    // column-normalized copy
    CountTable normalized() const;
};

// Evolve phi through the program on the (d+1)-mode space; outcome i < n is
// the ancilla intensity after module i (the amplitude then leaves), outcome n
// the residual system intensity.
Eigen::VectorXd simulate(const CircuitProgram& prog, const Ket& phi,
                         const PhaseError* err = nullptr);

// Multinomial sampling of simulate() probabilities; deterministic per seed.
CountTable sample_counts(const CircuitProgram& prog, const StateSet& probes,
                         std::int64_t shots_per_state, std::uint64_t seed,
                         const PhaseError* err = nullptr);

struct CalibrationResult {
    PhaseError deviations;
    double residual = 0.0;  // final sum of squares
    bool converged = false;
    int iterations = 0;
};

struct CalibrationOptions {
    int max_iterations = 200;
    double residual_tol = 1e-12;
    double fd_step = 1e-6;
    double lambda_init = 1e-3;
    // deviations along output-invariant (gauge) directions are not
    // identifiable; this Tikhonov weight selects the minimum-norm solution
    double gauge_regularization = 1e-4;
};

// Least-squares search for the deviations that make circuit probabilities
// match the observed table; the correction rule is ideal - deviation.
CalibrationResult calibrate(const CircuitProgram& prog, const StateSet& probes,
                            const CountTable& observed,
                            const CalibrationOptions& opts = {});

// Program with settings shifted by -deviations (the correction rule).
CircuitProgram apply_correction(const CircuitProgram& prog, const PhaseError& dphi);

// Closed-loop variant: `measure` runs the physical device at the corrected
// settings and returns its count table; the returned deviations solve
// measure(prog - dphi) = Born(prog) directly, so the gauge ambiguity of the
// single-shot estimate drops out.
using MeasureFn = std::function<CountTable(const CircuitProgram&)>;
CalibrationResult calibrate_feedback(const CircuitProgram& prog, const StateSet& probes,
                                     const MeasureFn& measure,
                                     const CalibrationOptions& opts = {});

}  // namespace povmforge
