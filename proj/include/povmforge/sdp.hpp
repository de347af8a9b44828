#pragma once

#include <string>
#include <vector>

#include "povmforge/linalg.hpp"

namespace povmforge::sdp {

// One upper-triangular entry of a sparse Hermitian coefficient matrix:
// A(row,col) = val and A(col,row) = conj(val). Diagonal entries must be real.
struct HermEntry {
    int row;
    int col;
    Cplx val;
};

struct BlockCoeff {
    int block;
    std::vector<HermEntry> entries;
};

// Re Tr(sum_b A_b X_b) + f . u over cone blocks X and free variables u.
struct LinearExpr {
    std::vector<BlockCoeff> blocks;
    std::vector<std::pair<int, double>> free_terms;

    LinearExpr& add(int block, int row, int col, Cplx val);
    LinearExpr& add_matrix(int block, const Matrix& a, int row_off = 0, int col_off = 0,
                           double scale = 1.0);
    LinearExpr& add_free(int index, double coeff);
};

struct Constraint {
    LinearExpr lhs;
    double rhs = 0.0;
};

enum class Sense { Maximize, Minimize };

class Problem {
public:
    int add_block(int dim);
    // Allocate a Hermitian matrix of free variables; returns the base index.
    // Layout: d diagonal entries, then (Re, Im) pairs for r < c in row-major.
    int add_free_hermitian(int dim);
    int add_free();

    void set_objective(Sense sense, LinearExpr expr);
    void add_equality(LinearExpr lhs, double rhs);
    void add_geq(LinearExpr lhs, double rhs);   // lhs >= rhs
    void add_leq(LinearExpr lhs, double rhs);   // lhs <= rhs

    // Expand "entry of cone-block region equals entry of free Hermitian
    // matrix" into dim*dim scalar equalities.
    void add_corner_equals_free(int block, int row_off, int col_off, int free_base, int dim);
    // Region must equal its own adjoint (used to tie moment classes).
    void add_hermitian_tie(int block, int row_off, int col_off, int dim);
    // sum of the listed regions is proportional to the identity (trace free).
    struct Region {
        int block;
        int row_off;
        int col_off;
        double scale = 1.0;
    };
    void add_identity_proportional(const std::vector<Region>& parts, int dim);

    const std::vector<int>& block_dims() const { return dims_; }
    int free_count() const { return free_count_; }
    int constraint_count() const;

    // access for the solver
    friend struct Solver;

    std::vector<int> dims_;
    int free_count_ = 0;
    Sense sense_ = Sense::Minimize;
    LinearExpr objective_;
    std::vector<Constraint> equalities_;
    std::vector<Constraint> geq_;
    std::vector<Constraint> leq_;
};

enum class Status { Optimal, MaxIterations, Infeasible, NumericalError };

struct IterateInfo {
    int iteration = 0;
    double primal_objective = 0.0;  // user sense
    double dual_objective = 0.0;    // user sense
    double primal_infeasibility = 0.0;
    double dual_infeasibility = 0.0;
    double mu = 0.0;
};

struct Options {
    double gap_abs_tol = 1e-8;
    double gap_rel_tol = 1e-6;
    double feas_tol = 1e-9;
    int max_iterations = 200;
    int threads = 1;
    bool record_trace = false;
    double init_scale = 1.0;
};

struct Solution {
    Status status = Status::NumericalError;
    std::vector<Matrix> blocks;
    Eigen::VectorXd free_values;
    double primal_value = 0.0;  // user sense
    double dual_value = 0.0;    // user sense
    double gap = 0.0;
    double primal_residual = 0.0;  // max |<A,X> - b|
    int iterations = 0;
    std::vector<IterateInfo> trace;
    std::string message;

    bool ok() const { return status == Status::Optimal; }
};

Solution solve(const Problem& p, const Options& opts = {});

}  // namespace povmforge::sdp
