#include "povmforge/sdp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace povmforge::sdp {

LinearExpr& LinearExpr::add(int block, int row, int col, Cplx val) {
    if (row > col) {
        std::swap(row, col);
        val = std::conj(val);
    }
    if (row == col && std::abs(val.imag()) > 0)
        throw std::invalid_argument("LinearExpr: diagonal entry must be real");
    for (auto& bc : blocks)
        if (bc.block == block) {
            bc.entries.push_back({row, col, val});
            return *this;
        }
    blocks.push_back({block, {{row, col, val}}});
    return *this;
}

LinearExpr& LinearExpr::add_matrix(int block, const Matrix& a, int row_off, int col_off,
                                   double scale) {
    for (int r = 0; r < a.rows(); ++r) {
        add(block, row_off + r, col_off + r, scale * a(r, r).real());
        for (int c = r + 1; c < a.cols(); ++c)
            add(block, row_off + r, col_off + c, scale * a(r, c));
    }
    return *this;
}

LinearExpr& LinearExpr::add_free(int index, double coeff) {
    free_terms.push_back({index, coeff});
    return *this;
}

int Problem::add_block(int dim) {
    dims_.push_back(dim);
    return static_cast<int>(dims_.size()) - 1;
}

int Problem::add_free_hermitian(int dim) {
    int base = free_count_;
    free_count_ += dim * dim;
    return base;
}

int Problem::add_free() { return free_count_++; }

void Problem::set_objective(Sense sense, LinearExpr expr) {
    sense_ = sense;
    objective_ = std::move(expr);
}

void Problem::add_equality(LinearExpr lhs, double rhs) { equalities_.push_back({std::move(lhs), rhs}); }
void Problem::add_geq(LinearExpr lhs, double rhs) { geq_.push_back({std::move(lhs), rhs}); }
void Problem::add_leq(LinearExpr lhs, double rhs) { leq_.push_back({std::move(lhs), rhs}); }

int Problem::constraint_count() const {
    return static_cast<int>(equalities_.size() + geq_.size() + leq_.size());
}

namespace {

// free-variable layout of a Hermitian matrix: d diagonals, then (Re, Im)
// pairs for r < c row-major
int herm_pair_index(int d, int r, int c) {
    // index of (r, c), r < c, among row-major upper pairs
    return r * (2 * d - r - 1) / 2 + (c - r - 1);
}

}  // namespace

void Problem::add_corner_equals_free(int block, int row_off, int col_off, int free_base, int dim) {
    for (int r = 0; r < dim; ++r) {
        LinearExpr e;
        e.add(block, row_off + r, col_off + r, 1.0);
        e.add_free(free_base + r, -1.0);
        add_equality(std::move(e), 0.0);
        for (int c = r + 1; c < dim; ++c) {
            const int p = free_base + dim + 2 * herm_pair_index(dim, r, c);
            LinearExpr re;
            re.add(block, row_off + r, col_off + c, 1.0);
            re.add_free(p, -2.0);
            add_equality(std::move(re), 0.0);
            LinearExpr im;
            im.add(block, row_off + r, col_off + c, Cplx(0, 1));
            im.add_free(p + 1, -2.0);
            add_equality(std::move(im), 0.0);
        }
    }
}

void Problem::add_hermitian_tie(int block, int row_off, int col_off, int dim) {
    for (int r = 0; r < dim; ++r) {
        LinearExpr e;
        e.add(block, row_off + r, col_off + r, Cplx(0, 1));
        add_equality(std::move(e), 0.0);
        for (int c = r + 1; c < dim; ++c) {
            LinearExpr re;
            re.add(block, row_off + r, col_off + c, 1.0);
            re.add(block, row_off + c, col_off + r, -1.0);
            add_equality(std::move(re), 0.0);
            LinearExpr im;
            im.add(block, row_off + r, col_off + c, Cplx(0, 1));
            im.add(block, row_off + c, col_off + r, Cplx(0, 1));
            add_equality(std::move(im), 0.0);
        }
    }
}

void Problem::add_identity_proportional(const std::vector<Region>& parts, int dim) {
    // trace-free Hermitian basis rows; off-diagonal regions must be tied
    // Hermitian first (add_hermitian_tie) for this reading to be exact
    for (int r = 0; r + 1 < dim; ++r) {
        LinearExpr e;
        for (const auto& p : parts) {
            e.add(p.block, p.row_off + r, p.col_off + r, p.scale);
            e.add(p.block, p.row_off + r + 1, p.col_off + r + 1, -p.scale);
        }
        add_equality(std::move(e), 0.0);
    }
    for (int r = 0; r < dim; ++r)
        for (int c = r + 1; c < dim; ++c) {
            LinearExpr re, im;
            for (const auto& p : parts) {
                re.add(p.block, p.row_off + r, p.col_off + c, p.scale);
                re.add(p.block, p.row_off + c, p.col_off + r, p.scale);
                im.add(p.block, p.row_off + r, p.col_off + c, Cplx(0, p.scale));
                im.add(p.block, p.row_off + c, p.col_off + r, Cplx(0, -p.scale));
            }
            add_equality(std::move(re), 0.0);
            add_equality(std::move(im), 0.0);
        }
}

// ---------------------------------------------------------------------------
// solver
// ---------------------------------------------------------------------------

namespace {

struct FullEntry {
    int r, c;
    Cplx v;
};

struct ConBlock {
    int block;
    std::vector<FullEntry> ent;
};

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    for (auto& th : pool) th.join();
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

struct Solver {
    // compiled problem (internal sense: minimize)
    std::vector<int> dims;
    int nb = 0, nf = 0, m = 0;
    std::vector<Matrix> C;
    Eigen::VectorXd cf, b;
    std::vector<std::vector<ConBlock>> A;                      // per constraint
    std::vector<std::vector<std::pair<int, double>>> Afree;    // per constraint
    bool maximize = false;
    Options opts;

    // structure
    std::vector<std::vector<int>> block_cons;
    std::vector<std::vector<int>> comps;   // constraint ids per component
    std::vector<int> comp_of, pos_in_comp;
    std::vector<int> pure_rows;
    Eigen::MatrixXd FP;                    // pure rows x nf

    // iterate
    std::vector<Matrix> X, S, Sinv;
    Eigen::VectorXd y, xf;

    // per-iteration factorizations
    std::vector<Eigen::LDLT<Eigen::MatrixXd>> comp_ldlt;
    std::vector<Eigen::MatrixXd> comp_MinvFC;   // per comp: mk x nf
    Eigen::PartialPivLU<Eigen::MatrixXd> border_lu;
    bool has_border = false;

    double user_sign() const { return maximize ? -1.0 : 1.0; }

    void compile(const Problem& p) {
        dims = p.dims_;
        nf = p.free_count_;
        maximize = (p.sense_ == Sense::Maximize);

        std::vector<Constraint> cons = p.equalities_;
        std::vector<int> slack_dims;
        auto add_slacked = [&](const Constraint& c, double sign) {
            Constraint cc = c;
            const int blk = static_cast<int>(dims.size() + slack_dims.size());
            slack_dims.push_back(1);
            cc.lhs.blocks.push_back({blk, {{0, 0, sign}}});
            cons.push_back(std::move(cc));
        };
        for (const auto& c : p.geq_) add_slacked(c, -1.0);
        for (const auto& c : p.leq_) add_slacked(c, +1.0);
        dims.insert(dims.end(), slack_dims.begin(), slack_dims.end());
        nb = static_cast<int>(dims.size());
        m = static_cast<int>(cons.size());

        const double sign = user_sign();
        C.assign(nb, Matrix());
        for (int bidx = 0; bidx < nb; ++bidx) C[bidx] = Matrix::Zero(dims[bidx], dims[bidx]);
        cf = Eigen::VectorXd::Zero(nf);
        for (const auto& bc : p.objective_.blocks)
            for (const auto& e : bc.entries) {
                C[bc.block](e.row, e.col) += sign * e.val;
                if (e.row != e.col) C[bc.block](e.col, e.row) += sign * std::conj(e.val);
            }
        for (const auto& [idx, v] : p.objective_.free_terms) cf(idx) += sign * v;

        b.resize(m);
        A.resize(m);
        Afree.resize(m);
        for (int pdx = 0; pdx < m; ++pdx) {
            b(pdx) = cons[pdx].rhs;
            for (const auto& bc : cons[pdx].lhs.blocks) {
                ConBlock cb;
                cb.block = bc.block;
                for (const auto& e : bc.entries) {
                    cb.ent.push_back({e.row, e.col, e.val});
                    if (e.row != e.col) cb.ent.push_back({e.col, e.row, std::conj(e.val)});
                }
                // merge if the block already appeared in this constraint
                bool merged = false;
                for (auto& prev : A[pdx])
                    if (prev.block == bc.block) {
                        prev.ent.insert(prev.ent.end(), cb.ent.begin(), cb.ent.end());
                        merged = true;
                        break;
                    }
                if (!merged) A[pdx].push_back(std::move(cb));
            }
            Afree[pdx] = cons[pdx].lhs.free_terms;
        }

        block_cons.assign(nb, {});
        for (int pdx = 0; pdx < m; ++pdx)
            for (const auto& cb : A[pdx]) block_cons[cb.block].push_back(pdx);

        UnionFind uf(m);
        for (int bidx = 0; bidx < nb; ++bidx)
            for (size_t k = 1; k < block_cons[bidx].size(); ++k)
                uf.unite(block_cons[bidx][0], block_cons[bidx][k]);

        comp_of.assign(m, -1);
        pos_in_comp.assign(m, -1);
        std::vector<int> root_to_comp(m, -1);
        for (int pdx = 0; pdx < m; ++pdx) {
            if (A[pdx].empty()) {
                pure_rows.push_back(pdx);
                continue;
            }
            int r = uf.find(pdx);
            if (root_to_comp[r] < 0) {
                root_to_comp[r] = static_cast<int>(comps.size());
                comps.push_back({});
            }
            comp_of[pdx] = root_to_comp[r];
            pos_in_comp[pdx] = static_cast<int>(comps[root_to_comp[r]].size());
            comps[root_to_comp[r]].push_back(pdx);
        }

        FP.setZero(static_cast<Eigen::Index>(pure_rows.size()), nf);
        for (size_t i = 0; i < pure_rows.size(); ++i)
            for (const auto& [idx, v] : Afree[pure_rows[i]]) FP(i, idx) += v;
        has_border = nf > 0 || !pure_rows.empty();
    }

    double apply_con_block(const ConBlock& cb, const std::vector<Matrix>& Xs) const {
        Cplx acc = 0.0;
        const Matrix& x = Xs[cb.block];
        for (const auto& e : cb.ent) acc += e.v * x(e.c, e.r);
        return acc.real();
    }

    Eigen::VectorXd applyA(const std::vector<Matrix>& Xs) const {
        Eigen::VectorXd out(m);
        for (int pdx = 0; pdx < m; ++pdx) {
            double v = 0.0;
            for (const auto& cb : A[pdx]) v += apply_con_block(cb, Xs);
            out(pdx) = v;
        }
        return out;
    }

    void applyAT(const Eigen::VectorXd& yv, std::vector<Matrix>& out) const {
        for (int bidx = 0; bidx < nb; ++bidx) out[bidx].setZero(dims[bidx], dims[bidx]);
        for (int pdx = 0; pdx < m; ++pdx) {
            const double yp = yv(pdx);
            if (yp == 0.0) continue;
            for (const auto& cb : A[pdx])
                for (const auto& e : cb.ent) out[cb.block](e.r, e.c) += yp * e.v;
        }
    }

    Eigen::VectorXd applyFT(const Eigen::VectorXd& yv) const {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(nf);
        for (int pdx = 0; pdx < m; ++pdx)
            for (const auto& [idx, v] : Afree[pdx]) out(idx) += v * yv(pdx);
        return out;
    }

    Eigen::VectorXd applyF(const Eigen::VectorXd& u) const {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(m);
        for (int pdx = 0; pdx < m; ++pdx)
            for (const auto& [idx, v] : Afree[pdx]) out(pdx) += v * u(idx);
        return out;
    }

    // Schur entry sum over one block: Re Tr(Ap X Aq Sinv)
    double schur_entry(const ConBlock& ap, const ConBlock& aq, const Matrix& x,
                       const Matrix& sinv) const {
        Cplx acc = 0.0;
        for (const auto& e1 : ap.ent)
            for (const auto& e2 : aq.ent)
                acc += e1.v * x(e1.c, e2.r) * e2.v * sinv(e2.c, e1.r);
        return acc.real();
    }

    void factorize() {
        const int nc = static_cast<int>(comps.size());
        comp_ldlt.resize(nc);
        comp_MinvFC.assign(nc, Eigen::MatrixXd());
        parallel_for(nc, opts.threads, [&](int k) {
            const auto& rows = comps[k];
            const int mk = static_cast<int>(rows.size());
            Eigen::MatrixXd M = Eigen::MatrixXd::Zero(mk, mk);
            // accumulate block-wise over constraints sharing each block
            for (int i = 0; i < mk; ++i) {
                const int pdx = rows[i];
                for (const auto& cbp : A[pdx]) {
                    for (int cq : block_cons[cbp.block]) {
                        const int jpos = pos_in_comp[cq];
                        if (jpos < i) continue;  // fill upper triangle once
                        const auto& aq = A[cq];
                        for (const auto& cbq : aq)
                            if (cbq.block == cbp.block) {
                                M(i, jpos) += schur_entry(cbp, cbq, X[cbp.block], Sinv[cbp.block]);
                                break;
                            }
                    }
                }
            }
            M = M.selfadjointView<Eigen::Upper>();
            double jitter = 0.0;
            for (int attempt = 0; attempt < 4; ++attempt) {
                Eigen::MatrixXd Mj = M;
                if (jitter > 0) Mj.diagonal().array() += jitter;
                comp_ldlt[k].compute(Mj);
                if (comp_ldlt[k].info() == Eigen::Success &&
                    comp_ldlt[k].isPositive()) break;
                jitter = (jitter == 0) ? 1e-13 * (1 + M.diagonal().maxCoeff()) : jitter * 100;
            }
            if (nf > 0) {
                Eigen::MatrixXd FC = Eigen::MatrixXd::Zero(mk, nf);
                for (int i = 0; i < mk; ++i)
                    for (const auto& [idx, v] : Afree[rows[i]]) FC(i, idx) += v;
                comp_MinvFC[k] = comp_ldlt[k].solve(FC);
            }
        });

        if (has_border) {
            const int np = static_cast<int>(pure_rows.size());
            Eigen::MatrixXd B = Eigen::MatrixXd::Zero(nf + np, nf + np);
            if (nf > 0) {
                Eigen::MatrixXd G = Eigen::MatrixXd::Zero(nf, nf);
                for (size_t k = 0; k < comps.size(); ++k) {
                    if (comp_MinvFC[k].size() == 0) continue;
                    const auto& rows = comps[k];
                    const int mk = static_cast<int>(rows.size());
                    Eigen::MatrixXd FC = Eigen::MatrixXd::Zero(mk, nf);
                    for (int i = 0; i < mk; ++i)
                        for (const auto& [idx, v] : Afree[rows[i]]) FC(i, idx) += v;
                    G += FC.transpose() * comp_MinvFC[k];
                }
                B.topLeftCorner(nf, nf) = -G;
            }
            if (np > 0) {
                B.topRightCorner(nf, np) = FP.transpose();
                B.bottomLeftCorner(np, nf) = FP;
            }
            border_lu.compute(B);
        }
    }

    // solve [[M,F],[F^T,0]] [dy; du] = [rhs_y; rhs_f]
    void solve_kkt(const Eigen::VectorXd& rhs_y, const Eigen::VectorXd& rhs_f,
                   Eigen::VectorXd& dy, Eigen::VectorXd& du) const {
        const int nc = static_cast<int>(comps.size());
        dy.setZero(m);
        du.setZero(nf);
        std::vector<Eigen::VectorXd> u(nc);
        for (int k = 0; k < nc; ++k) {
            const auto& rows = comps[k];
            Eigen::VectorXd r(rows.size());
            for (size_t i = 0; i < rows.size(); ++i) r(i) = rhs_y(rows[i]);
            u[k] = comp_ldlt[k].solve(r);
        }
        Eigen::VectorXd yP;
        if (has_border) {
            const int np = static_cast<int>(pure_rows.size());
            Eigen::VectorXd g = rhs_f;
            for (int k = 0; k < nc; ++k) {
                const auto& rows = comps[k];
                for (size_t i = 0; i < rows.size(); ++i)
                    for (const auto& [idx, v] : Afree[rows[i]]) g(idx) -= v * u[k](i);
            }
            Eigen::VectorXd rhs(nf + np);
            rhs.head(nf) = g;
            for (int i = 0; i < np; ++i) rhs(nf + i) = rhs_y(pure_rows[i]);
            Eigen::VectorXd sol = border_lu.solve(rhs);
            du = sol.head(nf);
            yP = sol.tail(np);
            for (int i = 0; i < np; ++i) dy(pure_rows[i]) = yP(i);
        }
        for (int k = 0; k < nc; ++k) {
            const auto& rows = comps[k];
            if (nf > 0 && comp_MinvFC[k].size() > 0) {
                Eigen::VectorXd corr = comp_MinvFC[k] * du;
                for (size_t i = 0; i < rows.size(); ++i) dy(rows[i]) = u[k](i) - corr(i);
            } else {
                for (size_t i = 0; i < rows.size(); ++i) dy(rows[i]) = u[k](i);
            }
        }
    }

    static double max_step(const std::vector<Matrix>& Zs, const std::vector<Matrix>& dZs) {
        double amax = std::numeric_limits<double>::infinity();
        for (size_t bidx = 0; bidx < Zs.size(); ++bidx) {
            Eigen::LLT<Matrix> llt(Zs[bidx]);
            if (llt.info() != Eigen::Success) return 0.0;
            Matrix L = llt.matrixL();
            Matrix Bm = L.triangularView<Eigen::Lower>().solve(dZs[bidx]);
            Matrix W = L.triangularView<Eigen::Lower>().solve(Bm.adjoint()).adjoint();
            Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (W + W.adjoint()),
                                                     Eigen::EigenvaluesOnly);
            const double lmin = es.eigenvalues()(0);
            if (lmin < -1e-14) amax = std::min(amax, -1.0 / lmin);
        }
        return amax;
    }

    Solution run() {
        Solution sol;
        const double bmax = m ? b.cwiseAbs().maxCoeff() : 0.0;
        double cmax = cf.size() ? cf.cwiseAbs().maxCoeff() : 0.0;
        for (const auto& cb : C) cmax = std::max(cmax, linalg::max_abs(cb));

        const double xi = opts.init_scale * std::max(1.0, bmax);
        const double eta = opts.init_scale * std::max(1.0, cmax);
        X.resize(nb);
        S.resize(nb);
        Sinv.resize(nb);
        for (int bidx = 0; bidx < nb; ++bidx) {
            X[bidx] = xi * Matrix::Identity(dims[bidx], dims[bidx]);
            S[bidx] = eta * Matrix::Identity(dims[bidx], dims[bidx]);
        }
        y = Eigen::VectorXd::Zero(m);
        xf = Eigen::VectorXd::Zero(nf);

        double total_dim = 0;
        for (int dnb : dims) total_dim += dnb;

        std::vector<Matrix> ATy(nb), Rd(nb), T(nb), dX(nb), dS(nb), dXa(nb), dSa(nb), P(nb);
        Eigen::VectorXd dy, du, dya, dua;

        double best_score = std::numeric_limits<double>::infinity();
        Solution best;

        for (int it = 0; it < opts.max_iterations; ++it) {
            for (int bidx = 0; bidx < nb; ++bidx) {
                Eigen::LLT<Matrix> llt(S[bidx]);
                if (llt.info() != Eigen::Success) {
                    sol.status = Status::NumericalError;
                    sol.message = "dual block lost positive definiteness";
                    finalize(sol, it);
                    return pick_best(best, best_score, sol);
                }
                Sinv[bidx] = llt.solve(Matrix::Identity(dims[bidx], dims[bidx]));
            }

            const Eigen::VectorXd rp = b - applyA(X) - applyF(xf);
            applyAT(y, ATy);
            double mu = 0.0;
            for (int bidx = 0; bidx < nb; ++bidx) {
                Rd[bidx] = C[bidx] - S[bidx] - ATy[bidx];
                mu += (X[bidx] * S[bidx]).trace().real();
            }
            mu /= total_dim;
            const Eigen::VectorXd rf = cf - applyFT(y);

            double pobj = cf.dot(xf), dobj = b.dot(y);
            for (int bidx = 0; bidx < nb; ++bidx) pobj += (C[bidx] * X[bidx]).trace().real();

            double dinf = nf ? rf.cwiseAbs().maxCoeff() / (1 + cmax) : 0.0;
            for (int bidx = 0; bidx < nb; ++bidx)
                dinf = std::max(dinf, linalg::max_abs(Rd[bidx]) / (1 + cmax));
            const double pinf = m ? rp.cwiseAbs().maxCoeff() / (1 + bmax) : 0.0;
            const double gap = std::abs(pobj - dobj);
            const double relgap = gap / (1 + std::max(std::abs(pobj), std::abs(dobj)));

            if (opts.record_trace)
                sol.trace.push_back({it, user_sign() * pobj, user_sign() * dobj, pinf, dinf, mu});

            const double score = std::max({pinf, dinf, relgap});
            if (score < best_score) {
                best_score = score;
                best.blocks = X;
                best.free_values = xf;
                best.primal_value = user_sign() * pobj;
                best.dual_value = user_sign() * dobj;
                best.gap = gap;
                best.iterations = it;
                best.primal_residual = m ? rp.cwiseAbs().maxCoeff() : 0.0;
            }

            if (pinf <= opts.feas_tol && dinf <= opts.feas_tol &&
                (gap <= opts.gap_abs_tol || relgap <= opts.gap_rel_tol)) {
                sol.status = Status::Optimal;
                finalize(sol, it);
                return sol;
            }
            if ((y.size() && y.cwiseAbs().maxCoeff() > 1e10 * (1 + bmax)) && pinf > 1e-6) {
                sol.status = Status::Infeasible;
                sol.message = "dual iterate diverging; primal likely infeasible";
                finalize(sol, it);
                return pick_best(best, best_score, sol);
            }

            factorize();

            // predictor (affine scaling)
            for (int bidx = 0; bidx < nb; ++bidx) {
                T[bidx] = -X[bidx] * S[bidx];
                P[bidx] = (T[bidx] - X[bidx] * Rd[bidx]) * Sinv[bidx];
            }
            Eigen::VectorXd h = rp - applyA(P);
            solve_kkt(h, rf, dya, dua);
            applyAT(dya, dXa);  // reuse dXa as A^T(dy) buffer
            for (int bidx = 0; bidx < nb; ++bidx) {
                dSa[bidx] = Rd[bidx] - dXa[bidx];
                Matrix dx = (T[bidx] - X[bidx] * dSa[bidx]) * Sinv[bidx];
                dXa[bidx] = 0.5 * (dx + dx.adjoint());
            }
            const double apa = std::min(1.0, 0.98 * max_step(X, dXa));
            const double ada = std::min(1.0, 0.98 * max_step(S, dSa));

            double mu_aff = 0.0;
            for (int bidx = 0; bidx < nb; ++bidx)
                mu_aff += ((X[bidx] + apa * dXa[bidx]) * (S[bidx] + ada * dSa[bidx])).trace().real();
            mu_aff /= total_dim;
            double sigma = std::pow(std::max(0.0, mu_aff / mu), 3);
            sigma = std::clamp(sigma, 1e-8, 1.0);

            // corrector
            for (int bidx = 0; bidx < nb; ++bidx) {
                T[bidx] = sigma * mu * Matrix::Identity(dims[bidx], dims[bidx]) -
                          X[bidx] * S[bidx] - dXa[bidx] * dSa[bidx];
                P[bidx] = (T[bidx] - X[bidx] * Rd[bidx]) * Sinv[bidx];
            }
            h = rp - applyA(P);
            solve_kkt(h, rf, dy, du);
            applyAT(dy, dX);  // buffer
            for (int bidx = 0; bidx < nb; ++bidx) {
                dS[bidx] = Rd[bidx] - dX[bidx];
                Matrix dx = (T[bidx] - X[bidx] * dS[bidx]) * Sinv[bidx];
                dX[bidx] = 0.5 * (dx + dx.adjoint());
            }
            const double ap = std::min(1.0, 0.98 * max_step(X, dX));
            const double ad = std::min(1.0, 0.98 * max_step(S, dS));
            if (ap < 1e-10 && ad < 1e-10) {
                sol.status = Status::NumericalError;
                sol.message = "step length collapsed";
                finalize(sol, it);
                return pick_best(best, best_score, sol);
            }

            for (int bidx = 0; bidx < nb; ++bidx) {
                X[bidx] += ap * dX[bidx];
                S[bidx] += ad * dS[bidx];
                X[bidx] = 0.5 * (X[bidx] + X[bidx].adjoint());
                S[bidx] = 0.5 * (S[bidx] + S[bidx].adjoint());
            }
            xf += ap * du;
            y += ad * dy;
        }
        sol.status = Status::MaxIterations;
        sol.message = "iteration limit reached";
        finalize(sol, opts.max_iterations);
        return pick_best(best, best_score, sol);
    }

    void finalize(Solution& sol, int it) {
        sol.iterations = it;
        sol.blocks = X;
        sol.free_values = xf;
        double pobj = cf.dot(xf), dobj = b.dot(y);
        for (int bidx = 0; bidx < nb; ++bidx) pobj += (C[bidx] * X[bidx]).trace().real();
        sol.primal_value = user_sign() * pobj;
        sol.dual_value = user_sign() * dobj;
        sol.gap = std::abs(pobj - dobj);
        const Eigen::VectorXd rp = b - applyA(X) - applyF(xf);
        sol.primal_residual = m ? rp.cwiseAbs().maxCoeff() : 0.0;
    }

    static Solution pick_best(Solution& best, double best_score, Solution& current) {
        if (best.blocks.empty()) return current;
        // keep the better iterate but the honest status/message
        if (best_score < 1e300 && current.status != Status::Optimal) {
            best.status = current.status;
            best.message = current.message;
            best.trace = std::move(current.trace);
            return best;
        }
        return current;
    }
};

Solution solve(const Problem& p, const Options& opts) {
    Solver s;
    s.opts = opts;
    s.compile(p);
    Solution sol = s.run();
    // strip slack blocks from the reported primal
    sol.blocks.resize(p.dims_.size());
    return sol;
}

}  // namespace povmforge::sdp
