#include "povmforge/povm.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace povmforge {

using linalg::max_abs;

Povm Povm::from_rank1(int dim, std::vector<Rank1Element> elements) {
    Povm p;
    p.dim_ = dim;
    for (const auto& e : elements) {
        if (e.ket.size() != dim)
            throw std::invalid_argument("Povm: element dimension mismatch");
        if (!(e.weight > 0.0) || e.weight > 1.0 + 1e-12)
            throw std::invalid_argument("Povm: weight outside (0, 1]");
        p.matrices_.push_back(e.matrix());
    }
    p.rank1_ = std::move(elements);
    return p;
}

Povm Povm::from_matrices(int dim, std::vector<Matrix> elements) {
    Povm p;
    p.dim_ = dim;
    for (const auto& m : elements)
        if (m.rows() != dim || m.cols() != dim)
            throw std::invalid_argument("Povm: element dimension mismatch");
    p.matrices_ = std::move(elements);
    return p;
}

const std::vector<Rank1Element>& Povm::rank1_elements() const {
    if (rank1_.empty())
        throw std::logic_error("Povm: not in rank-1 form");
    return rank1_;
}

double Povm::born_probability(int i, const Ket& phi) const {
    if (is_rank1_form()) {
        const auto& e = rank1_.at(i);
        return e.weight * std::norm(e.ket.dot(phi));
    }
    return (phi.adjoint() * matrices_.at(i) * phi)(0).real();
}

PovmValidation validate_povm(const Povm& p) {
    PovmValidation r;
    if (p.size() == 0) {
        r.message = "empty POVM";
        return r;
    }
    Matrix sum = Matrix::Zero(p.dim(), p.dim());
    double min_eig = 1e300;
    for (const auto& e : p.matrices()) {
        sum += e;
        auto eig = linalg::hermitian_eigen(0.5 * (e + e.adjoint()));
        min_eig = std::min(min_eig, eig.values(0));
    }
    r.completeness_deviation = max_abs(sum - Matrix::Identity(p.dim(), p.dim()));
    r.min_eigenvalue = min_eig;
    r.pass = r.completeness_deviation <= 1e-9 && r.min_eigenvalue >= -1e-9;
    std::ostringstream os;
    os << "completeness deviation " << r.completeness_deviation
       << ", min eigenvalue " << r.min_eigenvalue;
    r.message = os.str();
    return r;
}

Matrix haar_unitary(int n, SplitMix64& rng) {
    Matrix z(n, n);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            z(i, j) = Cplx(rng.gaussian(), rng.gaussian()) * inv_sqrt2;
    Eigen::HouseholderQR<Matrix> qr(z);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j) {
        Cplx d = r(j, j);
        double a = std::abs(d);
        q.col(j) *= (a > 0 ? d / a : Cplx(1, 0));
    }
    return q;
}

Povm random_rank1_povm(int d, int n, std::uint64_t seed) {
    if (n < d) throw std::invalid_argument("random_rank1_povm: need n >= d");
    if (n > d * d) throw std::invalid_argument("random_rank1_povm: need n <= d^2");
    SplitMix64 rng(seed);
    Matrix u = haar_unitary(n, rng);
    std::vector<Rank1Element> elems;
    elems.reserve(n);
    for (int i = 0; i < n; ++i) {
        Ket row = u.row(i).head(d).adjoint();
        double w = row.squaredNorm();
        elems.push_back({w, row / std::sqrt(w)});
    }
    return Povm::from_rank1(d, std::move(elems));
}

double gram_det(const StateSet& s) {
    const int n = static_cast<int>(s.states.size());
    Matrix g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            g(i, j) = s.states[i].dot(s.states[j]);
    auto eig = linalg::hermitian_eigen(0.5 * (g + g.adjoint()));
    double det = 1.0;
    for (Eigen::Index k = 0; k < eig.values.size(); ++k) det *= eig.values(k);
    return det;
}

Matrix displacement_d4(int j, int k) {
    using std::numbers::pi;
    const Cplx omega = std::exp(Cplx(0, pi / 2));
    Matrix d = Matrix::Zero(4, 4);
    for (int m = 0; m < 4; ++m)
        d((k + m) % 4, m) = std::pow(omega, j * m);
    return std::exp(Cplx(0, pi / 2) * (static_cast<double>(j) * k / 2.0)) * d;
}

static Ket sic_fiducial_d4() {
    using std::numbers::pi;
    const double r0 = std::sqrt(1.0 - 1.0 / std::sqrt(5.0)) / (2.0 * std::sqrt(2.0 - std::sqrt(2.0)));
    const double r1 = (std::sqrt(2.0) - 1.0) * r0;
    const double rp = 0.5 * std::sqrt(1.0 + 1.0 / std::sqrt(5.0) + std::sqrt(0.2 + 1.0 / std::sqrt(5.0)));
    const double rm = 0.5 * std::sqrt(1.0 + 1.0 / std::sqrt(5.0) - std::sqrt(0.2 + 1.0 / std::sqrt(5.0)));
    const double a = std::acos(2.0 / std::sqrt(5.0 + std::sqrt(5.0)));
    const double b = std::asin(2.0 / std::sqrt(5.0));
    const double tp = a / 2 + b / 4 + pi / 4;
    const double t1 = pi / 2;
    const double tm = -a / 2 + b / 4 + pi / 4;
    Ket psi(4);
    psi << r0, rp * std::exp(Cplx(0, tp)), r1 * std::exp(Cplx(0, t1)), rm * std::exp(Cplx(0, tm));
    return psi;
}

StateSet sic_states_d4() {
    StateSet s;
    s.dim = 4;
    const Ket fid = sic_fiducial_d4();
    for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k)
            s.states.push_back(displacement_d4(j, k) * fid);
    return s;
}

Povm sic_povm_d4() {
    auto s = sic_states_d4();
    std::vector<Rank1Element> elems;
    for (const auto& psi : s.states) elems.push_back({0.25, psi});
    return Povm::from_rank1(4, std::move(elems));
}

StateSet mub_probe_states_d4() {
    const Cplx i(0, 1);
    std::vector<Matrix> bases;
    bases.push_back(Matrix::Identity(4, 4));
    Matrix m2(4, 4), m3(4, 4), m4(4, 4), m5(4, 4);
    m2 << 1, 1, 1, 1,
          1, -1, 1, -1,
          i, i, -i, -i,
          i, -i, -i, i;
    m3 << 1, 1, 1, 1,
          i, -i, i, -i,
          1, 1, -1, -1,
          i, -i, -i, i;
    m4 << 1, 1, 1, 1,
          -1, 1, 1, -1,
          1, -1, 1, -1,
          1, 1, -1, -1;
    m5 << 1, 1, 1, 1,
          -i, i, i, -i,
          -i, -i, i, i,
          1, -1, 1, -1;
    bases.push_back(0.5 * m2);
    bases.push_back(0.5 * m3);
    bases.push_back(0.5 * m4);
    bases.push_back(0.5 * m5);
    StateSet s;
    s.dim = 4;
    for (const auto& b : bases)
        for (int c = 0; c < 4; ++c) s.states.push_back(b.col(c));
    return s;
}

std::array<StateSet, 3> usd_state_sets() {
    const Cplx i(0, 1);
    Matrix s1(4, 4), s2(4, 4), s3(4, 4);
    s1 << -0.3717 - 0.3117 * i, 0.4394 - 0.2619 * i, -0.1983 - 0.3443 * i, -0.0325 - 0.1753 * i,
           0.1096 + 0.5635 * i, 0.2859 + 0.5227 * i, -0.0971 - 0.2818 * i, -0.0403 - 0.4469 * i,
          -0.2687 - 0.2008 * i, 0.4953 - 0.3402 * i,  0.2266 + 0.5127 * i, -0.0579 - 0.3399 * i,
           0.4649 - 0.3263 * i, 0.0964 + 0.1142 * i, -0.4841 + 0.4525 * i, -0.5207 - 0.6139 * i;
    s2 <<  0.3963 + 0.4143 * i, 0.2242 + 0.1814 * i,  0.1670 - 0.5253 * i, -0.2909 - 0.0835 * i,
           0.1252 - 0.4273 * i, -0.6517 + 0.1848 * i, 0.0179 - 0.5335 * i, -0.3509 - 0.2353 * i,
          -0.1291 + 0.4315 * i, 0.2118 - 0.4864 * i,  0.3334 - 0.0495 * i, -0.4095 + 0.5014 * i,
           0.3979 - 0.3345 * i, 0.4051 - 0.1118 * i,  0.4434 + 0.3177 * i,  0.2368 + 0.5048 * i;
    s3 << -0.4383 - 0.5134 * i, -0.3202 + 0.0620 * i, 0.4884 - 0.0513 * i,  0.4286 + 0.3428 * i,
          -0.5238 - 0.0632 * i, 0.1704 - 0.8889 * i, -0.2911 + 0.1488 * i, -0.0686 + 0.4814 * i,
          -0.0482 + 0.3753 * i, 0.2068 - 0.1038 * i,  0.5337 + 0.3368 * i, -0.1992 + 0.3649 * i,
          -0.2591 + 0.2359 * i, -0.0940 + 0.1102 * i, -0.4580 - 0.2096 * i, -0.5134 + 0.1611 * i;
    std::array<StateSet, 3> out;
    const Matrix* sets[3] = {&s1, &s2, &s3};
    for (int k = 0; k < 3; ++k) {
        out[k].dim = 4;
        for (int c = 0; c < 4; ++c) {
            Ket v = sets[k]->col(c);
            out[k].states.push_back(v / v.norm());
        }
    }
    return out;
}

Rank1Refinement rank1_refinement(const Povm& p, double tol) {
    Rank1Refinement out;
    std::vector<Rank1Element> elems;
    for (int i = 0; i < p.size(); ++i) {
        if (p.is_rank1_form()) {
            elems.push_back(p.rank1_elements()[i]);
            out.outcome_of.push_back(i);
            continue;
        }
        auto eig = linalg::hermitian_eigen(0.5 * (p.element(i) + p.element(i).adjoint()));
        for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
            if (eig.values(k) <= tol) continue;
            elems.push_back({std::min(eig.values(k), 1.0), eig.vectors.col(k)});
            out.outcome_of.push_back(i);
        }
    }
    out.povm = Povm::from_rank1(p.dim(), std::move(elems));
    return out;
}

}  // namespace povmforge
