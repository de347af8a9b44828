#include "povmforge/compiler.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace povmforge {

using std::numbers::pi;

namespace {

double wrap_2pi(double x) {
    x = std::fmod(x, 2 * pi);
    return x < 0 ? x + 2 * pi : x;
}

Cplx c00_of(double beta) {
    return Cplx(0, 1) * std::exp(Cplx(0, beta / 2)) * std::sin(beta / 2);
}

}  // namespace

Matrix mzi_unitary(const MziSetting& s) {
    const double sb = std::sin(s.beta / 2), cb = std::cos(s.beta / 2);
    const Cplx ph = Cplx(0, 1) * std::exp(Cplx(0, s.beta / 2));
    const Cplx ea = std::exp(Cplx(0, s.alpha));
    Matrix c(2, 2);
    c << ea * sb, cb,
         ea * cb, -sb;
    return ph * c;
}

Matrix embed_two_mode(const Matrix& c, int j, int d) {
    if (j < 1 || j > d) throw std::invalid_argument("embed_two_mode: j out of range");
    Matrix u = Matrix::Identity(d, d);
    if (j < d) {
        u(j - 1, j - 1) = c(0, 0);
        u(j - 1, j) = c(0, 1);
        u(j, j - 1) = c(1, 0);
        u(j, j) = c(1, 1);
    } else {
        u(d - 1, d - 1) = c(0, 0);
    }
    return u;
}

MziSetting zeroing_setting(const Ket& xi, int j) {
    const Cplx x0 = xi(j - 1), x1 = xi(j);
    if (std::abs(x0) < 1e-12 && std::abs(x1) < 1e-12) return {0.0, pi};
    if (std::abs(x0) < 1e-12) return {0.0, pi};   // need cos(beta/2) = 0
    if (std::abs(x1) < 1e-12) return {0.0, 0.0};  // need sin(beta/2) = 0
    // e^{i alpha} tan(beta/2) = -x1/x0
    const Cplx r = -x1 / x0;
    return {wrap_2pi(std::arg(r)), 2 * std::atan(std::abs(r))};
}

CompileResult compile(const Povm& p) {
    if (!p.is_rank1_form())
        throw std::invalid_argument(
            "compile: POVM must be in rank-1 form (decompose general elements first)");
    auto v = validate_povm(p);
    if (!v.pass)
        throw std::invalid_argument("compile: POVM failed validation (" + v.message + ")");
    const auto& elems = p.rank1_elements();
    const int d = p.dim();
    const int n = p.size();

    CompileResult out;
    out.program.dim = d;
    out.program.n_outcomes = n;

    Matrix k = Matrix::Identity(d, d);
    int l = d;
    for (int i = 1; i <= n - 1; ++i) {
        if (l < 1) throw std::runtime_error("compile: effective dimension exhausted early");
        const double a_i = elems[i - 1].weight;
        const Ket& psi = elems[i - 1].ket;

        Ket eta = linalg::pseudo_inverse(k).adjoint() * psi;
        const double b = eta.norm();
        eta /= b;

        CompileStage stage;
        stage.k_in = k;
        stage.l = l;
        stage.b = b;
        stage.eta = eta;

        std::vector<MziSetting> settings;
        settings.reserve(d);
        Matrix sweep = Matrix::Identity(d, d);
        Ket xi = eta;
        for (int j = 1; j <= l - 1; ++j) {
            MziSetting s = zeroing_setting(xi, j);
            Matrix u = embed_two_mode(mzi_unitary(s), j, d);
            xi = u * xi;
            sweep = u * sweep;
            settings.push_back(s);
        }
        stage.sweep = sweep;
        out.trace.stages.push_back(std::move(stage));

        // step 4: |c10| = b sqrt(a); under the parameterization |c10| = cos(beta/2)
        double x = b * std::sqrt(a_i);
        if (x > 1 + 1e-6)
            throw std::runtime_error("compile: infeasible amplitude b*sqrt(a) > 1");
        const bool tight = (l >= n - i + 1);  // rank bound forces c00 = 0 here
        if (tight) {
            if (x < 1 - 1e-6)
                throw std::runtime_error("compile: rank bound requires b*sqrt(a) = 1");
            x = 1.0;
        }
        x = std::min(x, 1.0);
        const double beta_l = 2 * std::acos(x);
        settings.push_back({0.0, beta_l});
        Cplx c00 = c00_of(beta_l);
        if (std::abs(c00) < 1e-9) c00 = 0.0;

        // step 5: route mode l down to the ancilla with full crossings
        for (int j = l + 1; j <= d; ++j) settings.push_back({0.0, 0.0});
        out.program.modules.push_back(std::move(settings));

        // step 6: K update
        Matrix proj = Matrix::Zero(d, d);
        for (int kk = 0; kk + 1 < l; ++kk) proj(kk, kk) = 1.0;
        proj(l - 1, l - 1) = c00;
        k = proj * sweep * k;

        // step 7
        if (c00 == 0.0) --l;
    }
    out.trace.k_final = k;
    return out;
}

}  // namespace povmforge
