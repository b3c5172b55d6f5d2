#include <doctest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "slasf/montecarlo.hpp"
#include "slasf/structural.hpp"

using namespace slasf;

namespace {

Matrix swap2() {
    Matrix a(2, 2);
    a << 0, 1, 1, 0;
    return a;
}

SubspaceBasis span(const Matrix& m) { return image_basis(m, TolerancePolicy{}); }

IterationRecord record(int ell, int p, std::vector<Eigen::Index> ranks, std::vector<bool> in_image) {
    IterationRecord r;
    r.ell = ell;
    r.p_ell = p;
    r.m_ranks = std::move(ranks);
    r.v1_in_image = std::move(in_image);
    r.v1_in_all_images = std::all_of(r.v1_in_image.begin(), r.v1_in_image.end(), [](bool b) { return b; });
    return r;
}

}  // namespace

TEST_CASE("assignable_subspace examples") {
    const TolerancePolicy pol;
    std::mt19937_64 rng(51);
    const Matrix a = oracle::gaussian(4, 4, rng);
    CHECK(assignable_subspace(a, Matrix::Identity(4, 4), pol).dim() == 4);
    CHECK(assignable_subspace(swap2(), Vector::Unit(2, 0), pol).dim() == 0);
    const SubspaceBasis s = assignable_subspace(Matrix::Identity(2, 2), Vector::Unit(2, 0), pol);
    CHECK(s.dim() == 1);
    CHECK(contains_vector(s, Vector::Unit(2, 0), pol));
}

TEST_CASE("assignable directions are eigenvectors reachable by feedback") {
    const TolerancePolicy pol;
    std::mt19937_64 rng(52);
    for (int t = 0; t < 20; ++t) {
        const Matrix a = oracle::gaussian(6, 6, rng);
        const Matrix b = oracle::gaussian(6, 4, rng);
        const SubspaceBasis s = assignable_subspace(a, b, pol);
        REQUIRE(s.dim() == 2);
        const SubspaceBasis img = image_basis(b, pol);
        for (Eigen::Index k = 0; k < s.dim(); ++k) {
            const Vector v = s.basis().col(k);
            CHECK(contains_vector(img, v, pol));
            CHECK(contains_vector(img, a * v, pol));
        }
    }
}

TEST_CASE("controllability_indices examples") {
    const TolerancePolicy pol;
    std::mt19937_64 rng(53);
    CHECK(controllability_indices(oracle::gaussian(3, 3, rng), Matrix::Identity(3, 3), pol) ==
          std::vector<int>{1, 1, 1});
    Matrix comp(3, 3);
    comp << 0, 1, 0, 0, 0, 1, -0.1, 0.2, 0.3;
    CHECK(controllability_indices(comp, Vector::Unit(3, 2), pol) == std::vector<int>{3});
    CHECK(controllability_indices(swap2(), Vector::Unit(2, 0), pol) == std::vector<int>{2});
    CHECK_THROWS_AS(controllability_indices(Matrix::Identity(2, 2), Vector::Unit(2, 0), pol), ValidationError);

    for (int t = 0; t < 30; ++t) {
        const std::vector<int> idx = controllability_indices(oracle::gaussian(7, 7, rng), oracle::gaussian(7, 3, rng), pol);
        int total = 0;
        for (int i : idx) total += i;
        CHECK(total == 7);
        CHECK(idx.size() == 3);
    }
}

TEST_CASE("rho_via_indices examples") {
    const TolerancePolicy pol;
    std::mt19937_64 rng(54);
    RhoFromIndices r = rho_via_indices(oracle::gaussian(4, 4, rng), Matrix::Identity(4, 4), pol);
    CHECK(r.unit_indices == 4);
    CHECK(r.rank_formula == 4);
    r = rho_via_indices(swap2(), Vector::Unit(2, 0), pol);
    CHECK(r.unit_indices == 0);
    CHECK(r.rank_formula == 0);
    int twos = 0;
    for (int t = 0; t < 50; ++t) {
        r = rho_via_indices(oracle::gaussian(6, 6, rng), oracle::gaussian(6, 4, rng), pol);
        CHECK(r.agree());
        twos += r.unit_indices == 2;
    }
    CHECK(twos == 50);
}

TEST_CASE("assignable subspace dimension equals the unit index count") {
    const TolerancePolicy pol;
    std::mt19937_64 rng(55);
    int checked = 0;
    for (int n = 2; n <= 6; ++n) {
        for (int m = 1; m <= n; ++m) {
            for (int t = 0; t < 8; ++t) {
                Matrix a = oracle::gaussian(n, n, rng);
                const Matrix b = oracle::gaussian(n, m, rng);
                // Mix in structured pairs with nongeneric index patterns.
                if (t % 4 == 3) a = Matrix::Identity(n, n);
                if (numeric_rank(controllability_matrix(a, b), pol) < n) continue;
                const RhoFromIndices r = rho_via_indices(a, b, pol);
                CHECK(assignable_subspace(a, b, pol).dim() == r.unit_indices);
                CHECK(r.agree());
                ++checked;
            }
        }
    }
    CHECK(checked > 100);
}

TEST_CASE("transversality examples") {
    const TolerancePolicy pol;
    const SubspaceBasis e1 = span(Vector::Unit(2, 0)), e2 = span(Vector::Unit(2, 1));
    CHECK(transversality_check({e1, e2}, pol).transverse);
    const TransversalityResult same = transversality_check({e1, e1}, pol);
    CHECK_FALSE(same.transverse);
    REQUIRE(same.subsets.size() == 3);
    CHECK(same.subsets[2].sum_dim == 1);
    CHECK(same.subsets[2].expected_sum == 2);
    CHECK_THROWS_AS(transversality_check({}, pol), DimensionError);
    CHECK_THROWS_AS(transversality_check({e1, span(Vector::Unit(3, 0))}, pol), DimensionError);

    std::mt19937_64 rng(56);
    int transverse = 0;
    for (int t = 0; t < 100; ++t) {
        std::vector<SubspaceBasis> planes;
        for (int k = 0; k < 3; ++k) planes.push_back(span(oracle::gaussian(3, 2, rng)));
        const TransversalityResult r = transversality_check(planes, pol);
        transverse += r.transverse;
        CHECK(r.subsets.size() == 7);
        CHECK(r.inductive_check);
    }
    CHECK(transverse >= 99);
}

TEST_CASE("transverse tables satisfy the intersection and pairwise sum identities") {
    const TolerancePolicy pol;
    std::mt19937_64 rng(57);
    for (int t = 0; t < 60; ++t) {
        const int x = std::uniform_int_distribution<int>(2, 6)(rng);
        const int count = std::uniform_int_distribution<int>(2, 4)(rng);
        std::vector<SubspaceBasis> s;
        int total = 0;
        for (int k = 0; k < count; ++k) {
            const int d = std::uniform_int_distribution<int>(1, x)(rng);
            s.push_back(span(oracle::gaussian(x, d, rng)));
            total += d;
        }
        const TransversalityResult r = transversality_check(s, pol);
        if (!r.transverse) continue;
        const int p = x + total - count * x;
        CHECK(r.subsets.back().intersection_dim == std::max(0, p));
        if (p >= 0) {
            for (const auto& row : r.subsets) {
                if (row.members.size() == 2) CHECK(row.sum_dim == x);
            }
        }
    }
}

TEST_CASE("genericity_precheck examples") {
    const TolerancePolicy pol;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const SwitchedSystem sys = random_system(6, {4, 5}, Distribution::standard_normal, seed);
        const GenericityReport rep = genericity_precheck(sys, pol);
        CHECK(rep.rho == std::vector<Eigen::Index>{2, 4});
        CHECK(rep.q1 == 0);
        CHECK(rep.transverse);
        CHECK(rep.verdict);
        CHECK(rep.routes_agree);
        REQUIRE(rep.rho_expected.size() == 2);
        CHECK(rep.rho_expected[0] == 2);
        CHECK(rep.rho_expected[1] == 4);
        CHECK(rep.per_subset_dims.size() == 3);
    }
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const SwitchedSystem sys = random_system(3, {1, 1}, Distribution::standard_normal, seed);
        const GenericityReport rep = genericity_precheck(sys, pol);
        CHECK(rep.rho == std::vector<Eigen::Index>{0, 0});
        CHECK(rep.q1 == -3);
        CHECK_FALSE(rep.verdict);
        CHECK_FALSE(rep.rho_expected[0].has_value());
    }
    std::mt19937_64 rng(58);
    const SwitchedSystem full({{oracle::gaussian(4, 4, rng), Matrix::Identity(4, 4)}});
    const GenericityReport rep = genericity_precheck(full, pol);
    CHECK(rep.rho == std::vector<Eigen::Index>{4});
    CHECK(rep.q1 == 4);
    CHECK(rep.transverse);
    CHECK(rep.verdict);
}

TEST_CASE("check_trace flags each law") {
    // B_2 loses rank at the first step although v1 is outside img B_2.
    std::vector<IterationRecord> good = {record(1, 2, {2, 3}, {true, false}),
                                         record(2, 2, {1, 2}, {false, false}),
                                         record(3, 2, {1, 2}, {false, true})};
    TraceCheck tc = check_trace(good);
    CHECK(tc.rank_evolution.size() == 1);
    CHECK(tc.p_step.empty());

    std::vector<IterationRecord> clean = {record(1, 2, {2, 2}, {true, false}),
                                          record(2, 2, {1, 2}, {false, false})};
    CHECK(check_trace(clean).ok());

    std::vector<IterationRecord> drop = {record(1, 3, {3, 3}, {false, false}),
                                         record(2, 0, {3, 3}, {false, false})};
    tc = check_trace(drop);
    CHECK(tc.p_step.size() == 1);
    CHECK(tc.positive_window.size() == 1);
    CHECK(tc.escape.size() == 1);

    std::vector<IterationRecord> equality = {record(1, 2, {2, 2}, {true, true}),
                                             record(2, 2, {1, 1}, {false, false})};
    CHECK(check_trace(equality).p_step.size() == 1);

    std::vector<IterationRecord> escape = {record(1, 1, {1, 1}, {true, false}),
                                           record(2, 0, {0, 1}, {false, false})};
    tc = check_trace(escape);
    CHECK(tc.escape.size() == 1);
}
