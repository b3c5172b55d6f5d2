#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "slasf/montecarlo.hpp"
#include "slasf/triangularize.hpp"
#include "slasf/verify.hpp"

using namespace slasf;

namespace {

// Smallest eigenvalue of P - A'PA over all matrices, evaluated directly.
double direct_margin(const Matrix& p, const std::vector<Matrix>& a) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& x : a) {
        const Matrix d = p - x.transpose() * p * x;
        m = std::min(m, Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (d + d.transpose())).eigenvalues().minCoeff());
    }
    return m;
}

SwitchedSystem scalar_system() {
    return SwitchedSystem({{Matrix::Constant(1, 1, 2.0), Matrix::Ones(1, 1)},
                           {Matrix::Constant(1, 1, -3.0), Matrix::Ones(1, 1)}});
}

}  // namespace

TEST_CASE("construct_cqlf scalar") {
    const TolerancePolicy pol;
    const Cqlf c = construct_cqlf({Matrix::Constant(1, 1, 0.5)}, Matrix::Identity(1, 1), pol);
    CHECK(c.p(0, 0) == doctest::Approx(1.0));
    CHECK(c.margin == doctest::Approx(0.75));
    CHECK(c.delta == 1.0);
}

TEST_CASE("construct_cqlf on diagonal matrices uses delta = 1") {
    const TolerancePolicy pol;
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> u(-0.99, 0.99);
    std::vector<Matrix> a;
    for (int i = 0; i < 3; ++i) {
        Vector d(4);
        for (Eigen::Index k = 0; k < 4; ++k) d(k) = u(rng);
        a.push_back(d.asDiagonal());
    }
    const Cqlf c = construct_cqlf(a, Matrix::Identity(4, 4), pol);
    CHECK(c.delta == 1.0);
    CHECK((c.p - Matrix::Identity(4, 4)).norm() < 1e-15);
    CHECK(direct_margin(c.p, a) > 0.0);
}

TEST_CASE("construct_cqlf certificate is sound on triangular families") {
    const TolerancePolicy pol;
    std::mt19937_64 rng(62);
    std::uniform_real_distribution<double> u(-0.9, 0.9);
    for (int t = 0; t < 50; ++t) {
        const Eigen::Index n = 4;
        const Matrix q = oracle::gaussian(n, n, rng).householderQr().householderQ();
        std::vector<Matrix> a;
        for (int i = 0; i < 2; ++i) {
            Matrix tri = oracle::gaussian(n, n, rng).triangularView<Eigen::Upper>();
            for (Eigen::Index k = 0; k < n; ++k) tri(k, k) = u(rng);
            a.push_back(q * tri * q.transpose());
        }
        const Cqlf c = construct_cqlf(a, q, pol);
        CHECK(c.margin > 0.0);
        CHECK(c.contraction > 1e-10);
        // The certified bound must not exceed what a direct eigenvalue computation finds.
        CHECK(direct_margin(c.p, a) >= c.margin * (1 - 1e-6) - 1e-12);
        CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(c.p).eigenvalues().minCoeff() > 0.0);
        const Vector x = oracle::gaussian(n, 1, rng).col(0);
        CHECK(c.value(x) == doctest::Approx(x.dot(c.p * x)).epsilon(1e-10));
    }
}

TEST_CASE("construct_cqlf falls back to adaptive weights for a dominant coupling") {
    const TolerancePolicy pol;
    Matrix tri = Matrix::Zero(6, 6);
    for (Eigen::Index k = 0; k < 6; ++k) tri(k, k) = 0.5;
    for (Eigen::Index k = 0; k + 1 < 6; ++k) tri(k, k + 1) = 1.0;
    tri(0, 1) = 500.0;
    // Rounding-sized mass below the diagonal, as left by a computed triangularisation.
    for (Eigen::Index j = 0; j < 6; ++j)
        for (Eigen::Index i = j + 1; i < 6; ++i) tri(i, j) = 1e-14;
    const Cqlf c = construct_cqlf({tri}, Matrix::Identity(6, 6), pol);
    CHECK(c.adaptive);
    CHECK(c.margin > 0.0);
    CHECK(c.value(Vector::Unit(6, 0)) > 0.0);
}

TEST_CASE("construct_cqlf reports failure") {
    const TolerancePolicy pol;
    try {
        construct_cqlf({Matrix::Constant(1, 1, 1.5)}, Matrix::Identity(1, 1), pol);
        FAIL("expected CqlfNotFound");
    } catch (const CqlfNotFound& e) {
        CHECK(e.best_margin() < 0.0);
    }
}

TEST_CASE("verify_design scalar design passes") {
    const TolerancePolicy pol;
    const SwitchedSystem sys = scalar_system();
    const DesignResult r = design(sys, {}, pol);
    const VerificationReport rep = verify_design(sys, r.design, pol);
    CHECK(rep.pass);
    CHECK(rep.spectral_radii[0] == doctest::Approx(0.5));
    CHECK(rep.failures.empty());
}

TEST_CASE("verify_design flags a corrupted gain") {
    const TolerancePolicy pol;
    const SwitchedSystem sys = scalar_system();
    DesignResult r = design(sys, {}, pol);
    r.design.gains[0].setZero();
    const VerificationReport rep = verify_design(sys, r.design, pol);
    CHECK_FALSE(rep.pass);
    CHECK(rep.spectral_radii[0] == doctest::Approx(2.0));
    REQUIRE_FALSE(rep.failures.empty());
    CHECK(rep.failures[0].find("subsystem 1: spectral radius") == 0);

    FeedbackDesign wrong = r.design;
    wrong.transformation = Matrix::Identity(2, 2);
    CHECK_FALSE(verify_design(sys, wrong, pol).pass);
}

TEST_CASE("verify_design passes on random designs and matches eigenvalues") {
    const TolerancePolicy pol;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const SwitchedSystem sys = random_system(5, {3, 4, 5}, Distribution::standard_normal, seed);
        DesignConfig cfg;
        cfg.schedule = EigenvalueSchedule::per_iteration({0.9, -0.7, 0.5, -0.3, 0.1});
        const DesignResult r = design(sys, cfg, pol);
        const VerificationReport rep = verify_design(sys, r.design, pol);
        CHECK(rep.pass);
        CHECK(rep.eigenvalue_match_error <= 1e-6);
        // Distinct eigenvalues keep a general eigensolver well conditioned too.
        CHECK(rep.eigensolver_match_error <= 1e-6);
        CHECK(rep.triangularity_residual <= 1e-8);
        for (double rho : rep.spectral_radii) CHECK(rho == doctest::Approx(0.9));
    }
}

TEST_CASE("switching signals") {
    CHECK(SwitchingSignal::fixed(2, 3).sequence == std::vector<int>{2, 2, 2});
    CHECK(SwitchingSignal::round_robin(3, 5).sequence == std::vector<int>{1, 2, 3, 1, 2});
    const SwitchingSignal a = SwitchingSignal::uniform_random(3, 200, 5);
    const SwitchingSignal b = SwitchingSignal::uniform_random(3, 200, 5);
    CHECK(a.sequence == b.sequence);
    for (int i : a.sequence) CHECK((i >= 1 && i <= 3));
    CHECK(mode_name(a.mode) == "uniform-random");
    CHECK(mode_name(SwitchingSignal::custom({1}).mode) == "custom");
}

TEST_CASE("simulate") {
    const TolerancePolicy pol;
    const SwitchedSystem one({{Matrix::Constant(1, 1, 2.0), Matrix::Ones(1, 1)}});
    const DesignResult r1 = design(one, {}, pol);
    const Trajectory tr = simulate(one, r1.design, SwitchingSignal::fixed(1, 10), Vector::Ones(1), 10, pol);
    REQUIRE(tr.states.size() == 11);
    for (size_t k = 0; k <= 10; ++k) CHECK(tr.states[k](0) == doctest::Approx(std::pow(0.5, k)));
    CHECK(tr.controls.size() == 10);
    CHECK(tr.lyapunov.size() == 11);

    const Trajectory zero = simulate(one, r1.design, SwitchingSignal::fixed(1, 5), Vector::Zero(1), 5, pol);
    for (const auto& x : zero.states) CHECK(x.norm() == 0.0);

    CHECK_THROWS_AS(simulate(one, r1.design, SwitchingSignal::custom({1, 2}), Vector::Ones(1), 2, pol), ValidationError);
    CHECK_THROWS_AS(simulate(one, r1.design, SwitchingSignal::fixed(1, 2), Vector::Ones(1), 5, pol), ValidationError);
    CHECK_THROWS_AS(simulate(one, r1.design, SwitchingSignal::fixed(1, 2), Vector::Ones(2), 2, pol), DimensionError);
}

TEST_CASE("simulation agrees with the open-loop recursion and V decreases") {
    const TolerancePolicy pol;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const SwitchedSystem sys = random_system(6, {4, 5}, Distribution::standard_normal, seed);
        const DesignResult r = design(sys, {}, pol);
        const SwitchingSignal sig = SwitchingSignal::uniform_random(2, 1000, seed);
        const Trajectory tr = simulate(sys, r.design, sig, Vector::Ones(6), 1000, pol);
        REQUIRE(tr.cqlf.has_value());
        for (size_t k = 0; k < 1000; ++k) {
            const auto i = static_cast<size_t>(tr.switching[k] - 1);
            const Vector& x = tr.states[k];
            const Vector next = sys[static_cast<int>(i)].a * x + sys[static_cast<int>(i)].b * tr.controls[k];
            CHECK((next - tr.states[k + 1]).norm() <= 1e-12 * (1 + x.norm() * (1 + r.design.gains[i].norm())));
            CHECK((tr.controls[k] - r.design.gains[i] * x).norm() == 0.0);
            if (tr.lyapunov[k] > 1e-250) CHECK(tr.lyapunov[k + 1] < tr.lyapunov[k]);
        }
    }
}

TEST_CASE("trajectory csv") {
    const TolerancePolicy pol;
    const SwitchedSystem one({{Matrix::Constant(1, 1, 2.0), Matrix::Ones(1, 1)}});
    FeedbackDesign d;
    d.gains = {Matrix::Constant(1, 1, -1.5)};
    d.transformation = Matrix::Identity(1, 1);
    d.assigned_eigenvalues = Matrix::Constant(1, 1, 0.5);
    const Trajectory tr = simulate(one, d, SwitchingSignal::fixed(1, 2), Vector::Ones(1), 2, pol);
    const std::string csv = trajectory_csv(tr);
    CHECK(csv == "k,i_k,x_1,V\n0,1,1,1\n1,1,0.5,0.25\n2,,0.25,0.0625\n");
}
