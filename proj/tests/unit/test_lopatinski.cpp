#include <gtest/gtest.h>

#include <random>

#include "hpbl/lopatinski.hpp"

using namespace hpbl;

namespace {

RMatrix mat(std::initializer_list<std::initializer_list<double>> r) {
    RMatrix m(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r.begin()->size()));
    Eigen::Index i = 0;
    for (const auto& row : r) {
        Eigen::Index j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

RMatrix random_symmetric(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g;
    RMatrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = g(rng);
    return 0.5 * (a + a.transpose());
}

RMatrix random_positive(std::mt19937_64& rng, int n) {
    const RMatrix a = random_symmetric(rng, n);
    return a * a.transpose() + RMatrix::Identity(n, n);
}

}  // namespace

TEST(ClassifyCase, GasModelIsCaseTwo) {
    auto c = classify_case(builtin_model("rao"));
    EXPECT_EQ(c.D, 3);
    EXPECT_EQ(c.Nn, 1);
    EXPECT_EQ(c.I, 4);
    EXPECT_EQ(c.O, 0);
    EXPECT_EQ(c.kind, BoundaryCase::CaseII);
}

TEST(ClassifyCase, PureNeumannIdentity) {
    auto m = constant_coefficient_model("n", 1, {RMatrix::Identity(3, 3)}, RMatrix(), RMatrix::Identity(3, 3));
    auto c = classify_case(m);
    EXPECT_EQ(c.D, 0);
    EXPECT_EQ(c.Nn, 3);
    EXPECT_EQ(c.kind, BoundaryCase::CaseII);
}

TEST(ClassifyCase, DriftWave) {
    auto c = classify_case(builtin_model("neueg"));
    EXPECT_EQ(c.D, 0);
    EXPECT_EQ(c.Nn, 2);
    EXPECT_EQ(c.I, 1);
    EXPECT_EQ(c.O, 1);
    EXPECT_EQ(c.kind, BoundaryCase::CaseII);
}

TEST(ClassifyCase, CharacteristicBoundary) {
    auto m = constant_coefficient_model("c", 1, {mat({{1, 0}, {0, 0}})}, RMatrix(), RMatrix::Identity(2, 2));
    try {
        classify_case(m);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::CharacteristicBoundary);
    }
}

TEST(ReduceCaseTwo, TotallyIncomingFullNeumann) {
    auto m = constant_coefficient_model("t", 1, {mat({{2, 1}, {1, 3}})}, RMatrix(), RMatrix::Identity(2, 2));
    auto r = reduce_case_ii(m);
    ASSERT_TRUE(r.gammaTilde2);
    EXPECT_LT((*r.gammaTilde2 - RMatrix::Identity(2, 2)).norm(), 1e-15);
}

TEST(ReduceCaseTwo, DriftWaveKeepsIncomingRow) {
    auto r = reduce_case_ii(builtin_model("neueg"));
    ASSERT_TRUE(r.gammaTilde2);
    ASSERT_EQ(r.gammaTilde2->rows(), 1);
    EXPECT_NEAR(std::abs((*r.gammaTilde2)(0, 0)), 1.0, 1e-14);
    EXPECT_NEAR((*r.gammaTilde2)(0, 1), 0.0, 1e-14);
}

TEST(ReduceCaseTwo, SingleNeumannTotallyIncoming) {
    auto m = builtin_model("inceg");
    auto r = reduce_case_ii(m);
    EXPECT_LT((*r.gammaTilde2 - m.gamma2).norm(), 1e-15);
}

TEST(ReduceCaseTwo, FullNeumannRowsSpanIncomingSpace) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        RMatrix Ad = random_symmetric(rng, 4);
        auto m = constant_coefficient_model("r", 1, {Ad}, RMatrix(), RMatrix::Identity(4, 4));
        ReducedBC r;
        try {
            r = reduce_case_ii(m);
        } catch (const Error&) {
            continue;
        }
        const RMatrix Ep = real_unstable_basis(Ad);
        // rows of Gamma~_2 and E_+ span the same space
        const RMatrix P = Ep * Ep.transpose();
        EXPECT_LT((*r.gammaTilde2 - *r.gammaTilde2 * P).norm(), 1e-10);
        EXPECT_EQ(r.gammaTilde2->rows(), Ep.cols());
    }
}

TEST(ReduceCaseTwo, AnnihilatesOutgoingTraceForRegistry) {
    for (const auto& e : registry()) {
        auto m = builtin_model(e.name);
        if (classify_case(m).kind == BoundaryCase::CaseI) continue;
        auto r = reduce_case_ii(m);
        const RMatrix Em = real_stable_basis(m.Ad());
        EXPECT_LE((r.M * m.gamma2 * Em).norm(), 1e-12) << e.name;
        EXPECT_EQ(numerical_rank(*r.gammaTilde2), r.cls.Nn - r.cls.O) << e.name;
    }
}

TEST(ReduceCaseOne, HandFixture) {
    auto m = constant_coefficient_model("fix", 1, {mat({{1, 0, 0}, {0, -1, 0}, {0, 0, -2}})}, mat({{1, 0, 0}, {0, 1, 0}}),
                                        mat({{0, 1, 1}}));
    auto r = reduce_case_i(m);
    EXPECT_EQ(r.cls.kind, BoundaryCase::CaseI);
    EXPECT_EQ(r.cls.I, 1);
    EXPECT_EQ(r.cls.O, 2);
    ASSERT_EQ(r.X.cols(), 1);
    // A_d^{-1}(0, 1, -1) = (0, -1, 1/2)
    RVector x(3);
    x << 0, -1, 0.5;
    x.normalize();
    EXPECT_NEAR(std::abs(r.X.col(0).dot(x)), 1.0, 1e-14);
    ASSERT_TRUE(r.gammaTilde1);
    EXPECT_LT((r.K * m.gamma1 * r.X).norm(), 1e-14);
    EXPECT_NEAR(std::abs(r.K(0, 0)), 1.0, 1e-14);
    EXPECT_NEAR(r.K(0, 1), 0.0, 1e-14);
    EXPECT_NEAR(std::abs((*r.gammaTilde1)(0, 0)), 1.0, 1e-14);
    EXPECT_NEAR((*r.gammaTilde1).rightCols(2).norm(), 0.0, 1e-14);
}

TEST(ReduceCaseOne, TransversalityFailure) {
    auto m = constant_coefficient_model("tf", 1, {mat({{1, 0, 0}, {0, -1, 0}, {0, 0, -2}})}, mat({{0, 1, 0}, {0, 0, 1}}),
                                        mat({{1, 0, 0}}));
    try {
        reduce_case_i(m);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::TransversalityFailure);
    }
}

TEST(RescaledSymbol, DriftWaveFormula) {
    const double alpha = 0.3;
    auto m = builtin_model("neueg", {{"alpha", alpha}});
    auto r = reduce_case_ii(m);
    const double sign = (*r.gammaTilde2)(0, 0);
    for (auto z : {Frequency::d2(0.4, 0.2, -0.7), Frequency::d2(-1, 0.5, 2)}) {
        CMatrix g = rescaled_boundary_symbol(m, r, z);
        const Complex mult = 1.0 / Complex(z.gamma + std::abs(z.eta(0)), z.tau);
        EXPECT_LT(std::abs(g(0, 0) + sign * mult * z.s() / (1 + alpha)), 1e-15);
        EXPECT_LT(std::abs(g(0, 1) + sign * mult * I_unit * z.eta(0) / (1 + alpha)), 1e-15);
    }
}

TEST(RescaledSymbol, DegreeZero) {
    auto m = builtin_model("badinceg");
    auto r = reduce_case_ii(m);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (int k = 0; k < 50; ++k) {
        Frequency z = Frequency::d2(g(rng), std::abs(g(rng)), g(rng));
        const CMatrix a = rescaled_boundary_symbol(m, r, z), b = rescaled_boundary_symbol(m, r, z.scaled(7));
        EXPECT_LE((a - b).norm(), 1e-12 * std::max(1.0, a.norm()));
    }
}

TEST(RescaledSymbol, ZeroFrequency) {
    auto m = builtin_model("neueg");
    auto r = reduce_case_ii(m);
    try {
        rescaled_boundary_symbol(m, r, Frequency::d2(0, 0, 0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ZeroFrequency);
    }
}

TEST(RescaledSymbol, DropsRankOnCharacteristicTangentialFrequency) {
    // Gamma~_2 = I, gamma = 0, tau = 1 eigenvalue of -eta A_1
    auto m = constant_coefficient_model("ti", 2, {mat({{0, 1}, {1, 0}}), RMatrix::Identity(2, 2)}, RMatrix(),
                                        RMatrix::Identity(2, 2));
    auto r = reduce_case_ii(m);
    auto g = rescaled_boundary_symbol(m, r, Frequency::d2(1, 0, 1));
    EXPECT_EQ(numerical_rank(g), 1);
    auto g2 = rescaled_boundary_symbol(m, r, Frequency::d2(0.5, 0, 1));
    EXPECT_EQ(numerical_rank(g2), 2);
}

TEST(PlusSpace, LimitForDriftWave) {
    auto m = builtin_model("neueg", {{"alpha", 0.3}});
    auto p = plus_space(m, Frequency::d2(1, 0, -1));
    EXPECT_TRUE(p.limit);
    ASSERT_EQ(p.basis.cols(), 1);
    CVector v(2);
    v << 1, 1;
    v.normalize();
    EXPECT_NEAR(std::abs(v.dot(p.basis.col(0))), 1.0, 1e-6);
}

TEST(UniformLopDet, DriftWaveDecaysWithGamma) {
    auto m = builtin_model("neueg", {{"alpha", 0.3}});
    auto r = reduce_case_ii(m);
    double prev = 1;
    for (double g : {1e-2, 1e-3, 1e-4}) {
        const double a = std::abs(uniform_lop_det(m, r, Frequency::d2(1, g, -1)).detUniform);
        EXPECT_LT(a, prev);
        prev = a;
    }
    EXPECT_LT(prev, 1e-1);
}

TEST(UniformLopDet, BadIncomingRoot) {
    auto m = builtin_model("badinceg", {{"a", 1}, {"b", -1}});
    auto r = reduce_case_ii(m);
    auto rec = uniform_lop_det(m, r, Frequency::d2(0.5, std::sqrt(3.0) / 2, -1));
    EXPECT_LT(std::abs(rec.detUniform), 1e-8);
    EXPECT_LT(rec.proxy, 1e-8);
    EXPECT_EQ(rec.kernelDim, 1);
}

TEST(UniformLopDet, IncomingProxyMatchesClosedForm) {
    const double g11 = 0.5;
    auto m = builtin_model("inceg", {{"g11", g11}});
    auto r = reduce_case_ii(m);
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g;
    for (int k = 0; k < 100; ++k) {
        Frequency z = Frequency::d2(g(rng), std::abs(g(rng)) + 1e-3, g(rng)).hat();
        auto rec = uniform_lop_det(m, r, z);
        EXPECT_NEAR(std::abs(rec.detUniform), 1.0, 1e-12);
        // rows (g11, 1) and -mult (s, i eta)
        const Complex mult = 1.0 / Complex(z.gamma + std::abs(z.eta(0)), z.tau);
        const double rowprod = std::sqrt(g11 * g11 + 1) * std::abs(mult) * std::sqrt(std::norm(z.s()) + z.eta(0) * z.eta(0));
        const double expect = std::abs(mult) * std::abs(Complex(z.gamma, z.tau - z.eta(0) * g11)) / rowprod;
        EXPECT_NEAR(rec.proxy, expect, 1e-12);
    }
}

TEST(UniformLopDet, BoundedByOneAndDegreeZero) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g;
    for (const char* name : {"neueg", "badinceg", "inceg", "eg2", "noest"}) {
        auto m = builtin_model(name);
        auto r = reduce_boundary_conditions(m);
        for (int k = 0; k < 40; ++k) {
            Frequency z = Frequency::d2(g(rng), std::abs(g(rng)) + 0.05, g(rng));
            auto a = uniform_lop_det(m, r, z), b = uniform_lop_det(m, r, z.scaled(3.5));
            EXPECT_LE(std::abs(a.detUniform), 1 + 1e-12) << name;
            EXPECT_LE(std::abs(std::abs(a.detUniform) - std::abs(b.detUniform)), 1e-10) << name;
        }
    }
}

TEST(UniformLopDet, SingleNeumannRealPartIdentity) {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 50; ++trial) {
        const int N = 2 + trial % 3;
        const RMatrix A1 = random_symmetric(rng, N), A2 = random_positive(rng, N);
        RMatrix G1(N - 1, N), G2(1, N);
        for (int i = 0; i < N; ++i) {
            for (int k = 0; k < N - 1; ++k) G1(k, i) = g(rng);
            G2(0, i) = g(rng);
        }
        Frequency z = Frequency::d2(g(rng), std::abs(g(rng)), g(rng));
        const RMatrix Ainv = A2.inverse();
        CMatrix full(N, N);
        full << G1.cast<Complex>(), G2.cast<Complex>() * Ainv.cast<Complex>() *
                                        (z.s() * CMatrix::Identity(N, N) + I_unit * z.eta(0) * A1.cast<Complex>());
        RMatrix base(N, N);
        base << G1, G2 * Ainv;
        EXPECT_NEAR(full.determinant().real(), z.gamma * base.determinant(),
                    1e-10 * std::max(1.0, std::abs(full.determinant())));
    }
}

TEST(ScanUniform, OneDimensionalPureNeumann) {
    auto m = constant_coefficient_model("p", 1, {mat({{1, 0}, {0, -1}})}, RMatrix(), RMatrix::Identity(2, 2));
    auto rep = scan_uniform(m, reduce_case_ii(m));
    EXPECT_EQ(rep.verdict, LopVerdict::UNIFORM);
    EXPECT_NEAR(rep.minAbsDet, 1.0, 1e-8);
}

TEST(ScanUniform, DriftWaveWeakOnly) {
    auto m = builtin_model("neueg", {{"alpha", 0.3}});
    auto rep = scan_uniform(m, reduce_case_ii(m));
    EXPECT_EQ(rep.verdict, LopVerdict::WEAK_ONLY);
    EXPECT_EQ(rep.argmin.gamma, 0.0);
    EXPECT_NEAR(std::abs(rep.argmin.tau), std::sqrt(0.5), 1e-12);
    // the model is invariant under eta -> -eta, so tau = +-eta are both failure points
    EXPECT_NEAR(std::abs(rep.argmin.eta(0)), std::sqrt(0.5), 1e-12);
    EXPECT_LT(rep.minAbsDet, 1e-6);
    EXPECT_GT(rep.minAbsDetPositiveGamma, 0.0);
}

TEST(ScanUniform, BadIncomingFailsWeak) {
    auto m = builtin_model("badinceg", {{"a", 1}, {"b", -1}});
    auto rep = scan_uniform(m, reduce_case_ii(m));
    EXPECT_EQ(rep.verdict, LopVerdict::FAILS_WEAK);
    ASSERT_TRUE(rep.weakFailureWitness);
    const Frequency& w = *rep.weakFailureWitness;
    EXPECT_NEAR(w.gamma, std::sqrt(3.0) / 2 * std::abs(w.eta(0)), 1e-6);
    EXPECT_NEAR(w.tau, -w.eta(0) / 2, 1e-6);
}

TEST(ScanUniform, IncomingUniform) {
    auto m = builtin_model("inceg");
    auto rep = scan_uniform(m, reduce_case_ii(m));
    EXPECT_EQ(rep.verdict, LopVerdict::UNIFORM);
    EXPECT_GE(rep.minAbsDet, 1e-3);
    EXPECT_TRUE(rep.glancing.empty());
}

TEST(Glancing, DriftWaveAtZeroDrift) {
    auto m = builtin_model("neueg", {{"alpha", 0.0}});
    RVector eta = RVector::Constant(1, -1.0);
    auto pts = glancing_detector(m, eta);
    ASSERT_EQ(pts.size(), 2u);
    for (const auto& p : pts) {
        EXPECT_NEAR(std::abs(p.tau), 1.0, 1e-8);
        EXPECT_NEAR(p.xi, 0.0, 1e-6);
    }
}

TEST(Glancing, DriftMovesGlancingAway) {
    auto m = builtin_model("neueg", {{"alpha", 0.5}});
    auto pts = glancing_detector(m, RVector::Constant(1, -1.0));
    ASSERT_FALSE(pts.empty());
    for (const auto& p : pts) {
        EXPECT_GT(std::abs(std::abs(p.tau) - 1.0), 0.1);
        EXPECT_NEAR(std::abs(p.tau), std::sqrt(0.75), 1e-6);
    }
}

TEST(Glancing, NoneWhenTotallyIncoming) {
    for (const char* name : {"rao", "inceg", "badinceg"}) {
        auto m = builtin_model(name);
        for (double e : {-1.0, 1.0}) EXPECT_TRUE(glancing_detector(m, RVector::Constant(1, e)).empty()) << name;
    }
}
