#include <gtest/gtest.h>

#include <cmath>

#include "hpbl/solvers.hpp"

using namespace hpbl;

namespace {

RVector vec1(double a) {
    RVector v(1);
    v << a;
    return v;
}

RVector vec2(double a, double b) {
    RVector v(2);
    v << a, b;
    return v;
}

template <typename Fn>
DiscreteField grid(int N, double dt, double dx, double T, double X, Fn fn) {
    return DiscreteField::sample(N, static_cast<int>(std::lround(T / dt)) + 1, static_cast<int>(std::lround(X / dx)) + 1,
                                 dt, dx, fn);
}

double bump(double x, double c = 0.3, double r = 1.0) {
    const double s = (x - c) / r;
    return std::abs(s) < 1 ? std::pow(1 - s * s, 4) : 0.0;
}

// phi = cos(x) e^{-x^2}: phi'(0) = 0 and negligible near x = 6.
double phi(double x) { return std::cos(x) * std::exp(-x * x); }
double dphi(double x) { return (-std::sin(x) - 2 * x * std::cos(x)) * std::exp(-x * x); }
double d2phi(double x) {
    return ((4 * x * x - 3) * std::cos(x) + 4 * x * std::sin(x)) * std::exp(-x * x);
}

}  // namespace

TEST(Viscous, ZeroForcingGivesZero) {
    const auto m = builtin_model("scalar1d");
    const auto f = grid(1, 0.01, 0.01, 0.5, 2.0, [](double, double) { return vec1(0); });
    const auto run = viscous_solve_1d(m, 0.05, f);
    EXPECT_EQ(run.solution.max_abs(), 0.0);
    const auto f2 = grid(2, 0.01, 0.01, 0.5, 2.0, [](double, double) { return vec2(0, 0); });
    EXPECT_EQ(viscous_solve_1d(builtin_model("fornet"), 0.05, f2).solution.max_abs(), 0.0);
}

TEST(Viscous, ManufacturedSolutionSecondOrder) {
    const double eps = 0.2, T = 1.0, X = 6.0;
    auto exact = [](double t, double x) { return vec1(t * t * t * phi(x)); };
    auto forcing = [eps](double t, double x) {
        return vec1(3 * t * t * phi(x) + t * t * t * (dphi(x) - eps * d2phi(x)));
    };
    const auto m = builtin_model("scalar1d");
    std::vector<double> hs, errs;
    for (double h : {0.04, 0.02, 0.01}) {
        const auto f = grid(1, h, h, T, X, forcing);
        const auto run = viscous_solve_1d(m, eps, f);
        errs.push_back(max_norm(run.solution - DiscreteField::sample(1, f.nt, f.nx, h, h, exact)));
        hs.push_back(h);
    }
    EXPECT_GE(loglog_slope(hs, errs), 1.8);
}

TEST(Viscous, BackwardEulerConvergesFirstOrder) {
    const double eps = 0.2;
    auto exact = [](double t, double x) { return vec1(t * t * t * phi(x)); };
    auto forcing = [eps](double t, double x) {
        return vec1(3 * t * t * phi(x) + t * t * t * (dphi(x) - eps * d2phi(x)));
    };
    ViscousOptions opt;
    opt.scheme = Scheme::BackwardEulerUpwind;
    std::vector<double> hs, errs;
    for (double h : {0.04, 0.02, 0.01}) {
        const auto f = grid(1, h, h, 1.0, 6.0, forcing);
        const auto run = viscous_solve_1d(builtin_model("scalar1d"), eps, f, opt);
        errs.push_back(max_norm(run.solution - DiscreteField::sample(1, f.nt, f.nx, h, h, exact)));
        hs.push_back(h);
    }
    EXPECT_GE(loglog_slope(hs, errs), 0.8);
}

TEST(Viscous, QuasilinearManufactured) {
    // A(u) = 1 + q u^2
    const double eps = 0.2, q = 0.5;
    auto exact = [](double t, double x) { return vec1(t * t * t * phi(x)); };
    auto forcing = [=](double t, double x) {
        const double u = t * t * t * phi(x);
        return vec1(3 * t * t * phi(x) + t * t * t * ((1 + q * u * u) * dphi(x) - eps * d2phi(x)));
    };
    const auto m = builtin_model("scalar1d", {{"q", q}});
    std::vector<double> hs, errs;
    for (double h : {0.04, 0.02}) {
        const auto f = grid(1, h, h, 1.0, 6.0, forcing);
        const auto run = viscous_solve_1d(m, eps, f);
        EXPECT_GT(run.newtonIterations, f.nt - 1);
        errs.push_back(max_norm(run.solution - DiscreteField::sample(1, f.nt, f.nx, h, h, exact)));
        hs.push_back(h);
    }
    EXPECT_GE(loglog_slope(hs, errs), 1.8);
}

TEST(Viscous, RejectsUnresolvedLayerAndBadShapes) {
    const auto m = builtin_model("scalar1d");
    const auto f = grid(1, 0.05, 0.05, 0.5, 2.0, [](double, double) { return vec1(0); });
    EXPECT_THROW(viscous_solve_1d(m, 0.1, f), Error);
    EXPECT_THROW(viscous_solve_1d(m, -1.0, f), Error);
    const auto f2 = grid(2, 0.01, 0.01, 0.5, 2.0, [](double, double) { return vec2(0, 0); });
    EXPECT_THROW(viscous_solve_1d(m, 0.1, f2), Error);
}

TEST(Viscous, SupportReachingOutflowIsDetected) {
    // Mixed-sign A_d with forcing near x = X.
    const auto m = constant_coefficient_model("mixed", 1, {(RMatrix(2, 2) << 1, 0, 0, -1).finished()},
                                              RMatrix(0, 2), RMatrix::Identity(2, 2));
    const auto f = grid(2, 0.01, 0.01, 0.3, 1.0, [](double t, double x) { return vec2(t * x, t * x); });
    try {
        viscous_solve_1d(m, 0.05, f);
        FAIL() << "expected SupportReachedOutflow";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::SupportReachedOutflow);
    }
}

TEST(Viscous, WeightedEstimateRatioRefinementStable) {
    const auto m = builtin_model("scalar1d");
    auto forcing = [](double t, double x) { return vec1(t * t * t * std::exp(-x)); };
    std::vector<double> c;
    for (double h : {0.025, 0.0125}) {
        const auto f = grid(1, h, h, 1.0, 4.0, forcing);
        const auto u = viscous_solve_1d(m, 0.1, f).solution;
        double mx = 0;
        for (double g : {2.0, 4.0, 8.0, 16.0}) {
            const double r = weighted_estimate_ratio(u, f, g);
            EXPECT_TRUE(std::isfinite(r));
            mx = std::max(mx, r);
        }
        c.push_back(mx);
    }
    EXPECT_LE(std::max(c[0] / c[1], c[1] / c[0]), 1.5);
}

TEST(Fornet, ZeroDataGivesZero) {
    auto zf = [](double, double) { return vec2(0, 0); };
    auto zh = [](double) { return vec2(0, 0); };
    const auto r = fornet_solve(1, 2, 0.1, zf, zh, 0.5, 2.0, 0.02, 0.02);
    EXPECT_EQ(r.viscous.solution.max_abs(), 0.0);
    EXPECT_EQ(r.limit.max_abs(), 0.0);
}

TEST(Fornet, SymmetricDataGivesEqualComponents) {
    // h symmetric about 0 and alpha = beta.
    auto zf = [](double, double) { return vec2(0, 0); };
    auto h = [](double x) { return vec2(bump(x, 0.0), bump(-x, 0.0)); };
    const auto r = fornet_solve(1.5, 1.5, 0.05, zf, h, 0.5, 3.0, 0.01, 0.01);
    double diff = 0, diffLimit = 0;
    for (int n = 0; n < r.limit.nt; ++n)
        for (int i = 0; i < r.limit.nx; ++i) {
            diff = std::max(diff, std::abs(r.viscous.solution.at(n, i, 0) - r.viscous.solution.at(n, i, 1)));
            diffLimit = std::max(diffLimit, std::abs(r.limit.at(n, i, 0) - r.limit.at(n, i, 1)));
        }
    EXPECT_LT(diff, 1e-12);
    EXPECT_LT(diffLimit, 1e-12);
    EXPECT_GT(r.viscous.solution.max_abs(), 0.1);
}

TEST(Fornet, LimitTraceSolvesBoundarySystem) {
    // f = (1, 0), h = 0: w1 = w2 and (f1 - w1') / beta + (f2 - w2') / alpha = 0, so w' = (1/beta) / (1/beta + 1/alpha).
    const double alpha = 1, beta = 2;
    auto f = [](double, double) { return vec2(1, 0); };
    auto h = [](double) { return vec2(0, 0); };
    const auto r = fornet_solve(alpha, beta, 0.1, f, h, 1.0, 1.0, 0.02, 0.02);
    const int nt = r.boundaryTrace.nt;
    for (int n = 1; n < nt; ++n) {
        const RVector w = r.boundaryTrace.node(n, 0);
        EXPECT_NEAR(w(0), w(1), 1e-12);
        const double c = (1 / beta) / (1 / beta + 1 / alpha);
        EXPECT_NEAR(w(0), c * n * 0.02, 1e-12);
    }
}

TEST(Fornet, ViscousConvergesToLimit) {
    auto zf = [](double, double) { return vec2(0, 0); };
    auto h = [](double x) { return vec2(bump(x), bump(-x)); };
    std::vector<double> e;
    for (double eps : {0.1, 0.05}) {
        const double dx = eps / 4;
        const auto r = fornet_solve(1, 2, eps, zf, h, 0.5, 3.0, dx, dx);
        e.push_back(l2_norm(r.viscous.solution - r.limit));
    }
    EXPECT_LT(e[1], e[0]);
}

TEST(Fornet, RejectsIncompatibleData) {
    auto zf = [](double, double) { return vec2(0, 0); };
    EXPECT_THROW(fornet_solve(1, 2, 0.1, zf, [](double) { return vec2(1, 0); }, 0.5, 2.0, 0.02, 0.02), Error);
    EXPECT_THROW(fornet_solve(-1, 2, 0.1, zf, [](double) { return vec2(0, 0); }, 0.5, 2.0, 0.02, 0.02), Error);
}

TEST(HyperbolicIncoming, ZeroAndLinearCrossCheck) {
    const auto m = builtin_model("scalar1d");
    const auto z = grid(1, 0.02, 0.02, 0.5, 2.0, [](double, double) { return vec1(0); });
    EXPECT_EQ(hyperbolic_solve_incoming(m, z).max_abs(), 0.0);
    const auto f = grid(1, 0.02, 0.02, 1.0, 3.0, [](double t, double x) { return vec1(t * t * t * std::exp(-x)); });
    EXPECT_LT(max_norm(hyperbolic_solve_incoming(m, f) - solve_filtered_outer(m, f).u0), 1e-8);
}

TEST(Resolvent, ZeroDataGivesZero) {
    const auto m = builtin_model("scalar1d");
    ExpProfile F{{Complex(1, 0)}, {CVector::Zero(1)}};
    const auto s = resolvent_ode_solve(m, Frequency(0.01, 0.01), F, F, CVector::Zero(1));
    EXPECT_EQ(s.uH2, 0.0);
    EXPECT_EQ(s.uP2, 0.0);
    EXPECT_EQ(s.uH0.norm(), 0.0);
}

TEST(Resolvent, ScalarClosedForm) {
    // u_H' = H u_H + e^{-x}, u_H(0) = 0: u_H = (e^{Hx} - e^{-x}) / (H + 1),
    // H = (1 - sqrt(1 + 4 s)) / 2 the small root of mu^2 - mu - s.
    const auto m = builtin_model("scalar1d");
    for (const Frequency z : {Frequency(0.0, 0.01), Frequency(0.03, 0.002), Frequency(-0.02, 0.0)}) {
        const Complex s = z.s();
        const Complex H = (1.0 - std::sqrt(1.0 + 4.0 * s)) / 2.0;
        ExpProfile FH{{Complex(1, 0)}, {CVector::Ones(1)}}, FP{{Complex(1, 0)}, {CVector::Zero(1)}};
        const auto r = resolvent_ode_solve(m, z, FH, FP, CVector::Zero(1));
        ASSERT_NEAR(std::abs(r.H(0, 0) - H), 0.0, 1e-10);
        for (double x : {0.0, 0.5, 3.0, 20.0})
            EXPECT_NEAR(std::abs(r.uH(x)(0) - (std::exp(H * x) - std::exp(-x)) / (H + 1.0)), 0.0, 1e-10);
        const double norm2 = (-1 / (2 * H.real()) - 2 * (1.0 / (1.0 - std::conj(H))).real() + 0.5) / std::norm(H + 1.0);
        EXPECT_NEAR(r.uH2, norm2, 1e-8 * norm2);
        const double w = z.gamma + z.rho() * z.rho();
        EXPECT_LE(std::pow(w, 3) * r.uH2, 10 * w * r.FH.l2_squared());
        EXPECT_NEAR(r.rhs, w * 0.5, 1e-14);
    }
}

TEST(Resolvent, LyapunovMatchesQuadrature) {
    CMatrix H(2, 2);
    H << Complex(-0.5, 0.3), Complex(0.2, 0), Complex(0, 0.1), Complex(-1.0, -0.2);
    CMatrix Q(2, 2);
    Q << 1, Complex(0.5, 0.2), Complex(0.5, -0.2), 2;
    const CMatrix X = lyapunov_integral(H, Q);
    // Simpson on [0, 60]
    CMatrix S = CMatrix::Zero(2, 2);
    const int n = 6000;
    const double L = 60, h = L / n;
    for (int j = 0; j <= n; ++j) {
        const double w = (j == 0 || j == n) ? 1.0 : (j % 2 ? 4.0 : 2.0);
        const CMatrix E = (H * Complex(j * h)).exp();
        S += w * E.adjoint() * Q * E;
    }
    S *= h / 3;
    EXPECT_LT((X - S).norm(), 1e-8);
}

TEST(Resolvent, ScanIsRefinementStable) {
    const auto r = resolvent_estimate_scan(builtin_model("scalar1d"), 50);
    EXPECT_EQ(r.samples, 100);
    EXPECT_TRUE(std::isfinite(r.maxRatioDoubled));
    EXPECT_GE(r.growth, 1.0);
    EXPECT_TRUE(r.pass);
}

TEST(Slopes, LogLogSlope) {
    EXPECT_NEAR(loglog_slope({1, 2, 4}, {3, 12, 48}), 2.0, 1e-12);
    EXPECT_THROW(loglog_slope({1}, {1}), Error);
}
