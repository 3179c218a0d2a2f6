#include <gtest/gtest.h>

#include <cmath>

#include "hpbl/expansion.hpp"

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

// Grid on [0, T] x [0, X] with spacing h.
template <typename Fn>
DiscreteField grid(int N, double h, double T, double X, Fn fn) {
    return DiscreteField::sample(N, static_cast<int>(std::lround(T / h)) + 1, static_cast<int>(std::lround(X / h)) + 1, h,
                                 h, fn);
}

// Outer solution t^3 (1 + x) e^{-x} of the scalar problem with a = 1; its x-derivative vanishes at x = 0.
RVector manufactured_u0(double t, double x) { return vec1(t * t * t * (1 + x) * std::exp(-x)); }
RVector manufactured_f(double t, double x) {
    return vec1(3 * t * t * (1 + x) * std::exp(-x) - t * t * t * x * std::exp(-x));
}
RVector manufactured_lap(double t, double x) { return vec1(t * t * t * (x - 1) * std::exp(-x)); }

// int_0^t s^3 e^{-s} ds
double G3(double t) { return 6 - std::exp(-t) * (t * t * t + 3 * t * t + 6 * t + 6); }

// Characteristics for u_t + u_x = t^3 e^{-x}, u_x(t, 0) = 0, so that u(t, 0) = t^4 / 4.
double characteristic_oracle(double t, double x) {
    if (x >= t) return std::exp(t - x) * G3(t);
    const double t0 = t - x;
    return std::pow(t0, 4) / 4 + std::exp(t - x) * (G3(t) - G3(t0));
}

RVector forcing_t3ex(double t, double x) { return vec1(t * t * t * std::exp(-x)); }

HyperbolicParabolicModel diag_model() {
    return constant_coefficient_model("diag", 1, {mat({{1, 0}, {0, -1}})}, RMatrix(0, 2), RMatrix::Identity(2, 2));
}

double order(double coarse, double fine) { return std::log2(coarse / fine); }

}  // namespace

TEST(DiscreteField, DifferenceStencilsExactOnPolynomials) {
    auto u = grid(1, 0.1, 0.5, 1.0, [](double t, double x) { return vec1(t * t + x * x * x * x - 2 * x * x * x); });
    const auto lap = laplacian_field(u);
    const auto dx = dx_field(u);
    for (int n = 0; n < u.nt; ++n)
        for (int i = 0; i < u.nx; ++i) {
            const double x = u.x(i);
            EXPECT_NEAR(lap.at(n, i), 12 * x * x - 12 * x, 1e-9);
        }
    auto q = grid(1, 0.1, 0.5, 1.0, [](double t, double x) { return vec1(t * t + 3 * x * x - x); });
    const auto dq = dx_field(q), dtq = dt_field(q), tr = normal_trace_derivative(q);
    for (int n = 0; n < q.nt; ++n) {
        EXPECT_NEAR(tr.at(n, 0), -1.0, 1e-12);
        for (int i = 0; i < q.nx; ++i) {
            EXPECT_NEAR(dq.at(n, i), 6 * q.x(i) - 1, 1e-12);
            EXPECT_NEAR(dtq.at(n, i), 2 * q.t(n), 1e-12);
        }
    }
}

TEST(DiscreteField, BoxOperatorsAndNorms) {
    auto u = grid(1, 0.25, 1.0, 1.0, [](double t, double x) { return vec1(2 * t + 3 * x); });
    const auto a = cell_average(u), ct = cell_dt(u), cx = cell_dx(u);
    EXPECT_EQ(a.nt, u.nt - 1);
    EXPECT_NEAR(a.at(0, 0), 2 * 0.125 + 3 * 0.125, 1e-15);
    EXPECT_NEAR(ct.max_abs(), 2.0, 1e-14);
    EXPECT_NEAR(cx.max_abs(), 3.0, 1e-14);
    auto one = grid(1, 0.01, 1.0, 1.0, [](double, double) { return vec1(1.0); });
    EXPECT_NEAR(l2_norm(one), 1.0, 1e-12);
    const double g = 2.0, w = std::sqrt((1 - std::exp(-2 * g)) / (2 * g));
    EXPECT_NEAR(weighted_l2_norm(one, g), w, 1e-4);
    EXPECT_TRUE((one - one).max_abs() == 0.0);
}

TEST(DiscreteField, JsonAndCsv) {
    auto u = grid(2, 0.5, 1.0, 1.0, [](double t, double x) { return vec2(t, x); });
    const std::string j = field_json(u);
    EXPECT_NE(j.find("\"dims\":[3,3,2]"), std::string::npos);
    const std::string c = field_csv_slice(u);
    EXPECT_EQ(c.substr(0, 10), "t,x,u1,u2\n");
    EXPECT_NE(c.find("1,0.5,1,0.5"), std::string::npos);
}

TEST(FilteredOuter, ZeroForcingGivesZero) {
    auto m = builtin_model("scalar1d");
    auto f = grid(1, 0.1, 1.0, 2.0, [](double, double) { return vec1(0.0); });
    auto o = solve_filtered_outer(m, f);
    EXPECT_EQ(o.v.max_abs(), 0.0);
    EXPECT_EQ(o.u0.max_abs(), 0.0);
}

TEST(FilteredOuter, MatchesCharacteristicsForScalarTransport) {
    auto m = builtin_model("scalar1d");
    double prev = 0;
    for (double h : {0.04, 0.02}) {
        auto f = grid(1, h, 1.0, 6.0, forcing_t3ex);
        auto o = solve_filtered_outer(m, f);
        for (int n = 0; n < f.nt; ++n) EXPECT_NEAR(o.v.at(n, 0), f.at(n, 0), 1e-14);
        auto ex = grid(1, h, 1.0, 6.0, [](double t, double x) { return vec1(characteristic_oracle(t, x)); });
        const double err = max_norm(o.u0 - ex);
        EXPECT_LT(err, 2.0 * h * h);
        const DiscreteField pde = dt_field(o.u0) + dx_field(o.u0) - f;
        EXPECT_LT(max_norm(pde), 5.0 * h * h);
        if (prev > 0) EXPECT_GE(order(prev, err), 1.8);
        prev = err;
    }
}

TEST(FilteredOuter, ManufacturedConvergenceAndNeumannTrace) {
    auto m = builtin_model("scalar1d");
    std::vector<double> err, trace;
    for (double h : {0.05, 0.025, 0.0125}) {
        auto f = grid(1, h, 1.0, 6.0, manufactured_f);
        auto o = solve_filtered_outer(m, f);
        err.push_back(max_norm(o.u0 - grid(1, h, 1.0, 6.0, manufactured_u0)));
        trace.push_back(max_norm(normal_trace_derivative(o.u0)));
        EXPECT_LT(max_norm(box_residual(m, o.u0, f)), 1e-12);
    }
    for (int k = 0; k + 1 < 3; ++k) {
        EXPECT_GE(order(err[k], err[k + 1]), 1.8);
        EXPECT_GE(order(trace[k], trace[k + 1]), 1.8);
    }
}

TEST(FilteredOuter, MixedSignSystemSatisfiesBoundaryRule) {
    auto m = diag_model();
    auto f = grid(2, 0.02, 1.0, 8.0, [](double t, double x) {
        return vec2(t * t * t * std::exp(-x), t * t * t * x * x * std::exp(-2 * x));
    });
    auto o = solve_filtered_outer(m, f);
    EXPECT_LT(max_norm(box_residual(m, o.u0, f)), 1e-12);
    // pi_+ = e_1 e_1^T, A_d^{-1} = diag(1, -1)
    for (int n = 0; n < f.nt; ++n) EXPECT_NEAR(o.v.at(n, 0, 0), f.at(n, 0, 0), 1e-14);
    const auto q = normal_trace_derivative(o.u0);
    double q1 = 0, q2 = 0;
    for (int n = 0; n < q.nt; ++n) {
        q1 = std::max(q1, std::abs(q.at(n, 0, 0)));
        q2 = std::max(q2, std::abs(q.at(n, 0, 1)));
    }
    EXPECT_LT(q1, 2 * 0.02 * 0.02);
    EXPECT_GT(q2, 1e-3);
    auto l = layer_profile_first_order(m, o.u0);
    for (int n = 0; n < q.nt; n += 10) {
        EXPECT_NEAR(l.traceAmplitude().at(n, 0, 0), 0.0, 1e-14);
        EXPECT_NEAR(l.traceAmplitude().at(n, 0, 1), q.at(n, 0, 1), 1e-14);
    }
    EXPECT_TRUE(layer_decay_ok(l, {0.5, 1, 2, 4, 8}));
}

TEST(FilteredOuter, RejectsBadInput) {
    auto expect_kind = [](ErrorKind k, auto fn) {
        try {
            fn();
            ADD_FAILURE() << "no error";
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), k) << e.what();
        }
    };
    auto f2 = grid(2, 0.1, 1.0, 1.0, [](double t, double) { return vec2(t * t * t, 0); });
    expect_kind(ErrorKind::NonSymmetric, [&] {
        solve_filtered_outer(constant_coefficient_model("ns", 1, {mat({{1, 1}, {0, 2}})}, RMatrix(0, 2),
                                                        RMatrix::Identity(2, 2)),
                             f2);
    });
    expect_kind(ErrorKind::CharacteristicBoundary, [&] {
        solve_filtered_outer(constant_coefficient_model("ch", 1, {mat({{1, 0}, {0, 0}})}, RMatrix(0, 2),
                                                        RMatrix::Identity(2, 2)),
                             f2);
    });
    auto hot = grid(1, 0.1, 1.0, 1.0, [](double, double) { return vec1(1.0); });
    expect_kind(ErrorKind::InvalidArgument, [&] { solve_filtered_outer(builtin_model("scalar1d"), hot); });
    expect_kind(ErrorKind::InvalidArgument, [&] { solve_filtered_outer(builtin_model("inceg"), f2); });
}

TEST(LayerProfile, TotallyIncomingLayerIsAbsent) {
    auto m = builtin_model("scalar1d");
    auto o = solve_filtered_outer(m, grid(1, 0.05, 1.0, 6.0, forcing_t3ex));
    auto l = layer_profile_first_order(m, o.u0);
    EXPECT_TRUE(l.zero());
    EXPECT_EQ(l.evaluate(10, 0.0).norm(), 0.0);
}

TEST(LayerProfile, DiagonalExponential) {
    auto m = diag_model();
    // d_x u_0(t, 0) = (0, g(t)) with g(t) = t^2
    auto u0 = grid(2, 0.1, 1.0, 1.0, [](double t, double x) { return vec2(0, x * t * t); });
    auto l = layer_profile_first_order(m, u0);
    for (int n = 0; n < u0.nt; ++n)
        for (double z : {0.0, 0.3, 2.0}) {
            const RVector v = l.evaluate(n, z);
            EXPECT_NEAR(v(0), 0.0, 1e-14);
            EXPECT_NEAR(v(1), u0.t(n) * u0.t(n) * std::exp(-z), 1e-13);
        }
}

TEST(LayerProfile, IncomingAmplitudeRejected) {
    auto m = diag_model();
    auto u0 = grid(2, 0.1, 1.0, 1.0, [](double t, double x) { return vec2(x * t * t, 0); });
    try {
        layer_profile_first_order(m, u0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::TraceNotInStableSubspace);
    }
}

TEST(NextOrder, ZeroWhenTraceAndLaplacianVanish) {
    auto m = diag_model();
    auto u0 = grid(2, 0.1, 1.0, 1.0, [](double t, double) { return vec2(t * t * t, -t * t * t); });
    auto l = layer_profile_first_order(m, u0);
    auto next = next_order_terms(m, u0, l);
    EXPECT_LT(next.u1.max_abs(), 1e-12);
    EXPECT_TRUE(next.u2star.zero(1e-12));
}

TEST(NextOrder, ClosedFormLayerForQuadraticTrace) {
    auto m = diag_model();
    auto u0 = grid(2, 0.05, 1.0, 1.0, [](double t, double x) { return vec2(0, x * t * t); });
    auto l1 = layer_profile_first_order(m, u0);
    auto next = next_order_terms(m, u0, l1);
    EXPECT_LT(next.u1.max_abs(), 1e-12);
    // u2* = (0, -2t (1 + z) e^{-z}) solves -w_z - w_zz = -d_t(t^2 e^{-z}) with w_z(0) = 0.
    const double hz = 1e-3;
    for (int n = 0; n < u0.nt; n += 5) {
        const double t = u0.t(n);
        for (double z : {0.0, 0.5, 1.5, 4.0}) {
            EXPECT_NEAR(next.u2star.evaluate(n, z)(1), -2 * t * (1 + z) * std::exp(-z), 1e-12);
            EXPECT_NEAR(next.u2star.evaluate(n, z)(0), 0.0, 1e-14);
            if (z > 0) {
                const double wz = next.u2star.evaluate_dz(n, z)(1);
                const double wzz =
                    (next.u2star.evaluate(n, z + hz)(1) - 2 * next.u2star.evaluate(n, z)(1) + next.u2star.evaluate(n, z - hz)(1)) /
                    (hz * hz);
                EXPECT_NEAR(-wz - wzz, -2 * t * std::exp(-z), 1e-5);
            }
        }
        EXPECT_NEAR(next.u2star.evaluate_dz(n, 0.0)(1), 0.0, 1e-12);
    }
    EXPECT_TRUE(layer_decay_ok(l1, {1, 2, 4}));
}

TEST(NextOrder, OuterResidualConvergesAgainstExactLaplacian) {
    auto m = builtin_model("scalar1d");
    std::vector<double> res;
    for (double h : {0.05, 0.025, 0.0125}) {
        auto u0 = grid(1, h, 1.0, 6.0, manufactured_u0);
        auto l = layer_profile_first_order(m, u0);
        auto next = next_order_terms(m, u0, l);
        res.push_back(max_norm(box_residual(m, next.u1, grid(1, h, 1.0, 6.0, manufactured_lap))));
        EXPECT_TRUE(next.u2star.zero());
    }
    EXPECT_GE(order(res[0], res[1]), 1.8);
    EXPECT_GE(order(res[1], res[2]), 1.8);
}

TEST(NextOrder, LinearExpansionLayout) {
    auto p = linear_neumann_expansion(diag_model(), grid(2, 0.05, 1.0, 6.0, [](double t, double x) {
        return vec2(t * t * t * std::exp(-x), t * t * t * x * std::exp(-x));
    }));
    EXPECT_EQ(p.order, 1);
    EXPECT_EQ(p.outerTerms.size(), 2u);
    EXPECT_EQ(p.layerTerms.size(), 3u);
    EXPECT_TRUE(p.layerTerms[0].zero());
    EXPECT_FALSE(p.layerTerms[1].zero(1e-6));
}

TEST(Quasilinear, LinearModelMatchesFilteredPipeline) {
    auto m = builtin_model("scalar1d", {{"a", 1.5}});
    auto f = grid(1, 0.02, 1.0, 6.0, manufactured_f);
    auto p = quasilinear_incoming_expansion(m, f, 1);
    auto o = solve_filtered_outer(m, f);
    EXPECT_LT(max_norm(p.outerTerms[0] - o.u0), 1e-8);
    auto next = next_order_terms(m, o.u0, layer_profile_first_order(m, o.u0));
    EXPECT_LT(max_norm(p.outerTerms[1] - next.u1), 1e-8);
    for (const auto& l : p.layerTerms) EXPECT_TRUE(l.zero());
}

TEST(Quasilinear, NeumannTracesVanishToGridOrder) {
    auto m = builtin_model("scalar1d", {{"q", 0.1}});
    std::vector<std::vector<double>> tr(2);
    for (double h : {0.04, 0.02, 0.01}) {
        auto p = quasilinear_incoming_expansion(m, grid(1, h, 1.0, 6.0, forcing_t3ex), 1);
        for (int j = 0; j < 2; ++j) tr[j].push_back(max_norm(normal_trace_derivative(p.outerTerms[j])));
    }
    for (int j = 0; j < 2; ++j) {
        EXPECT_GE(order(tr[j][0], tr[j][1]), 1.8) << j;
        EXPECT_GE(order(tr[j][1], tr[j][2]), 1.8) << j;
    }
}

TEST(Quasilinear, DiscreteResidualScalesWithNextPower) {
    // The order-eps^j balances hold exactly for the discrete operators, leaving eps^{M+1} terms.
    auto m = builtin_model("scalar1d", {{"q", 0.1}});
    auto f = grid(1, 0.02, 1.0, 6.0, forcing_t3ex);
    auto p = quasilinear_incoming_expansion(m, f, 2);
    for (int M = 0; M <= 2; ++M) {
        const double r1 = max_norm(viscous_cell_residual(m, outer_sum(p, 0.05, M), f, 0.05));
        const double r2 = max_norm(viscous_cell_residual(m, outer_sum(p, 0.025, M), f, 0.025));
        EXPECT_NEAR(order(r1, r2), M + 1, 0.15) << M;
    }
}

TEST(Quasilinear, Errors) {
    auto f = grid(1, 0.05, 1.0, 3.0, forcing_t3ex);
    try {
        quasilinear_incoming_expansion(builtin_model("scalar1d", {{"a", -1}}), f, 0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::AdNotPositive);
    }
    try {
        auto big = grid(1, 0.05, 1.0, 3.0, [](double t, double x) { return vec1(20 * t * t * t * std::exp(-x)); });
        quasilinear_incoming_expansion(builtin_model("scalar1d", {{"q", -1}}), big, 0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_TRUE(e.kind() == ErrorKind::AdNotPositive || e.kind() == ErrorKind::NonlinearSolveDiverged);
    }
    try {
        QuasilinearOptions opt;
        opt.maxNewton = 0;
        quasilinear_incoming_expansion(builtin_model("scalar1d", {{"q", 0.1}}), f, 0, opt);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NonlinearSolveDiverged);
    }
    EXPECT_THROW(quasilinear_incoming_expansion(builtin_model("scalar1d"), f, 3), Error);
}

TEST(MixedReduction, DriftWaveNeumannData) {
    auto m = builtin_model("neueg");
    auto r = order_zero_mixed_reduction(m);
    EXPECT_EQ(r.kind, BoundaryCase::CaseII);
    EXPECT_EQ(r.neumannRows.rows(), 1);
    const RVector g2 = vec2(1, 0), q = vec2(0.25, -0.5);
    auto a = mixed_layer_amplitude(r, m, g2, q, std::numeric_limits<double>::infinity());
    // E_-(diag(1, -1)) = span e_2: amplitude (0, g2_2 - q_2), residual |g2_1 - q_1|
    EXPECT_NEAR(a.amplitude(0), 0.0, 1e-14);
    EXPECT_NEAR(a.amplitude(1), 0.5, 1e-14);
    EXPECT_NEAR(a.residual, 0.75, 1e-14);
    EXPECT_NEAR(a.residual, std::abs((r.neumannDataMap * g2 - r.neumannRows * q)(0)), 1e-14);
    EXPECT_NEAR(a.layerValue(1), -0.5, 1e-14);
    try {
        mixed_layer_amplitude(r, m, g2, q);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::SolvabilityResidualLarge);
    }
}

TEST(MixedReduction, ConsistentCaseTwoDataSolvesExactly) {
    auto m = builtin_model("neueg", {{"alpha", 0.3}});
    auto r = order_zero_mixed_reduction(m);
    const RVector q = vec2(0.3, 0.9);
    const RVector a0 = r.layerBasis.col(0) * 1.7;
    const RVector g2 = m.gamma2 * (q + a0);
    auto a = mixed_layer_amplitude(r, m, g2, q);
    EXPECT_LT(a.residual, 1e-14);
    EXPECT_LT((a.amplitude - a0).norm(), 1e-13);
}

TEST(MixedReduction, CaseOneFixture) {
    auto m = constant_coefficient_model("fix", 1, {mat({{1, 0, 0}, {0, -1, 0}, {0, 0, -2}})}, mat({{1, 0, 0}, {0, 1, 0}}),
                                        mat({{0, 1, 1}}));
    auto r = order_zero_mixed_reduction(m);
    EXPECT_EQ(r.kind, BoundaryCase::CaseI);
    EXPECT_EQ(r.dirichletRows.rows(), 1);
    RVector u0(3), w(3);
    u0 << 1, 2, 3;
    w << 0, -0.7, 0.35;
    const RVector g1 = m.gamma1 * (u0 + w);
    auto a = mixed_layer_amplitude(r, m, g1, u0);
    EXPECT_LT(a.residual, 1e-14);
    EXPECT_LT((a.layerValue - w).norm(), 1e-14);
    EXPECT_LT((m.gamma1 * (u0 + a.layerValue) - g1).norm(), 1e-14);
    EXPECT_LT((r.dirichletRows * u0 - r.dirichletDataMap * g1).norm(), 1e-14);
}
