#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hpbl/model.hpp"
#include "hpbl/spectral.hpp"

using namespace hpbl;

namespace {

ExprPtr random_expr(std::mt19937_64& rng, int depth, int nvars) {
    std::uniform_int_distribution<int> pick(0, 11);
    std::uniform_real_distribution<double> val(-5, 5);
    const int k = depth <= 0 ? pick(rng) % 2 : pick(rng);
    switch (k) {
        case 0: return make_constant(std::round(val(rng) * 1000) / 1000 * (pick(rng) % 3 == 0 ? 1e-7 : 1.0));
        case 1: return make_variable(static_cast<int>(rng() % nvars));
        case 2: return make_binary(ExprKind::Add, random_expr(rng, depth - 1, nvars), random_expr(rng, depth - 1, nvars));
        case 3: return make_binary(ExprKind::Sub, random_expr(rng, depth - 1, nvars), random_expr(rng, depth - 1, nvars));
        case 4: return make_binary(ExprKind::Mul, random_expr(rng, depth - 1, nvars), random_expr(rng, depth - 1, nvars));
        case 5: return make_binary(ExprKind::Div, random_expr(rng, depth - 1, nvars), random_expr(rng, depth - 1, nvars));
        case 6: return make_binary(ExprKind::Pow, random_expr(rng, depth - 1, nvars), make_constant(double(rng() % 4)));
        case 7: return make_unary(ExprKind::Neg, random_expr(rng, depth - 1, nvars));
        case 8: return make_unary(ExprKind::Sin, random_expr(rng, depth - 1, nvars));
        case 9: return make_unary(ExprKind::Cos, random_expr(rng, depth - 1, nvars));
        case 10: return make_unary(ExprKind::Exp, make_unary(ExprKind::Sin, random_expr(rng, depth - 1, nvars)));
        default: return make_unary(ExprKind::Sqrt, make_binary(ExprKind::Mul, random_expr(rng, depth - 1, nvars),
                                                                random_expr(rng, depth - 1, nvars)));
    }
}

}  // namespace

TEST(Expr, Examples) {
    double u0[1] = {0.0};
    EXPECT_EQ(CompiledExpr(parse_expr("1 + u1^2/10", 1))(u0, 1), 1.0);
    // sound speed of the gas model at rho = T = 1, R = 1, cv = 1.5
    const std::map<std::string, double> p = {{"R", 1.0}, {"cv", 1.5}};
    double u[4] = {1, 1, 2, 1};
    const double c = CompiledExpr(parse_expr("sqrt(R*u4 + R*R*u4/ cv)", 4, p))(u, 4);
    EXPECT_NEAR(c, std::sqrt(5.0 / 3.0), 1e-15);
    EXPECT_NEAR(c, 1.29099, 1e-5);
    try {
        CompiledExpr(parse_expr("1/(u1-u1)", 1))(u0, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DivisionGuard);
    }
}

TEST(Expr, Precedence) {
    double u[2] = {2, 3};
    EXPECT_EQ(CompiledExpr(parse_expr("-2^2", 2))(u, 2), -4.0);
    EXPECT_EQ(CompiledExpr(parse_expr("2^3^2", 2))(u, 2), 512.0);
    EXPECT_EQ(CompiledExpr(parse_expr("u1 - u2 - 1", 2))(u, 2), -2.0);
    EXPECT_EQ(CompiledExpr(parse_expr("u1 * -u2", 2))(u, 2), -6.0);
    EXPECT_EQ(CompiledExpr(parse_expr("12 / u1 / u2", 2))(u, 2), 2.0);
}

TEST(Expr, Errors) {
    auto kind_of = [](const std::string& s, int n) {
        try {
            parse_expr(s, n);
        } catch (const ParseError& e) {
            return std::make_pair(e.kind(), e.offset());
        }
        return std::make_pair(ErrorKind::InvalidArgument, size_t(0));
    };
    EXPECT_EQ(kind_of("1 +", 1).first, ErrorKind::SyntaxError);
    EXPECT_EQ(kind_of("u1 + u3", 2), std::make_pair(ErrorKind::UnknownIdentifier, size_t(5)));
    EXPECT_EQ(kind_of("foo(1)", 1).first, ErrorKind::UnknownIdentifier);
    EXPECT_EQ(kind_of("(1", 1).first, ErrorKind::SyntaxError);
    EXPECT_EQ(kind_of("1 $ 2", 1), std::make_pair(ErrorKind::SyntaxError, size_t(2)));
    EXPECT_EQ(kind_of("u1 \xc3\xa9", 1).first, ErrorKind::SyntaxError);
}

TEST(ExprProperty, RoundTrip) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        const ExprPtr e = random_expr(rng, 1 + trial % 6, 3);
        const std::string s = to_string(e);
        const ExprPtr back = parse_expr(s, 3);
        EXPECT_TRUE(structurally_equal(e, back)) << s << " -> " << to_string(back);
        EXPECT_EQ(to_string(back), s);
    }
}

TEST(ExprProperty, CompiledMatchesReference) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> state(-2, 2);
    for (int trial = 0; trial < 1000; ++trial) {
        const ExprPtr e = random_expr(rng, 1 + trial % 6, 3);
        const CompiledExpr c(e);
        double u[3] = {state(rng), state(rng), state(rng)};
        double ref = 0, got = 0;
        int ref_err = -1, got_err = -1;
        try {
            ref = evaluate_reference(e, u, 3);
        } catch (const Error& x) {
            ref_err = static_cast<int>(x.kind());
        }
        try {
            got = c(u, 3);
        } catch (const Error& x) {
            got_err = static_cast<int>(x.kind());
        }
        EXPECT_EQ(ref_err, got_err) << to_string(e);
        if (ref_err < 0) EXPECT_EQ(ref, got) << to_string(e);
    }
}

TEST(Registry, ContainsExactlyTheExamples) {
    std::set<std::string> names;
    for (const auto& r : registry()) names.insert(r.name);
    EXPECT_EQ(names, (std::set<std::string>{"neueg", "inceg", "badinceg", "fornet", "eg2", "neueg2", "noest", "rao", "scalar1d"}));
    for (const auto& r : registry()) EXPECT_NO_THROW(validate_model(builtin_model(r.name))) << r.name;
}

TEST(Registry, Fornet) {
    auto m = builtin_model("fornet");
    RMatrix expect(2, 2);
    expect << 2, 0, 0, 1;
    EXPECT_EQ(m.Ad(), expect);
    EXPECT_TRUE(m.totally_incoming());
    EXPECT_EQ(m.gamma1, (RMatrix(1, 2) << 1, -1).finished());
    EXPECT_EQ(m.gamma2, (RMatrix(1, 2) << 1, 1).finished());
}

TEST(Registry, Badinceg) {
    auto m = builtin_model("badinceg", {{"a", 2.0}, {"b", 3.0}});
    RMatrix a1(3, 3);
    a1 << 0, 1, 2, 1, 1, 0, 2, 0, 0;
    EXPECT_EQ(m.A_base(1), a1);
    EXPECT_EQ(m.Ad(), RMatrix::Identity(3, 3));
    EXPECT_EQ(m.gamma1, (RMatrix(1, 3) << 1, 1, 3).finished());
}

TEST(Registry, RaoGasModel) {
    auto m = builtin_model("rao");
    const double c = std::sqrt(5.0 / 3.0);
    EXPECT_EQ(m.metadata.at("supersonic"), "true");
    EXPECT_LT(c, m.baseState(2));
    // characteristics of A_2 are v - c, v, v, v + c
    auto ev = eigenvalues(m.Ad());
    EXPECT_NEAR(ev(0).real(), 2 - c, 1e-12);
    EXPECT_NEAR(ev(1).real(), 2, 1e-7);
    EXPECT_NEAR(ev(2).real(), 2, 1e-7);
    EXPECT_NEAR(ev(3).real(), 2 + c, 1e-12);
    EXPECT_TRUE(m.totally_incoming());
    EXPECT_FALSE(m.constant_coefficients());
    EXPECT_EQ(builtin_model("rao", {{"u", 0.0}}).metadata.count("note"), 1u);
    EXPECT_EQ(m.metadata.count("note"), 0u);
}

TEST(Registry, RaoConservativeInverse) {
    // The printed closed-form inverse of the conservative Jacobian differs from the true inverse in
    // one entry: the (4,1) entry should be -(E - u^2 - v^2)/(rho cv), not -E/(rho cv).
    std::map<std::string, double> p = {{"R", 1}, {"cv", 1.5}, {"rho", 1}, {"T", 1}, {"u", 1}, {"v", 2}};
    const RMatrix A0 = rao_conservative_A0(p);
    const RMatrix printed = rao_conservative_A0_inverse(p);
    const RMatrix inv = A0.inverse();
    RMatrix diff = inv - printed;
    EXPECT_NEAR(diff(3, 0), (1.0 + 4.0) / 1.5, 1e-12);
    diff(3, 0) = 0;
    EXPECT_LT(diff.norm(), 1e-12);
}

TEST(Model, JsonRoundTripAllBuiltins) {
    for (const auto& r : registry()) {
        auto m = builtin_model(r.name);
        const std::string s = serialize_model(m);
        auto back = parse_model_json(s);
        back.metadata = m.metadata;
        EXPECT_TRUE(models_equal(m, back)) << r.name;
        EXPECT_EQ(serialize_model(back), s);
        for (int j = 0; j <= m.d; ++j) EXPECT_EQ(m.A_base(j), back.A_base(j));
    }
}

TEST(Model, SchemaErrors) {
    auto kind = [](const std::string& text) {
        try {
            validate_model(parse_model_json(text));
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::NumericalFailure;
    };
    EXPECT_EQ(kind("{"), ErrorKind::SchemaError);
    EXPECT_EQ(kind(R"({"name":"x","d":1,"N":1,"matrices":[[1],[1]],"baseState":[0],"extra":1})"), ErrorKind::SchemaError);
    EXPECT_EQ(kind(R"({"name":"x","d":1,"N":1,"matrices":[[1]],"baseState":[0]})"), ErrorKind::SchemaError);
    EXPECT_EQ(kind(R"({"name":"x","d":1,"N":1,"matrices":[[1],[0]],"gamma2":[[1]],"baseState":[0]})"),
              ErrorKind::InvariantViolation);
    EXPECT_EQ(kind(R"({"name":"x","d":1,"N":1,"matrices":[[2],[1]],"gamma2":[[1]],"baseState":[0]})"),
              ErrorKind::InvariantViolation);
    EXPECT_EQ(kind(R"({"name":"x","d":1,"N":1,"matrices":[[1],["zz"]],"gamma2":[[1]],"baseState":[0]})"),
              ErrorKind::UnknownIdentifier);
    EXPECT_EQ(kind(R"({"name":"x","d":1,"N":1,"matrices":[[1],[-1]],"gamma2":[[1]],"baseState":[0],"flags":{"totallyIncoming":true}})"),
              ErrorKind::InvariantViolation);
    EXPECT_EQ(kind(R"({"name":"x","d":1,"N":1,"matrices":[[1],[1]],"gamma2":[[1]],"baseState":[0],"flags":{"totallyIncoming":true}})"),
              ErrorKind::NumericalFailure);  // valid
}

TEST(Model, NestedRowsAccepted) {
    auto m = parse_model_json(
        R"({"name":"w","d":1,"N":2,"matrices":[[[1,0],[0,1]],[[1,0],[0,"-1 - u1"]]],"gamma2":[[1,0],[0,1]],"baseState":[0,0],"flags":{"symmetric":true}})");
    validate_model(m);
    EXPECT_EQ(m.A_base(1)(1, 1), -1.0);
    EXPECT_FALSE(m.constant_coefficients());
}

TEST(Model, FiniteDifferenceJacobian) {
    auto m = builtin_model("scalar1d", {{"q", 0.1}});
    RVector u(1);
    u << 0.7;
    EXPECT_NEAR(m.dA(1, u, 0)(0, 0), 0.2 * 0.7, 1e-9);
    EXPECT_NEAR(m.d2A(1, u, 0, 0)(0, 0), 0.2, 1e-6);
}

TEST(Model, EvolutionaryTwoExampleRankCondition) {
    // beta = 0 makes the boundary rows rank deficient
    EXPECT_THROW(validate_model(builtin_model("eg2", {{"beta", 0.0}})), Error);
}

TEST(Model, FlagsAgreeWithMatrices) {
    for (const auto& r : registry()) {
        auto m = builtin_model(r.name);
        bool sym = true;
        for (int j = 0; j <= m.d; ++j) sym = sym && (m.A_base(j) - m.A_base(j).transpose()).norm() <= 1e-12;
        if (m.flags.symmetric) EXPECT_TRUE(sym) << r.name;
        auto ev = eigenvalues(m.Ad());
        bool inc = true;
        for (int k = 0; k < ev.size(); ++k) inc = inc && ev(k).real() > 1e-12;
        EXPECT_EQ(inc, m.totally_incoming()) << r.name;
    }
}
