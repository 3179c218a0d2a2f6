#include <cmath>
#include <functional>

#include "hpbl/model.hpp"

namespace hpbl {

namespace {

using Params = std::map<std::string, double>;

RMatrix rows(std::initializer_list<std::initializer_list<double>> r) {
    RMatrix m(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r.begin()->size()));
    Eigen::Index i = 0;
    for (const auto& row : r) {
        Eigen::Index j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

HyperbolicParabolicModel constant_model(const std::string& name, int d, const std::vector<RMatrix>& Aj, RMatrix g1, RMatrix g2,
                                        bool symmetric, const Params& p) {
    HyperbolicParabolicModel m;
    m.name = name;
    m.d = d;
    m.N = static_cast<int>(Aj[0].rows());
    m.A.push_back(EntryMatrix::constant(RMatrix::Identity(m.N, m.N)));
    for (const auto& a : Aj) m.A.push_back(EntryMatrix::constant(a));
    m.gamma1 = g1.size() ? g1 : RMatrix(0, m.N);
    m.gamma2 = g2.size() ? g2 : RMatrix(0, m.N);
    m.baseState = RVector::Zero(m.N);
    m.flags.symmetric = symmetric;
    m.params = p;
    return m;
}

HyperbolicParabolicModel wave_drift(const std::string& name, const Params& p, double theta) {
    const double a = p.at("alpha");
    return constant_model(name, 2, {rows({{theta, 1}, {1, theta}}), rows({{1 + a, 0}, {0, -1 + a}})}, RMatrix(),
                          RMatrix::Identity(2, 2), true, p);
}

HyperbolicParabolicModel make_neueg(const Params& p) { return wave_drift("neueg", p, 0.0); }
HyperbolicParabolicModel make_neueg2(const Params& p) { return wave_drift("neueg2", p, 0.0); }
HyperbolicParabolicModel make_noest(const Params& p) { return wave_drift("noest", p, p.at("theta")); }

HyperbolicParabolicModel make_inceg(const Params& p) {
    return constant_model("inceg", 2, {rows({{0, 1}, {1, 0}}), RMatrix::Identity(2, 2)}, rows({{p.at("g11"), 1}}),
                          rows({{1, 0}}), true, p);
}

HyperbolicParabolicModel make_badinceg(const Params& p) {
    const double a = p.at("a"), b = p.at("b");
    return constant_model("badinceg", 2, {rows({{0, 1, a}, {1, 1, 0}, {a, 0, 0}}), RMatrix::Identity(3, 3)},
                          rows({{1, 1, b}}), rows({{0, 1, 0}, {0, 0, 1}}), true, p);
}

HyperbolicParabolicModel make_fornet(const Params& p) {
    return constant_model("fornet", 1, {rows({{p.at("beta"), 0}, {0, p.at("alpha")}})}, rows({{1, -1}}), rows({{1, 1}}),
                          true, p);
}

HyperbolicParabolicModel make_eg2(const Params& p) {
    return constant_model("eg2", 2, {rows({{0, 1, 0}, {1, 0, 0}, {0, 0, 1}}), rows({{-1, 0, 0}, {0, 1, 0}, {0, 0, 1}})},
                          rows({{0, 1, 0}}), rows({{1, 0, 0}, {0, p.at("alpha"), p.at("beta")}}), true, p);
}

// Ideal-gas Euler in primitive variables (rho, u, v, T), p = R rho T.
HyperbolicParabolicModel make_rao(const Params& p) {
    HyperbolicParabolicModel m;
    m.name = "rao";
    m.d = 2;
    m.N = 4;
    m.params = {{"R", p.at("R")}, {"cv", p.at("cv")}};
    const std::vector<std::vector<std::string>> text = {
        {"1", "0", "0", "0", "0", "1", "0", "0", "0", "0", "1", "0", "0", "0", "0", "1"},
        {"u2", "u1", "0", "0", "R*u4/u1", "u2", "0", "R", "0", "0", "u2", "0", "0", "R*u4/cv", "0", "u2"},
        {"u3", "0", "u1", "0", "0", "u3", "0", "0", "R*u4/u1", "0", "u3", "R", "0", "0", "R*u4/cv", "u3"},
    };
    for (const auto& t : text) {
        EntryMatrix em;
        em.n = 4;
        for (const auto& s : t) {
            bool numeric = s == "0" || s == "1";
            em.entries.push_back(numeric ? MatrixEntry::number(std::stod(s)) : MatrixEntry::expression(s, 4, m.params));
        }
        m.A.push_back(std::move(em));
    }
    m.gamma1 = rows({{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}});
    m.gamma2 = rows({{0, 0, 0, 1}});
    m.baseState.resize(4);
    m.baseState << p.at("rho"), p.at("u"), p.at("v"), p.at("T");
    m.flags.symmetric = false;
    if (p.at("u") == 0.0) m.metadata["note"] = "Jordan block expected in the boundary Cauchy generator (u = 0)";
    const double R = p.at("R"), cv = p.at("cv"), T = p.at("T");
    const double c = std::sqrt(R * T + R * R * T / cv);
    m.metadata["soundSpeed"] = std::to_string(c);
    m.metadata["supersonic"] = (0 < c && c < p.at("v")) ? "true" : "false";
    return m;
}

HyperbolicParabolicModel make_scalar1d(const Params& p) {
    HyperbolicParabolicModel m;
    m.name = "scalar1d";
    m.d = 1;
    m.N = 1;
    m.params = {{"a", p.at("a")}, {"q", p.at("q")}};
    m.A.push_back(EntryMatrix::constant(RMatrix::Identity(1, 1)));
    EntryMatrix a1;
    a1.n = 1;
    if (p.at("q") == 0.0)
        a1.entries.push_back(MatrixEntry::number(p.at("a")));
    else
        a1.entries.push_back(MatrixEntry::expression("a + q*u1^2", 1, m.params));
    m.A.push_back(std::move(a1));
    m.gamma1 = RMatrix(0, 1);
    m.gamma2 = RMatrix::Identity(1, 1);
    m.baseState = RVector::Zero(1);
    m.flags.symmetric = true;
    return m;
}

struct Builtin {
    RegistryEntry entry;
    std::function<HyperbolicParabolicModel(const Params&)> make;
};

const std::vector<Builtin>& builtins() {
    static const std::vector<Builtin> b = {
        {{"neueg", {{"alpha", 0.0}}, "first-order wave equation with drift, full Neumann"}, make_neueg},
        {{"inceg", {{"g11", 0.5}}, "totally incoming 2x2, one Dirichlet and one Neumann condition"}, make_inceg},
        {{"badinceg", {{"a", 1.0}, {"b", -1.0}}, "totally incoming 3x3 with weak Lopatinski failure"}, make_badinceg},
        {{"fornet", {{"alpha", 1.0}, {"beta", 2.0}}, "transmission problem for a discontinuous coefficient"}, make_fornet},
        {{"eg2", {{"alpha", 1.0}, {"beta", 2.0}}, "3x3 system, two Neumann and one Dirichlet condition"}, make_eg2},
        {{"neueg2", {{"alpha", 0.0}}, "wave equation with drift, boundary Cauchy form"}, make_neueg2},
        {{"noest", {{"theta", 0.5}, {"alpha", 0.0}}, "wave equation with drift and diagonal shift theta"}, make_noest},
        {{"rao", {{"R", 1.0}, {"cv", 1.5}, {"rho", 1.0}, {"T", 1.0}, {"u", 1.0}, {"v", 2.0}},
          "linearized compressible Euler, supersonic inflow, Neumann on temperature"},
         make_rao},
        {{"scalar1d", {{"a", 1.0}, {"q", 0.0}}, "scalar transport A(u) = a + q u^2"}, make_scalar1d},
    };
    return b;
}

}  // namespace

std::vector<RegistryEntry> registry() {
    std::vector<RegistryEntry> out;
    for (const auto& b : builtins()) out.push_back(b.entry);
    return out;
}

HyperbolicParabolicModel constant_coefficient_model(const std::string& name, int d, const std::vector<RMatrix>& Aj,
                                                    const RMatrix& gamma1, const RMatrix& gamma2) {
    if (static_cast<int>(Aj.size()) != d) throw Error(ErrorKind::WrongShape, "need d coefficient matrices A_1..A_d");
    bool sym = true;
    for (const auto& a : Aj) sym = sym && (a - a.transpose()).norm() <= 1e-12 * std::max(1.0, a.norm());
    return constant_model(name, d, Aj, gamma1, gamma2, sym, {});
}

HyperbolicParabolicModel builtin_model(const std::string& name, const std::map<std::string, double>& overrides) {
    for (const auto& b : builtins()) {
        if (b.entry.name != name) continue;
        Params p = b.entry.defaults;
        for (const auto& [k, v] : overrides) {
            if (!p.count(k)) throw Error(ErrorKind::InvalidArgument, "model '" + name + "' has no parameter '" + k + "'");
            p[k] = v;
        }
        return b.make(p);
    }
    throw Error(ErrorKind::SchemaError, "unknown builtin model '" + name + "'");
}

HyperbolicParabolicModel resolve_model(const std::string& source, const std::map<std::string, double>& overrides) {
    const std::string prefix = "builtin:";
    HyperbolicParabolicModel m;
    if (source.rfind(prefix, 0) == 0) {
        m = builtin_model(source.substr(prefix.size()), overrides);
    } else {
        if (!overrides.empty()) throw Error(ErrorKind::InvalidArgument, "parameter overrides apply to builtin models only");
        m = load_model(source);
    }
    validate_model(m);
    return m;
}

RMatrix rao_conservative_A0(const std::map<std::string, double>& p) {
    const double rho = p.at("rho"), u = p.at("u"), v = p.at("v"), cv = p.at("cv"), T = p.at("T");
    const double E = cv * T + 0.5 * (u * u + v * v);
    return rows({{1, 0, 0, 0}, {u, rho, 0, 0}, {v, 0, rho, 0}, {E, rho * u, rho * v, rho * cv}});
}

RMatrix rao_conservative_A0_inverse(const std::map<std::string, double>& p) {
    const double rho = p.at("rho"), u = p.at("u"), v = p.at("v"), cv = p.at("cv"), T = p.at("T");
    const double E = cv * T + 0.5 * (u * u + v * v);
    return rows({{1, 0, 0, 0},
                 {-u / rho, 1 / rho, 0, 0},
                 {-v / rho, 0, 1 / rho, 0},
                 {-E / (rho * cv), -u / cv, -v / cv, 1 / (rho * cv)}});
}

}  // namespace hpbl
