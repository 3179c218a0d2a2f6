#include "hpbl/model.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hpbl/spectral.hpp"

namespace hpbl {

using nlohmann::json;

MatrixEntry MatrixEntry::number(double v) {
    MatrixEntry e;
    e.value = v;
    return e;
}

MatrixEntry MatrixEntry::expression(const std::string& text, int nvars, const std::map<std::string, double>& params) {
    MatrixEntry e;
    e.text = text;
    e.ast = parse_expr(text, nvars, params);
    e.compiled = CompiledExpr(e.ast);
    if (e.compiled.is_constant()) e.value = e.compiled(nullptr, 0);
    return e;
}

RMatrix EntryMatrix::evaluate(const RVector& u) const {
    RMatrix m(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) m(r, c) = entries[r * n + c](u.data(), static_cast<int>(u.size()));
    return m;
}

bool EntryMatrix::depends_on_state() const {
    for (const auto& e : entries)
        if (e.depends_on_state()) return true;
    return false;
}

EntryMatrix EntryMatrix::constant(const RMatrix& m) {
    EntryMatrix out;
    out.n = static_cast<int>(m.rows());
    for (int r = 0; r < out.n; ++r)
        for (int c = 0; c < out.n; ++c) out.entries.push_back(MatrixEntry::number(m(r, c)));
    return out;
}

bool HyperbolicParabolicModel::constant_coefficients() const {
    for (const auto& a : A)
        if (a.depends_on_state()) return false;
    return true;
}

bool HyperbolicParabolicModel::totally_incoming(double tol) const {
    const auto ev = eigenvalues(Ad());
    for (Eigen::Index k = 0; k < ev.size(); ++k)
        if (!(ev(k).real() > tol)) return false;
    return true;
}

namespace {
double fd_step(double x) { return 1e-6 * (1.0 + std::abs(x)); }
double fd_step2(double x) { return 1e-4 * (1.0 + std::abs(x)); }
}  // namespace

RMatrix HyperbolicParabolicModel::dA(int j, const RVector& u, int k) const {
    if (!A[j].depends_on_state()) return RMatrix::Zero(N, N);
    const double h = fd_step(u(k));
    RVector up = u, um = u;
    up(k) += h;
    um(k) -= h;
    return (A_at(j, up) - A_at(j, um)) / (2 * h);
}

RMatrix HyperbolicParabolicModel::d2A(int j, const RVector& u, int k, int l) const {
    if (!A[j].depends_on_state()) return RMatrix::Zero(N, N);
    const double hk = fd_step2(u(k)), hl = fd_step2(u(l));
    if (k == l) {
        RVector up = u, um = u;
        up(k) += hk;
        um(k) -= hk;
        return (A_at(j, up) - 2 * A_at(j, u) + A_at(j, um)) / (hk * hk);
    }
    auto at = [&](double sk, double sl) {
        RVector v = u;
        v(k) += sk * hk;
        v(l) += sl * hl;
        return A_at(j, v);
    };
    return (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4 * hk * hl);
}

RMatrix HyperbolicParabolicModel::dA_dir(int j, const RVector& u, const RVector& w) const {
    RMatrix out = RMatrix::Zero(N, N);
    if (!A[j].depends_on_state()) return out;
    for (int k = 0; k < N; ++k)
        if (w(k) != 0.0) out += dA(j, u, k) * w(k);
    return out;
}

RMatrix HyperbolicParabolicModel::d2A_dir(int j, const RVector& u, const RVector& w1, const RVector& w2) const {
    RMatrix out = RMatrix::Zero(N, N);
    if (!A[j].depends_on_state()) return out;
    for (int k = 0; k < N; ++k)
        for (int l = 0; l < N; ++l)
            if (w1(k) != 0.0 && w2(l) != 0.0) out += d2A(j, u, k, l) * (w1(k) * w2(l));
    return out;
}

namespace {

[[noreturn]] void violation(const std::string& check) { throw Error(ErrorKind::InvariantViolation, check); }

std::vector<RVector> sphere_samples(int dim, int count) {
    std::vector<RVector> out;
    if (dim == 1) {
        RVector a(1), b(1);
        a << 1;
        b << -1;
        return {a, b};
    }
    // deterministic quasi-uniform points via golden-angle spirals in the leading two coordinates
    for (int k = 0; k < count; ++k) {
        RVector v = RVector::Zero(dim);
        const double phi = 2.0 * M_PI * k / count;
        v(0) = std::cos(phi);
        v(1) = std::sin(phi);
        for (int j = 2; j < dim; ++j) v(j) = std::sin(0.7 * (k + 1) * (j + 1));
        out.push_back(v / v.norm());
    }
    return out;
}

}  // namespace

ValidationReport validate_model(const HyperbolicParabolicModel& m) {
    ValidationReport rep;
    if (m.d < 1) violation("d >= 1");
    if (m.N < 1) violation("N >= 1");
    if (static_cast<int>(m.A.size()) != m.d + 1) violation("matrices has d+1 entries");
    for (const auto& a : m.A)
        if (a.n != m.N || static_cast<int>(a.entries.size()) != m.N * m.N) violation("matrices are N x N");
    if (m.baseState.size() != m.N) violation("baseState has N entries");
    if (m.gamma1.rows() > 0 && m.gamma1.cols() != m.N) violation("gamma1 has N columns");
    if (m.gamma2.rows() > 0 && m.gamma2.cols() != m.N) violation("gamma2 has N columns");

    std::vector<RMatrix> A;
    for (int j = 0; j <= m.d; ++j) {
        A.push_back(m.A_base(j));
        if (!A.back().allFinite()) violation("A_j finite at baseState");
    }
    if ((A[0] - RMatrix::Identity(m.N, m.N)).norm() > 1e-12) violation("A_0 is the identity at baseState");
    Eigen::JacobiSVD<RMatrix> svd(A[m.d]);
    const auto& sv = svd.singularValues();
    if (!(sv(sv.size() - 1) > 1e-12 * sv(0))) violation("A_d invertible at baseState");

    const int r1 = static_cast<int>(numerical_rank(m.gamma1));
    const int r2 = static_cast<int>(numerical_rank(m.gamma2));
    RMatrix stack(m.gamma1.rows() + m.gamma2.rows(), m.N);
    if (m.gamma1.rows()) stack.topRows(m.gamma1.rows()) = m.gamma1;
    if (m.gamma2.rows()) stack.bottomRows(m.gamma2.rows()) = m.gamma2;
    const int rs = static_cast<int>(numerical_rank(stack));
    if (r1 != m.gamma1.rows() || r2 != m.gamma2.rows()) violation("boundary matrices have full row rank");
    if (r1 + r2 != rs || rs != m.N) violation("rank gamma1 + rank gamma2 = rank stack = N");

    if (m.flags.symmetric)
        for (int j = 0; j <= m.d; ++j)
            if ((A[j] - A[j].transpose()).norm() > 1e-12) violation("A_" + std::to_string(j) + " symmetric");
    if (m.flags.totallyIncoming.has_value() && *m.flags.totallyIncoming != m.totally_incoming(1e-12))
        violation("declared totallyIncoming flag matches spectrum of A_d");

    // characteristics: eigenvalues of sum_j xi_j A_j on a xi-sphere sample (informational)
    std::vector<int> pattern0;
    bool first = true;
    for (const RVector& xi : sphere_samples(m.d, 64)) {
        RMatrix S = RMatrix::Zero(m.N, m.N);
        for (int j = 1; j <= m.d; ++j) S += xi(j - 1) * A[j];
        const auto cl = eigen_clusters(S, 1e-6);
        std::vector<int> pat;
        for (const auto& c : cl) {
            pat.push_back(c.algebraic);
            if (c.geometric != c.algebraic) rep.characteristicsSemisimple = false;
        }
        std::sort(pat.begin(), pat.end());
        if (first) {
            pattern0 = pat;
            first = false;
        } else if (pat != pattern0) {
            rep.characteristicsConstantMultiplicity = false;
        }
    }
    if (!rep.characteristicsSemisimple) rep.notes.push_back("characteristics not semisimple on the xi-sphere sample");
    if (!rep.characteristicsConstantMultiplicity)
        rep.notes.push_back("characteristic multiplicities vary on the xi-sphere sample");
    return rep;
}

namespace {

json entry_to_json(const MatrixEntry& e) {
    if (e.is_numeric()) return e.value;
    return e.text;
}

json matrix_to_json(const RMatrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

[[noreturn]] void schema(const std::string& what) { throw Error(ErrorKind::SchemaError, what); }

RMatrix rows_from_json(const json& j, int N, const char* key) {
    if (!j.is_array()) schema(std::string(key) + " must be an array of rows");
    RMatrix m(j.size(), N);
    for (size_t r = 0; r < j.size(); ++r) {
        if (!j[r].is_array() || static_cast<int>(j[r].size()) != N)
            schema(std::string(key) + " rows must have N numbers");
        for (int c = 0; c < N; ++c) {
            if (!j[r][c].is_number()) schema(std::string(key) + " entries must be numbers");
            m(r, c) = j[r][c].get<double>();
        }
    }
    return m;
}

}  // namespace

std::string serialize_model(const HyperbolicParabolicModel& m) {
    json j;
    j["name"] = m.name;
    j["d"] = m.d;
    j["N"] = m.N;
    json mats = json::array();
    for (const auto& a : m.A) {
        json flat = json::array();
        for (const auto& e : a.entries) flat.push_back(entry_to_json(e));
        mats.push_back(flat);
    }
    j["matrices"] = mats;
    j["gamma1"] = matrix_to_json(m.gamma1);
    j["gamma2"] = matrix_to_json(m.gamma2);
    j["baseState"] = std::vector<double>(m.baseState.data(), m.baseState.data() + m.baseState.size());
    json flags;
    flags["symmetric"] = m.flags.symmetric;
    if (m.flags.totallyIncoming.has_value()) flags["totallyIncoming"] = *m.flags.totallyIncoming;
    j["flags"] = flags;
    j["params"] = json::object();
    for (const auto& [k, v] : m.params) j["params"][k] = v;
    return j.dump(2) + "\n";
}

HyperbolicParabolicModel parse_model_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        schema(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) schema("top level must be an object");
    static const std::set<std::string> allowed = {"name", "d", "N", "matrices", "gamma1", "gamma2", "baseState", "flags", "params"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) schema("unknown key '" + it.key() + "'");
    for (const char* k : {"name", "d", "N", "matrices", "baseState"})
        if (!j.contains(k)) schema(std::string("missing key '") + k + "'");
    HyperbolicParabolicModel m;
    if (!j["name"].is_string()) schema("name must be a string");
    if (!j["d"].is_number_integer() || !j["N"].is_number_integer()) schema("d and N must be integers");
    m.name = j["name"].get<std::string>();
    m.d = j["d"].get<int>();
    m.N = j["N"].get<int>();
    if (m.d < 1 || m.N < 1) schema("d and N must be positive");
    if (j.contains("params")) {
        if (!j["params"].is_object()) schema("params must be an object");
        for (auto it = j["params"].begin(); it != j["params"].end(); ++it) {
            if (!it.value().is_number()) schema("params values must be numbers");
            m.params[it.key()] = it.value().get<double>();
        }
    }
    const json& mats = j["matrices"];
    if (!mats.is_array() || static_cast<int>(mats.size()) != m.d + 1) schema("matrices must hold d+1 matrices");
    for (const json& mj : mats) {
        std::vector<json> flat;
        if (mj.is_array() && static_cast<int>(mj.size()) == m.N * m.N && (mj.empty() || !mj[0].is_array())) {
            for (const auto& e : mj) flat.push_back(e);
        } else if (mj.is_array() && static_cast<int>(mj.size()) == m.N) {
            for (const auto& row : mj) {
                if (!row.is_array() || static_cast<int>(row.size()) != m.N) schema("matrix rows must have N entries");
                for (const auto& e : row) flat.push_back(e);
            }
        } else {
            schema("each matrix must be a row-major array of N*N entries");
        }
        EntryMatrix em;
        em.n = m.N;
        for (const auto& e : flat) {
            if (e.is_number())
                em.entries.push_back(MatrixEntry::number(e.get<double>()));
            else if (e.is_string())
                em.entries.push_back(MatrixEntry::expression(e.get<std::string>(), m.N, m.params));
            else
                schema("matrix entries must be numbers or strings");
        }
        m.A.push_back(std::move(em));
    }
    m.gamma1 = j.contains("gamma1") ? rows_from_json(j["gamma1"], m.N, "gamma1") : RMatrix(0, m.N);
    m.gamma2 = j.contains("gamma2") ? rows_from_json(j["gamma2"], m.N, "gamma2") : RMatrix(0, m.N);
    const json& bs = j["baseState"];
    if (!bs.is_array() || static_cast<int>(bs.size()) != m.N) schema("baseState must have N numbers");
    m.baseState.resize(m.N);
    for (int k = 0; k < m.N; ++k) {
        if (!bs[k].is_number()) schema("baseState entries must be numbers");
        m.baseState(k) = bs[k].get<double>();
    }
    if (j.contains("flags")) {
        const json& f = j["flags"];
        if (!f.is_object()) schema("flags must be an object");
        for (auto it = f.begin(); it != f.end(); ++it) {
            if (it.key() != "symmetric" && it.key() != "totallyIncoming") schema("unknown flag '" + it.key() + "'");
            if (!it.value().is_boolean()) schema("flags must be booleans");
        }
        if (f.contains("symmetric")) m.flags.symmetric = f["symmetric"].get<bool>();
        if (f.contains("totallyIncoming")) m.flags.totallyIncoming = f["totallyIncoming"].get<bool>();
    }
    return m;
}

HyperbolicParabolicModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::SchemaError, "cannot open model file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    HyperbolicParabolicModel m = parse_model_json(ss.str());
    validate_model(m);
    return m;
}

bool models_equal(const HyperbolicParabolicModel& a, const HyperbolicParabolicModel& b) {
    if (a.name != b.name || a.d != b.d || a.N != b.N || a.A.size() != b.A.size()) return false;
    for (size_t j = 0; j < a.A.size(); ++j) {
        const auto &ea = a.A[j].entries, &eb = b.A[j].entries;
        if (ea.size() != eb.size()) return false;
        for (size_t k = 0; k < ea.size(); ++k) {
            if (ea[k].text != eb[k].text) return false;
            if (ea[k].is_numeric() && ea[k].value != eb[k].value) return false;
        }
    }
    auto same = [](const RMatrix& x, const RMatrix& y) {
        return x.rows() == y.rows() && x.cols() == y.cols() && (x.size() == 0 || x == y);
    };
    return same(a.gamma1, b.gamma1) && same(a.gamma2, b.gamma2) && a.baseState == b.baseState &&
           a.flags.symmetric == b.flags.symmetric && a.flags.totallyIncoming == b.flags.totallyIncoming &&
           a.params == b.params;
}

}  // namespace hpbl
