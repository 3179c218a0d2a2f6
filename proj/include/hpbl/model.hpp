#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hpbl/expr.hpp"
#include "hpbl/types.hpp"

namespace hpbl {

// One matrix entry: a number or an expression in u1..uN.
struct MatrixEntry {
    double value = 0.0;
    std::string text;  // empty for numeric entries
    ExprPtr ast;
    CompiledExpr compiled;

    static MatrixEntry number(double v);
    static MatrixEntry expression(const std::string& text, int nvars, const std::map<std::string, double>& params);
    bool is_numeric() const { return text.empty(); }
    bool depends_on_state() const { return !is_numeric() && !compiled.is_constant(); }
    double operator()(const double* u, int n) const { return is_numeric() ? value : compiled(u, n); }
};

struct EntryMatrix {
    int n = 0;
    std::vector<MatrixEntry> entries;  // row-major n*n

    RMatrix evaluate(const RVector& u) const;
    bool depends_on_state() const;
    static EntryMatrix constant(const RMatrix& m);
};

struct ModelFlags {
    bool symmetric = false;
    std::optional<bool> totallyIncoming;  // declared value, checked on validation
};

struct HyperbolicParabolicModel {
    std::string name;
    int d = 1;
    int N = 1;
    std::vector<EntryMatrix> A;  // A_0 .. A_d
    RMatrix gamma1;              // Dirichlet rows (may be 0 x N)
    RMatrix gamma2;              // Neumann rows (may be 0 x N)
    RVector baseState;
    ModelFlags flags;
    std::map<std::string, double> params;
    std::map<std::string, std::string> metadata;

    RMatrix A_at(int j, const RVector& u) const { return A[j].evaluate(u); }
    RMatrix A_base(int j) const { return A[j].evaluate(baseState); }
    RMatrix Ad() const { return A_base(d); }
    bool constant_coefficients() const;
    bool totally_incoming(double tol = 1e-12) const;

    // dA_j/du_k at u, by central differences with step 1e-6 (1 + |u_k|).
    RMatrix dA(int j, const RVector& u, int k) const;
    // d^2 A_j / du_k du_l at u by central differences.
    RMatrix d2A(int j, const RVector& u, int k, int l) const;
    // sum_k dA_j/du_k (u) w_k
    RMatrix dA_dir(int j, const RVector& u, const RVector& w) const;
    RMatrix d2A_dir(int j, const RVector& u, const RVector& w1, const RVector& w2) const;
};

struct ValidationReport {
    bool characteristicsSemisimple = true;
    bool characteristicsConstantMultiplicity = true;
    std::vector<std::string> notes;
};

// Checks model invariants; throws InvariantViolation naming the failed check.
ValidationReport validate_model(const HyperbolicParabolicModel& m);

std::string serialize_model(const HyperbolicParabolicModel& m);
HyperbolicParabolicModel parse_model_json(const std::string& json_text);
HyperbolicParabolicModel load_model(const std::string& path);
bool models_equal(const HyperbolicParabolicModel& a, const HyperbolicParabolicModel& b);

// Built-in examples.
struct RegistryEntry {
    std::string name;
    std::map<std::string, double> defaults;
    std::string description;
};

std::vector<RegistryEntry> registry();
HyperbolicParabolicModel builtin_model(const std::string& name, const std::map<std::string, double>& overrides = {});

// Constant-coefficient model with A_0 = I; the symmetric flag is set from the matrices.
HyperbolicParabolicModel constant_coefficient_model(const std::string& name, int d, const std::vector<RMatrix>& Aj,
                                                    const RMatrix& gamma1, const RMatrix& gamma2);

// Conservative-variable Jacobian A_0 of the gas model and the closed-form inverse as printed in the source
// derivation; the rao builtin itself uses primitive variables with A_0 = I.
RMatrix rao_conservative_A0(const std::map<std::string, double>& params);
RMatrix rao_conservative_A0_inverse(const std::map<std::string, double>& params);

// "builtin:<name>" or a path to a JSON model file.
HyperbolicParabolicModel resolve_model(const std::string& source, const std::map<std::string, double>& overrides = {});

}  // namespace hpbl
