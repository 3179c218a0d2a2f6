#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "hpbl/types.hpp"

namespace hpbl {

enum class ExprKind { Constant, Variable, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Sqrt };

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    ExprKind kind = ExprKind::Constant;
    double value = 0.0;  // Constant
    int var = 0;         // Variable: zero-based index of u_{var+1}
    std::vector<ExprPtr> children;
};

class ParseError : public Error {
public:
    ParseError(ErrorKind kind, size_t offset, const std::string& what)
        : Error(kind, what + " at byte " + std::to_string(offset)), offset_(offset) {}
    size_t offset() const { return offset_; }

private:
    size_t offset_;
};

ExprPtr make_constant(double v);
ExprPtr make_variable(int index);
ExprPtr make_unary(ExprKind kind, ExprPtr a);
ExprPtr make_binary(ExprKind kind, ExprPtr a, ExprPtr b);

// Parses arithmetic over u1..uN; names in `params` are substituted as constants.
ExprPtr parse_expr(const std::string& text, int nvars, const std::map<std::string, double>& params = {});

// Fully parenthesized form; reparses to a structurally equal tree.
std::string to_string(const ExprPtr& e);

bool structurally_equal(const ExprPtr& a, const ExprPtr& b);

bool depends_on_state(const ExprPtr& e);

inline constexpr double kDivisionGuard = 1e-12;

// Reference tree-walk evaluation.
double evaluate_reference(const ExprPtr& e, const double* u, int nvars);

// Flattened postfix program used on hot paths.
class CompiledExpr {
public:
    CompiledExpr() = default;
    explicit CompiledExpr(const ExprPtr& e);
    double operator()(const double* u, int nvars) const;
    bool is_constant() const { return constant_; }

private:
    struct Op {
        ExprKind kind;
        double value;
        int var;
    };
    std::vector<Op> ops_;
    bool constant_ = true;
    int depth_ = 0;
};

}  // namespace hpbl
