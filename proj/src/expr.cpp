#include "hpbl/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>

namespace hpbl {

ExprPtr make_constant(double v) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::Constant;
    n->value = v;
    return n;
}

ExprPtr make_variable(int index) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::Variable;
    n->var = index;
    return n;
}

ExprPtr make_unary(ExprKind kind, ExprPtr a) {
    auto n = std::make_shared<ExprNode>();
    n->kind = kind;
    n->children = {std::move(a)};
    return n;
}

ExprPtr make_binary(ExprKind kind, ExprPtr a, ExprPtr b) {
    auto n = std::make_shared<ExprNode>();
    n->kind = kind;
    n->children = {std::move(a), std::move(b)};
    return n;
}

namespace {

class Parser {
public:
    Parser(const std::string& text, int nvars, const std::map<std::string, double>& params)
        : s_(text), nvars_(nvars), params_(params) {}

    ExprPtr parse() {
        for (unsigned char c : s_)
            if (c >= 0x80) throw ParseError(ErrorKind::SyntaxError, pos_of(c), "non-ASCII input");
        ExprPtr e = expr();
        skip();
        if (i_ != s_.size()) throw ParseError(ErrorKind::SyntaxError, i_, "unexpected character");
        return e;
    }

private:
    size_t pos_of(unsigned char c) const { return s_.find(static_cast<char>(c)); }

    void skip() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }
    bool accept(char c) {
        skip();
        if (i_ < s_.size() && s_[i_] == c) {
            ++i_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!accept(c)) throw ParseError(ErrorKind::SyntaxError, i_, std::string("expected '") + c + "'");
    }

    ExprPtr expr() {
        ExprPtr lhs = term();
        for (;;) {
            if (accept('+'))
                lhs = make_binary(ExprKind::Add, lhs, term());
            else if (accept('-'))
                lhs = make_binary(ExprKind::Sub, lhs, term());
            else
                return lhs;
        }
    }

    ExprPtr term() {
        ExprPtr lhs = unary();
        for (;;) {
            if (accept('*'))
                lhs = make_binary(ExprKind::Mul, lhs, unary());
            else if (accept('/'))
                lhs = make_binary(ExprKind::Div, lhs, unary());
            else
                return lhs;
        }
    }

    ExprPtr unary() {
        skip();
        if (accept('+')) return unary();
        if (accept('-')) {
            skip();
            // a minus sign directly on a literal is part of the literal
            if (i_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[i_])) || s_[i_] == '.')) {
                ExprPtr lit = number();
                skip();
                if (i_ < s_.size() && s_[i_] == '^') return make_unary(ExprKind::Neg, power_tail(lit));
                return make_constant(-lit->value);
            }
            return make_unary(ExprKind::Neg, unary());
        }
        return power_tail(primary());
    }

    ExprPtr power_tail(ExprPtr base) {
        if (accept('^')) return make_binary(ExprKind::Pow, base, unary());
        return base;
    }

    ExprPtr number() {
        skip();
        const size_t start = i_;
        const char* begin = s_.c_str() + i_;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) throw ParseError(ErrorKind::SyntaxError, start, "malformed number");
        i_ += static_cast<size_t>(end - begin);
        return make_constant(v);
    }

    ExprPtr primary() {
        skip();
        if (i_ >= s_.size()) throw ParseError(ErrorKind::SyntaxError, i_, "unexpected end of input");
        const char c = s_[i_];
        if (c == '(') {
            ++i_;
            ExprPtr e = expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const size_t start = i_;
            while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) ++i_;
            const std::string id = s_.substr(start, i_ - start);
            static const std::map<std::string, ExprKind> funcs = {
                {"sin", ExprKind::Sin}, {"cos", ExprKind::Cos}, {"exp", ExprKind::Exp}, {"sqrt", ExprKind::Sqrt}};
            if (auto f = funcs.find(id); f != funcs.end()) {
                expect('(');
                ExprPtr arg = expr();
                expect(')');
                return make_unary(f->second, arg);
            }
            if (id.size() >= 2 && id[0] == 'u') {
                bool digits = true;
                for (size_t k = 1; k < id.size(); ++k) digits = digits && std::isdigit(static_cast<unsigned char>(id[k]));
                if (digits && id[1] != '0') {
                    const long k = std::strtol(id.c_str() + 1, nullptr, 10);
                    if (k >= 1 && k <= nvars_) return make_variable(static_cast<int>(k - 1));
                }
            }
            if (auto p = params_.find(id); p != params_.end()) return make_constant(p->second);
            throw ParseError(ErrorKind::UnknownIdentifier, start, "unknown identifier '" + id + "'");
        }
        throw ParseError(ErrorKind::SyntaxError, i_, std::string("unexpected character '") + c + "'");
    }

    const std::string& s_;
    size_t i_ = 0;
    int nvars_;
    const std::map<std::string, double>& params_;
};

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const char* op_symbol(ExprKind k) {
    switch (k) {
        case ExprKind::Add: return " + ";
        case ExprKind::Sub: return " - ";
        case ExprKind::Mul: return " * ";
        case ExprKind::Div: return " / ";
        case ExprKind::Pow: return "^";
        default: return "";
    }
}

const char* func_name(ExprKind k) {
    switch (k) {
        case ExprKind::Sin: return "sin";
        case ExprKind::Cos: return "cos";
        case ExprKind::Exp: return "exp";
        case ExprKind::Sqrt: return "sqrt";
        default: return "";
    }
}

double guarded_div(double num, double den) {
    if (!(std::abs(den) >= kDivisionGuard * std::max(1.0, std::abs(num))))
        throw Error(ErrorKind::DivisionGuard, "denominator below guard threshold");
    return num / den;
}

double apply_unary(ExprKind k, double a) {
    switch (k) {
        case ExprKind::Neg: return -a;
        case ExprKind::Sin: return std::sin(a);
        case ExprKind::Cos: return std::cos(a);
        case ExprKind::Exp: return std::exp(a);
        case ExprKind::Sqrt: return std::sqrt(a);
        default: return 0.0;
    }
}

double apply_binary(ExprKind k, double a, double b) {
    switch (k) {
        case ExprKind::Add: return a + b;
        case ExprKind::Sub: return a - b;
        case ExprKind::Mul: return a * b;
        case ExprKind::Div: return guarded_div(a, b);
        case ExprKind::Pow: return std::pow(a, b);
        default: return 0.0;
    }
}

double checked(double v) {
    if (!std::isfinite(v)) throw Error(ErrorKind::NumericalFailure, "expression evaluated to a non-finite value");
    return v;
}

}  // namespace

ExprPtr parse_expr(const std::string& text, int nvars, const std::map<std::string, double>& params) {
    return Parser(text, nvars, params).parse();
}

std::string to_string(const ExprPtr& e) {
    switch (e->kind) {
        case ExprKind::Constant: return e->value < 0 || std::signbit(e->value) ? "(" + fmt17(e->value) + ")" : fmt17(e->value);
        case ExprKind::Variable: return "u" + std::to_string(e->var + 1);
        case ExprKind::Neg: return "(-(" + to_string(e->children[0]) + "))";
        case ExprKind::Sin:
        case ExprKind::Cos:
        case ExprKind::Exp:
        case ExprKind::Sqrt: return std::string(func_name(e->kind)) + "(" + to_string(e->children[0]) + ")";
        default: return "(" + to_string(e->children[0]) + op_symbol(e->kind) + to_string(e->children[1]) + ")";
    }
}

bool structurally_equal(const ExprPtr& a, const ExprPtr& b) {
    if (a->kind != b->kind || a->children.size() != b->children.size()) return false;
    if (a->kind == ExprKind::Constant && !(a->value == b->value && std::signbit(a->value) == std::signbit(b->value)))
        return false;
    if (a->kind == ExprKind::Variable && a->var != b->var) return false;
    for (size_t k = 0; k < a->children.size(); ++k)
        if (!structurally_equal(a->children[k], b->children[k])) return false;
    return true;
}

bool depends_on_state(const ExprPtr& e) {
    if (e->kind == ExprKind::Variable) return true;
    for (const auto& c : e->children)
        if (depends_on_state(c)) return true;
    return false;
}

double evaluate_reference(const ExprPtr& e, const double* u, int nvars) {
    switch (e->kind) {
        case ExprKind::Constant: return e->value;
        case ExprKind::Variable:
            if (e->var >= nvars) throw Error(ErrorKind::UnknownIdentifier, "state variable out of range");
            return u[e->var];
        case ExprKind::Neg:
        case ExprKind::Sin:
        case ExprKind::Cos:
        case ExprKind::Exp:
        case ExprKind::Sqrt: return checked(apply_unary(e->kind, evaluate_reference(e->children[0], u, nvars)));
        default: {
            const double a = evaluate_reference(e->children[0], u, nvars);
            const double b = evaluate_reference(e->children[1], u, nvars);
            return checked(apply_binary(e->kind, a, b));
        }
    }
}

CompiledExpr::CompiledExpr(const ExprPtr& e) {
    int depth = 0;
    auto emit = [&](auto&& self, const ExprPtr& n) -> void {
        for (const auto& c : n->children) self(self, c);
        ops_.push_back({n->kind, n->value, n->var});
        if (n->kind == ExprKind::Variable) constant_ = false;
        if (n->children.empty())
            ++depth;
        else
            depth -= static_cast<int>(n->children.size()) - 1;
        depth_ = std::max(depth_, depth);
    };
    emit(emit, e);
}

double CompiledExpr::operator()(const double* u, int nvars) const {
    double stackbuf[64];
    std::vector<double> heap;
    double* st = stackbuf;
    if (depth_ > 64) {
        heap.resize(depth_);
        st = heap.data();
    }
    int top = 0;
    for (const Op& op : ops_) {
        switch (op.kind) {
            case ExprKind::Constant: st[top++] = op.value; break;
            case ExprKind::Variable:
                if (op.var >= nvars) throw Error(ErrorKind::UnknownIdentifier, "state variable out of range");
                st[top++] = u[op.var];
                break;
            case ExprKind::Neg:
            case ExprKind::Sin:
            case ExprKind::Cos:
            case ExprKind::Exp:
            case ExprKind::Sqrt: st[top - 1] = checked(apply_unary(op.kind, st[top - 1])); break;
            default:
                st[top - 2] = checked(apply_binary(op.kind, st[top - 2], st[top - 1]));
                --top;
                break;
        }
    }
    return st[0];
}

}  // namespace hpbl
