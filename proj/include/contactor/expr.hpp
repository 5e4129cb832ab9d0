#ifndef CONTACTOR_EXPR_HPP
#define CONTACTOR_EXPR_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "contactor/dual.hpp"
#include "contactor/errors.hpp"

namespace contactor {

using Bindings = std::map<std::string, double>;

enum class ExprFunc : std::uint8_t { Sin, Cos, Tan, Exp, Log, Sqrt, Tanh, Abs };

struct ExprNode {
    enum class Kind : std::uint8_t { Constant, Variable, Negate, Binary, Call };
    Kind kind = Kind::Constant;
    double value = 0.0;   // Constant
    int var = -1;         // Variable: index into vars()
    char op = 0;          // Binary: one of + - * / ^
    ExprFunc func = ExprFunc::Sin;
    int lhs = -1;
    int rhs = -1;
};

// Immutable parsed scalar expression over a fixed, ordered variable list.
// Evaluation is pure and deterministic; gradients and Hessians come from
// forward-mode duals (nested for second order) and are exact for the
// grammar's functions.
class ScalarExpr {
public:
    ScalarExpr() = default;

    // Grammar: numeric literals; identifiers; binary + - * / ^ with '^'
    // right-associative and binding tightest, then unary minus, then * /,
    // then + -; functions sin cos tan exp log sqrt tanh abs; parentheses.
    // Identifiers must appear in `vars`.
    static ScalarExpr parse(const std::string& text,
                            const std::vector<std::string>& vars);

    double eval(const Bindings& b) const;
    std::vector<double> grad(const std::vector<std::string>& wrt,
                             const Bindings& b) const;
    // Symmetric by construction: the upper triangle is mirrored exactly.
    std::vector<std::vector<double>> hess(const std::vector<std::string>& wrt,
                                          const Bindings& b) const;

    // Evaluate with values given positionally (values[i] binds vars()[i]).
    template <typename T>
    T eval_values(const std::vector<T>& values) const {
        return eval_node<T>(root_, values);
    }

    // Gradient with respect to vars()[wrt_index] at positionally bound
    // values, computed with scalar type T (T = Dual<double> yields entries
    // of the Hessian, T = double plain first derivatives).
    template <typename T>
    T derivative_values(const std::vector<T>& values, int wrt_index) const {
        std::vector<Dual<T>> seeded(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) {
            seeded[i].v = values[i];
            seeded[i].d = (static_cast<int>(i) == wrt_index) ? T(1.0) : T{};
        }
        return eval_node<Dual<T>>(root_, seeded).d;
    }

    const std::vector<std::string>& vars() const { return vars_; }
    const std::string& text() const { return text_; }
    bool empty() const { return nodes_.empty(); }

    // Index of a variable name, or -1.
    int var_index(const std::string& name) const;
    // Positional values from a name->value map; missing names throw.
    std::vector<double> bind(const Bindings& b) const;

    // Re-expresses this expression over a variable list that must contain
    // every variable of the current one (used when splicing expressions
    // into larger generator functions).
    ScalarExpr with_vars(const std::vector<std::string>& vars) const;

    friend class ExprBuilder;

private:
    template <typename T>
    T eval_node(int idx, const std::vector<T>& values) const;

    std::vector<ExprNode> nodes_;
    int root_ = -1;
    std::vector<std::string> vars_;
    std::string text_;
};

// Value plus gradient over the first `count` variables (all by default),
// in one pass per component. With T = Dual<double> the entries are duals
// carrying directional second derivatives.
template <typename T>
void eval_value_and_grad(const ScalarExpr& e, const std::vector<T>& values,
                         T& val, std::vector<T>& grad, int count = -1) {
    val = e.eval_values<T>(values);
    std::size_t m = count < 0 ? values.size() : static_cast<std::size_t>(count);
    grad.resize(m);
    for (std::size_t i = 0; i < m; ++i)
        grad[i] = e.derivative_values<T>(values, static_cast<int>(i));
}

// Programmatic AST assembly for generator functions built from user
// expressions (e.g. qd·p - L for Herglotz families).
class ExprBuilder {
public:
    explicit ExprBuilder(std::vector<std::string> vars);

    int constant(double c);
    int var(const std::string& name);
    int add(int a, int b);
    int sub(int a, int b);
    int mul(int a, int b);
    // Splices another expression's AST; its variables are matched by name.
    int splice(const ScalarExpr& e);
    ScalarExpr finish(int root, const std::string& text) const;

private:
    std::vector<ExprNode> nodes_;
    std::vector<std::string> vars_;
};

template <typename T>
T ScalarExpr::eval_node(int idx, const std::vector<T>& values) const {
    const ExprNode& n = nodes_[static_cast<std::size_t>(idx)];
    switch (n.kind) {
    case ExprNode::Kind::Constant:
        return T(n.value);
    case ExprNode::Kind::Variable:
        return values[static_cast<std::size_t>(n.var)];
    case ExprNode::Kind::Negate:
        return -eval_node<T>(n.lhs, values);
    case ExprNode::Kind::Binary: {
        T a = eval_node<T>(n.lhs, values);
        switch (n.op) {
        case '+': return a + eval_node<T>(n.rhs, values);
        case '-': return a - eval_node<T>(n.rhs, values);
        case '*': return a * eval_node<T>(n.rhs, values);
        case '/': return div_op(a, eval_node<T>(n.rhs, values));
        case '^': {
            const ExprNode& e = nodes_[static_cast<std::size_t>(n.rhs)];
            if (e.kind == ExprNode::Kind::Constant)
                return pow_const(a, e.value);
            return pow_general(a, eval_node<T>(n.rhs, values));
        }
        default: break;
        }
        throw DomainError("corrupt expression node");
    }
    case ExprNode::Kind::Call: {
        T a = eval_node<T>(n.lhs, values);
        switch (n.func) {
        case ExprFunc::Sin:  return sin(a);
        case ExprFunc::Cos:  return cos(a);
        case ExprFunc::Tan:  return tan(a);
        case ExprFunc::Exp:  return exp(a);
        case ExprFunc::Log:  return log_op(a);
        case ExprFunc::Sqrt: return sqrt_op(a);
        case ExprFunc::Tanh: return tanh(a);
        case ExprFunc::Abs:  return abs(a);
        }
        throw DomainError("corrupt expression node");
    }
    }
    throw DomainError("corrupt expression node");
}

} // namespace contactor

#endif
