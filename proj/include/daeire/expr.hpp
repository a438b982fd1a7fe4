#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "daeire/errors.hpp"

namespace daeire {

/// A dependent variable at a fixed derivative order, treated as an
/// independent jet-space coordinate.
struct JetVar {
    int var = 0;    // 0-based index into the owning system's variable list
    int order = 0;  // derivative order, >= 0

    friend bool operator==(const JetVar& a, const JetVar& b) {
        return a.var == b.var && a.order == b.order;
    }
    friend bool operator<(const JetVar& a, const JetVar& b) {
        return a.var != b.var ? a.var < b.var : a.order < b.order;
    }
};

enum class ExprOp : std::uint8_t { Const, Time, Jet, Add, Mul, Neg, Pow, Div, Sin, Cos, Tanh, Exp };

struct ExprNode;
using ExprRef = std::shared_ptr<const ExprNode>;

struct ExprNode {
    ExprOp op = ExprOp::Const;
    double value = 0.0;  // Const
    JetVar jet{};        // Jet
    int exponent = 0;    // Pow
    ExprRef a, b;        // children
};

/// Immutable expression tree over jet variables, the independent variable t,
/// constants and a fixed set of elementary functions. Nodes are shared and
/// never mutated, so expressions are safe to read from any thread.
class Expr {
public:
    Expr() : ref_(zero_node()) {}
    explicit Expr(ExprRef ref) : ref_(std::move(ref)) {}

    static Expr constant(double v);
    static Expr time();
    static Expr jet(JetVar v);
    static Expr jet(int var, int order) { return jet(JetVar{var, order}); }

    const ExprNode& node() const { return *ref_; }
    const ExprRef& ref() const { return ref_; }
    ExprOp op() const { return ref_->op; }

    bool is_constant(double v) const { return ref_->op == ExprOp::Const && ref_->value == v; }

private:
    static const ExprRef& zero_node();
    ExprRef ref_;
};

// Smart constructors fold constants and eliminate the identities 0+e, 1*e,
// 0*e and e^0. No cancellation or factoring is ever performed: a symbolically
// degenerate Jacobian must stay visibly degenerate.
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& e);
Expr pow(const Expr& base, int exponent);
Expr sin(const Expr& e);
Expr cos(const Expr& e);
Expr tanh(const Expr& e);
Expr exp(const Expr& e);

/// Numeric assignment of t and a set of jet variables.
struct Point {
    double t = 0.0;
    std::map<JetVar, double> values;

    bool has(JetVar v) const { return values.count(v) != 0; }
    double at(JetVar v) const;
    void set(JetVar v, double x) { values[v] = x; }
};

/// Formal total derivative with respect to t: chain rule over t and every
/// jet variable, each x^(k) contributing x^(k+1).
Expr total_derivative(const Expr& e);

/// Symbolic partial derivative treating each jet variable as an independent
/// coordinate.
Expr partial_derivative(const Expr& e, JetVar v);

/// Highest k such that var occurs at order k, or nullopt when absent.
std::optional<int> highest_order(const Expr& e, int var);

/// True iff jet variables occur only under sum, product, integer power and
/// negation. Elementary functions and quotient denominators disqualify only
/// when a jet variable appears inside them.
bool is_polynomial_in_jets(const Expr& e);

bool contains_jet(const Expr& e);
void collect_jets(const Expr& e, std::set<JetVar>& out);
std::set<JetVar> jets_of(const Expr& e);

bool structurally_equal(const Expr& a, const Expr& b);

/// Replace jet variables by arbitrary expressions.
Expr substitute(const Expr& e, const std::map<JetVar, Expr>& map);

/// Replace the independent variable t by the constant t0.
Expr fold_time(const Expr& e, double t0);

/// Total degree in the given jet variables; nullopt if e is not polynomial
/// in them.
std::optional<int> total_degree(const Expr& e, const std::set<JetVar>& unknowns);

/// Render with primes up to order 3, then parenthesized superscripts.
std::string to_string(const Expr& e, const std::vector<std::string>& var_names);
std::string jet_name(JetVar v, const std::vector<std::string>& var_names);

namespace detail {

template <typename S>
struct EvalOps {
    static S from_double(double v) { return S(v); }
    static bool near_zero(const S& v) { return std::abs(v) < 1e-300; }
};

}  // namespace detail

/// Evaluate with a caller-supplied lookup for jet variables. The scalar type
/// is generic so the homotopy tracker can reuse the same trees over
/// std::complex<double>.
template <typename S, typename Lookup>
S evaluate_with(const Expr& e, const S& t, Lookup&& lookup) {
    const ExprNode& n = e.node();
    switch (n.op) {
        case ExprOp::Const:
            return detail::EvalOps<S>::from_double(n.value);
        case ExprOp::Time:
            return t;
        case ExprOp::Jet: {
            std::optional<S> v = lookup(n.jet);
            if (!v) throw UnassignedVariableError("unassigned jet variable in evaluation");
            return *v;
        }
        case ExprOp::Add:
            return evaluate_with(Expr(n.a), t, lookup) + evaluate_with(Expr(n.b), t, lookup);
        case ExprOp::Mul:
            return evaluate_with(Expr(n.a), t, lookup) * evaluate_with(Expr(n.b), t, lookup);
        case ExprOp::Neg:
            return -evaluate_with(Expr(n.a), t, lookup);
        case ExprOp::Pow: {
            S base = evaluate_with(Expr(n.a), t, lookup);
            S acc = detail::EvalOps<S>::from_double(1.0);
            for (int i = 0; i < n.exponent; ++i) acc = acc * base;
            return acc;
        }
        case ExprOp::Div: {
            S num = evaluate_with(Expr(n.a), t, lookup);
            S den = evaluate_with(Expr(n.b), t, lookup);
            if (detail::EvalOps<S>::near_zero(den))
                throw DivisionByZeroError("division by (near-)zero denominator");
            return num / den;
        }
        case ExprOp::Sin:
            return std::sin(evaluate_with(Expr(n.a), t, lookup));
        case ExprOp::Cos:
            return std::cos(evaluate_with(Expr(n.a), t, lookup));
        case ExprOp::Tanh:
            return std::tanh(evaluate_with(Expr(n.a), t, lookup));
        case ExprOp::Exp:
            return std::exp(evaluate_with(Expr(n.a), t, lookup));
    }
    throw Error("corrupt expression node");
}

double evaluate(const Expr& e, const Point& p);

}  // namespace daeire
