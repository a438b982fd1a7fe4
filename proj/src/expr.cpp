#include "daeire/expr.hpp"

#include <array>
#include <charconv>

namespace daeire {

namespace {

ExprRef make(ExprNode n) { return std::make_shared<const ExprNode>(std::move(n)); }

bool is_const(const Expr& e) { return e.op() == ExprOp::Const; }
double cval(const Expr& e) { return e.node().value; }

}  // namespace

const ExprRef& Expr::zero_node() {
    static const ExprRef zero = make(ExprNode{ExprOp::Const, 0.0, {}, 0, nullptr, nullptr});
    return zero;
}

Expr Expr::constant(double v) { return Expr(make(ExprNode{ExprOp::Const, v, {}, 0, nullptr, nullptr})); }

Expr Expr::time() {
    static const ExprRef t = make(ExprNode{ExprOp::Time, 0.0, {}, 0, nullptr, nullptr});
    return Expr(t);
}

Expr Expr::jet(JetVar v) {
    if (v.order < 0) throw Error("jet variable order must be >= 0");
    return Expr(make(ExprNode{ExprOp::Jet, 0.0, v, 0, nullptr, nullptr}));
}

Expr operator+(const Expr& a, const Expr& b) {
    if (is_const(a) && is_const(b)) return Expr::constant(cval(a) + cval(b));
    if (a.is_constant(0.0)) return b;
    if (b.is_constant(0.0)) return a;
    return Expr(std::make_shared<const ExprNode>(ExprNode{ExprOp::Add, 0.0, {}, 0, a.ref(), b.ref()}));
}

Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }

Expr operator*(const Expr& a, const Expr& b) {
    if (is_const(a) && is_const(b)) return Expr::constant(cval(a) * cval(b));
    if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
    if (a.is_constant(1.0)) return b;
    if (b.is_constant(1.0)) return a;
    return Expr(std::make_shared<const ExprNode>(ExprNode{ExprOp::Mul, 0.0, {}, 0, a.ref(), b.ref()}));
}

Expr operator/(const Expr& a, const Expr& b) {
    if (is_const(b)) {
        if (cval(b) == 0.0) throw DivisionByZeroError("quotient with literal zero denominator");
        if (is_const(a)) return Expr::constant(cval(a) / cval(b));
        if (cval(b) == 1.0) return a;
    }
    if (a.is_constant(0.0)) return a;
    return Expr(std::make_shared<const ExprNode>(ExprNode{ExprOp::Div, 0.0, {}, 0, a.ref(), b.ref()}));
}

Expr operator-(const Expr& e) {
    if (is_const(e)) return Expr::constant(-cval(e));
    if (e.op() == ExprOp::Neg) return Expr(e.node().a);
    return Expr(std::make_shared<const ExprNode>(ExprNode{ExprOp::Neg, 0.0, {}, 0, e.ref(), nullptr}));
}

Expr pow(const Expr& base, int exponent) {
    if (exponent < 0) throw Error("integer-power exponent must be >= 0");
    if (exponent == 0) return Expr::constant(1.0);
    if (exponent == 1) return base;
    if (is_const(base)) {
        double acc = 1.0;
        for (int i = 0; i < exponent; ++i) acc *= cval(base);
        return Expr::constant(acc);
    }
    return Expr(std::make_shared<const ExprNode>(ExprNode{ExprOp::Pow, 0.0, {}, exponent, base.ref(), nullptr}));
}

namespace {

Expr unary(ExprOp op, const Expr& e, double (*fold)(double)) {
    if (is_const(e)) return Expr::constant(fold(cval(e)));
    return Expr(std::make_shared<const ExprNode>(ExprNode{op, 0.0, {}, 0, e.ref(), nullptr}));
}

}  // namespace

Expr sin(const Expr& e) { return unary(ExprOp::Sin, e, [](double x) { return std::sin(x); }); }
Expr cos(const Expr& e) { return unary(ExprOp::Cos, e, [](double x) { return std::cos(x); }); }
Expr tanh(const Expr& e) { return unary(ExprOp::Tanh, e, [](double x) { return std::tanh(x); }); }
Expr exp(const Expr& e) { return unary(ExprOp::Exp, e, [](double x) { return std::exp(x); }); }

double Point::at(JetVar v) const {
    auto it = values.find(v);
    if (it == values.end())
        throw UnassignedVariableError("point does not assign jet variable (var " + std::to_string(v.var) +
                                      ", order " + std::to_string(v.order) + ")");
    return it->second;
}

Expr total_derivative(const Expr& e) {
    const ExprNode& n = e.node();
    switch (n.op) {
        case ExprOp::Const:
            return Expr::constant(0.0);
        case ExprOp::Time:
            return Expr::constant(1.0);
        case ExprOp::Jet:
            return Expr::jet(n.jet.var, n.jet.order + 1);
        case ExprOp::Add:
            return total_derivative(Expr(n.a)) + total_derivative(Expr(n.b));
        case ExprOp::Mul:
            return total_derivative(Expr(n.a)) * Expr(n.b) + Expr(n.a) * total_derivative(Expr(n.b));
        case ExprOp::Neg:
            return -total_derivative(Expr(n.a));
        case ExprOp::Pow:
            return Expr::constant(n.exponent) * pow(Expr(n.a), n.exponent - 1) * total_derivative(Expr(n.a));
        case ExprOp::Div: {
            Expr u(n.a), v(n.b);
            return (total_derivative(u) * v - u * total_derivative(v)) / pow(v, 2);
        }
        case ExprOp::Sin:
            return cos(Expr(n.a)) * total_derivative(Expr(n.a));
        case ExprOp::Cos:
            return -(sin(Expr(n.a)) * total_derivative(Expr(n.a)));
        case ExprOp::Tanh:
            return (Expr::constant(1.0) - pow(tanh(Expr(n.a)), 2)) * total_derivative(Expr(n.a));
        case ExprOp::Exp:
            return exp(Expr(n.a)) * total_derivative(Expr(n.a));
    }
    throw Error("corrupt expression node");
}

Expr partial_derivative(const Expr& e, JetVar v) {
    const ExprNode& n = e.node();
    switch (n.op) {
        case ExprOp::Const:
        case ExprOp::Time:
            return Expr::constant(0.0);
        case ExprOp::Jet:
            return Expr::constant(n.jet == v ? 1.0 : 0.0);
        case ExprOp::Add:
            return partial_derivative(Expr(n.a), v) + partial_derivative(Expr(n.b), v);
        case ExprOp::Mul:
            return partial_derivative(Expr(n.a), v) * Expr(n.b) + Expr(n.a) * partial_derivative(Expr(n.b), v);
        case ExprOp::Neg:
            return -partial_derivative(Expr(n.a), v);
        case ExprOp::Pow:
            return Expr::constant(n.exponent) * pow(Expr(n.a), n.exponent - 1) * partial_derivative(Expr(n.a), v);
        case ExprOp::Div: {
            Expr u(n.a), w(n.b);
            return (partial_derivative(u, v) * w - u * partial_derivative(w, v)) / pow(w, 2);
        }
        case ExprOp::Sin:
            return cos(Expr(n.a)) * partial_derivative(Expr(n.a), v);
        case ExprOp::Cos:
            return -(sin(Expr(n.a)) * partial_derivative(Expr(n.a), v));
        case ExprOp::Tanh:
            return (Expr::constant(1.0) - pow(tanh(Expr(n.a)), 2)) * partial_derivative(Expr(n.a), v);
        case ExprOp::Exp:
            return exp(Expr(n.a)) * partial_derivative(Expr(n.a), v);
    }
    throw Error("corrupt expression node");
}

std::optional<int> highest_order(const Expr& e, int var) {
    const ExprNode& n = e.node();
    std::optional<int> best;
    auto merge = [&best](std::optional<int> x) {
        if (x && (!best || *x > *best)) best = x;
    };
    switch (n.op) {
        case ExprOp::Const:
        case ExprOp::Time:
            return std::nullopt;
        case ExprOp::Jet:
            if (n.jet.var == var) return n.jet.order;
            return std::nullopt;
        default:
            if (n.a) merge(highest_order(Expr(n.a), var));
            if (n.b) merge(highest_order(Expr(n.b), var));
            return best;
    }
}

bool contains_jet(const Expr& e) {
    const ExprNode& n = e.node();
    if (n.op == ExprOp::Jet) return true;
    if (n.a && contains_jet(Expr(n.a))) return true;
    if (n.b && contains_jet(Expr(n.b))) return true;
    return false;
}

bool is_polynomial_in_jets(const Expr& e) {
    const ExprNode& n = e.node();
    switch (n.op) {
        case ExprOp::Const:
        case ExprOp::Time:
        case ExprOp::Jet:
            return true;
        case ExprOp::Add:
        case ExprOp::Mul:
            return is_polynomial_in_jets(Expr(n.a)) && is_polynomial_in_jets(Expr(n.b));
        case ExprOp::Neg:
        case ExprOp::Pow:
            return is_polynomial_in_jets(Expr(n.a));
        case ExprOp::Div:
            return is_polynomial_in_jets(Expr(n.a)) && !contains_jet(Expr(n.b));
        case ExprOp::Sin:
        case ExprOp::Cos:
        case ExprOp::Tanh:
        case ExprOp::Exp:
            return !contains_jet(Expr(n.a));
    }
    return false;
}

void collect_jets(const Expr& e, std::set<JetVar>& out) {
    const ExprNode& n = e.node();
    if (n.op == ExprOp::Jet) out.insert(n.jet);
    if (n.a) collect_jets(Expr(n.a), out);
    if (n.b) collect_jets(Expr(n.b), out);
}

std::set<JetVar> jets_of(const Expr& e) {
    std::set<JetVar> out;
    collect_jets(e, out);
    return out;
}

bool structurally_equal(const Expr& a, const Expr& b) {
    const ExprNode& x = a.node();
    const ExprNode& y = b.node();
    if (x.op != y.op) return false;
    switch (x.op) {
        case ExprOp::Const:
            return x.value == y.value;
        case ExprOp::Time:
            return true;
        case ExprOp::Jet:
            return x.jet == y.jet;
        case ExprOp::Pow:
            if (x.exponent != y.exponent) return false;
            return structurally_equal(Expr(x.a), Expr(y.a));
        default: {
            if (bool(x.a) != bool(y.a) || bool(x.b) != bool(y.b)) return false;
            if (x.a && !structurally_equal(Expr(x.a), Expr(y.a))) return false;
            if (x.b && !structurally_equal(Expr(x.b), Expr(y.b))) return false;
            return true;
        }
    }
}

Expr substitute(const Expr& e, const std::map<JetVar, Expr>& map) {
    const ExprNode& n = e.node();
    switch (n.op) {
        case ExprOp::Const:
        case ExprOp::Time:
            return e;
        case ExprOp::Jet: {
            auto it = map.find(n.jet);
            return it != map.end() ? it->second : e;
        }
        case ExprOp::Add:
            return substitute(Expr(n.a), map) + substitute(Expr(n.b), map);
        case ExprOp::Mul:
            return substitute(Expr(n.a), map) * substitute(Expr(n.b), map);
        case ExprOp::Neg:
            return -substitute(Expr(n.a), map);
        case ExprOp::Pow:
            return pow(substitute(Expr(n.a), map), n.exponent);
        case ExprOp::Div:
            return substitute(Expr(n.a), map) / substitute(Expr(n.b), map);
        case ExprOp::Sin:
            return sin(substitute(Expr(n.a), map));
        case ExprOp::Cos:
            return cos(substitute(Expr(n.a), map));
        case ExprOp::Tanh:
            return tanh(substitute(Expr(n.a), map));
        case ExprOp::Exp:
            return exp(substitute(Expr(n.a), map));
    }
    throw Error("corrupt expression node");
}

Expr fold_time(const Expr& e, double t0) {
    const ExprNode& n = e.node();
    switch (n.op) {
        case ExprOp::Const:
        case ExprOp::Jet:
            return e;
        case ExprOp::Time:
            return Expr::constant(t0);
        case ExprOp::Add:
            return fold_time(Expr(n.a), t0) + fold_time(Expr(n.b), t0);
        case ExprOp::Mul:
            return fold_time(Expr(n.a), t0) * fold_time(Expr(n.b), t0);
        case ExprOp::Neg:
            return -fold_time(Expr(n.a), t0);
        case ExprOp::Pow:
            return pow(fold_time(Expr(n.a), t0), n.exponent);
        case ExprOp::Div:
            return fold_time(Expr(n.a), t0) / fold_time(Expr(n.b), t0);
        case ExprOp::Sin:
            return sin(fold_time(Expr(n.a), t0));
        case ExprOp::Cos:
            return cos(fold_time(Expr(n.a), t0));
        case ExprOp::Tanh:
            return tanh(fold_time(Expr(n.a), t0));
        case ExprOp::Exp:
            return exp(fold_time(Expr(n.a), t0));
    }
    throw Error("corrupt expression node");
}

std::optional<int> total_degree(const Expr& e, const std::set<JetVar>& unknowns) {
    const ExprNode& n = e.node();
    switch (n.op) {
        case ExprOp::Const:
        case ExprOp::Time:
            return 0;
        case ExprOp::Jet:
            return unknowns.count(n.jet) ? 1 : 0;
        case ExprOp::Add: {
            auto x = total_degree(Expr(n.a), unknowns);
            auto y = total_degree(Expr(n.b), unknowns);
            if (!x || !y) return std::nullopt;
            return std::max(*x, *y);
        }
        case ExprOp::Mul: {
            auto x = total_degree(Expr(n.a), unknowns);
            auto y = total_degree(Expr(n.b), unknowns);
            if (!x || !y) return std::nullopt;
            return *x + *y;
        }
        case ExprOp::Neg:
            return total_degree(Expr(n.a), unknowns);
        case ExprOp::Pow: {
            auto x = total_degree(Expr(n.a), unknowns);
            if (!x) return std::nullopt;
            return *x * n.exponent;
        }
        case ExprOp::Div: {
            for (JetVar v : jets_of(Expr(n.b)))
                if (unknowns.count(v)) return std::nullopt;
            return total_degree(Expr(n.a), unknowns);
        }
        case ExprOp::Sin:
        case ExprOp::Cos:
        case ExprOp::Tanh:
        case ExprOp::Exp:
            for (JetVar v : jets_of(Expr(n.a)))
                if (unknowns.count(v)) return std::nullopt;
            return 0;
    }
    return std::nullopt;
}

double evaluate(const Expr& e, const Point& p) {
    return evaluate_with<double>(e, p.t, [&p](JetVar v) -> std::optional<double> {
        auto it = p.values.find(v);
        if (it == p.values.end()) return std::nullopt;
        return it->second;
    });
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

std::string jet_name(JetVar v, const std::vector<std::string>& var_names) {
    std::string base = v.var >= 0 && v.var < int(var_names.size()) ? var_names[v.var]
                                                                   : "#" + std::to_string(v.var);
    if (v.order == 0) return base;
    if (v.order <= 3) return base + std::string(v.order, '\'');
    return base + "^(" + std::to_string(v.order) + ")";
}

namespace {

std::string format_double(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    (void)ec;
    return std::string(buf.data(), ptr);
}

// Precedence levels: additive 1, multiplicative 2, unary minus 3, power 4,
// atom 5. The printed form reparses to the identical tree.
std::string print(const ExprNode& n, int parent_prec, const std::vector<std::string>& names);

std::string wrap(std::string s, int prec, int parent_prec) {
    if (prec < parent_prec) return "(" + std::move(s) + ")";
    return s;
}

std::string print(const ExprNode& n, int parent_prec, const std::vector<std::string>& names) {
    switch (n.op) {
        case ExprOp::Const: {
            if (n.value < 0.0 || std::signbit(n.value)) return wrap(format_double(n.value), 3, parent_prec);
            return format_double(n.value);
        }
        case ExprOp::Time:
            return "t";
        case ExprOp::Jet:
            return jet_name(n.jet, names);
        case ExprOp::Add: {
            std::string lhs = print(*n.a, 1, names);
            const ExprNode& rb = *n.b;
            if (rb.op == ExprOp::Neg) return wrap(lhs + " - " + print(*rb.a, 2, names), 1, parent_prec);
            if (rb.op == ExprOp::Const && std::signbit(rb.value))
                return wrap(lhs + " - " + format_double(-rb.value), 1, parent_prec);
            return wrap(lhs + " + " + print(rb, 2, names), 1, parent_prec);
        }
        case ExprOp::Mul:
            return wrap(print(*n.a, 2, names) + "*" + print(*n.b, 3, names), 2, parent_prec);
        case ExprOp::Div:
            return wrap(print(*n.a, 2, names) + "/" + print(*n.b, 3, names), 2, parent_prec);
        case ExprOp::Neg:
            return wrap("-" + print(*n.a, 3, names), 3, parent_prec);
        case ExprOp::Pow:
            return wrap(print(*n.a, 5, names) + "^" + std::to_string(n.exponent), 4, parent_prec);
        case ExprOp::Sin:
            return "sin(" + print(*n.a, 0, names) + ")";
        case ExprOp::Cos:
            return "cos(" + print(*n.a, 0, names) + ")";
        case ExprOp::Tanh:
            return "tanh(" + print(*n.a, 0, names) + ")";
        case ExprOp::Exp:
            return "exp(" + print(*n.a, 0, names) + ")";
    }
    throw Error("corrupt expression node");
}

}  // namespace

std::string to_string(const Expr& e, const std::vector<std::string>& var_names) {
    return print(e.node(), 0, var_names);
}

}  // namespace daeire
