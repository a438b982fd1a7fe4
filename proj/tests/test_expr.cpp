#include <doctest.h>

#include <random>

#include "daeire/expr.hpp"
#include "daeire/parser.hpp"

using namespace daeire;

namespace {

const std::vector<std::string> kXY = {"x", "y"};

Expr parse_xy(const std::string& s) { return parse_expression(s, kXY); }

Point random_point(std::mt19937& rng, int n_vars, int max_order) {
    std::uniform_real_distribution<double> dist(0.5, 1.5);
    Point p;
    p.t = dist(rng);
    for (int v = 0; v < n_vars; ++v)
        for (int k = 0; k <= max_order; ++k) p.set(JetVar{v, k}, dist(rng));
    return p;
}

// Small random expression generator; denominators are kept away from zero by
// construction so finite differences stay well behaved.
Expr random_expr(std::mt19937& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 9);
    switch (pick(rng)) {
        case 0:
            return Expr::constant(std::uniform_real_distribution<double>(-2.0, 2.0)(rng));
        case 1:
            return Expr::time();
        case 2: {
            std::uniform_int_distribution<int> var(0, 1), order(0, 2);
            return Expr::jet(var(rng), order(rng));
        }
        case 3:
            return random_expr(rng, depth - 1) + random_expr(rng, depth - 1);
        case 4:
            return random_expr(rng, depth - 1) * random_expr(rng, depth - 1);
        case 5:
            return -random_expr(rng, depth - 1);
        case 6:
            return pow(random_expr(rng, depth - 1), std::uniform_int_distribution<int>(0, 3)(rng));
        case 7:
            return sin(random_expr(rng, depth - 1));
        case 8:
            return random_expr(rng, depth - 1) /
                   (Expr::constant(2.0) + pow(random_expr(rng, depth - 1), 2));
        default:
            return exp(Expr::constant(0.1) * random_expr(rng, depth - 1));
    }
}

}  // namespace

TEST_CASE("total derivative of monomials and constraint equations") {
    // x^2 -> 2*x*x'
    Expr e = parse_xy("x^2");
    Expr de = total_derivative(e);
    Expr expect = parse_xy("2*x*x'");
    std::mt19937 rng(7);
    for (int i = 0; i < 20; ++i) {
        Point p = random_point(rng, 2, 3);
        CHECK(evaluate(de, p) == doctest::Approx(evaluate(expect, p)).epsilon(1e-12));
    }

    // y - x^2 -> y' - 2*x*x'
    Expr c = parse_xy("y - x^2");
    Expr dc = total_derivative(c);
    Expr dc_expect = parse_xy("y' - 2*x*x'");
    for (int i = 0; i < 20; ++i) {
        Point p = random_point(rng, 2, 3);
        CHECK(evaluate(dc, p) == doctest::Approx(evaluate(dc_expect, p)).epsilon(1e-12));
    }

    // sin(t) -> cos(t), no jet variables
    Expr st = total_derivative(parse_xy("sin(t)"));
    CHECK(structurally_equal(st, parse_xy("cos(t)")));
}

TEST_CASE("partial derivatives match the worked Jacobian entries") {
    Expr f1 = parse_xy("2*y*x'' - x*y'' + 2*x*x'^2 - x' + sin(t)");
    Expr d_xpp = partial_derivative(f1, JetVar{0, 2});
    Expr d_ypp = partial_derivative(f1, JetVar{1, 2});
    std::mt19937 rng(11);
    for (int i = 0; i < 20; ++i) {
        Point p = random_point(rng, 2, 2);
        CHECK(evaluate(d_xpp, p) == doctest::Approx(2.0 * p.at(JetVar{1, 0})).epsilon(1e-12));
        CHECK(evaluate(d_ypp, p) == doctest::Approx(-p.at(JetVar{0, 0})).epsilon(1e-12));
    }
    CHECK(partial_derivative(parse_xy("sin(t)"), JetVar{0, 0}).is_constant(0.0));
}

TEST_CASE("evaluation") {
    Expr e = parse_xy("x*x' + t");
    Point p;
    p.t = 1.0;
    p.set(JetVar{0, 0}, 2.0);
    p.set(JetVar{0, 1}, 3.0);
    CHECK(evaluate(e, p) == doctest::Approx(7.0));

    Expr c = parse_xy("y - x^2");
    Point q;
    q.set(JetVar{0, 0}, 2.0);
    q.set(JetVar{1, 0}, 4.0);
    CHECK(evaluate(c, q) == doctest::Approx(0.0));

    // Witness coordinates from the beam fixture; value frozen from a
    // high-precision decimal computation.
    Expr g = parse_expression("y1^2 - y2^2", {"y1", "y2"});
    Point b;
    b.set(JetVar{0, 0}, -0.43092053722);
    b.set(JetVar{1, 0}, -0.43092060160);
    CHECK(evaluate(g, b) == doctest::Approx(-5.54853325172316e-08).epsilon(1e-9));

    Point missing;
    CHECK_THROWS_AS(evaluate(e, missing), UnassignedVariableError);
    Expr q2 = parse_xy("x/y");
    Point z;
    z.set(JetVar{0, 0}, 1.0);
    z.set(JetVar{1, 0}, 0.0);
    CHECK_THROWS_AS(evaluate(q2, z), DivisionByZeroError);
}

TEST_CASE("highest order") {
    Expr f1 = parse_xy("2*y*x'' - x*y'' + 2*x*x'^2 - x' + sin(t)");
    CHECK(highest_order(f1, 0) == 2);
    CHECK(highest_order(parse_xy("y - x^2"), 1) == 0);
    CHECK(!highest_order(parse_xy("sin(t)"), 0).has_value());
}

TEST_CASE("polynomial-in-jets classification") {
    CHECK(is_polynomial_in_jets(parse_xy("2*y*x'' + sin(t)")));
    Expr pend = parse_expression("x1^2 + x2^2*sin(x3)^2 - 1", {"x1", "x2", "x3"});
    CHECK(!is_polynomial_in_jets(pend));
    CHECK(is_polynomial_in_jets(parse_expression("y1^2 - y2^2", {"y1", "y2"})));
    // Quotients disqualify only when a jet variable sits in the denominator.
    CHECK(is_polynomial_in_jets(parse_xy("x/3 + y")));
    CHECK(!is_polynomial_in_jets(parse_xy("1/x")));
}

TEST_CASE("linearity and Leibniz at random points") {
    std::mt19937 rng(12345);
    for (int rep = 0; rep < 40; ++rep) {
        Expr e1 = random_expr(rng, 3);
        Expr e2 = random_expr(rng, 3);
        double a = std::uniform_real_distribution<double>(-2.0, 2.0)(rng);
        Expr lhs = total_derivative(Expr::constant(a) * e1 + e2);
        Expr rhs = Expr::constant(a) * total_derivative(e1) + total_derivative(e2);
        Expr prod_lhs = total_derivative(e1 * e2);
        Expr prod_rhs = e1 * total_derivative(e2) + e2 * total_derivative(e1);
        for (int i = 0; i < 5; ++i) {
            Point p = random_point(rng, 2, 4);
            try {
                double l = evaluate(lhs, p), r = evaluate(rhs, p);
                CHECK(l == doctest::Approx(r).epsilon(1e-10));
                double pl = evaluate(prod_lhs, p), pr = evaluate(prod_rhs, p);
                CHECK(pl == doctest::Approx(pr).epsilon(1e-10));
            } catch (const DivisionByZeroError&) {
            }
        }
    }
}

TEST_CASE("partial derivatives agree with central finite differences") {
    std::mt19937 rng(777);
    int checked = 0;
    for (int rep = 0; rep < 400 && checked < 120; ++rep) {
        Expr e = random_expr(rng, 3);
        for (JetVar v : jets_of(e)) {
            Expr de = partial_derivative(e, v);
            Point p = random_point(rng, 2, 4);
            double h = 1e-6;
            Point pp = p, pm = p;
            pp.set(v, p.at(v) + h);
            pm.set(v, p.at(v) - h);
            try {
                double fd = (evaluate(e, pp) - evaluate(e, pm)) / (2.0 * h);
                double an = evaluate(de, p);
                double scale = std::max({1.0, std::abs(fd), std::abs(an)});
                CHECK(std::abs(fd - an) / scale < 1e-6);
                ++checked;
            } catch (const DivisionByZeroError&) {
            }
        }
    }
    CHECK(checked > 50);
}

TEST_CASE("total derivative raises the highest order by one") {
    std::mt19937 rng(31);
    for (int rep = 0; rep < 50; ++rep) {
        Expr e = random_expr(rng, 3);
        Expr de = total_derivative(e);
        for (int var = 0; var < 2; ++var) {
            auto before = highest_order(e, var);
            if (!before) continue;
            auto after = highest_order(de, var);
            REQUIRE(after.has_value());
            CHECK(*after == *before + 1);
        }
    }
}

TEST_CASE("substitution and time folding") {
    Expr f1 = parse_xy("2*y*x'' - x*y''");
    std::map<JetVar, Expr> sub;
    sub.emplace(JetVar{0, 2}, Expr::jet(2, 0));       // x'' -> u
    sub.emplace(JetVar{1, 2}, Expr::constant(0.25));  // y'' -> xi
    Expr g = substitute(f1, sub);
    Point p;
    p.set(JetVar{0, 0}, 3.0);
    p.set(JetVar{1, 0}, 2.0);
    p.set(JetVar{2, 0}, 0.5);
    CHECK(evaluate(g, p) == doctest::Approx(2.0 * 2.0 * 0.5 - 3.0 * 0.25));

    Expr h = fold_time(parse_xy("sin(t) + x"), 0.0);
    Point q;
    q.set(JetVar{0, 0}, 1.5);
    CHECK(evaluate(h, q) == doctest::Approx(1.5));
    CHECK(jets_of(h).size() == 1);
}
