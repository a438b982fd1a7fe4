#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "daeire/parser.hpp"
#include "daeire/structural.hpp"

using namespace daeire;

namespace {

DaeSystem load(const std::string& name) {
    std::ifstream in(std::string(DAEIRE_FIXTURE_DIR) + "/" + name);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str());
}

SignatureMatrix sigma_from(const std::vector<std::vector<int>>& rows) {
    SignatureMatrix s;
    s.n = int(rows.size());
    s.data.assign(size_t(s.n) * s.n, std::nullopt);
    for (int i = 0; i < s.n; ++i)
        for (int j = 0; j < s.n; ++j)
            if (rows[i][j] > -100) s.at(i, j) = rows[i][j];  // -100 stands for -infinity
    return s;
}

// Brute force over all permutations: the ILP optimum equals the maximum
// transversal weight by LP duality.
std::optional<long> brute_matching(const SignatureMatrix& s) {
    std::vector<int> perm(s.n);
    std::iota(perm.begin(), perm.end(), 0);
    std::optional<long> best;
    do {
        long w = 0;
        bool ok = true;
        for (int i = 0; i < s.n && ok; ++i) {
            if (!s.at(i, perm[i]))
                ok = false;
            else
                w += *s.at(i, perm[i]);
        }
        if (ok && (!best || w > *best)) best = w;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// Smallest feasible delta by enumerating c in a box; d is then determined as
// the columnwise max of sigma + c.
long brute_ilp(const SignatureMatrix& s, int cmax) {
    long best = std::numeric_limits<long>::max();
    std::vector<int> c(s.n, 0);
    while (true) {
        long sum_d = 0;
        bool feasible = true;
        for (int j = 0; j < s.n && feasible; ++j) {
            int dj = 0;
            bool any = false;
            for (int i = 0; i < s.n; ++i)
                if (s.at(i, j)) {
                    dj = std::max(dj, *s.at(i, j) + c[i]);
                    any = true;
                }
            if (!any) feasible = false;
            sum_d += dj;
        }
        if (feasible) {
            long sum_c = std::accumulate(c.begin(), c.end(), 0L);
            best = std::min(best, sum_d - sum_c);
        }
        int pos = 0;
        while (pos < s.n && ++c[pos] > cmax) c[pos++] = 0;
        if (pos == s.n) break;
    }
    return best;
}

SignatureMatrix random_sigma(std::mt19937& rng, int n) {
    std::uniform_int_distribution<int> entry(-2, 2);
    SignatureMatrix s;
    s.n = n;
    s.data.assign(size_t(n) * n, std::nullopt);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            int e = entry(rng);
            if (e >= 0) s.at(i, j) = e;
        }
    return s;
}

}  // namespace

TEST_CASE("signature matrices of the fixtures") {
    DaeSystem ex4 = load("example4.dae");
    SignatureMatrix s = signature_matrix(ex4);
    CHECK(s.at(0, 0) == 2);
    CHECK(s.at(0, 1) == 2);
    CHECK(s.at(1, 0) == 0);
    CHECK(s.at(1, 1) == 0);

    DaeSystem one = parse_model("var x; x' - 1 = 0;");
    SignatureMatrix s1 = signature_matrix(one);
    CHECK(s1.at(0, 0) == 1);

    DaeSystem beam = load("beam.dae");
    SignatureMatrix sb = signature_matrix(beam);
    CHECK(sb.at(0, 0) == 2);
    CHECK(sb.at(0, 1) == 2);
    CHECK(sb.at(1, 0) == 0);
    CHECK(sb.at(1, 1) == 0);
}

TEST_CASE("assignment solve reproduces the published offsets") {
    DaeSystem ex4 = load("example4.dae");
    StructuralSolution sol = solve_assignment(signature_matrix(ex4));
    CHECK(sol.c == std::vector<int>{0, 2});
    CHECK(sol.d == std::vector<int>{2, 2});
    CHECK(sol.delta == 2);

    DaeSystem amp = load("amplifier.dae");
    StructuralSolution sa = solve_assignment(signature_matrix(amp));
    CHECK(sa.c == std::vector<int>(8, 0));
    CHECK(sa.d == std::vector<int>(8, 1));
    CHECK(sa.delta == 8);

    DaeSystem pend = load("pendulum.dae");
    StructuralSolution sp = solve_assignment(signature_matrix(pend));
    CHECK(sp.c == std::vector<int>{0, 0, 1, 0, 0});
    CHECK(sp.d == std::vector<int>(5, 1));
    CHECK(sp.delta == 4);

    DaeSystem ring = load("ring.dae");
    StructuralSolution sr = solve_assignment(signature_matrix(ring));
    CHECK(sr.c == std::vector<int>(15, 0));
    std::vector<int> dr = {1, 1, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1};
    CHECK(sr.d == dr);
    CHECK(sr.delta == 11);
}

TEST_CASE("a row with no finite entries has no perfect matching") {
    SignatureMatrix s = sigma_from({{1, 1}, {-100, -100}});
    CHECK_THROWS_AS(solve_assignment(s), NoPerfectMatchingError);
}

TEST_CASE("duals are feasible, complementary and minimal on random matrices") {
    std::mt19937 rng(2024);
    int solved = 0;
    for (int rep = 0; rep < 200; ++rep) {
        int n = 2 + int(rng() % 3);  // up to 4 for the box oracle
        SignatureMatrix s = random_sigma(rng, n);
        auto brute = brute_matching(s);
        StructuralSolution sol;
        try {
            sol = solve_assignment(s);
        } catch (const NoPerfectMatchingError&) {
            CHECK(!brute.has_value());
            continue;
        }
        REQUIRE(brute.has_value());
        ++solved;
        // Feasibility and complementary slackness on the transversal.
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (s.at(i, j)) CHECK(sol.d[j] - sol.c[i] >= *s.at(i, j));
        for (int i = 0; i < n; ++i) {
            REQUIRE(s.at(i, sol.transversal[i]).has_value());
            CHECK(sol.d[sol.transversal[i]] - sol.c[i] == *s.at(i, sol.transversal[i]));
            CHECK(sol.c[i] >= 0);
        }
        // LP duality: delta equals the best transversal weight, and it also
        // matches the box-search ILP optimum.
        CHECK(sol.delta == *brute);
        CHECK(sol.delta == brute_ilp(s, 5));
    }
    CHECK(solved > 100);
}

TEST_CASE("prolongation of the worked example matches the printed blocks") {
    DaeSystem ex4 = load("example4.dae");
    StructuralSolution sol = solve_assignment(signature_matrix(ex4));
    ProlongedSystem ps = prolong(ex4, sol);
    CHECK(ps.k_c == 2);
    CHECK(ps.k_d == 2);
    REQUIRE(ps.blocks.size() == 3);
    CHECK(ps.blocks[0].size() == 1);
    CHECK(ps.blocks[1].size() == 1);
    CHECK(ps.blocks[2].size() == 2);

    // Expected rows written out by hand.
    Expr df2 = parse_expression("y' - 2*x*x'", {"x", "y"});
    Expr d2f2 = parse_expression("y'' - 2*x'^2 - 2*x*x''", {"x", "y"});
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int rep = 0; rep < 10; ++rep) {
        Point p;
        p.t = dist(rng);
        for (int v = 0; v < 2; ++v)
            for (int k = 0; k <= 2; ++k) p.set(JetVar{v, k}, dist(rng));
        CHECK(evaluate(ps.blocks[1][0], p) == doctest::Approx(evaluate(df2, p)).epsilon(1e-12));
        CHECK(evaluate(ps.blocks[2][1], p) == doctest::Approx(evaluate(d2f2, p)).epsilon(1e-12));
        CHECK(evaluate(ps.blocks[2][0], p) == doctest::Approx(evaluate(ex4.equations[0], p)).epsilon(1e-12));
        CHECK(evaluate(ps.blocks[0][0], p) == doctest::Approx(evaluate(ex4.equations[1], p)).epsilon(1e-12));
    }

    // Equation counts: n + sum(c), and column j reaches order d_j exactly.
    int total = 0;
    for (const auto& b : ps.blocks) total += int(b.size());
    CHECK(total == 2 + 0 + 2);
    for (int j = 0; j < 2; ++j) {
        int seen = -1;
        for (const auto& b : ps.blocks)
            for (const Expr& e : b)
                if (auto h = highest_order(e, j)) seen = std::max(seen, *h);
        CHECK(seen == sol.d[j]);
    }
}

TEST_CASE("zero offsets leave the system unprolonged") {
    DaeSystem amp = load("amplifier.dae");
    StructuralSolution sol = solve_assignment(signature_matrix(amp));
    ProlongedSystem ps = prolong(amp, sol);
    CHECK(ps.blocks.size() == 1);
    CHECK(ps.top_block().size() == 8);
    CHECK(ps.constraints().empty());
}

TEST_CASE("top jacobian of the worked example") {
    DaeSystem ex4 = load("example4.dae");
    ProlongedSystem ps = prolong(ex4, solve_assignment(signature_matrix(ex4)));
    JacobianMatrix jm = top_jacobian(ps);
    REQUIRE(jm.rows() == 2);
    REQUIRE(jm.cols.size() == 2);
    CHECK(jm.cols[0] == JetVar{0, 2});
    CHECK(jm.cols[1] == JetVar{1, 2});
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int rep = 0; rep < 10; ++rep) {
        Point p;
        p.t = dist(rng);
        for (int v = 0; v < 2; ++v)
            for (int k = 0; k <= 2; ++k) p.set(JetVar{v, k}, dist(rng));
        double x = p.at(JetVar{0, 0}), y = p.at(JetVar{1, 0});
        CHECK(evaluate(jm.entries[0][0], p) == doctest::Approx(2 * y));
        CHECK(evaluate(jm.entries[0][1], p) == doctest::Approx(-x));
        CHECK(evaluate(jm.entries[1][0], p) == doctest::Approx(-2 * x));
        CHECK(evaluate(jm.entries[1][1], p) == doctest::Approx(1.0));
    }
}

TEST_CASE("beam top jacobian and its determinant factor") {
    DaeSystem beam = load("beam.dae");
    ProlongedSystem ps = prolong(beam, solve_assignment(signature_matrix(beam)));
    JacobianMatrix jm = top_jacobian(ps);
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int rep = 0; rep < 10; ++rep) {
        Point p;
        p.t = dist(rng);
        for (int v = 0; v < 2; ++v)
            for (int k = 0; k <= 2; ++k) p.set(JetVar{v, k}, dist(rng));
        double y1 = p.at(JetVar{0, 0}), y2 = p.at(JetVar{1, 0});
        Eigen::Matrix2d m;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) m(i, j) = evaluate(jm.entries[i][j], p);
        // Rows in either order: {1, 1} and {2 y1, -2 y2}; det = -2 (y2 + y1)
        // up to sign.
        CHECK(std::abs(m.determinant()) == doctest::Approx(std::abs(-2 * (y2 + y1))).epsilon(1e-9));
    }

    DaeSystem one = parse_model("var x; x' - 1 = 0;");
    ProlongedSystem ps1 = prolong(one, solve_assignment(signature_matrix(one)));
    JacobianMatrix j1 = top_jacobian(ps1);
    Point p;
    p.set(JetVar{0, 0}, 0.3);
    p.set(JetVar{0, 1}, 0.4);
    CHECK(evaluate(j1.entries[0][0], p) == doctest::Approx(1.0));
}

TEST_CASE("delta of the prolonged example is 4 - 2") {
    DaeSystem ex4 = load("example4.dae");
    ProlongedSystem ps = prolong(ex4, solve_assignment(signature_matrix(ex4)));
    CHECK(delta_of_prolonged(ps) == 2);
}

TEST_CASE("lower-block jacobians are submatrices of the top one") {
    for (const char* name : {"example4.dae", "beam.dae"}) {
        DaeSystem sys = load(name);
        ProlongedSystem ps = prolong(sys, solve_assignment(signature_matrix(sys)));
        JacobianMatrix top = top_jacobian(ps);
        std::mt19937 rng(17);
        std::uniform_real_distribution<double> dist(-2.0, 2.0);
        Point p;
        p.t = 0.3;
        for (int v = 0; v < sys.n_vars(); ++v)
            for (int k = 0; k <= ps.k_d; ++k) p.set(JetVar{v, k}, dist(rng));
        for (int b = 0; b < ps.k_c; ++b) {
            JacobianMatrix jb = block_jacobian(ps, b);
            // Every entry of J_b appears as the matching entry of the top
            // Jacobian: same equation family, shifted derivative order.
            for (int i = 0; i < jb.rows(); ++i)
                for (size_t j = 0; j < jb.cols.size(); ++j) {
                    double sub = evaluate(jb.entries[i][j], p);
                    // locate the same variable in the top block columns
                    int var = jb.cols[j].var;
                    int col = -1;
                    for (size_t k = 0; k < top.cols.size(); ++k)
                        if (top.cols[k].var == var) col = int(k);
                    REQUIRE(col >= 0);
                    bool found = false;
                    for (int r = 0; r < top.rows() && !found; ++r)
                        if (std::abs(evaluate(top.entries[r][col], p) - sub) < 1e-9) found = true;
                    CHECK(found);
                }
        }
    }
}
