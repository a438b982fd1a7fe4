#include <doctest.h>

#include <random>

#include "daeire/numkernel.hpp"

using namespace daeire;

TEST_CASE("svd rank basics") {
    Eigen::MatrixXd a(2, 2);
    a << 1, 2, 2, 4;
    CHECK(svd_rank(a, 1e-9) == 1);
    CHECK(svd_rank(Eigen::MatrixXd::Identity(3, 3), 1e-9) == 3);
    CHECK(svd_rank(Eigen::MatrixXd::Zero(3, 3), 1e-9) == 0);
}

TEST_CASE("svd rank is permutation invariant and scale covariant") {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int rep = 0; rep < 30; ++rep) {
        int n = 3 + int(rng() % 3);
        int r = 1 + int(rng() % n);
        Eigen::MatrixXd u(n, r), v(n, r);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < r; ++j) {
                u(i, j) = dist(rng);
                v(i, j) = dist(rng);
            }
        Eigen::MatrixXd m = u * v.transpose();
        int rank = svd_rank(m, 1e-9);
        Eigen::PermutationMatrix<Eigen::Dynamic> p(n), q(n);
        p.setIdentity();
        q.setIdentity();
        std::shuffle(p.indices().data(), p.indices().data() + n, rng);
        std::shuffle(q.indices().data(), q.indices().data() + n, rng);
        CHECK(svd_rank(p * m * q, 1e-9) == rank);
        CHECK(svd_rank(3.7 * m, 1e-9) == rank);
        CHECK(svd_rank(-0.2 * m, 1e-9) == rank);
    }
}

TEST_CASE("hqr permutations") {
    Permutations id = hqr_permutations(Eigen::MatrixXd::Identity(3, 3), 1e-9);
    CHECK(id.rows == std::vector<int>{0, 1, 2});
    CHECK(id.cols == std::vector<int>{0, 1, 2});

    Eigen::MatrixXd m(2, 2);
    m << 0, 0, 0, 5;
    Permutations p = hqr_permutations(m, 1e-9);
    // Exhaustive oracle: the only permutation pair placing a nonsingular 1x1
    // block first is row 1, column 1.
    CHECK(p.rows[0] == 1);
    CHECK(p.cols[0] == 1);
    CHECK(m(p.rows[0], p.cols[0]) == 5);
}

TEST_CASE("hqr output is always verified") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int rep = 0; rep < 40; ++rep) {
        int n = 2 + int(rng() % 4);
        int r = 1 + int(rng() % n);
        Eigen::MatrixXd u(n, r), v(n, r);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < r; ++j) {
                u(i, j) = dist(rng);
                v(i, j) = dist(rng);
            }
        Eigen::MatrixXd m = u * v.transpose();
        Permutations p = hqr_permutations(m, 1e-9);
        int rank = svd_rank(m, 1e-9);
        Eigen::MatrixXd leading(rank, rank);
        for (int i = 0; i < rank; ++i)
            for (int j = 0; j < rank; ++j) leading(i, j) = m(p.rows[i], p.cols[j]);
        CHECK(svd_rank(leading, 1e-9) == rank);
    }
}

TEST_CASE("newton refine on scalar and manifold problems") {
    NewtonProblem square;
    square.residual = [](const Eigen::VectorXd& x) {
        Eigen::VectorXd r(1);
        r(0) = x(0) * x(0) - 4.0;
        return r;
    };
    square.jacobian = [](const Eigen::VectorXd& x) {
        Eigen::MatrixXd j(1, 1);
        j(0, 0) = 2.0 * x(0);
        return j;
    };
    Eigen::VectorXd x0(1);
    x0 << 3.0;
    Eigen::VectorXd root = newton_refine(square, x0, 1e-12, 50);
    CHECK(root(0) == doctest::Approx(2.0).epsilon(1e-10));

    // Projection onto the parabola y = x^2 from (1.1, 1.3); the oracle is a
    // fine parameter sweep of the curve.
    NewtonProblem parab;
    parab.residual = [](const Eigen::VectorXd& x) {
        Eigen::VectorXd r(1);
        r(0) = x(1) - x(0) * x(0);
        return r;
    };
    parab.jacobian = [](const Eigen::VectorXd& x) {
        Eigen::MatrixXd j(1, 2);
        j(0, 0) = -2.0 * x(0);
        j(0, 1) = 1.0;
        return j;
    };
    Eigen::VectorXd p0(2);
    p0 << 1.1, 1.3;
    Eigen::VectorXd p = newton_refine(parab, p0, 1e-8, 50);
    CHECK(std::abs(p(1) - p(0) * p(0)) < 1e-6);
    double best = 1e100;
    for (double s = -3.0; s <= 3.0; s += 1e-4)
        best = std::min(best, std::hypot(s - 1.1, s * s - 1.3));
    CHECK(std::hypot(p(0) - 1.1, p(1) - 1.3) <= best + 1e-3);

    NewtonProblem none;
    none.residual = [](const Eigen::VectorXd& x) {
        Eigen::VectorXd r(1);
        r(0) = x(0) * x(0) + 1.0;
        return r;
    };
    none.jacobian = [](const Eigen::VectorXd& x) {
        Eigen::MatrixXd j(1, 1);
        j(0, 0) = 2.0 * x(0);
        return j;
    };
    Eigen::VectorXd n0(1);
    n0 << 1.0;
    CHECK_THROWS_AS(newton_refine(none, n0, 1e-10, 40), NoConvergenceError);
}

TEST_CASE("linear solve") {
    Eigen::MatrixXd i3 = Eigen::MatrixXd::Identity(3, 3);
    Eigen::VectorXd b(3);
    b << 1, 2, 3;
    CHECK((solve_linear(i3, b) - b).norm() < 1e-14);

    Eigen::MatrixXd d(2, 2);
    d << 2, 0, 0, 4;
    Eigen::VectorXd b2(2);
    b2 << 2, 8;
    Eigen::VectorXd x = solve_linear(d, b2);
    CHECK(x(0) == doctest::Approx(1.0));
    CHECK(x(1) == doctest::Approx(2.0));

    Eigen::MatrixXd s(2, 2);
    s << 1, 2, 2, 4;
    CHECK_THROWS_AS(solve_linear(s, b2), SingularMatrixError);
}
