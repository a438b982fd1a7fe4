#include "daeire/numkernel.hpp"

#include <algorithm>
#include <cmath>

namespace daeire {

int svd_rank(const Eigen::MatrixXd& m, double abstol) {
    if (m.rows() == 0 || m.cols() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0) return 0;
    double cutoff = abstol * std::max(sv(0), 1.0);
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff) ++rank;
    return rank;
}

double smallest_singular_value(const Eigen::MatrixXd& m) {
    if (m.rows() == 0 || m.cols() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    return sv(sv.size() - 1);
}

namespace {

// Column-pivoted Householder QR returning only the pivot order. Pivots pick
// the largest remaining column norm; exact ties go to the lowest index so
// permutations are deterministic.
std::vector<int> qr_pivot_order(Eigen::MatrixXd a) {
    int rows = int(a.rows());
    int cols = int(a.cols());
    std::vector<int> perm(cols);
    for (int j = 0; j < cols; ++j) perm[j] = j;
    int steps = std::min(rows, cols);
    for (int k = 0; k < steps; ++k) {
        int best = k;
        double best_norm = a.col(perm[k]).tail(rows - k).norm();
        for (int j = k + 1; j < cols; ++j) {
            double nj = a.col(perm[j]).tail(rows - k).norm();
            if (nj > best_norm) {
                best_norm = nj;
                best = j;
            }
        }
        std::swap(perm[k], perm[best]);
        if (best_norm == 0.0) continue;
        // Householder reflection on rows k..end of the pivot column.
        Eigen::VectorXd x = a.col(perm[k]).tail(rows - k);
        Eigen::VectorXd v = x;
        v(0) += (x(0) >= 0 ? 1.0 : -1.0) * x.norm();
        double vn2 = v.squaredNorm();
        if (vn2 == 0.0) continue;
        for (int j = k; j < cols; ++j) {
            auto col = a.col(perm[j]).tail(rows - k);
            double coef = 2.0 * v.dot(col) / vn2;
            col -= coef * v;
        }
    }
    return perm;
}

}  // namespace

Permutations hqr_permutations(const Eigen::MatrixXd& m, double abstol) {
    Permutations p;
    p.rows = qr_pivot_order(m.transpose());
    p.cols = qr_pivot_order(m);
    int r = svd_rank(m, abstol);
    if (r > 0) {
        Eigen::MatrixXd leading(r, r);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j) leading(i, j) = m(p.rows[i], p.cols[j]);
        if (svd_rank(leading, abstol) < r)
            throw VerificationFailedError("sorted leading block failed its SVD rank verification");
    }
    return p;
}

Eigen::VectorXd newton_refine(const NewtonProblem& problem, Eigen::VectorXd x0, double abstol,
                              int max_iter) {
    if (max_iter < 1) throw Error("newton_refine requires max_iter >= 1");
    Eigen::VectorXd x = std::move(x0);
    Eigen::VectorXd r = problem.residual(x);
    double rn = r.size() ? r.lpNorm<Eigen::Infinity>() : 0.0;
    if (rn <= abstol) return x;
    for (int iter = 0; iter < max_iter; ++iter) {
        Eigen::MatrixXd j = problem.jacobian(x);
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(j);
        Eigen::VectorXd step = cod.solve(-r);
        if (!step.allFinite()) throw NoConvergenceError("Newton step is not finite");
        // Plain Newton with a halving backtrack when the residual grows.
        double scale = 1.0;
        for (int back = 0; back < 30; ++back) {
            Eigen::VectorXd xn = x + scale * step;
            Eigen::VectorXd rnew = problem.residual(xn);
            double rnn = rnew.lpNorm<Eigen::Infinity>();
            if (rnn < rn || !std::isfinite(rnn)) {
                if (!std::isfinite(rnn)) {
                    scale *= 0.5;
                    continue;
                }
                x = std::move(xn);
                r = std::move(rnew);
                rn = rnn;
                break;
            }
            scale *= 0.5;
            if (back == 29) throw NoConvergenceError("Newton backtracking stalled");
        }
        if (rn <= abstol) return x;
    }
    throw NoConvergenceError("Newton did not reach the requested tolerance in " +
                             std::to_string(max_iter) + " iterations");
}

Eigen::VectorXd solve_linear(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
    if (a.rows() != a.cols()) throw Error("solve_linear requires a square matrix");
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    double norm = a.norm();
    double smallest = std::numeric_limits<double>::infinity();
    for (int i = 0; i < a.rows(); ++i)
        smallest = std::min(smallest, std::abs(lu.matrixLU()(i, i)));
    if (a.rows() > 0 && smallest < 1e-12 * norm)
        throw SingularMatrixError("linear solve hit a pivot below 1e-12 * ||A||");
    Eigen::VectorXd x = lu.solve(b);
    // One iterative refinement step keeps the residual contract honest for
    // poorly scaled systems.
    Eigen::VectorXd res = a * x - b;
    if (res.norm() > 1e-10 * b.norm()) x -= lu.solve(res);
    return x;
}

}  // namespace daeire
