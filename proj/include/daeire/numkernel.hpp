#pragma once

#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "daeire/errors.hpp"

namespace daeire {

/// Number of singular values above abstol * max(sigma_1, 1). The absolute
/// floor keeps ranks stable when fixtures mix magnitudes across many orders.
int svd_rank(const Eigen::MatrixXd& m, double abstol);

double smallest_singular_value(const Eigen::MatrixXd& m);

struct Permutations {
    std::vector<int> rows;
    std::vector<int> cols;
};

/// Row order from a column-pivoted Householder QR of M^T, column order from
/// one of M. The leading r x r block of the permuted matrix is verified
/// nonsingular by SVD (r = svd_rank(M, abstol)); failure throws instead of
/// returning an unverified block. Ties in column-norm pivoting break to the
/// lowest index.
Permutations hqr_permutations(const Eigen::MatrixXd& m, double abstol);

struct NewtonProblem {
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> residual;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian;
};

/// Newton iteration to residual sup-norm <= abstol. Underdetermined systems
/// take the minimum-norm (pseudoinverse) step, so the result is a projection
/// toward the constraint manifold near x0.
Eigen::VectorXd newton_refine(const NewtonProblem& problem, Eigen::VectorXd x0, double abstol,
                              int max_iter);

/// Pivoted LU solve; a pivot magnitude below 1e-12 * ||A|| is singular.
Eigen::VectorXd solve_linear(const Eigen::MatrixXd& a, const Eigen::VectorXd& b);

}  // namespace daeire
