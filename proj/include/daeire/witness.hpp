#pragma once

#include <complex>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "daeire/expr.hpp"

namespace daeire {

/// A polynomial system in a fixed list of jet-variable unknowns, with the
/// independent variable already folded to t = t0.
struct PolySystem {
    std::vector<Expr> equations;
    std::vector<JetVar> unknowns;

    int n_eqs() const { return int(equations.size()); }
    int n_unknowns() const { return int(unknowns.size()); }
};

/// Build a PolySystem from constraint expressions at t = t0; the unknown
/// list is every jet variable occurring in them, sorted.
PolySystem make_poly_system(const std::vector<Expr>& constraints, double t0);

void require_polynomial(const PolySystem& sys);

/// Square Lagrange formulation of min ||x - a||^2 / 2 subject to f = 0:
/// the k residuals plus, per coordinate i, sum_j lambda_j df_j/dx_i + x_i - a_i.
/// Multipliers are appended as fresh unknowns after the original ones.
PolySystem lagrange_system(const PolySystem& f, const Eigen::VectorXd& a);

/// Penalty formulation: per coordinate, x_i + beta * sum_j f_j df_j/dx_i = a_i,
/// the gradient of ||x - a||^2 / 2 + beta ||f||^2 / 2.
PolySystem penalty_system(const PolySystem& f, const Eigen::VectorXd& a, double beta);

struct TrackResult {
    std::vector<Eigen::VectorXcd> endpoints;         // sorted lexicographically
    std::vector<std::string> path_failures;          // recorded, not fatal
    long paths_tracked = 0;
};

/// Total-degree homotopy with a random complex gamma deformation, Euler
/// predictor and Newton corrector, adaptive step in [1e-6, 0.1]. Endpoints
/// are kept when the corrector residual reaches 1e-10; paths exceeding 1e4
/// steps or ||x|| > 1e8 are recorded as failures.
TrackResult track_all_roots(const PolySystem& sys, std::uint64_t seed);

struct WitnessSet {
    PolySystem f;
    std::vector<Eigen::VectorXd> points;
    std::vector<double> residuals;          // ||f||_inf per point
    std::vector<double> smallest_singular;  // of the constraint Jacobian per point
    std::vector<int> jacobian_ranks;
    std::vector<int> component;             // connectivity class per point
    std::uint64_t rng_seed = 0;
    bool used_penalty = false;
    double beta = 0.0;
    std::vector<std::string> path_failures;

    int n_points() const { return int(points.size()); }
};

/// Real witness points of V(f): Lagrange critical points of the distance to
/// a seeded random point, tracked by homotopy continuation, filtered to the
/// real endpoints, Newton-refined against f and deduplicated. When nothing
/// real survives, or the constraint Jacobian is rank-deficient at every kept
/// point, one retry runs with the penalty formulation.
WitnessSet witness_points(const PolySystem& f, std::uint64_t seed, double abstol,
                          double beta = 1e5);

enum class Membership { Contained, NotContained };

/// Probabilistic ideal-membership test: contained iff |f| <= abstol at every
/// witness point.
Membership membership_test(const std::vector<Expr>& f, const WitnessSet& w, double abstol);

/// True when a projected straight-line walk between two points stays on the
/// variety all the way; used to group witness points into components.
bool same_component(const PolySystem& f, const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                    double abstol);

Eigen::VectorXd evaluate_poly(const PolySystem& sys, const Eigen::VectorXd& x);
Eigen::MatrixXd jacobian_poly(const PolySystem& sys, const Eigen::VectorXd& x);

}  // namespace daeire
