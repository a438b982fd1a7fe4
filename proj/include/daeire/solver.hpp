#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "daeire/ire.hpp"
#include "daeire/structural.hpp"
#include "daeire/witness.hpp"

namespace daeire {

struct SolveConfig {
    double abstol = 1e-6;
    double reltol = 1e-3;
    double step = 1e-2;
    int newton_max_iter = 25;
    double t0 = 0.0;
    double t_end = 1.0;
    std::uint64_t seed = 0;
    int max_passes = 10;
    double beta = 1e5;
};

/// Values of the leading derivatives at p: solves J(p) * v = -(top-block
/// residual with the leading variables zeroed), then Newton-corrects when the
/// top block is nonlinear in its leading derivatives.
Eigen::VectorXd explicit_rhs(const ProlongedSystem& ps, const Point& p);

/// One-step projection onto the constraints followed by one classical RK4
/// prediction through the top block, repeated over [t0, t_end]. A per-step
/// doubling comparison above reltol triggers a step-halving retry. Only the
/// original n variables are recorded.
Trajectory integrate(const ProlongedSystem& ps, const Point& p0, const SolveConfig& cfg,
                     int component_tag, int n_original_vars);

struct ComponentResult {
    int component_tag = 0;
    std::vector<IrePassLog> passes;
    std::vector<std::vector<double>> xi_used;
    std::optional<ProlongedSystem> reduced;  // regularized system, when the loop finished
    std::optional<Trajectory> trajectory;
    std::string error;  // empty on success
    bool ok() const { return error.empty(); }
};

struct GlobalSolveResult {
    StructuralSolution structural;
    SignatureMatrix sigma;
    std::optional<WitnessSet> witness;
    std::vector<ComponentResult> components;
    std::vector<Trajectory> trajectories;  // successful ones, in component order
};

/// Full pipeline: structural analysis, prolongation, witness points on the
/// constraints at t0 (or a user initial guess when they are not polynomial),
/// then per component the reduction loop and the integration. Component
/// failures are recorded; remaining components still run.
GlobalSolveResult global_solve(const DaeSystem& sys, const SolveConfig& cfg,
                               const std::optional<Point>& initial = std::nullopt);

}  // namespace daeire
