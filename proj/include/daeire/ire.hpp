#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "daeire/numkernel.hpp"
#include "daeire/structural.hpp"

namespace daeire {

/// How one embedding pass rewrote the top block: which leading variables
/// became fresh dependent variables u and which were frozen to constants.
struct EmbeddingRecord {
    std::vector<std::pair<int, JetVar>> replaced;     // u variable index -> replaced leading var
    std::vector<std::pair<JetVar, double>> frozen;    // frozen leading var -> xi value
    int generation = 0;
};

struct IrePassLog {
    int n = 0;
    int r = 0;
    long delta_before = 0;
    long delta_after = 0;
    bool used_shortcut_duals = false;
    bool redundancy_suspected = false;
};

Eigen::MatrixXd evaluate_jacobian(const JacobianMatrix& jm, const Point& p);

/// Numeric rank of the top-block Jacobian at a point on the constraints; by
/// the constant-rank property this rank holds on the whole component with
/// probability one.
int detect_rank(const JacobianMatrix& jm, const Point& p, double abstol);

/// Permute top-block equations and leading variables so the leading r x r
/// minor of the evaluated Jacobian is nonsingular. Permutations are recorded
/// in the returned system.
ProlongedSystem sort_top_block(const ProlongedSystem& ps, const Point& p, int r, double abstol);

/// The embedded system G = {F_aug, F^(c-1)} produced from a sorted top
/// block: F_aug keeps the first r rows and adds all n rows with the leading
/// variables replaced by fresh u's (first r) and frozen constants xi (rest).
struct EmbeddedSystem {
    std::vector<Expr> equations;          // F_aug: r kept rows then n substituted rows
    std::vector<std::string> var_names;   // old variables plus the new u's
    std::vector<Expr> carried_constraints;
    EmbeddingRecord record;
};

EmbeddedSystem embed(const ProlongedSystem& ps, int r, std::uint64_t seed, int generation = 0);
EmbeddedSystem embed_with(const ProlongedSystem& ps, int r, const std::vector<double>& xi,
                          int generation = 0);

/// Extend p with values for the new u variables: copied from the replaced
/// leading variables when p assigns them, otherwise computed by solving the
/// kept rows f(s, xi, z) = 0 for s.
Point lift_point(const Point& p, const EmbeddingRecord& rec, const ProlongedSystem& sorted_ps);

/// The dual shortcut (0_r, 1_n) / (d, 1_r) for the embedded system, valid
/// when every pre-embed top-block equation touches layer X^(k_d - 1) and the
/// embedded signature still admits a perfect matching; otherwise nullopt and
/// the caller re-runs the assignment solve.
std::optional<StructuralSolution> shortcut_duals(const StructuralSolution& sol, int r,
                                                 const ProlongedSystem& pre_embed,
                                                 const EmbeddedSystem& embedded);

struct IreOptions {
    double abstol = 1e-6;
    std::uint64_t seed = 0;
    int max_passes = 10;
    /// Set when witness generation needed the penalty fallback: the delta
    /// bookkeeping is unreliable for such systems, so the no-solution check
    /// is suspended and termination relies on full rank or the pass cap.
    bool suspend_delta_check = false;
};

struct IreResult {
    ProlongedSystem system;  // regularized: full-rank top block
    Point point;             // lifted point
    std::vector<IrePassLog> passes;
    std::vector<std::vector<double>> xi_used;  // per pass
};

/// Algorithm loop: analyze, prolong, rank-check; embed until the top-block
/// Jacobian has full rank at the point. Each pass logs (n, r) and the delta
/// ledger.
IreResult ire_loop(const DaeSystem& sys, const Point& p, const IreOptions& opts);
IreResult ire_loop_from(std::vector<Expr> active, std::vector<std::string> var_names,
                        std::vector<Expr> carried, const Point& p, const IreOptions& opts);

}  // namespace daeire
