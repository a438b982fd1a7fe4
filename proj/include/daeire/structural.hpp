#pragma once

#include <optional>
#include <vector>

#include "daeire/dae_system.hpp"

namespace daeire {

/// n x n matrix of highest derivative orders; absent entries are the
/// -infinity sentinel (nullopt), never a large negative number.
struct SignatureMatrix {
    int n = 0;
    std::vector<std::optional<int>> data;  // row-major

    std::optional<int>& at(int i, int j) { return data[size_t(i) * n + j]; }
    const std::optional<int>& at(int i, int j) const { return data[size_t(i) * n + j]; }
};

SignatureMatrix signature_matrix(const DaeSystem& sys);
SignatureMatrix signature_of(const std::vector<Expr>& equations, int n_vars);

/// Offsets (c, d), the chosen transversal and delta = sum(d) - sum(c).
struct StructuralSolution {
    std::vector<int> c;
    std::vector<int> d;
    std::vector<int> transversal;  // transversal[i] = column matched to row i
    long delta = 0;
};

/// Maximum-weight perfect matching on the finite entries followed by the
/// smallest nonnegative duals (Pryce's fixed point). Among maximum-weight
/// transversals the lexicographically smallest assignment is chosen.
StructuralSolution solve_assignment(const SignatureMatrix& sigma);

/// Weight of the best perfect matching on finite entries, or nullopt when no
/// perfect matching exists. Exposed for brute-force cross-checks.
std::optional<long> max_matching_weight(const SignatureMatrix& sigma);

// ---------------------------------------------------------------------------
// Prolongation
// ---------------------------------------------------------------------------

/// Symbolic Jacobian: entries(i, j) = d row_i / d cols[j].
struct JacobianMatrix {
    std::vector<JetVar> cols;
    std::vector<std::vector<Expr>> entries;

    int rows() const { return int(entries.size()); }
};

/// A DAE prolonged per the offsets: blocks B_0..B_kc, the top block, the
/// constraint set, plus constraints carried over from earlier reduction
/// passes. `leading_order` is the current column order of the leading
/// variables (identity until a sort permutes it).
struct ProlongedSystem {
    std::vector<std::string> var_names;
    std::vector<Expr> active;  // the square system that was prolonged
    std::vector<int> c, d;
    int k_c = 0, k_d = 0;
    std::vector<std::vector<Expr>> blocks;  // B_0 .. B_kc
    std::vector<int> top_row_source;        // active-equation index per top-block row
    std::vector<Expr> carried_constraints;  // from earlier passes
    std::vector<int> leading_order;         // permutation of variable indices

    const std::vector<Expr>& top_block() const { return blocks.back(); }
    /// Carried constraints followed by B_0..B_{kc-1}, flattened.
    std::vector<Expr> constraints() const;
    /// X^(k_d) in leading_order: x_j at order d_j.
    std::vector<JetVar> leading_vars() const;
    /// All x_j^(k) with k < d_j, sorted; the integration state.
    std::vector<JetVar> state_vars() const;
    int n_active() const { return int(active.size()); }
};

ProlongedSystem prolong(const DaeSystem& sys, const StructuralSolution& sol);
ProlongedSystem prolong_equations(std::vector<Expr> active, const StructuralSolution& sol,
                                  std::vector<std::string> var_names,
                                  std::vector<Expr> carried_constraints);

/// Jacobian of the top block with respect to the leading variables.
JacobianMatrix top_jacobian(const ProlongedSystem& ps);

/// Jacobian of block B_i with respect to X^(i + k_d - k_c).
JacobianMatrix block_jacobian(const ProlongedSystem& ps, int block_index);

/// delta of the square top block minus the number of constraint equations;
/// equals sum(d) - sum(c) of the originating solution.
long delta_of_prolonged(const ProlongedSystem& ps);

}  // namespace daeire
