#include "daeire/structural.hpp"

#include <algorithm>
#include <limits>

namespace daeire {

SignatureMatrix signature_of(const std::vector<Expr>& equations, int n_vars) {
    SignatureMatrix sigma;
    sigma.n = n_vars;
    sigma.data.assign(size_t(n_vars) * n_vars, std::nullopt);
    for (int i = 0; i < int(equations.size()); ++i)
        for (int j = 0; j < n_vars; ++j) sigma.at(i, j) = highest_order(equations[i], j);
    return sigma;
}

SignatureMatrix signature_matrix(const DaeSystem& sys) {
    validate_square(sys);
    return signature_of(sys.equations, sys.n_vars());
}

// ---------------------------------------------------------------------------
// Assignment problem
// ---------------------------------------------------------------------------

namespace {

constexpr long long kInf = std::numeric_limits<long long>::max() / 4;

// Jonker-Volgenant shortest augmenting path, minimizing cost. Forbidden
// edges carry kInf; a result that uses one means no perfect matching on the
// allowed edges exists.
std::optional<long long> min_cost_assignment(const std::vector<std::vector<long long>>& cost,
                                             std::vector<int>* row_to_col = nullptr) {
    int n = int(cost.size());
    if (n == 0) return 0;
    std::vector<long long> u(n + 1, 0), v(n + 1, 0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<long long> minv(n + 1, kInf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            int i0 = p[j0], j1 = 0;
            long long delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                long long base = cost[i0 - 1][j - 1];
                long long cur = (base >= kInf) ? kInf : base - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            if (delta >= kInf) return std::nullopt;  // unreachable columns
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    long long total = 0;
    std::vector<int> assign(n, -1);
    for (int j = 1; j <= n; ++j) {
        if (p[j] == 0) continue;
        assign[p[j] - 1] = j - 1;
        long long cij = cost[p[j] - 1][j - 1];
        if (cij >= kInf) return std::nullopt;
        total += cij;
    }
    if (row_to_col) *row_to_col = assign;
    return total;
}

std::vector<std::vector<long long>> to_cost(const SignatureMatrix& sigma, int shift) {
    int n = sigma.n;
    std::vector<std::vector<long long>> cost(n, std::vector<long long>(n, kInf));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (sigma.at(i, j)) cost[i][j] = shift - *sigma.at(i, j);
    return cost;
}

int max_finite(const SignatureMatrix& sigma) {
    int m = 0;
    for (const auto& e : sigma.data)
        if (e) m = std::max(m, *e);
    return m;
}

std::optional<long> weight_with_forced(const SignatureMatrix& sigma, const std::vector<int>& forced) {
    int n = sigma.n;
    long forced_weight = 0;
    std::vector<char> col_taken(n, 0);
    int n_forced = 0;
    for (int i = 0; i < n; ++i) {
        if (forced[i] < 0) continue;
        if (!sigma.at(i, forced[i])) return std::nullopt;
        forced_weight += *sigma.at(i, forced[i]);
        col_taken[forced[i]] = 1;
        ++n_forced;
    }
    int m = n - n_forced;
    if (m == 0) return forced_weight;
    SignatureMatrix sub;
    sub.n = m;
    sub.data.assign(size_t(m) * m, std::nullopt);
    int ri = 0;
    for (int i = 0; i < n; ++i) {
        if (forced[i] >= 0) continue;
        int cj = 0;
        for (int j = 0; j < n; ++j) {
            if (col_taken[j]) continue;
            sub.at(ri, cj) = sigma.at(i, j);
            ++cj;
        }
        ++ri;
    }
    auto rest = max_matching_weight(sub);
    if (!rest) return std::nullopt;
    return forced_weight + *rest;
}

}  // namespace

std::optional<long> max_matching_weight(const SignatureMatrix& sigma) {
    int shift = max_finite(sigma);
    auto cost = to_cost(sigma, shift);
    auto total = min_cost_assignment(cost);
    if (!total) return std::nullopt;
    return long(sigma.n) * shift - long(*total);
}

StructuralSolution solve_assignment(const SignatureMatrix& sigma) {
    int n = sigma.n;
    auto best = max_matching_weight(sigma);
    if (!best) throw NoPerfectMatchingError();

    // Lexicographically smallest transversal among those of maximum weight.
    std::vector<int> forced(n, -1);
    for (int i = 0; i < n; ++i) {
        std::vector<char> col_taken(n, 0);
        for (int k = 0; k < i; ++k) col_taken[forced[k]] = 1;
        bool placed = false;
        for (int j = 0; j < n && !placed; ++j) {
            if (col_taken[j] || !sigma.at(i, j)) continue;
            forced[i] = j;
            if (weight_with_forced(sigma, forced) == best) placed = true;
        }
        if (!placed) throw NoPerfectMatchingError();  // cannot happen when best exists
    }

    StructuralSolution sol;
    sol.transversal = forced;
    sol.c.assign(n, 0);
    sol.d.assign(n, 0);

    // Pryce's fixed point from c = 0 yields the elementwise-smallest duals.
    for (int iter = 0; iter < 10000; ++iter) {
        bool changed = false;
        for (int j = 0; j < n; ++j) {
            int dj = 0;
            for (int i = 0; i < n; ++i)
                if (sigma.at(i, j)) dj = std::max(dj, *sigma.at(i, j) + sol.c[i]);
            if (dj != sol.d[j]) {
                sol.d[j] = dj;
                changed = true;
            }
        }
        for (int i = 0; i < n; ++i) {
            int ci = sol.d[forced[i]] - *sigma.at(i, forced[i]);
            if (ci != sol.c[i]) {
                sol.c[i] = ci;
                changed = true;
            }
        }
        if (!changed) break;
        if (iter == 9999) throw Error("dual fixed-point iteration did not converge");
    }

    sol.delta = 0;
    for (int j = 0; j < n; ++j) sol.delta += sol.d[j];
    for (int i = 0; i < n; ++i) sol.delta -= sol.c[i];
    return sol;
}

// ---------------------------------------------------------------------------
// Prolongation
// ---------------------------------------------------------------------------

std::vector<Expr> ProlongedSystem::constraints() const {
    std::vector<Expr> out = carried_constraints;
    for (size_t p = 0; p + 1 < blocks.size(); ++p)
        out.insert(out.end(), blocks[p].begin(), blocks[p].end());
    return out;
}

std::vector<JetVar> ProlongedSystem::leading_vars() const {
    std::vector<JetVar> out;
    out.reserve(leading_order.size());
    for (int j : leading_order) out.push_back(JetVar{j, d[j]});
    return out;
}

std::vector<JetVar> ProlongedSystem::state_vars() const {
    std::vector<JetVar> out;
    for (int j = 0; j < int(d.size()); ++j)
        for (int k = 0; k < d[j]; ++k) out.push_back(JetVar{j, k});
    return out;
}

ProlongedSystem prolong_equations(std::vector<Expr> active, const StructuralSolution& sol,
                                  std::vector<std::string> var_names, std::vector<Expr> carried) {
    ProlongedSystem ps;
    ps.active = std::move(active);
    ps.var_names = std::move(var_names);
    ps.carried_constraints = std::move(carried);
    ps.c = sol.c;
    ps.d = sol.d;
    ps.k_c = ps.c.empty() ? 0 : *std::max_element(ps.c.begin(), ps.c.end());
    ps.k_d = ps.d.empty() ? 0 : *std::max_element(ps.d.begin(), ps.d.end());
    int n = ps.n_active();

    std::vector<std::vector<Expr>> derivs(n);
    for (int j = 0; j < n; ++j) {
        derivs[j].push_back(ps.active[j]);
        for (int k = 1; k <= ps.c[j]; ++k) derivs[j].push_back(total_derivative(derivs[j].back()));
    }

    ps.blocks.assign(ps.k_c + 1, {});
    for (int p = 0; p <= ps.k_c; ++p) {
        for (int j = 0; j < n; ++j) {
            int order = p + ps.c[j] - ps.k_c;
            if (order < 0) continue;
            ps.blocks[p].push_back(derivs[j][order]);
            if (p == ps.k_c) ps.top_row_source.push_back(j);
        }
    }

    ps.leading_order.resize(ps.d.size());
    for (int j = 0; j < int(ps.d.size()); ++j) ps.leading_order[j] = j;
    return ps;
}

ProlongedSystem prolong(const DaeSystem& sys, const StructuralSolution& sol) {
    return prolong_equations(sys.equations, sol, sys.variables, {});
}

JacobianMatrix block_jacobian(const ProlongedSystem& ps, int block_index) {
    JacobianMatrix jm;
    int q = block_index + ps.k_d - ps.k_c;
    for (int j : ps.leading_order) {
        int order = q + ps.d[j] - ps.k_d;
        if (order < 0) continue;
        jm.cols.push_back(JetVar{j, order});
    }
    for (const Expr& row : ps.blocks[block_index]) {
        std::vector<Expr> entries;
        entries.reserve(jm.cols.size());
        for (JetVar v : jm.cols) entries.push_back(partial_derivative(row, v));
        jm.entries.push_back(std::move(entries));
    }
    return jm;
}

JacobianMatrix top_jacobian(const ProlongedSystem& ps) { return block_jacobian(ps, ps.k_c); }

long delta_of_prolonged(const ProlongedSystem& ps) {
    const auto& top = ps.top_block();
    if (int(top.size()) != int(ps.var_names.size()))
        throw Error("delta_of_prolonged requires a square top block");
    SignatureMatrix sigma = signature_of(top, int(ps.var_names.size()));
    StructuralSolution top_sol = solve_assignment(sigma);
    long n_constraints = long(ps.constraints().size());
    return top_sol.delta - n_constraints;
}

}  // namespace daeire
