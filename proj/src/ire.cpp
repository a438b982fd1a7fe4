#include "daeire/ire.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "daeire/witness.hpp"

namespace daeire {

namespace {

double uniform_pm1(std::mt19937_64& rng) {
    return 2.0 * (double(rng() >> 11) * (1.0 / 9007199254740992.0)) - 1.0;
}

double normal(std::mt19937_64& rng) {
    double u1 = 0.0;
    do {
        u1 = double(rng() >> 11) * (1.0 / 9007199254740992.0);
    } while (u1 <= 1e-300);
    double u2 = double(rng() >> 11) * (1.0 / 9007199254740992.0);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace

Eigen::MatrixXd evaluate_jacobian(const JacobianMatrix& jm, const Point& p) {
    Eigen::MatrixXd m(jm.rows(), int(jm.cols.size()));
    for (int i = 0; i < jm.rows(); ++i)
        for (int j = 0; j < int(jm.cols.size()); ++j) m(i, j) = evaluate(jm.entries[i][j], p);
    return m;
}

int detect_rank(const JacobianMatrix& jm, const Point& p, double abstol) {
    return svd_rank(evaluate_jacobian(jm, p), abstol);
}

ProlongedSystem sort_top_block(const ProlongedSystem& ps, const Point& p, int r, double abstol) {
    JacobianMatrix jm = top_jacobian(ps);
    Eigen::MatrixXd m = evaluate_jacobian(jm, p);
    (void)r;
    Permutations perm = hqr_permutations(m, abstol);

    ProlongedSystem out = ps;
    // Top-block rows correspond one-to-one to active equations; permute both.
    int n = ps.n_active();
    std::vector<Expr> active(n);
    std::vector<int> c(n);
    std::vector<Expr> top(n);
    std::vector<int> src(n);
    for (int i = 0; i < n; ++i) {
        int from = perm.rows[i];
        top[i] = ps.top_block()[from];
        src[i] = i;
        active[i] = ps.active[ps.top_row_source[from]];
        c[i] = ps.c[ps.top_row_source[from]];
    }
    out.active = std::move(active);
    out.c = std::move(c);
    out.blocks.back() = std::move(top);
    out.top_row_source = std::move(src);
    // Lower blocks are unordered sets of constraints; rebuild them in the
    // permuted active order for consistency.
    {
        std::vector<std::vector<Expr>> lower(ps.k_c);
        std::vector<std::vector<Expr>> derivs(n);
        for (int j = 0; j < n; ++j) {
            derivs[j].push_back(out.active[j]);
            for (int k = 1; k <= out.c[j]; ++k) derivs[j].push_back(total_derivative(derivs[j].back()));
        }
        for (int pidx = 0; pidx < ps.k_c; ++pidx)
            for (int j = 0; j < n; ++j) {
                int order = pidx + out.c[j] - ps.k_c;
                if (order < 0) continue;
                lower[pidx].push_back(derivs[j][order]);
            }
        for (int pidx = 0; pidx < ps.k_c; ++pidx) out.blocks[pidx] = std::move(lower[pidx]);
    }

    std::vector<int> lead(out.leading_order.size());
    for (size_t j = 0; j < lead.size(); ++j) lead[j] = ps.leading_order[perm.cols[j]];
    out.leading_order = std::move(lead);
    return out;
}

namespace {

EmbeddedSystem embed_impl(const ProlongedSystem& ps, int r, const std::vector<double>& xi,
                          int generation) {
    int n = ps.n_active();
    if (r > n) throw Error("embed: rank exceeds system size");
    if (int(xi.size()) != n - r) throw Error("embed: xi size must be n - r");

    std::vector<JetVar> leading = ps.leading_vars();
    EmbeddedSystem out;
    out.record.generation = generation;
    out.var_names = ps.var_names;
    out.carried_constraints = ps.constraints();

    std::map<JetVar, Expr> sub;
    int u_base = int(ps.var_names.size());
    int u_serial = 0;
    for (const std::string& name : ps.var_names)
        if (name.size() > 1 && name[0] == 'u' &&
            name.find_first_not_of("0123456789", 1) == std::string::npos)
            ++u_serial;
    for (int i = 0; i < r; ++i) {
        int u_var = u_base + i;
        std::string name = "u" + std::to_string(++u_serial);
        while (std::find(out.var_names.begin(), out.var_names.end(), name) != out.var_names.end())
            name = "_" + name;
        out.var_names.push_back(name);
        out.record.replaced.emplace_back(u_var, leading[i]);
        sub.emplace(leading[i], Expr::jet(u_var, 0));
    }
    for (int i = r; i < n; ++i) {
        out.record.frozen.emplace_back(leading[i], xi[i - r]);
        sub.emplace(leading[i], Expr::constant(xi[i - r]));
    }

    const auto& top = ps.top_block();
    for (int i = 0; i < r; ++i) out.equations.push_back(top[i]);        // f(s, y, z)
    for (int i = 0; i < n; ++i) out.equations.push_back(substitute(top[i], sub));  // F_hat
    return out;
}

}  // namespace

EmbeddedSystem embed_with(const ProlongedSystem& ps, int r, const std::vector<double>& xi,
                          int generation) {
    return embed_impl(ps, r, xi, generation);
}

EmbeddedSystem embed(const ProlongedSystem& ps, int r, std::uint64_t seed, int generation) {
    std::mt19937_64 rng(seed ^ 0xD1B54A32D192ED03ULL);
    std::vector<double> xi(size_t(ps.n_active() - r));
    for (double& v : xi) v = uniform_pm1(rng);
    return embed_impl(ps, r, xi, generation);
}

Point lift_point(const Point& p, const EmbeddingRecord& rec, const ProlongedSystem& sorted_ps) {
    Point out = p;
    int r = int(rec.replaced.size());
    if (r == 0) return out;

    std::vector<Expr> kept(sorted_ps.top_block().begin(), sorted_ps.top_block().begin() + r);
    std::map<JetVar, Expr> freeze;
    for (const auto& [y, xi] : rec.frozen) freeze.emplace(y, Expr::constant(xi));
    for (Expr& e : kept) e = substitute(e, freeze);

    std::vector<JetVar> s_vars;
    for (const auto& [u_var, s] : rec.replaced) s_vars.push_back(s);

    // Direct copy is valid when the point's own leading values already solve
    // the kept rows under the frozen constants; otherwise solve for s.
    bool have_all = true;
    for (JetVar s : s_vars)
        if (!p.has(s)) have_all = false;
    if (have_all) {
        double res = 0.0;
        for (const Expr& e : kept) res = std::max(res, std::abs(evaluate(e, p)));
        if (res <= 1e-8) {
            for (const auto& [u_var, s] : rec.replaced) out.set(JetVar{u_var, 0}, p.at(s));
            return out;
        }
    }

    auto eval_at = [&](const Eigen::VectorXd& s_vals, const Expr& e) {
        Point q = p;
        for (int i = 0; i < r; ++i) q.set(s_vars[i], s_vals(i));
        return evaluate(e, q);
    };
    NewtonProblem prob;
    prob.residual = [&](const Eigen::VectorXd& s_vals) {
        Eigen::VectorXd out_r(r);
        for (int i = 0; i < r; ++i) out_r(i) = eval_at(s_vals, kept[i]);
        return out_r;
    };
    std::vector<std::vector<Expr>> partials(r);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) partials[i].push_back(partial_derivative(kept[i], s_vars[j]));
    prob.jacobian = [&](const Eigen::VectorXd& s_vals) {
        Eigen::MatrixXd m(r, r);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j) m(i, j) = eval_at(s_vals, partials[i][j]);
        return m;
    };

    Eigen::VectorXd s0 = Eigen::VectorXd::Zero(r);
    for (int i = 0; i < r; ++i)
        if (p.has(s_vars[i])) s0(i) = p.at(s_vars[i]);
    Eigen::VectorXd s = newton_refine(prob, s0, 1e-10, 50);
    for (int i = 0; i < r; ++i) out.set(JetVar{rec.replaced[i].first, 0}, s(i));
    return out;
}

std::optional<StructuralSolution> shortcut_duals(const StructuralSolution& sol, int r,
                                                 const ProlongedSystem& pre_embed,
                                                 const EmbeddedSystem& embedded) {
    int n = pre_embed.n_active();
    // Every top-block equation must touch layer X^(k_d - 1).
    for (const Expr& row : pre_embed.top_block()) {
        bool touches = false;
        for (int j = 0; j < int(pre_embed.d.size()) && !touches; ++j) {
            if (pre_embed.d[j] < 1) continue;
            auto jets = jets_of(row);
            if (jets.count(JetVar{j, pre_embed.d[j] - 1})) touches = true;
        }
        if (!touches) return std::nullopt;
    }

    int n_vars = int(embedded.var_names.size());
    SignatureMatrix sigma = signature_of(embedded.equations, n_vars);
    if (!max_matching_weight(sigma)) return std::nullopt;

    StructuralSolution out;
    out.c.assign(size_t(n + r), 1);
    for (int i = 0; i < r; ++i) out.c[i] = 0;
    out.d.assign(size_t(n_vars), 1);
    for (size_t j = 0; j < pre_embed.d.size(); ++j) out.d[j] = pre_embed.d[j];
    // Feasibility of the shortcut against the embedded signature.
    for (int i = 0; i < n + r; ++i)
        for (int j = 0; j < n_vars; ++j)
            if (sigma.at(i, j) && out.d[j] - out.c[i] < *sigma.at(i, j)) return std::nullopt;
    out.delta = 0;
    for (int v : out.d) out.delta += v;
    for (int v : out.c) out.delta -= v;
    (void)sol;
    return out;
}

// ---------------------------------------------------------------------------
// The reduction loop
// ---------------------------------------------------------------------------

namespace {

void extend_point(Point& p, const ProlongedSystem& ps, std::mt19937_64& rng) {
    std::set<JetVar> needed;
    for (const Expr& e : ps.constraints()) collect_jets(e, needed);
    for (const Expr& e : ps.top_block()) collect_jets(e, needed);
    for (JetVar v : ps.leading_vars()) needed.insert(v);
    for (JetVar v : needed)
        if (!p.has(v)) p.set(v, normal(rng));
}

// Newton projection failed (typically because the nearest path crosses the
// singular locus of the variety). Fall back to the witness machinery: the
// critical points of the distance from p to the enlarged variety, keeping
// only smooth-stratum candidates, nearest first.
bool witness_rescue(Point& p, const std::vector<Expr>& constraints, double abstol,
                    std::uint64_t seed) {
    for (const Expr& e : constraints)
        if (!is_polynomial_in_jets(e)) return false;
    PolySystem enlarged = make_poly_system(constraints, p.t);
    for (JetVar v : enlarged.unknowns)
        if (!p.has(v)) return false;
    int n = enlarged.n_unknowns();
    Eigen::VectorXd at_p(n);
    for (int i = 0; i < n; ++i) at_p(i) = p.at(enlarged.unknowns[i]);

    PolySystem lag = lagrange_system(enlarged, at_p);
    TrackResult tracked;
    try {
        tracked = track_all_roots(lag, seed ^ 0xABCDEF12345ULL);
    } catch (const Error&) {
        return false;
    }
    NewtonProblem prob{
        [&](const Eigen::VectorXd& x) { return evaluate_poly(enlarged, x); },
        [&](const Eigen::VectorXd& x) { return jacobian_poly(enlarged, x); }};
    std::vector<Eigen::VectorXd> candidates;
    int best_rank = -1;
    for (const auto& z : tracked.endpoints) {
        bool real = true;
        for (int i = 0; i < z.size(); ++i)
            if (std::abs(z(i).imag()) >= 1e-6) real = false;
        if (!real) continue;
        Eigen::VectorXd x(n);
        for (int i = 0; i < n; ++i) x(i) = z(i).real();
        try {
            x = newton_refine(prob, x, std::min(abstol, 1e-10), 60);
        } catch (const NoConvergenceError&) {
            continue;
        }
        int rank = svd_rank(jacobian_poly(enlarged, x), abstol);
        if (rank > best_rank) {
            best_rank = rank;
            candidates.clear();
        }
        if (rank == best_rank) candidates.push_back(x);
    }
    if (candidates.empty()) return false;
    const Eigen::VectorXd* best = &candidates[0];
    for (const auto& c : candidates)
        if ((c - at_p).norm() < (*best - at_p).norm()) best = &c;
    for (int i = 0; i < n; ++i) p.set(enlarged.unknowns[i], (*best)(i));
    return true;
}

// Pull the lifted point onto the enlarged constraint set so the next rank
// evaluation happens at an on-component point.
void project_point(Point& p, const std::vector<Expr>& constraints, double abstol,
                   std::uint64_t seed) {
    if (constraints.empty()) return;
    std::set<JetVar> vars_set;
    for (const Expr& e : constraints) collect_jets(e, vars_set);
    std::vector<JetVar> vars(vars_set.begin(), vars_set.end());

    auto to_point = [&](const Eigen::VectorXd& x) {
        Point q = p;
        for (size_t i = 0; i < vars.size(); ++i) q.set(vars[i], x(int(i)));
        return q;
    };
    NewtonProblem prob;
    prob.residual = [&](const Eigen::VectorXd& x) {
        Point q = to_point(x);
        Eigen::VectorXd r(constraints.size());
        for (size_t i = 0; i < constraints.size(); ++i) r(int(i)) = evaluate(constraints[i], q);
        return r;
    };
    std::vector<std::vector<Expr>> partials(constraints.size());
    for (size_t i = 0; i < constraints.size(); ++i)
        for (JetVar v : vars) partials[i].push_back(partial_derivative(constraints[i], v));
    prob.jacobian = [&](const Eigen::VectorXd& x) {
        Point q = to_point(x);
        Eigen::MatrixXd m(constraints.size(), vars.size());
        for (size_t i = 0; i < constraints.size(); ++i)
            for (size_t j = 0; j < vars.size(); ++j) m(int(i), int(j)) = evaluate(partials[i][j], q);
        return m;
    };

    Eigen::VectorXd x0(vars.size());
    for (size_t i = 0; i < vars.size(); ++i) x0(int(i)) = p.at(vars[i]);
    Eigen::VectorXd x;
    try {
        x = newton_refine(prob, x0, std::min(abstol, 1e-9), 80);
    } catch (const NoConvergenceError&) {
        try {
            x = newton_refine(prob, x0, abstol, 40);
        } catch (const NoConvergenceError&) {
            if (witness_rescue(p, constraints, abstol, seed)) return;
            throw;
        }
    }
    for (size_t i = 0; i < vars.size(); ++i) p.set(vars[i], x(int(i)));
}

}  // namespace

IreResult ire_loop_from(std::vector<Expr> active, std::vector<std::string> var_names,
                        std::vector<Expr> carried, const Point& p0, const IreOptions& opts) {
    IreResult result;
    result.point = p0;
    bool suspend = opts.suspend_delta_check;
    std::mt19937_64 rng(opts.seed * 0x9E3779B97F4A7C15ULL + 17);

    StructuralSolution duals = solve_assignment(signature_of(active, int(var_names.size())));

    for (int pass = 0;; ++pass) {
        ProlongedSystem ps = prolong_equations(active, duals, var_names, carried);
        extend_point(result.point, ps, rng);
        JacobianMatrix jm = top_jacobian(ps);
        int n = ps.n_active();
        int r = detect_rank(jm, result.point, opts.abstol);
        long delta = duals.delta - long(carried.size());

        if (r == n) {
            result.system = std::move(ps);
            return result;
        }
        if (!suspend && delta - (n - r) < 0) throw NoSolutionError();
        if (int(result.passes.size()) >= opts.max_passes) throw MaxPassesError(opts.max_passes);

        ProlongedSystem sorted = sort_top_block(ps, result.point, r, opts.abstol);
        EmbeddedSystem emb = embed(sorted, r, opts.seed + std::uint64_t(pass) * 7919u, pass);
        result.point = lift_point(result.point, emb.record, sorted);
        {
            std::vector<Expr> proj_set = emb.carried_constraints;
            proj_set.insert(proj_set.end(), emb.equations.begin() + r, emb.equations.end());
            project_point(result.point, proj_set, opts.abstol, opts.seed + std::uint64_t(pass));
        }
        {
            std::vector<double> xi;
            for (const auto& [y, v] : emb.record.frozen) xi.push_back(v);
            result.xi_used.push_back(std::move(xi));
        }

        IrePassLog log;
        log.n = n;
        log.r = r;
        log.delta_before = delta;

        auto sc = shortcut_duals(duals, r, sorted, emb);
        if (sc) {
            duals = *sc;
            log.used_shortcut_duals = true;
        } else {
            duals = solve_assignment(signature_of(emb.equations, int(emb.var_names.size())));
        }
        active = emb.equations;
        var_names = emb.var_names;
        carried = emb.carried_constraints;
        log.delta_after = duals.delta - long(carried.size());
        if (log.delta_after > log.delta_before - (n - r)) {
            suspend = true;
            log.redundancy_suspected = true;
        }
        log.redundancy_suspected = log.redundancy_suspected || opts.suspend_delta_check;
        result.passes.push_back(log);
    }
}

IreResult ire_loop(const DaeSystem& sys, const Point& p, const IreOptions& opts) {
    validate_square(sys);
    return ire_loop_from(sys.equations, sys.variables, {}, p, opts);
}

}  // namespace daeire
