#include "daeire/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace daeire {

namespace {

// Precompiled top-block solve: symbolic Jacobian and rows are built once.
struct TopSolver {
    const ProlongedSystem& ps;
    JacobianMatrix jm;
    std::vector<JetVar> leading;

    explicit TopSolver(const ProlongedSystem& ps_) : ps(ps_), jm(top_jacobian(ps_)), leading(ps_.leading_vars()) {}

    Eigen::VectorXd solve(const Point& p) const {
        int n = int(leading.size());
        Point q = p;
        for (JetVar v : leading) q.set(v, 0.0);
        Eigen::VectorXd g(n);
        for (int i = 0; i < n; ++i) g(i) = evaluate(ps.top_block()[i], q);
        Eigen::MatrixXd j = evaluate_jacobian(jm, p);
        Eigen::VectorXd v = solve_linear(j, -g);
        // Correction handles rows that are nonlinear in their leading
        // derivatives; for linear rows the first solve is already exact.
        for (int iter = 0; iter < 8; ++iter) {
            for (int i = 0; i < n; ++i) q.set(leading[i], v(i));
            Eigen::VectorXd res(n);
            for (int i = 0; i < n; ++i) res(i) = evaluate(ps.top_block()[i], q);
            if (res.lpNorm<Eigen::Infinity>() <= 1e-10) break;
            Eigen::MatrixXd j2 = evaluate_jacobian(jm, q);
            v += solve_linear(j2, -res);
        }
        return v;
    }
};

// Projection of the state onto the constraint set with minimum-norm Newton.
struct Projector {
    std::vector<Expr> constraints;
    std::vector<JetVar> state;
    std::vector<std::vector<Expr>> partials;

    Projector(const ProlongedSystem& ps) : constraints(ps.constraints()), state(ps.state_vars()) {
        partials.resize(constraints.size());
        for (size_t i = 0; i < constraints.size(); ++i)
            for (JetVar v : state) partials[i].push_back(partial_derivative(constraints[i], v));
    }

    void project(Point& p, double abstol, int max_iter) const {
        if (constraints.empty()) return;
        auto with_state = [&](const Eigen::VectorXd& x) {
            Point q = p;
            for (size_t i = 0; i < state.size(); ++i) q.set(state[i], x(int(i)));
            return q;
        };
        NewtonProblem prob;
        prob.residual = [&](const Eigen::VectorXd& x) {
            Point q = with_state(x);
            Eigen::VectorXd r(constraints.size());
            for (size_t i = 0; i < constraints.size(); ++i) r(int(i)) = evaluate(constraints[i], q);
            return r;
        };
        prob.jacobian = [&](const Eigen::VectorXd& x) {
            Point q = with_state(x);
            Eigen::MatrixXd m(constraints.size(), state.size());
            for (size_t i = 0; i < constraints.size(); ++i)
                for (size_t k = 0; k < state.size(); ++k) m(int(i), int(k)) = evaluate(partials[i][k], q);
            return m;
        };
        Eigen::VectorXd x0(state.size());
        for (size_t i = 0; i < state.size(); ++i) x0(int(i)) = p.at(state[i]);
        Eigen::VectorXd x = newton_refine(prob, x0, abstol, max_iter);
        for (size_t i = 0; i < state.size(); ++i) p.set(state[i], x(int(i)));
    }
};

}  // namespace

Eigen::VectorXd explicit_rhs(const ProlongedSystem& ps, const Point& p) {
    return TopSolver(ps).solve(p);
}

namespace {

struct Stepper {
    const ProlongedSystem& ps;
    const TopSolver& top;
    std::vector<JetVar> state;
    std::map<JetVar, int> state_index;
    std::vector<JetVar> leading;
    std::map<JetVar, int> leading_index;

    Stepper(const ProlongedSystem& ps_, const TopSolver& top_) : ps(ps_), top(top_) {
        state = ps.state_vars();
        for (size_t i = 0; i < state.size(); ++i) state_index[state[i]] = int(i);
        leading = ps.leading_vars();
        for (size_t i = 0; i < leading.size(); ++i) leading_index[leading[i]] = int(i);
    }

    Point to_point(double t, const Eigen::VectorXd& z, const Point& carry) const {
        Point p = carry;
        p.t = t;
        for (size_t i = 0; i < state.size(); ++i) p.set(state[i], z(int(i)));
        return p;
    }

    Eigen::VectorXd rhs(double t, const Eigen::VectorXd& z, const Point& carry) const {
        Point p = to_point(t, z, carry);
        Eigen::VectorXd lead = top.solve(p);
        Eigen::VectorXd dz(state.size());
        for (size_t i = 0; i < state.size(); ++i) {
            JetVar next{state[i].var, state[i].order + 1};
            auto si = state_index.find(next);
            if (si != state_index.end()) {
                dz(int(i)) = z(si->second);
            } else {
                dz(int(i)) = lead(leading_index.at(next));
            }
        }
        return dz;
    }

    Eigen::VectorXd rk4(double t, const Eigen::VectorXd& z, double h, const Point& carry) const {
        Eigen::VectorXd k1 = rhs(t, z, carry);
        Eigen::VectorXd k2 = rhs(t + 0.5 * h, z + 0.5 * h * k1, carry);
        Eigen::VectorXd k3 = rhs(t + 0.5 * h, z + 0.5 * h * k2, carry);
        Eigen::VectorXd k4 = rhs(t + h, z + h * k3, carry);
        return z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    // One accepted step with the step-doubling comparison; splits in half
    // when the estimate exceeds reltol.
    Eigen::VectorXd advance(double t, Eigen::VectorXd z, double h, double reltol, const Point& carry,
                            int depth) const {
        Eigen::VectorXd full = rk4(t, z, h, carry);
        Eigen::VectorXd half = rk4(t + 0.5 * h, rk4(t, z, 0.5 * h, carry), 0.5 * h, carry);
        double err = 0.0;
        for (int i = 0; i < full.size(); ++i)
            err = std::max(err, std::abs(full(i) - half(i)) / std::max(1.0, std::abs(half(i))));
        if (err / 15.0 > reltol && depth < 10) {
            z = advance(t, std::move(z), 0.5 * h, reltol, carry, depth + 1);
            return advance(t + 0.5 * h, std::move(z), 0.5 * h, reltol, carry, depth + 1);
        }
        return half;
    }
};

}  // namespace

Trajectory integrate(const ProlongedSystem& ps, const Point& p0, const SolveConfig& cfg,
                     int component_tag, int n_original_vars) {
    TopSolver top(ps);
    Projector projector(ps);
    Stepper stepper(ps, top);

    Trajectory traj;
    traj.component_tag = component_tag;
    for (int j = 0; j < n_original_vars; ++j) traj.variables.push_back(ps.var_names[j]);

    Point carry = p0;
    carry.t = cfg.t0;
    Eigen::VectorXd z(stepper.state.size());
    for (size_t i = 0; i < stepper.state.size(); ++i) z(int(i)) = p0.at(stepper.state[i]);

    double t = cfg.t0;
    const double h = cfg.step;
    while (true) {
        Point p = stepper.to_point(t, z, carry);
        try {
            projector.project(p, cfg.abstol, cfg.newton_max_iter);
        } catch (const NoConvergenceError&) {
            traj.aborted = true;
            traj.abort_time = t;
            return traj;
        }
        for (size_t i = 0; i < stepper.state.size(); ++i) z(int(i)) = p.at(stepper.state[i]);

        Eigen::VectorXd lead;
        try {
            lead = top.solve(p);
        } catch (const SingularMatrixError&) {
            traj.aborted = true;
            traj.abort_time = t;
            return traj;
        }
        std::vector<double> row(n_original_vars);
        for (int j = 0; j < n_original_vars; ++j) {
            JetVar v{j, 0};
            if (ps.d[j] > 0)
                row[j] = p.at(v);
            else
                row[j] = lead(int(std::find(stepper.leading.begin(), stepper.leading.end(), v) -
                                stepper.leading.begin()));
        }
        traj.times.push_back(t);
        traj.states.push_back(std::move(row));

        if (t >= cfg.t_end - 1e-12) break;
        double hs = std::min(h, cfg.t_end - t);
        try {
            z = stepper.advance(t, z, hs, cfg.reltol, carry, 0);
        } catch (const SingularMatrixError&) {
            traj.aborted = true;
            traj.abort_time = t;
            return traj;
        }
        t += hs;
    }
    return traj;
}

namespace {

double normal_from(std::mt19937_64& rng) {
    double u1 = 0.0;
    do {
        u1 = double(rng() >> 11) * (1.0 / 9007199254740992.0);
    } while (u1 <= 1e-300);
    double u2 = double(rng() >> 11) * (1.0 / 9007199254740992.0);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace

GlobalSolveResult global_solve(const DaeSystem& sys, const SolveConfig& cfg,
                               const std::optional<Point>& initial) {
    validate_square(sys);
    GlobalSolveResult out;
    out.sigma = signature_matrix(sys);
    out.structural = solve_assignment(out.sigma);
    ProlongedSystem ps0 = prolong(sys, out.structural);
    std::vector<Expr> constraints = ps0.constraints();

    std::vector<Point> seeds_points;
    bool used_penalty = false;

    if (initial) {
        Point p = *initial;
        p.t = cfg.t0;
        seeds_points.push_back(p);
    } else {
        PolySystem poly = make_poly_system(constraints, cfg.t0);
        require_polynomial(poly);
        WitnessSet w = witness_points(poly, cfg.seed, cfg.abstol, cfg.beta);
        used_penalty = w.used_penalty;
        int n_classes = w.points.empty() ? 0 : 1 + *std::max_element(w.component.begin(), w.component.end());
        for (int cls = 0; cls < n_classes; ++cls) {
            for (int i = 0; i < w.n_points(); ++i) {
                if (w.component[i] != cls) continue;
                Point p;
                p.t = cfg.t0;
                for (int k = 0; k < int(w.f.unknowns.size()); ++k) p.set(w.f.unknowns[k], w.points[i](k));
                seeds_points.push_back(p);
                break;
            }
        }
        out.witness = std::move(w);
    }

    // Fill any state coordinate the constraints do not mention so the
    // integration start is fully determined (and reproducible).
    std::mt19937_64 rng(cfg.seed * 0x9E3779B97F4A7C15ULL + 99991);
    for (Point& p : seeds_points)
        for (JetVar v : ps0.state_vars())
            if (!p.has(v)) p.set(v, normal_from(rng));

    Projector initial_projector(ps0);
    int tag = 0;
    for (const Point& p : seeds_points) {
        ComponentResult comp;
        comp.component_tag = tag;
        try {
            Point start = p;
            start.t = cfg.t0;
            if (initial) initial_projector.project(start, cfg.abstol, 50);
            IreOptions opts;
            opts.abstol = cfg.abstol;
            opts.seed = cfg.seed;
            opts.max_passes = cfg.max_passes;
            opts.suspend_delta_check = used_penalty;
            IreResult red = ire_loop_from(sys.equations, sys.variables, {}, start, opts);
            comp.passes = red.passes;
            comp.xi_used = red.xi_used;
            comp.reduced = red.system;
            Trajectory traj = integrate(red.system, red.point, cfg, tag, sys.n_vars());
            if (traj.aborted)
                comp.error = "integration hit a singular state at t = " + std::to_string(traj.abort_time);
            if (!traj.times.empty() || !traj.aborted) comp.trajectory = std::move(traj);
        } catch (const Error& e) {
            comp.error = e.what();
        }
        if (comp.trajectory) out.trajectories.push_back(*comp.trajectory);
        out.components.push_back(std::move(comp));
        ++tag;
    }
    return out;
}

}  // namespace daeire
