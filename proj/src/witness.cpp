#include "daeire/witness.hpp"

#include <algorithm>
#include <cmath>

#include "daeire/numkernel.hpp"

namespace daeire {

namespace {

using Complex = std::complex<double>;
using VectorXc = Eigen::VectorXcd;
using MatrixXc = Eigen::MatrixXcd;

double uniform01(std::mt19937_64& rng) {
    return double(rng() >> 11) * (1.0 / 9007199254740992.0);
}

double normal(std::mt19937_64& rng) {
    // Box-Muller keeps the stream identical across standard libraries.
    double u1 = 0.0;
    do {
        u1 = uniform01(rng);
    } while (u1 <= 1e-300);
    double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace

PolySystem make_poly_system(const std::vector<Expr>& constraints, double t0) {
    PolySystem sys;
    std::set<JetVar> vars;
    for (const Expr& e : constraints) {
        sys.equations.push_back(fold_time(e, t0));
        collect_jets(e, vars);
    }
    sys.unknowns.assign(vars.begin(), vars.end());
    return sys;
}

void require_polynomial(const PolySystem& sys) {
    for (const Expr& e : sys.equations)
        if (!is_polynomial_in_jets(e))
            throw NonPolynomialError("system is not polynomial in its unknowns");
}

namespace {

int unknown_index(const PolySystem& sys, JetVar v) {
    auto it = std::lower_bound(sys.unknowns.begin(), sys.unknowns.end(), v);
    if (it == sys.unknowns.end() || !(*it == v)) return -1;
    return int(it - sys.unknowns.begin());
}

JetVar fresh_unknown_base(const PolySystem& f) {
    int max_var = -1;
    for (JetVar v : f.unknowns) max_var = std::max(max_var, v.var);
    for (const Expr& e : f.equations)
        for (JetVar v : jets_of(e)) max_var = std::max(max_var, v.var);
    return JetVar{max_var + 1, 0};
}

}  // namespace

PolySystem lagrange_system(const PolySystem& f, const Eigen::VectorXd& a) {
    require_polynomial(f);
    int n = f.n_unknowns();
    int k = f.n_eqs();
    if (a.size() != n) throw Error("random point dimension mismatch");

    JetVar base = fresh_unknown_base(f);
    std::vector<JetVar> lambdas(k);
    for (int j = 0; j < k; ++j) lambdas[j] = JetVar{base.var + j, 0};

    PolySystem g;
    g.unknowns = f.unknowns;
    g.unknowns.insert(g.unknowns.end(), lambdas.begin(), lambdas.end());
    g.equations = f.equations;
    for (int i = 0; i < n; ++i) {
        Expr row = Expr::jet(f.unknowns[i]) - Expr::constant(a(i));
        for (int j = 0; j < k; ++j)
            row = row + Expr::jet(lambdas[j]) * partial_derivative(f.equations[j], f.unknowns[i]);
        g.equations.push_back(row);
    }
    return g;
}

PolySystem penalty_system(const PolySystem& f, const Eigen::VectorXd& a, double beta) {
    require_polynomial(f);
    if (beta <= 0.0) throw Error("penalty factor must be positive");
    int n = f.n_unknowns();
    if (a.size() != n) throw Error("random point dimension mismatch");

    PolySystem g;
    g.unknowns = f.unknowns;
    for (int i = 0; i < n; ++i) {
        Expr row = Expr::jet(f.unknowns[i]) - Expr::constant(a(i));
        Expr grad = Expr::constant(0.0);
        for (const Expr& fj : f.equations) grad = grad + fj * partial_derivative(fj, f.unknowns[i]);
        row = row + Expr::constant(beta) * grad;
        g.equations.push_back(row);
    }
    return g;
}

Eigen::VectorXd evaluate_poly(const PolySystem& sys, const Eigen::VectorXd& x) {
    Eigen::VectorXd r(sys.n_eqs());
    for (int i = 0; i < sys.n_eqs(); ++i)
        r(i) = evaluate_with<double>(sys.equations[i], 0.0, [&](JetVar v) -> std::optional<double> {
            int idx = unknown_index(sys, v);
            if (idx < 0) return std::nullopt;
            return x(idx);
        });
    return r;
}

Eigen::MatrixXd jacobian_poly(const PolySystem& sys, const Eigen::VectorXd& x) {
    Eigen::MatrixXd j(sys.n_eqs(), sys.n_unknowns());
    for (int i = 0; i < sys.n_eqs(); ++i)
        for (int c = 0; c < sys.n_unknowns(); ++c) {
            Expr d = partial_derivative(sys.equations[i], sys.unknowns[c]);
            j(i, c) = evaluate_with<double>(d, 0.0, [&](JetVar v) -> std::optional<double> {
                int idx = unknown_index(sys, v);
                if (idx < 0) return std::nullopt;
                return x(idx);
            });
        }
    return j;
}

// ---------------------------------------------------------------------------
// Homotopy continuation
// ---------------------------------------------------------------------------

namespace {

struct ComplexSystem {
    const PolySystem& sys;

    VectorXc eval(const VectorXc& x) const {
        VectorXc r(sys.n_eqs());
        for (int i = 0; i < sys.n_eqs(); ++i)
            r(i) = evaluate_with<Complex>(sys.equations[i], Complex(0.0),
                                          [&](JetVar v) -> std::optional<Complex> {
                                              int idx = unknown_index(sys, v);
                                              if (idx < 0) return std::nullopt;
                                              return x(idx);
                                          });
        return r;
    }

    MatrixXc jac(const VectorXc& x, const std::vector<std::vector<Expr>>& partials) const {
        MatrixXc j(sys.n_eqs(), sys.n_unknowns());
        for (int i = 0; i < sys.n_eqs(); ++i)
            for (int c = 0; c < sys.n_unknowns(); ++c)
                j(i, c) = evaluate_with<Complex>(partials[i][c], Complex(0.0),
                                                 [&](JetVar v) -> std::optional<Complex> {
                                                     int idx = unknown_index(sys, v);
                                                     if (idx < 0) return std::nullopt;
                                                     return x(idx);
                                                 });
        return j;
    }
};

struct Tracker {
    const ComplexSystem& target;
    const std::vector<std::vector<Expr>>& partials;
    const std::vector<int>& degrees;
    Complex gamma;

    // H(x, tau) = (1 - tau) gamma G(x) + tau F(x), G_i = x_i^{d_i} - 1.
    VectorXc start_eval(const VectorXc& x) const {
        VectorXc g(degrees.size());
        for (size_t i = 0; i < degrees.size(); ++i) {
            Complex p(1.0);
            for (int k = 0; k < degrees[i]; ++k) p *= x(int(i));
            g(int(i)) = p - 1.0;
        }
        return g;
    }

    MatrixXc start_jac(const VectorXc& x) const {
        int n = int(degrees.size());
        MatrixXc j = MatrixXc::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            Complex p(1.0);
            for (int k = 0; k < degrees[i] - 1; ++k) p *= x(i);
            j(i, i) = double(degrees[i]) * p;
        }
        return j;
    }

    VectorXc h(const VectorXc& x, double tau) const {
        return (1.0 - tau) * gamma * start_eval(x) + tau * target.eval(x);
    }

    MatrixXc hx(const VectorXc& x, double tau) const {
        return (1.0 - tau) * gamma * start_jac(x) + tau * target.jac(x, partials);
    }

    VectorXc htau(const VectorXc& x) const { return target.eval(x) - gamma * start_eval(x); }

    bool correct(VectorXc& x, double tau, double tol, int iters) const {
        for (int it = 0; it < iters; ++it) {
            VectorXc r = h(x, tau);
            if (r.norm() <= tol) return true;
            Eigen::PartialPivLU<MatrixXc> lu(hx(x, tau));
            VectorXc step = lu.solve(-r);
            if (!step.allFinite()) return false;
            x += step;
            if (x.norm() > 1e8) return false;
        }
        return h(x, tau).norm() <= tol;
    }

    // Returns true with the endpoint in x, false on failure.
    bool run(VectorXc x, VectorXc& endpoint, std::string& why) const {
        double tau = 0.0;
        double step = 0.1;
        long steps = 0;
        int streak = 0;
        while (tau < 1.0) {
            if (++steps > 10000) {
                why = "exceeded 10000 steps";
                return false;
            }
            double h_now = std::min(step, 1.0 - tau);
            // Euler predictor.
            VectorXc xp = x;
            Eigen::PartialPivLU<MatrixXc> lu(hx(x, tau));
            VectorXc dx = lu.solve(-htau(x));
            if (dx.allFinite()) xp = x + h_now * dx;
            double tau_next = tau + h_now;
            bool final_step = tau_next >= 1.0 - 1e-14;
            double tol = final_step ? 1e-10 : 1e-9;
            if (correct(xp, tau_next, tol, final_step ? 12 : 6) && xp.allFinite() && xp.norm() <= 1e8) {
                x = xp;
                tau = tau_next;
                if (++streak >= 3) {
                    step = std::min(step * 2.0, 0.1);
                    streak = 0;
                }
            } else {
                streak = 0;
                step *= 0.5;
                if (step < 1e-6) {
                    why = "step size underflow";
                    return false;
                }
            }
            if (x.norm() > 1e8) {
                why = "path diverged (||x|| > 1e8)";
                return false;
            }
        }
        endpoint = x;
        return true;
    }
};

bool lex_less(const VectorXc& a, const VectorXc& b) {
    for (int i = 0; i < a.size(); ++i) {
        if (a(i).real() != b(i).real()) return a(i).real() < b(i).real();
        if (a(i).imag() != b(i).imag()) return a(i).imag() < b(i).imag();
    }
    return false;
}

}  // namespace

TrackResult track_all_roots(const PolySystem& sys, std::uint64_t seed) {
    require_polynomial(sys);
    if (sys.n_eqs() != sys.n_unknowns())
        throw Error("homotopy tracking requires a square system");

    int n = sys.n_eqs();
    std::set<JetVar> unknown_set(sys.unknowns.begin(), sys.unknowns.end());
    for (const Expr& e : sys.equations)
        for (JetVar v : jets_of(e))
            if (!unknown_set.count(v)) throw Error("equation references a non-unknown jet variable");

    std::vector<int> degrees(n);
    for (int i = 0; i < n; ++i) {
        auto deg = total_degree(sys.equations[i], unknown_set);
        if (!deg || *deg <= 0) throw Error("homotopy start system needs positive total degrees");
        degrees[i] = *deg;
    }

    std::vector<std::vector<Expr>> partials(n);
    for (int i = 0; i < n; ++i)
        for (JetVar v : sys.unknowns) partials[i].push_back(partial_derivative(sys.equations[i], v));

    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    double theta = 2.0 * M_PI * uniform01(rng);
    ComplexSystem target{sys};
    Tracker tracker{target, partials, degrees, Complex(std::cos(theta), std::sin(theta))};

    TrackResult result;
    std::vector<int> digit(n, 0);
    while (true) {
        VectorXc x0(n);
        for (int i = 0; i < n; ++i) {
            double ang = 2.0 * M_PI * digit[i] / degrees[i];
            x0(i) = Complex(std::cos(ang), std::sin(ang));
        }
        ++result.paths_tracked;
        VectorXc endpoint;
        std::string why;
        if (tracker.run(x0, endpoint, why)) {
            result.endpoints.push_back(endpoint);
        } else {
            result.path_failures.push_back("path " + std::to_string(result.paths_tracked) + ": " + why);
        }
        int pos = n - 1;
        while (pos >= 0) {
            if (++digit[pos] < degrees[pos]) break;
            digit[pos] = 0;
            --pos;
        }
        if (pos < 0) break;
    }

    std::sort(result.endpoints.begin(), result.endpoints.end(), lex_less);
    return result;
}

// ---------------------------------------------------------------------------
// Witness points
// ---------------------------------------------------------------------------

namespace {

NewtonProblem poly_problem(const PolySystem& f) {
    return NewtonProblem{[&f](const Eigen::VectorXd& x) { return evaluate_poly(f, x); },
                         [&f](const Eigen::VectorXd& x) { return jacobian_poly(f, x); }};
}

struct Candidate {
    Eigen::VectorXd x;
};

std::vector<Eigen::VectorXd> refine_real_endpoints(const PolySystem& f, const TrackResult& tracked,
                                                   int keep_dims, double abstol) {
    std::vector<Eigen::VectorXd> out;
    NewtonProblem prob = poly_problem(f);
    for (const auto& z : tracked.endpoints) {
        bool real = true;
        for (int i = 0; i < z.size(); ++i)
            if (std::abs(z(i).imag()) >= 1e-6) {
                real = false;
                break;
            }
        if (!real) continue;
        Eigen::VectorXd x(keep_dims);
        for (int i = 0; i < keep_dims; ++i) x(i) = z(i).real();
        // Refine tightly against f itself (shedding any multiplier
        // coordinates); rank detection downstream needs residuals well below
        // the user tolerance, so aim for 1e-12 and fall back to abstol.
        try {
            x = newton_refine(prob, x, 1e-12, 60);
        } catch (const NoConvergenceError&) {
            try {
                x = newton_refine(prob, x, abstol, 40);
            } catch (const NoConvergenceError&) {
                continue;
            }
        }
        out.push_back(x);
    }
    return out;
}

std::vector<Eigen::VectorXd> dedupe(std::vector<Eigen::VectorXd> pts, double tol) {
    std::sort(pts.begin(), pts.end(), [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        for (int i = 0; i < a.size(); ++i)
            if (a(i) != b(i)) return a(i) < b(i);
        return false;
    });
    std::vector<Eigen::VectorXd> out;
    for (const auto& p : pts) {
        bool dup = false;
        for (const auto& q : out)
            if ((p - q).lpNorm<Eigen::Infinity>() < tol) {
                dup = true;
                break;
            }
        if (!dup) out.push_back(p);
    }
    return out;
}

}  // namespace

bool same_component(const PolySystem& f, const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                    double abstol) {
    if (f.n_eqs() == 0) return true;
    const int kSteps = 64;
    NewtonProblem prob = poly_problem(f);
    Eigen::VectorXd x = p;
    double chord = (q - p).norm();
    if (chord < 1e-10) return true;
    for (int k = 1; k <= kSteps; ++k) {
        Eigen::VectorXd guess = x + (q - p) / double(kSteps);
        Eigen::VectorXd projected;
        try {
            projected = newton_refine(prob, guess, abstol, 25);
        } catch (const NoConvergenceError&) {
            return false;
        }
        // A projected move much larger than the chord step means the walk
        // jumped to a different branch of the variety.
        if ((projected - guess).norm() > 10.0 * chord / double(kSteps) + 10.0 * abstol) return false;
        x = projected;
    }
    return (x - q).norm() <= std::max(1e-4, 20.0 * chord / double(kSteps));
}

WitnessSet witness_points(const PolySystem& f, std::uint64_t seed, double abstol, double beta) {
    require_polynomial(f);
    WitnessSet w;
    w.f = f;
    w.rng_seed = seed;

    int n = f.n_unknowns();
    std::mt19937_64 rng(seed * 0x2545F4914F6CDD1DULL + 0x123456789ULL);
    Eigen::VectorXd a(n);
    for (int i = 0; i < n; ++i) a(i) = normal(rng);

    if (f.n_eqs() == 0) {
        // No constraints: the whole space is one component and the random
        // point itself witnesses it.
        w.points.push_back(a);
        w.residuals.push_back(0.0);
        w.smallest_singular.push_back(0.0);
        w.jacobian_ranks.push_back(0);
        w.component.push_back(0);
        return w;
    }

    auto finish = [&](std::vector<Eigen::VectorXd> pts) {
        std::vector<Eigen::VectorXd> kept;
        for (auto& p : pts) {
            double res = evaluate_poly(f, p).lpNorm<Eigen::Infinity>();
            if (res <= abstol) kept.push_back(p);
        }
        kept = dedupe(std::move(kept), 1e-8);
        for (const auto& p : kept) {
            w.points.push_back(p);
            w.residuals.push_back(evaluate_poly(f, p).lpNorm<Eigen::Infinity>());
            Eigen::MatrixXd j = jacobian_poly(f, p);
            w.smallest_singular.push_back(smallest_singular_value(j));
            w.jacobian_ranks.push_back(svd_rank(j, abstol));
        }
        // Group into connectivity classes; representatives seed components.
        w.component.assign(w.points.size(), -1);
        int next = 0;
        for (size_t i = 0; i < w.points.size(); ++i) {
            if (w.component[i] >= 0) continue;
            w.component[i] = next;
            for (size_t jdx = i + 1; jdx < w.points.size(); ++jdx) {
                if (w.component[jdx] >= 0) continue;
                if (same_component(f, w.points[i], w.points[jdx], abstol)) w.component[jdx] = next;
            }
            ++next;
        }
    };

    int full_rank = std::min(f.n_eqs(), n);
    PolySystem lag = lagrange_system(f, a);
    TrackResult tracked = track_all_roots(lag, seed);
    w.path_failures = tracked.path_failures;
    finish(refine_real_endpoints(f, tracked, n, abstol));

    bool deficient_everywhere = !w.points.empty();
    for (int r : w.jacobian_ranks)
        if (r >= full_rank) deficient_everywhere = false;

    if (w.points.empty() || deficient_everywhere) {
        WitnessSet lagrange_result = w;
        w = WitnessSet{};
        w.f = f;
        w.rng_seed = seed;
        w.used_penalty = true;
        w.beta = beta;
        w.path_failures = lagrange_result.path_failures;
        PolySystem pen = penalty_system(f, a, beta);
        TrackResult tracked2 = track_all_roots(pen, seed + 1);
        for (const auto& m : tracked2.path_failures) w.path_failures.push_back(m);
        finish(refine_real_endpoints(f, tracked2, n, abstol));
        if (w.points.empty()) {
            if (!lagrange_result.points.empty()) return lagrange_result;
            throw EmptyWitnessError("no real witness points from either formulation");
        }
    }
    return w;
}

Membership membership_test(const std::vector<Expr>& f, const WitnessSet& w, double abstol) {
    if (w.points.empty()) throw EmptyWitnessError("membership test needs a nonempty witness set");
    for (const auto& p : w.points) {
        for (const Expr& e : f) {
            double v = evaluate_with<double>(e, 0.0, [&](JetVar var) -> std::optional<double> {
                int idx = unknown_index(w.f, var);
                if (idx < 0) return std::nullopt;
                return p(idx);
            });
            if (std::abs(v) > abstol) return Membership::NotContained;
        }
    }
    return Membership::Contained;
}

}  // namespace daeire
