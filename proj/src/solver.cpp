#include "hypermax/solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

namespace hypermax {

std::vector<QuantumGraph> ConstraintSet::graphs() const {
    std::vector<QuantumGraph> out;
    out.reserve(constraints.size());
    for (const auto& c : constraints) out.push_back(c.graph);
    return out;
}

std::vector<double> ConstraintSet::targets() const {
    std::vector<double> out;
    out.reserve(constraints.size());
    for (const auto& c : constraints) out.push_back(c.target);
    return out;
}

bool ConstraintSet::all_linear() const {
    for (const auto& c : constraints)
        if (!c.graph.all_constituents_linear()) return false;
    return true;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Portable uniform in [0,1): top 53 bits of the generator output.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Euclidean projection onto { pi >= floor, sum pi = 1 }.
void project_simplex_floor(std::vector<double>& pi, double floor) {
    const int m = static_cast<int>(pi.size());
    const double budget = 1.0 - floor * m;
    if (budget <= 0.0) raise(ErrorCode::ValidationError, "pi floor too large for block count");
    std::vector<double> v(pi.size());
    for (std::size_t i = 0; i < pi.size(); ++i) v[i] = pi[i] - floor;
    std::vector<double> u = v;
    std::sort(u.begin(), u.end(), std::greater<>());
    double cum = 0.0, tau = 0.0;
    for (int j = 0; j < m; ++j) {
        cum += u[static_cast<std::size_t>(j)];
        const double t = (cum - budget) / (j + 1);
        if (j + 1 == m || u[static_cast<std::size_t>(j + 1)] <= t) {
            tau = t;
            break;
        }
    }
    for (std::size_t i = 0; i < pi.size(); ++i)
        pi[i] = std::max(v[i] - tau, 0.0) + floor;
    // squeeze out accumulated rounding so the simplex check stays exact
    double sum = 0.0;
    for (double p : pi) sum += p;
    const std::size_t top =
        static_cast<std::size_t>(std::max_element(pi.begin(), pi.end()) - pi.begin());
    pi[top] += 1.0 - sum;
}

struct ProblemContext {
    Signature sig;
    int m = 0;
    SolverConfig cfg;
    const ObjectiveConfig* obj = nullptr;
    std::vector<QuantumGraph> graphs;
    std::vector<double> targets;

    // x layout: per-relation canonical A values, then m-1 reduced pi coords
    std::vector<std::vector<std::vector<int>>> canon;              // [k][ci] -> multi-index
    std::vector<std::vector<std::vector<std::size_t>>> orbit_flat; // [k][ci] -> flat offsets
    std::vector<std::size_t> a_offset;
    std::size_t pi_offset = 0;
    std::size_t n_x = 0;
    double box_lo = 0.0;
    double box_hi = 1.0;
    bool bounded = true;
    std::optional<std::vector<double>> fixed_pi;

    void build(const Signature& s, const SolverConfig& config) {
        sig = s;
        cfg = config;
        m = cfg.m;
        canon.clear();
        orbit_flat.clear();
        a_offset.clear();
        std::size_t offset = 0;
        std::vector<double> probe_pi(static_cast<std::size_t>(m), 1.0 / m);
        std::vector<std::vector<double>> probe_arrays;
        for (int k = 0; k < sig.relation_count(); ++k) {
            std::size_t size = 1;
            for (int i = 0; i < sig.arity(k); ++i) size *= static_cast<std::size_t>(m);
            probe_arrays.emplace_back(size, 0.0);
        }
        StepFunction probe = StepFunction::raw(sig, probe_pi, probe_arrays, Mode::RealValued);
        for (int k = 0; k < sig.relation_count(); ++k) {
            a_offset.push_back(offset);
            canon.push_back(canonical_multi_indices(m, sig.arity(k)));
            std::vector<std::vector<std::size_t>> flats;
            for (const auto& c : canon.back()) {
                std::vector<std::size_t> positions;
                for (const auto& o : index_orbit(c)) positions.push_back(probe.flat_index(k, o));
                flats.push_back(std::move(positions));
            }
            orbit_flat.push_back(std::move(flats));
            offset += canon.back().size();
        }
        pi_offset = offset;
        n_x = offset + static_cast<std::size_t>(m - 1);

        bounded = cfg.mode != Mode::RealValued;
        box_lo = cfg.interior_eps;
        box_hi = 1.0 - cfg.interior_eps;
        if (cfg.fixed_pi) {
            if (static_cast<int>(cfg.fixed_pi->size()) != m)
                raise(ErrorCode::ValidationError, "fixed pi has wrong length");
            fixed_pi = *cfg.fixed_pi;
            project_simplex_floor(*fixed_pi, cfg.pi_floor);
        }
    }

    std::vector<double> full_pi(const std::vector<double>& x) const {
        std::vector<double> pi(static_cast<std::size_t>(m));
        double sum = 0.0;
        for (int i = 0; i + 1 < m; ++i) {
            pi[static_cast<std::size_t>(i)] = x[pi_offset + static_cast<std::size_t>(i)];
            sum += pi[static_cast<std::size_t>(i)];
        }
        pi[static_cast<std::size_t>(m - 1)] = 1.0 - sum;
        return pi;
    }

    StepFunction unpack(const std::vector<double>& x) const {
        std::vector<std::vector<double>> arrays;
        arrays.reserve(static_cast<std::size_t>(sig.relation_count()));
        for (int k = 0; k < sig.relation_count(); ++k) {
            std::size_t size = 1;
            for (int i = 0; i < sig.arity(k); ++i) size *= static_cast<std::size_t>(m);
            std::vector<double> arr(size);
            const auto& flats = orbit_flat[static_cast<std::size_t>(k)];
            for (std::size_t ci = 0; ci < flats.size(); ++ci) {
                const double v = x[a_offset[static_cast<std::size_t>(k)] + ci];
                for (std::size_t pos : flats[ci]) arr[pos] = v;
            }
            arrays.push_back(std::move(arr));
        }
        return StepFunction::raw(sig, full_pi(x), std::move(arrays), cfg.mode);
    }

    std::vector<double> pack(const StepFunction& w) const {
        if (w.block_count() != m)
            raise(ErrorCode::ValidationError, "seed step function has wrong block count");
        if (w.signature() != sig)
            raise(ErrorCode::ValidationError, "seed step function has wrong signature");
        std::vector<double> x(n_x, 0.0);
        for (int k = 0; k < sig.relation_count(); ++k) {
            const auto& cs = canon[static_cast<std::size_t>(k)];
            for (std::size_t ci = 0; ci < cs.size(); ++ci)
                x[a_offset[static_cast<std::size_t>(k)] + ci] = w.at(k, cs[ci]);
        }
        for (int i = 0; i + 1 < m; ++i)
            x[pi_offset + static_cast<std::size_t>(i)] = w.pi()[static_cast<std::size_t>(i)];
        return x;
    }

    void project(std::vector<double>& x) const {
        if (bounded)
            for (std::size_t i = 0; i < pi_offset; ++i) x[i] = std::clamp(x[i], box_lo, box_hi);
        std::vector<double> pi = fixed_pi ? *fixed_pi : full_pi(x);
        if (!fixed_pi) project_simplex_floor(pi, cfg.pi_floor);
        for (int i = 0; i + 1 < m; ++i)
            x[pi_offset + static_cast<std::size_t>(i)] = pi[static_cast<std::size_t>(i)];
    }

    void mask_fixed_pi(std::vector<double>& g) const {
        if (!fixed_pi) return;
        for (std::size_t i = pi_offset; i < n_x; ++i) g[i] = 0.0;
    }
};

struct ValueEval {
    double objective = 0.0;
    std::vector<double> t;
    double augmented = 0.0;
};

ValueEval eval_value(const ProblemContext& ctx, const std::vector<double>& x,
                     const std::vector<double>& beta, double mu) {
    const StepFunction w = ctx.unpack(x);
    ValueEval e;
    e.objective = objective_value(*ctx.obj, w);
    e.t = marginal(ctx.graphs, w);
    e.augmented = e.objective;
    for (std::size_t i = 0; i < e.t.size(); ++i) {
        const double c = e.t[i] - ctx.targets[i];
        e.augmented += -beta[i] * c + 0.5 * mu * c * c;
    }
    return e;
}

std::vector<double> eval_gradient(const ProblemContext& ctx, const std::vector<double>& x,
                                  const std::vector<double>& beta, double mu,
                                  const ValueEval& at) {
    const StepFunction w = ctx.unpack(x);
    std::vector<double> g = objective_gradient(*ctx.obj, w).flatten();
    for (std::size_t i = 0; i < ctx.graphs.size(); ++i) {
        const double c = at.t[i] - ctx.targets[i];
        const double factor = mu * c - beta[i];
        if (factor == 0.0) continue;
        const std::vector<double> gi = density_gradient(ctx.graphs[i], w).flatten();
        for (std::size_t j = 0; j < g.size(); ++j) g[j] += factor * gi[j];
    }
    ctx.mask_fixed_pi(g);
    return g;
}

struct InnerResult {
    std::vector<double> x;
    ValueEval value;
    double pg_norm = 0.0;
    int iterations = 0;
};

double projected_gradient_norm(const ProblemContext& ctx, const std::vector<double>& x,
                               const std::vector<double>& g) {
    std::vector<double> xs(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) xs[i] = x[i] - g[i];
    ctx.project(xs);
    double norm2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - xs[i];
        norm2 += d * d;
    }
    return std::sqrt(norm2);
}

// Projected gradient descent with Barzilai-Borwein step initialization and
// Armijo backtracking (halving, c = 1e-4).
InnerResult inner_minimize(const ProblemContext& ctx, std::vector<double> x,
                           const std::vector<double>& beta, double mu, double tol,
                           int max_iterations) {
    ctx.project(x);
    ValueEval fx = eval_value(ctx, x, beta, mu);
    std::vector<double> g = eval_gradient(ctx, x, beta, mu, fx);

    double gnorm2 = 0.0;
    for (double v : g) gnorm2 += v * v;
    double step = 1.0 / std::max(1.0, std::sqrt(gnorm2));

    InnerResult res;
    res.pg_norm = projected_gradient_norm(ctx, x, g);
    int iter = 0;
    int flat_steps = 0;
    std::vector<double> xc(x.size()), s(x.size()), y(x.size());
    while (iter < max_iterations && res.pg_norm > tol) {
        ++iter;
        double t = step;
        ValueEval fc;
        bool stalled = false;
        while (true) {
            for (std::size_t i = 0; i < x.size(); ++i) xc[i] = x[i] - t * g[i];
            ctx.project(xc);
            double dir = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) dir += g[i] * (xc[i] - x[i]);
            fc = eval_value(ctx, xc, beta, mu);
            if (fc.augmented <= fx.augmented + 1e-4 * dir) break;
            t *= 0.5;
            if (t < 1e-18) {
                stalled = true;
                break;
            }
        }
        if (stalled) break;

        for (std::size_t i = 0; i < x.size(); ++i) s[i] = xc[i] - x[i];
        const double decrease = fx.augmented - fc.augmented;
        x.swap(xc);
        fx = fc;
        std::vector<double> gn = eval_gradient(ctx, x, beta, mu, fx);
        double sy = 0.0, ss = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            y[i] = gn[i] - g[i];
            sy += s[i] * y[i];
            ss += s[i] * s[i];
        }
        g.swap(gn);
        step = (sy > 1e-300) ? std::clamp(ss / sy, 1e-12, 1e6) : std::min(step * 2.0, 1e6);
        res.pg_norm = projected_gradient_norm(ctx, x, g);
        if (decrease <= 1e-15 * (1.0 + std::abs(fx.augmented))) {
            if (++flat_steps >= 30) break;
        } else {
            flat_steps = 0;
        }
    }
    res.x = std::move(x);
    res.value = fx;
    res.iterations = iter;
    return res;
}

struct RunResult {
    std::vector<double> x;
    std::vector<double> beta;
    double objective = 0.0;
    double constraint_norm = std::numeric_limits<double>::infinity();
    double pg_norm = std::numeric_limits<double>::infinity();
    bool feasible = false;
    bool converged = false;
    long long iterations = 0;
};

// Full KKT residual [grad f - sum beta grad t ; t - u] and the constraint
// gradients at x.
void kkt_system_residual(const ProblemContext& ctx, const std::vector<double>& x,
                         const std::vector<double>& beta, std::vector<double>& residual,
                         std::vector<std::vector<double>>* constraint_grads = nullptr) {
    const StepFunction w = ctx.unpack(x);
    std::vector<double> g = objective_gradient(*ctx.obj, w).flatten();
    const std::vector<double> t = marginal(ctx.graphs, w);
    if (constraint_grads) constraint_grads->clear();
    for (std::size_t i = 0; i < ctx.graphs.size(); ++i) {
        std::vector<double> gi = density_gradient(ctx.graphs[i], w).flatten();
        for (std::size_t j = 0; j < g.size(); ++j) g[j] -= beta[i] * gi[j];
        if (constraint_grads) constraint_grads->push_back(std::move(gi));
    }
    ctx.mask_fixed_pi(g);
    residual.assign(ctx.n_x + ctx.graphs.size(), 0.0);
    std::copy(g.begin(), g.end(), residual.begin());
    for (std::size_t i = 0; i < ctx.graphs.size(); ++i)
        residual[ctx.n_x + i] = t[i] - ctx.targets[i];
}

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// Gauss-Newton iteration on the stationarity + feasibility equations. The
// value-based inner loop floors near sqrt(machine eps); this drives the
// analytically evaluated residuals to ~1e-13. Minimal-norm steps (SVD
// cutoff) handle the singular directions of non-isolated solution
// families. Jacobian columns in x by finite differences, in beta exactly.
bool newton_polish(const ProblemContext& ctx, std::vector<double>& x,
                   std::vector<double>& beta) {
    const std::size_t n = ctx.n_x;
    const std::size_t q = ctx.graphs.size();
    std::vector<double> residual;
    std::vector<std::vector<double>> cgrads;
    kkt_system_residual(ctx, x, beta, residual, &cgrads);
    double phi = norm2(residual);
    bool improved_any = false;

    for (int iter = 0; iter < 40; ++iter) {
        if (phi < 1e-14) break;
        Eigen::MatrixXd jac(static_cast<Eigen::Index>(n + q), static_cast<Eigen::Index>(n + q));
        std::vector<double> shifted;
        std::vector<double> xp;
        for (std::size_t j = 0; j < n; ++j) {
            double h = 1e-6 * std::max(1.0, std::abs(x[j]));
            // difference into the box so kernel domains stay respected
            if (ctx.bounded && j < ctx.pi_offset && x[j] + h > ctx.box_hi) h = -h;
            xp = x;
            xp[j] += h;
            kkt_system_residual(ctx, xp, beta, shifted);
            for (std::size_t i = 0; i < n + q; ++i)
                jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    (shifted[i] - residual[i]) / h;
        }
        for (std::size_t bj = 0; bj < q; ++bj) {
            for (std::size_t i = 0; i < n; ++i)
                jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n + bj)) =
                    -cgrads[bj][i];
            for (std::size_t i = 0; i < q; ++i)
                jac(static_cast<Eigen::Index>(n + i), static_cast<Eigen::Index>(n + bj)) = 0.0;
        }
        Eigen::VectorXd rhs(static_cast<Eigen::Index>(n + q));
        for (std::size_t i = 0; i < n + q; ++i) rhs(static_cast<Eigen::Index>(i)) = -residual[i];
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac, Eigen::ComputeThinU | Eigen::ComputeThinV);
        svd.setThreshold(1e-10);
        const Eigen::VectorXd step = svd.solve(rhs);

        bool accepted = false;
        double scale = 1.0;
        std::vector<double> x_new(n), beta_new(q), res_new;
        for (int back = 0; back < 25; ++back) {
            for (std::size_t j = 0; j < n; ++j)
                x_new[j] = x[j] + scale * step(static_cast<Eigen::Index>(j));
            ctx.project(x_new);
            for (std::size_t i = 0; i < q; ++i)
                beta_new[i] = beta[i] + scale * step(static_cast<Eigen::Index>(n + i));
            kkt_system_residual(ctx, x_new, beta_new, res_new, &cgrads);
            const double phi_new = norm2(res_new);
            if (phi_new < phi * (1.0 - 1e-4) || phi_new < 1e-14) {
                x = x_new;
                beta = beta_new;
                residual = res_new;
                phi = phi_new;
                accepted = true;
                improved_any = true;
                break;
            }
            scale *= 0.5;
        }
        if (!accepted) break;
    }
    return improved_any;
}

std::vector<double> random_init(const ProblemContext& ctx, std::uint64_t restart_seed) {
    std::mt19937_64 rng(restart_seed);
    std::vector<double> x(ctx.n_x, 0.0);
    for (std::size_t i = 0; i < ctx.pi_offset; ++i) {
        const double u = uniform01(rng);
        x[i] = ctx.bounded ? 0.2 + 0.6 * u : u - 0.5;
    }
    // Dirichlet(1,..,1) via normalized exponential gaps
    std::vector<double> pi(static_cast<std::size_t>(ctx.m));
    double total = 0.0;
    for (auto& p : pi) {
        p = -std::log(std::max(uniform01(rng), 1e-300));
        total += p;
    }
    for (auto& p : pi) p /= total;
    for (int i = 0; i + 1 < ctx.m; ++i)
        x[ctx.pi_offset + static_cast<std::size_t>(i)] = pi[static_cast<std::size_t>(i)];
    ctx.project(x);
    return x;
}

// The augmented Lagrangian can develop spurious interior local minima at
// symmetric (for instance constant) step functions where the constraint
// gradients degenerate; a first-order inner solver cannot leave them. When
// the constraint norm stalls there, the run re-seeds the inner iterate
// (jitter or a fresh draw) while keeping the accumulated multipliers,
// whose growth eventually removes the trap's advantage.
RunResult augmented_lagrangian_run(const ProblemContext& ctx, std::vector<double> x0,
                                   std::uint64_t recovery_seed,
                                   const std::vector<double>& beta0) {
    const auto& cfg = ctx.cfg;
    RunResult run;
    std::vector<double> beta =
        beta0.size() == ctx.graphs.size() ? beta0 : std::vector<double>(ctx.graphs.size(), 0.0);
    double mu = cfg.penalty.mu0;
    std::vector<double> x = std::move(x0);
    ctx.project(x);
    std::mt19937_64 recovery_rng(recovery_seed);

    double prev_cnorm = std::numeric_limits<double>::infinity();
    int stall_count = 0;
    int recoveries = 0;
    for (int outer = 0; outer < cfg.penalty.max_outer; ++outer) {
        double tol_k = cfg.inner_tol;
        if (prev_cnorm > 100.0 * cfg.constraint_tol)
            tol_k = std::max(cfg.inner_tol, std::min(1e-3, 0.05 * prev_cnorm));
        InnerResult inner =
            inner_minimize(ctx, std::move(x), beta, mu, tol_k, cfg.max_inner_iterations);
        x = std::move(inner.x);
        run.iterations += inner.iterations;

        double cnorm = 0.0;
        for (std::size_t i = 0; i < ctx.graphs.size(); ++i)
            cnorm = std::max(cnorm, std::abs(inner.value.t[i] - ctx.targets[i]));
        for (std::size_t i = 0; i < ctx.graphs.size(); ++i)
            beta[i] -= mu * (inner.value.t[i] - ctx.targets[i]);

        run.objective = inner.value.objective;
        run.constraint_norm = cnorm;
        run.pg_norm = inner.pg_norm;

#ifdef HYPERMAX_SOLVER_TRACE
        std::fprintf(stderr, "outer %d mu %.1e cnorm %.3e pg %.3e tol %.1e iters %d obj %.6f\n",
                     outer, mu, cnorm, inner.pg_norm, tol_k, inner.iterations,
                     inner.value.objective);
#endif

        // Near-converged iterates switch to the Gauss-Newton polish on the
        // KKT equations, which reaches tolerances the value-based descent
        // cannot resolve in double precision. Acceptance is on the raw
        // stationarity residual, so boundary-pinned degenerate iterates
        // (small projected gradient, large true residual) never pass.
        if (cnorm <= std::max(1e-6, 100.0 * cfg.constraint_tol) && inner.pg_norm <= 1e-4) {
            if (newton_polish(ctx, x, beta)) {
                std::vector<double> residual;
                kkt_system_residual(ctx, x, beta, residual);
                double kkt_norm2 = 0.0;
                cnorm = 0.0;
                for (std::size_t i = 0; i < ctx.n_x; ++i) kkt_norm2 += residual[i] * residual[i];
                for (std::size_t i = 0; i < ctx.graphs.size(); ++i)
                    cnorm = std::max(cnorm, std::abs(residual[ctx.n_x + i]));
                const StepFunction w = ctx.unpack(x);
                run.objective = objective_value(*ctx.obj, w);
                run.constraint_norm = cnorm;
                run.pg_norm = std::sqrt(kkt_norm2);
#ifdef HYPERMAX_SOLVER_TRACE
                std::fprintf(stderr, "  polish cnorm %.3e kkt %.3e obj %.6f\n", cnorm,
                             run.pg_norm, run.objective);
#endif
                if (cnorm <= cfg.constraint_tol && run.pg_norm <= 10.0 * cfg.inner_tol) {
                    run.converged = true;
                    break;
                }
            }
        }

        const bool stalled = cnorm > 0.9 * prev_cnorm && cnorm > cfg.constraint_tol;
        if (stalled) ++stall_count;
        else stall_count = 0;

        if (stall_count >= 2 && recoveries < 8) {
            ++recoveries;
            stall_count = 0;
            if (recoveries % 2 == 1) {
                // jitter around the stalled iterate
                const double amp = std::min(0.25, std::max(0.02, 10.0 * cnorm));
                for (std::size_t i = 0; i < x.size(); ++i)
                    x[i] += amp * (2.0 * uniform01(recovery_rng) - 1.0);
            } else {
                x = random_init(ctx, recovery_rng());
            }
            ctx.project(x);
            // a well-conditioned subproblem matters more than penalty
            // pressure right after a re-seed; beta keeps the history
            mu = std::min(mu, 1e4);
            prev_cnorm = std::numeric_limits<double>::infinity();
            continue;
        }

        // Growing mu while stalled only ruins the inner conditioning; the
        // multiplier updates do the work once feasibility is near.
        if (!stalled && cnorm > 0.25 * prev_cnorm && cnorm > 100.0 * cfg.constraint_tol)
            mu = std::min(mu * cfg.penalty.growth, cfg.penalty.mu_max);
        if (cnorm <= std::max(100.0 * cfg.constraint_tol, 1e-8)) mu = std::min(mu, 1e3);
        prev_cnorm = cnorm;
    }
    run.feasible = run.constraint_norm <= cfg.constraint_tol;
    run.x = std::move(x);
    run.beta = std::move(beta);
    return run;
}


void validate_problem(const ConstraintSet& cs, const SolverConfig& cfg) {
    if (cfg.m < 1) raise(ErrorCode::ValidationError, "block count must be >= 1");
    if (cfg.inner_tol <= 0 || cfg.constraint_tol <= 0)
        raise(ErrorCode::ValidationError, "tolerances must be positive");
    if (cfg.interior_eps <= 0 || cfg.interior_eps >= 0.5)
        raise(ErrorCode::ValidationError, "interior box epsilon must lie in (0, 0.5)");
    for (const auto& c : cs.constraints) {
        if (!std::isfinite(c.target))
            raise(ErrorCode::ValidationError, "constraint target must be finite");
        if (c.graph.sig != cs.sig)
            raise(ErrorCode::ArityMismatch, "constraint signature does not match set signature");
    }
}

} // namespace

SolveReport solve(const ConstraintSet& cs, const SolverConfig& cfg, const ObjectiveConfig& obj,
                  const std::vector<StepFunction>& seed_points,
                  const std::vector<double>& seed_beta) {
    validate_problem(cs, cfg);
    ProblemContext ctx;
    ctx.build(cs.sig, cfg);
    ctx.obj = &obj;
    ctx.graphs = cs.graphs();
    ctx.targets = cs.targets();

    const int total_restarts = static_cast<int>(seed_points.size()) + cfg.restarts;
    if (total_restarts < 1) raise(ErrorCode::ValidationError, "restart count must be >= 1");

    std::vector<RunResult> runs(static_cast<std::size_t>(total_restarts));
    auto run_restart = [&](int r) {
        std::vector<double> x0;
        const bool seeded = r < static_cast<int>(seed_points.size());
        if (seeded)
            x0 = ctx.pack(seed_points[static_cast<std::size_t>(r)]);
        else
            x0 = random_init(ctx, splitmix64(cfg.seed ^ (0x5851f42d4c957f2dull *
                                                          static_cast<std::uint64_t>(r + 1))));
        runs[static_cast<std::size_t>(r)] = augmented_lagrangian_run(
            ctx, std::move(x0),
            splitmix64(cfg.seed ^ (0x8f1bbcdcbfa53e0bull * static_cast<std::uint64_t>(r + 1))),
            seeded ? seed_beta : std::vector<double>{});
    };

    const int threads = std::max(1, cfg.threads);
    if (threads == 1 || total_restarts == 1) {
        for (int r = 0; r < total_restarts; ++r) run_restart(r);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        const int workers = std::min(threads, total_restarts);
        pool.reserve(static_cast<std::size_t>(workers));
        for (int t = 0; t < workers; ++t)
            pool.emplace_back([&] {
                while (true) {
                    const int r = next.fetch_add(1);
                    if (r >= total_restarts) break;
                    run_restart(r);
                }
            });
        for (auto& t : pool) t.join();
    }

    SolveReport report;
    report.config = cfg;
    report.constraints_all_linear = cs.all_linear();
    report.underparameterized =
        step_parameter_count(cs.sig, cfg.m) < static_cast<long long>(cs.size());

    // Cluster feasible runs by canonical form up to L1 tolerance 1e-6.
    struct Cluster {
        Solution sol;
    };
    std::vector<Cluster> clusters;
    for (const RunResult& run : runs) {
        report.inner_iterations += run.iterations;
        if (!run.feasible) continue;
        ++report.feasible_restarts;
        Solution cand;
        cand.w = ctx.unpack(run.x).canonical_block_order();
        cand.objective = run.objective;
        cand.beta = run.beta;
        cand.constraint_residual = run.constraint_norm;
        cand.converged = run.converged;
        bool merged = false;
        for (Cluster& cl : clusters) {
            if (l1_distance_aligned(cl.sol.w, cand.w) <= 1e-6) {
                // preference: converged, then (on objective ties) the
                // representation farthest from the pi floor -- degenerate
                // near-empty blocks carry meaningless KKT certificates
                const bool better = [&] {
                    if (cand.converged != cl.sol.converged) return cand.converged;
                    if (std::abs(cand.objective - cl.sol.objective) <= 1e-8) {
                        const double cand_min =
                            *std::min_element(cand.w.pi().begin(), cand.w.pi().end());
                        const double have_min =
                            *std::min_element(cl.sol.w.pi().begin(), cl.sol.w.pi().end());
                        if (cand_min != have_min) return cand_min > have_min;
                    }
                    return cand.objective < cl.sol.objective;
                }();
                if (better) cl.sol = cand;
                merged = true;
                break;
            }
        }
        if (!merged) clusters.push_back(Cluster{std::move(cand)});
    }
    // non-converged clusters are reported only when nothing converged
    const bool any_cluster_converged =
        std::any_of(clusters.begin(), clusters.end(),
                    [](const Cluster& cl) { return cl.sol.converged; });
    if (any_cluster_converged)
        clusters.erase(std::remove_if(clusters.begin(), clusters.end(),
                                      [](const Cluster& cl) { return !cl.sol.converged; }),
                       clusters.end());
    if (clusters.empty())
        raise(ErrorCode::Infeasible, "no restart reached the constraint tolerance");

    for (Cluster& cl : clusters) {
        cl.sol.kkt_residual = kkt_residual(cl.sol.w, cl.sol.beta, cs, obj);
        cl.sol.jacobian_rank = jacobian(ctx.graphs, cl.sol.w).rank;
        report.solutions.push_back(std::move(cl.sol));
    }
    std::stable_sort(report.solutions.begin(), report.solutions.end(),
                     [](const Solution& a, const Solution& b) { return a.objective < b.objective; });
    report.best_index = 0;
    bool any_converged = false;
    for (const auto& s : report.solutions) any_converged = any_converged || s.converged;
    report.status = any_converged ? SolveStatus::Converged : SolveStatus::NonConvergent;
    return report;
}

double kkt_residual(const StepFunction& w, const std::vector<double>& beta,
                    const ConstraintSet& cs, const ObjectiveConfig& obj) {
    if (beta.size() != cs.size())
        raise(ErrorCode::ValidationError, "multiplier count does not match constraint count");
    std::vector<double> g = objective_gradient(obj, w).flatten();
    for (std::size_t i = 0; i < cs.size(); ++i) {
        const std::vector<double> gi = density_gradient(cs.constraints[i].graph, w).flatten();
        for (std::size_t j = 0; j < g.size(); ++j) g[j] -= beta[i] * gi[j];
    }
    double norm2 = 0.0;
    for (double v : g) norm2 += v * v;
    return std::sqrt(norm2);
}

MultiplierFit fit_multipliers(const StepFunction& w, const ConstraintSet& cs,
                              const ObjectiveConfig& obj) {
    const std::vector<double> target = objective_gradient(obj, w).flatten();
    const Eigen::Index n = static_cast<Eigen::Index>(target.size());
    const Eigen::Index q = static_cast<Eigen::Index>(cs.size());
    Eigen::MatrixXd design(n, q);
    for (Eigen::Index i = 0; i < q; ++i) {
        const std::vector<double> gi =
            density_gradient(cs.constraints[static_cast<std::size_t>(i)].graph, w).flatten();
        for (Eigen::Index j = 0; j < n; ++j) design(j, i) = gi[static_cast<std::size_t>(j)];
    }
    Eigen::VectorXd b(n);
    for (Eigen::Index j = 0; j < n; ++j) b(j) = target[static_cast<std::size_t>(j)];

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);
    const Eigen::VectorXd beta = svd.solve(b);

    MultiplierFit fit;
    fit.beta.assign(beta.data(), beta.data() + beta.size());
    fit.residual = (b - design * beta).norm();
    return fit;
}

int find_m0(const ConstraintSet& cs, const M0Options& opts) {
    for (int m = 1; m <= opts.m_max; ++m) {
        if (step_parameter_count(cs.sig, m) <= static_cast<long long>(cs.size())) continue;

        SolverConfig cfg;
        cfg.m = m;
        cfg.seed = opts.seed;
        ProblemContext ctx;
        ctx.build(cs.sig, cfg);
        ObjectiveConfig dummy = ObjectiveConfig::entropy();
        ctx.obj = &dummy;
        ctx.graphs = cs.graphs();
        ctx.targets = cs.targets();

        // Feasibility subproblem: multistart least squares on the residuals.
        for (int r = 0; r < opts.restarts; ++r) {
            std::vector<double> x = random_init(
                ctx, splitmix64(opts.seed ^ (0x2545f4914f6cdd1dull * static_cast<std::uint64_t>(r + 1))));
            // minimize phi(x) = 1/2 sum c_i^2 by projected gradient
            auto phi = [&](const std::vector<double>& xv, std::vector<double>* grad) {
                const StepFunction w = ctx.unpack(xv);
                const std::vector<double> t = marginal(ctx.graphs, w);
                double value = 0.0;
                if (grad) grad->assign(ctx.n_x, 0.0);
                for (std::size_t i = 0; i < t.size(); ++i) {
                    const double c = t[i] - ctx.targets[i];
                    value += 0.5 * c * c;
                    if (grad && c != 0.0) {
                        const std::vector<double> gi =
                            density_gradient(ctx.graphs[i], w).flatten();
                        for (std::size_t j = 0; j < gi.size(); ++j) (*grad)[j] += c * gi[j];
                    }
                }
                if (grad) ctx.mask_fixed_pi(*grad);
                return value;
            };

            std::vector<double> g;
            double value = phi(x, &g);
            double step = 1.0;
            for (int iter = 0; iter < 4000; ++iter) {
                if (projected_gradient_norm(ctx, x, g) <= 1e-10) break;
                double t = step;
                std::vector<double> xc(x.size());
                double cand_value = value;
                while (true) {
                    for (std::size_t i = 0; i < x.size(); ++i) xc[i] = x[i] - t * g[i];
                    ctx.project(xc);
                    double dir = 0.0;
                    for (std::size_t i = 0; i < x.size(); ++i) dir += g[i] * (xc[i] - x[i]);
                    cand_value = phi(xc, nullptr);
                    if (cand_value <= value + 1e-4 * dir || t < 1e-18) break;
                    t *= 0.5;
                }
                if (t < 1e-18) break;
                std::vector<double> s(x.size()), gn;
                for (std::size_t i = 0; i < x.size(); ++i) s[i] = xc[i] - x[i];
                x.swap(xc);
                value = phi(x, &gn);
                double sy = 0.0, ss = 0.0;
                for (std::size_t i = 0; i < x.size(); ++i) {
                    const double yi = gn[i] - g[i];
                    sy += s[i] * yi;
                    ss += s[i] * s[i];
                }
                g.swap(gn);
                step = (sy > 1e-300) ? std::clamp(ss / sy, 1e-12, 1e6) : std::min(step * 2.0, 1e6);
            }

            const StepFunction w = ctx.unpack(x);
            const std::vector<double> t = marginal(ctx.graphs, w);
            double cnorm = 0.0;
            for (std::size_t i = 0; i < t.size(); ++i)
                cnorm = std::max(cnorm, std::abs(t[i] - ctx.targets[i]));
            if (cnorm <= opts.feasibility_tol) return m;
        }
    }
    raise(ErrorCode::InfeasibleUpToMax,
          "no feasible step function found up to m = " + std::to_string(opts.m_max));
}

bool interior_check(const StepFunction& w, double delta) {
    for (int k = 0; k < w.signature().relation_count(); ++k)
        for (double v : w.array(k))
            if (!(v > delta && v < 1.0 - delta)) return false;
    return true;
}

double min_split_gap(const StepFunction& base, const StepFunction& w) {
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> lambdas;
    for (int k = 0; k < base.block_count(); ++k) {
        lambdas.clear();
        const double pk = base.pi()[static_cast<std::size_t>(k)];
        if (pk <= 0.0) continue;
        // lambda candidates recovered from partition matching
        for (int i = 0; i < w.block_count(); ++i)
            for (int j = 0; j < w.block_count(); ++j) {
                if (i == j) continue;
                const double pi = w.pi()[static_cast<std::size_t>(i)];
                const double pj = w.pi()[static_cast<std::size_t>(j)];
                if (std::abs(pi + pj - pk) <= 1e-5)
                    lambdas.push_back(std::clamp(pi / pk, 0.0, 1.0));
            }
        for (double l = 0.1; l < 0.95; l += 0.1) lambdas.push_back(l);
        lambdas.push_back(0.25);
        lambdas.push_back(0.5);
        lambdas.push_back(0.75);
        for (double lambda : lambdas)
            best = std::min(best, l1_distance_aligned(base.split(lambda, k), w));
    }
    return best;
}

EscalationReport escalate(const ConstraintSet& cs, const SolverConfig& cfg,
                          const ObjectiveConfig& obj, int m_from, int m_to, double obj_tol,
                          double l1_tol) {
    if (m_from < 1 || m_to < m_from)
        raise(ErrorCode::ValidationError, "invalid escalation range");
    EscalationReport out;
    for (int m = m_from; m <= m_to; ++m) {
        SolverConfig level_cfg = cfg;
        level_cfg.m = m;
        std::vector<StepFunction> seeds;
        std::vector<double> seed_beta;
        if (!out.levels.empty()) {
            const Solution& prev = out.levels.back().report.best();
            for (int k = 0; k < prev.w.block_count(); ++k)
                for (double lambda : {0.25, 0.5, 0.75})
                    seeds.push_back(prev.w.split(lambda, k));
            seed_beta = prev.beta; // split preserves the multipliers
        }
        EscalationLevel level;
        level.m = m;
        level.report = solve(cs, level_cfg, obj, seeds, seed_beta);
        level.best_objective = level.report.best().objective;
        if (!out.levels.empty()) {
            const EscalationLevel& prev = out.levels.back();
            level.objective_delta = level.best_objective - prev.best_objective;
            level.l1_gap_to_prev_split =
                min_split_gap(prev.report.best().w, level.report.best().w);
            level.pod_holds =
                level.objective_delta <= obj_tol && level.l1_gap_to_prev_split < l1_tol;
            out.pod_all = out.pod_all && level.pod_holds;
        }
        out.levels.push_back(std::move(level));
    }
    return out;
}

} // namespace hypermax
