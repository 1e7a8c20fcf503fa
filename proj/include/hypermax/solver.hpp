#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hypermax/objective.hpp"
#include "hypermax/stepfn.hpp"

namespace hypermax {

struct Constraint {
    QuantumGraph graph;
    double target = 0.0;
};

/// Equality constraints t(F_i, W) = u_i over one signature.
struct ConstraintSet {
    Signature sig;
    std::vector<Constraint> constraints;

    std::size_t size() const { return constraints.size(); }
    std::vector<QuantumGraph> graphs() const;
    std::vector<double> targets() const;
    /// True when every constituent of every constraint is linear; when
    /// false, counting-lemma-based checks do not apply and reports say so.
    bool all_linear() const;
};

struct PenaltySchedule {
    double mu0 = 10.0;
    double growth = 10.0;
    double mu_max = 1e8;
    int max_outer = 60;
};

struct SolverConfig {
    int m = 2;
    int restarts = 16;
    std::uint64_t seed = 1;
    PenaltySchedule penalty;
    double inner_tol = 1e-8;      // projected-gradient norm target
    double constraint_tol = 1e-9; // max |t_i - u_i|
    int max_inner_iterations = 5000;
    double interior_eps = 1e-6; // box inset for A entries in graphon modes
    double pi_floor = 1e-6;     // simplex floor for partition weights
    Mode mode = Mode::GraphonUnit;
    std::optional<std::vector<double>> fixed_pi;
    int threads = 1;
};

struct Solution {
    StepFunction w; // canonical block order
    double objective = 0.0;
    std::vector<double> beta;
    double kkt_residual = 0.0;
    double constraint_residual = 0.0;
    int jacobian_rank = 0;
    bool converged = true;
};

enum class SolveStatus { Converged, NonConvergent };

struct SolveReport {
    SolveStatus status = SolveStatus::Converged;
    std::vector<Solution> solutions; // distinct minima, sorted by objective
    int best_index = 0;
    int feasible_restarts = 0;
    // n(m,r,d) < |constraints|: fewer array parameters than constraints
    bool underparameterized = false;
    long long inner_iterations = 0;
    bool constraints_all_linear = true;
    SolverConfig config;

    const Solution& best() const { return solutions.at(static_cast<std::size_t>(best_index)); }
};

/// Multistart augmented-Lagrangian solve of
///   min f_s(W)  s.t.  t(F_i, W) = u_i,  W an m-step function.
/// Deterministic given the seed. Optional seed_points are used as the
/// leading restarts before random initializations. Raises Infeasible when
/// no restart reaches the constraint tolerance.
SolveReport solve(const ConstraintSet& cs, const SolverConfig& cfg, const ObjectiveConfig& obj,
                  const std::vector<StepFunction>& seed_points = {},
                  const std::vector<double>& seed_beta = {});

/// || grad f_s - sum_i beta_i grad t(F_i) ||_2 over canonical A and reduced
/// pi coordinates.
double kkt_residual(const StepFunction& w, const std::vector<double>& beta,
                    const ConstraintSet& cs, const ObjectiveConfig& obj);

struct MultiplierFit {
    std::vector<double> beta;
    double residual = 0.0;
};

/// Least-squares recovery of the multipliers:
/// min_beta || grad f_s(W) - sum_i beta_i grad t(F_i, W) ||_2, solved with a
/// singular-value cutoff of 1e-10 (minimal-norm solution when the design
/// matrix is rank deficient).
MultiplierFit fit_multipliers(const StepFunction& w, const ConstraintSet& cs,
                              const ObjectiveConfig& obj);

struct M0Options {
    int m_max = 8;
    double feasibility_tol = 1e-6;
    int restarts = 8;
    std::uint64_t seed = 1;
};

/// Base size m0: smallest m with n(m,r,d) > |F| and a feasible m-step
/// function (found by multistart least-squares on the constraint
/// residuals). Raises InfeasibleUpToMax past m_max.
int find_m0(const ConstraintSet& cs, const M0Options& opts = {});

struct EscalationLevel {
    int m = 0;
    double best_objective = 0.0;
    double objective_delta = 0.0;    // best(m) - best(previous level)
    double l1_gap_to_prev_split = 0.0;
    bool pod_holds = true;
    SolveReport report;
};

struct EscalationReport {
    std::vector<EscalationLevel> levels;
    bool pod_all = true;
};

/// Solves at each level m_from..m_to; levels above m_from seed their
/// restarts with splits theta(W*, lambda, k) of the previous best solution
/// (lambda in {0.25, 0.5, 0.75}, every k) plus fresh random starts. The POD
/// verdict holds when the best objective is non-increasing within obj_tol
/// and the best solution L1-matches some split of the previous best within
/// l1_tol after block alignment.
EscalationReport escalate(const ConstraintSet& cs, const SolverConfig& cfg,
                          const ObjectiveConfig& obj, int m_from, int m_to,
                          double obj_tol = 1e-6, double l1_tol = 1e-4);

/// True iff every array entry lies in (delta, 1 - delta).
bool interior_check(const StepFunction& w, double delta);

/// Minimal L1 gap between w and the splits theta(base, lambda, k) over all
/// k and candidate lambdas (recovered from partition matching plus a
/// fallback grid).
double min_split_gap(const StepFunction& base, const StepFunction& w);

} // namespace hypermax
