#pragma once

#include <cstdint>
#include <vector>

#include "hypermax/density.hpp"
#include "hypermax/stepfn.hpp"

namespace hypermax {

struct SampleConfig {
    int n = 100;
    std::uint64_t seed = 1;
    int trials = 1;
    // Monte Carlo sample count for empirical densities past the exact guard.
    long long mc_samples = 200000;
};

/// W-random hypergraph: one block label per vertex drawn from pi, then
/// every d_k-subset of vertices joined independently with probability
/// A_k at the block tuple. Deterministic per seed.
MultiHypergraph sample_w_random(const StepFunction& w, const SampleConfig& cfg);

struct EmpiricalDensity {
    double value = 0.0;
    bool exact = true;
    double std_error = 0.0; // Monte Carlo mode only
};

/// t(F, f^G): exact when n^{|V(F)|} fits the term guard, otherwise a
/// Monte Carlo estimate over uniform vertex maps (ordered, with
/// repetition).
EmpiricalDensity empirical_density(const MultiHypergraph& f, const MultiHypergraph& g,
                                   const Signature& sig, const SampleConfig& cfg = {});

struct ConvergenceRow {
    int n = 0;
    int graph_index = 0;
    double target = 0.0;
    double mean = 0.0;
    double stddev = 0.0;
    double std_error = 0.0;
    double z_gap = 0.0; // (mean - target) / std_error; 0 when std_error is 0
    int trials = 0;
};

/// Samples W-random graphs at each size and reports empirical densities of
/// each test graph against the analytic target t(F, W).
std::vector<ConvergenceRow> convergence_report(const StepFunction& w,
                                               const std::vector<MultiHypergraph>& fset,
                                               const std::vector<int>& n_list,
                                               const SampleConfig& cfg);

} // namespace hypermax
