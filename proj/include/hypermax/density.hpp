#pragma once

#include <vector>

#include "hypermax/core.hpp"
#include "hypermax/stepfn.hpp"

namespace hypermax {

/// Gradient of a scalar functional of a step function, in the canonical
/// coordinates used everywhere by the solver: one free variable per
/// non-decreasing multi-index of each relation array, plus the partition
/// coordinates.
struct GradientVector {
    // a_part[k] is aligned with canonical_multi_indices(m, d_k).
    std::vector<std::vector<double>> a_part;
    std::vector<double> pi_part;    // length m, unreduced d/d(pi_i)
    std::vector<double> pi_reduced; // length m-1, d/d(pi_i) - d/d(pi_m)

    static GradientVector zeros(const Signature& sig, int m);
    void add_scaled(const GradientVector& other, double factor);

    /// [a_part relation 0, a_part relation 1, ..., pi_reduced]
    std::vector<double> flatten() const;
    std::size_t flat_size() const;
    double squared_norm() const;
};

/// Guard for the exhaustive m^{|V(F)|} summation.
inline constexpr double kDensityTermGuard = 1e9;

/// Subgraph density t(F, (A,pi)): exact sum over all maps V(F) -> [m] of
/// the edge-array products weighted by the pi product.
double density(const MultiHypergraph& f, const StepFunction& w);

/// Partial subgraph density with the labeled vertices pinned to the given
/// blocks; pi factors only over unlabeled vertices.
double partial_density(const LabeledMultiHypergraph& fl, const std::vector<int>& idx,
                       const StepFunction& w);

double quantum_density(const QuantumGraph& q, const StepFunction& w);

/// Analytic gradient of t(F, .) via the labeled-derivative formulas:
/// d/dA over an orbit sum of edge-deleted partial densities, d/dpi from
/// vertex-labeled partial densities.
GradientVector density_gradient(const MultiHypergraph& f, const StepFunction& w);
GradientVector density_gradient(const QuantumGraph& q, const StepFunction& w);

/// Marginal map t(Fset, W): one density per constraint graph.
std::vector<double> marginal(const std::vector<QuantumGraph>& fset, const StepFunction& w);

struct JacobianResult {
    // rows[i] = flattened gradient of t(fset[i], .)
    std::vector<std::vector<double>> rows;
    std::vector<double> singular_values;
    int rank = 0; // numerical rank at threshold 1e-8 * sigma_max
};

JacobianResult jacobian(const std::vector<QuantumGraph>& fset, const StepFunction& w);

} // namespace hypermax
