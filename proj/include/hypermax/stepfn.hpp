#pragma once

#include <cstdint>
#include <vector>

#include "hypermax/core.hpp"

namespace hypermax {

/// Value-range regime for step-function entries.
enum class Mode {
    RealValued,      // entries anywhere in R
    GraphonUnit,     // entries in [0,1]
    GraphonInterior, // entries in (0,1)
};

const char* mode_name(Mode mode);
Mode mode_from_name(const std::string& name);

/// Number of canonical (symmetry-free) array parameters of an m-step
/// function: sum over relations of C(m+d_k-1, d_k).
long long step_parameter_count(const Signature& sig, int m);

/// All non-decreasing multi-indices of length d over [0,m), lexicographic.
std::vector<std::vector<int>> canonical_multi_indices(int m, int d);

/// Finitely parameterized hypergraphon: a partition vector pi in the
/// m-simplex plus, per relation k, a dense symmetric m^{d_k} array.
/// Immutable by convention after construction/validation.
class StepFunction {
public:
    StepFunction() = default;

    /// Validated construction. Arrays are symmetrized by orbit averaging;
    /// a pre-averaging deviation above 1e-9 is a SymmetryViolation.
    static StepFunction make(const Signature& sig, std::vector<double> pi,
                             std::vector<std::vector<double>> arrays,
                             Mode mode = Mode::GraphonUnit);

    /// Trusted construction without validation or symmetrization; the
    /// caller guarantees symmetric arrays and a simplex pi. Hot path for
    /// the solver's inner loop.
    static StepFunction raw(Signature sig, std::vector<double> pi,
                            std::vector<std::vector<double>> arrays, Mode mode);

    /// Step-function representation f^G of a finite hypergraph: m = |V(G)|,
    /// uniform pi, 0/1 arrays with zero diagonal cells.
    static StepFunction from_finite_graph(const Signature& sig, const MultiHypergraph& graph);

    static StepFunction constant(const Signature& sig, double value, Mode mode = Mode::GraphonUnit);

    const Signature& signature() const { return sig_; }
    int block_count() const { return m_; }
    /// n(m,r,d) + m - 1: canonical array entries plus the free simplex
    /// coordinates.
    long long free_parameter_count() const { return step_parameter_count(sig_, m_) + m_ - 1; }
    Mode mode() const { return mode_; }
    const std::vector<double>& pi() const { return pi_; }
    const std::vector<double>& array(int k) const { return arrays_.at(static_cast<std::size_t>(k)); }

    /// Row-major flat offset of a full multi-index in relation k's array.
    std::size_t flat_index(int k, const std::vector<int>& idx) const;
    double at(int k, const std::vector<int>& idx) const;
    double& at_mut(int k, const std::vector<int>& idx);

    /// Partition cell containing coordinate x under the right-closed
    /// convention: cell i is (c_{i-1}, c_i], x = 0 goes to cell 0.
    int cell_of(double x) const;

    /// Pointwise evaluation W_k(x_1..x_{d_k}).
    double value_at(int k, const std::vector<double>& x) const;

    /// Splits block k into weights lambda*pi_k and (1-lambda)*pi_k; array
    /// entries duplicated so the function on [0,1]^d is unchanged.
    StepFunction split(double lambda, int k) const;

    /// Reorders blocks by permutation perm (new block i is old block perm[i]).
    StepFunction permute_blocks(const std::vector<int>& perm) const;

    /// Drops zero-weight blocks (pi_i <= tol); the function is unchanged.
    StepFunction drop_empty_blocks(double tol = 0.0) const;

    /// Canonical block order: descending pi, ties resolved by the
    /// lexicographically smallest array contents. Used to compare solutions
    /// across runs.
    StepFunction canonical_block_order() const;

    /// Re-checks mode constraints; RangeViolation on failure.
    void check_range(Mode mode) const;

    bool same_partition(const StepFunction& other, double tol = 1e-12) const;

private:
    StepFunction permute_blocks_subset(const std::vector<int>& keep) const;

    Signature sig_;
    int m_ = 0;
    Mode mode_ = Mode::GraphonUnit;
    std::vector<double> pi_;
    std::vector<std::vector<double>> arrays_; // dense, row-major, symmetric
};

/// Refines both inputs onto the overlay of their cumulative boundaries;
/// the outputs share one partition vector and are pointwise equal to the
/// inputs as functions.
std::pair<StepFunction, StepFunction> common_refinement(const StepFunction& w,
                                                        const StepFunction& v);

/// Sum over relations of the exact L1 distance integral, computed on the
/// common refinement.
double l1_distance(const StepFunction& w, const StepFunction& v);

/// L1 norm against the zero function, per relation.
std::vector<double> l1_norms(const StepFunction& w);

struct CutNormResult {
    double value = 0.0;
    // Achieving subsets, one set of block indices per axis.
    std::vector<std::vector<int>> axis_subsets;
};

struct CutNormOptions {
    bool exact = true;
    int max_exact_blocks = 10;
    int restarts = 50;        // heuristic mode
    std::uint64_t seed = 1;   // heuristic mode
};

/// Per-relation cut norm: max over box subsets S_1 x .. x S_{d_k} of
/// |sum of A * pi-weights|. Exact mode enumerates subsets of the first
/// d_k - 1 axes and resolves the last axis greedily; heuristic mode runs
/// alternating coordinate ascent from random subsets.
std::vector<CutNormResult> cut_norm(const StepFunction& w, const CutNormOptions& opts = {});

double cut_norm_total(const StepFunction& w, const CutNormOptions& opts = {});

/// Upper bound on the cut distance: min over pi-preserving block
/// permutations sigma of ||W - V^sigma||_cut. Requires permutable
/// partitions (same m, equal pi multisets); refine first when partitions
/// differ.
double cut_distance_aligned(const StepFunction& w, const StepFunction& v,
                            const CutNormOptions& opts = {});

struct CutDistanceResult {
    double value = 0.0;
    std::vector<int> permutation;             // best sigma, new -> old
    std::vector<CutNormResult> per_relation;  // cut norm of W - V^sigma
};

CutDistanceResult cut_distance_aligned_detail(const StepFunction& w, const StepFunction& v,
                                              const CutNormOptions& opts = {});

/// min over pi-preserving block permutations of l1_distance(w, v^sigma).
double l1_distance_aligned(const StepFunction& w, const StepFunction& v);

} // namespace hypermax
