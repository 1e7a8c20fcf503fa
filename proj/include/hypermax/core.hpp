#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hypermax/errors.hpp"

namespace hypermax {

using VertexId = int;
using Tuple = std::vector<VertexId>;

/// Relational schema: r symmetric relation symbols with arities d_1..d_r.
/// Names are optional; when absent, relations are addressed by index only.
struct Signature {
    std::vector<int> arities;
    std::vector<std::string> names; // empty or one name per relation

    Signature() = default;
    explicit Signature(std::vector<int> d, std::vector<std::string> n = {});

    int relation_count() const { return static_cast<int>(arities.size()); }
    int arity(int k) const;
    int max_arity() const;
    int relation_index(const std::string& name) const; // -1 if unknown
    std::string relation_name(int k) const;

    bool operator==(const Signature& other) const { return arities == other.arities; }
    bool operator!=(const Signature& other) const { return !(*this == other); }
};

/// Finite multi-relational hypergraph. Hyperedges are unordered sets of
/// distinct vertices; canonical storage keeps each tuple sorted ascending,
/// each relation's edge list deduplicated and sorted. Vertex ids are
/// 0-based and range over [0, n_vertices).
struct MultiHypergraph {
    int n_vertices = 0;
    std::vector<std::vector<Tuple>> edges; // edges[k] = relation k's hyperedges

    int relation_count() const { return static_cast<int>(edges.size()); }
    std::size_t edge_count(int k) const { return edges.at(k).size(); }
    std::size_t total_edge_count() const;
    bool has_edge(int k, const Tuple& sorted_tuple) const;

    bool operator==(const MultiHypergraph& other) const {
        return n_vertices == other.n_vertices && edges == other.edges;
    }
    bool operator<(const MultiHypergraph& other) const {
        if (n_vertices != other.n_vertices) return n_vertices < other.n_vertices;
        return edges < other.edges;
    }
};

/// Hypergraph with an ordered vector of distinct labeled vertices a_1..a_j.
struct LabeledMultiHypergraph {
    MultiHypergraph base;
    std::vector<VertexId> labels;

    int label_count() const { return static_cast<int>(labels.size()); }
};

/// Formal real-linear combination of hypergraphs over one signature.
/// The term list may be empty (the zero quantum graph).
struct QuantumGraph {
    Signature sig;
    std::vector<std::pair<double, MultiHypergraph>> terms;

    QuantumGraph() = default;
    QuantumGraph(Signature signature, std::vector<std::pair<double, MultiHypergraph>> raw_terms);

    static QuantumGraph single(const Signature& sig, const MultiHypergraph& graph, double coeff = 1.0);

    /// Merges constituents that are isomorphic (not just identical after
    /// canonicalization). Optional pass; exponential in vertex count, only
    /// for small constituents.
    QuantumGraph merge_isomorphic() const;

    /// True when every constituent is a linear hypergraph (each vertex pair
    /// shared by at most one hyperedge across all relations). The counting
    /// lemma applies only to linear constituents.
    bool all_constituents_linear() const;
};

/// Unit-coefficient formal sum of labeled hypergraphs; the combinatorial
/// carrier of the density partial-derivative formulas.
struct LabeledDerivativeSum {
    std::vector<LabeledMultiHypergraph> terms;
};

/// Validates a raw hypergraph against the signature and returns the
/// canonical form (tuples sorted, relation lists deduplicated and sorted).
/// Idempotent.
MultiHypergraph validate_and_canonicalize(const Signature& sig, const MultiHypergraph& raw);

/// One term per hyperedge of relation k: delete the edge, label its
/// vertices in the stored tuple order.
LabeledDerivativeSum edge_labeled_derivative(const MultiHypergraph& graph, int k);

/// One term per vertex: label it, keep the graph unchanged.
LabeledDerivativeSum vertex_labeled_derivative(const MultiHypergraph& graph);

/// All distinct permutations of a multi-index; size d!/prod(multiplicity!).
std::vector<std::vector<int>> index_orbit(const std::vector<int>& tuple);

/// Exact isomorphism by brute force over vertex bijections; graphs must be
/// canonical and have at most `max_vertices` vertices.
bool isomorphic(const MultiHypergraph& f, const MultiHypergraph& g, int max_vertices = 10);

bool is_linear_hypergraph(const MultiHypergraph& graph);

// Small named building blocks used throughout tests and fixtures.
MultiHypergraph make_graph(const Signature& sig, int n_vertices,
                           std::vector<std::vector<Tuple>> edges);
MultiHypergraph single_edge_graph(const Signature& sig, int k = 0);            // one d_k-edge
MultiHypergraph triangle_graph(const Signature& sig, int k = 0);               // 3-cycle, needs d_k=2
MultiHypergraph empty_graph(const Signature& sig, int n_vertices);

} // namespace hypermax
