#include "hypermax/core.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace hypermax {

Signature::Signature(std::vector<int> d, std::vector<std::string> n)
    : arities(std::move(d)), names(std::move(n)) {
    if (arities.empty()) raise(ErrorCode::ValidationError, "signature needs at least one relation");
    for (int a : arities)
        if (a < 1) raise(ErrorCode::ValidationError, "relation arity must be >= 1");
    if (!names.empty() && names.size() != arities.size())
        raise(ErrorCode::ValidationError, "relation name count does not match arity count");
}

int Signature::arity(int k) const {
    if (k < 0 || k >= relation_count())
        raise(ErrorCode::BadRelationIndex, "relation index " + std::to_string(k));
    return arities[static_cast<std::size_t>(k)];
}

int Signature::max_arity() const {
    return *std::max_element(arities.begin(), arities.end());
}

int Signature::relation_index(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<int>(i);
    return -1;
}

std::string Signature::relation_name(int k) const {
    if (k >= 0 && k < static_cast<int>(names.size())) return names[static_cast<std::size_t>(k)];
    return "R" + std::to_string(k + 1);
}

std::size_t MultiHypergraph::total_edge_count() const {
    std::size_t total = 0;
    for (const auto& rel : edges) total += rel.size();
    return total;
}

bool MultiHypergraph::has_edge(int k, const Tuple& sorted_tuple) const {
    const auto& rel = edges.at(static_cast<std::size_t>(k));
    return std::binary_search(rel.begin(), rel.end(), sorted_tuple);
}

MultiHypergraph validate_and_canonicalize(const Signature& sig, const MultiHypergraph& raw) {
    if (raw.n_vertices < 0)
        raise(ErrorCode::ValidationError, "negative vertex count");
    if (raw.relation_count() != sig.relation_count())
        raise(ErrorCode::ArityMismatch,
              "graph has " + std::to_string(raw.relation_count()) + " relations, signature has " +
                  std::to_string(sig.relation_count()));

    MultiHypergraph out;
    out.n_vertices = raw.n_vertices;
    out.edges.resize(raw.edges.size());
    for (int k = 0; k < sig.relation_count(); ++k) {
        const int d = sig.arity(k);
        std::set<Tuple> canonical;
        for (const Tuple& t : raw.edges[static_cast<std::size_t>(k)]) {
            if (static_cast<int>(t.size()) != d)
                raise(ErrorCode::ArityMismatch,
                      "edge of size " + std::to_string(t.size()) + " in relation of arity " +
                          std::to_string(d));
            Tuple s = t;
            std::sort(s.begin(), s.end());
            for (std::size_t i = 0; i < s.size(); ++i) {
                if (s[i] < 0 || s[i] >= raw.n_vertices)
                    raise(ErrorCode::VertexOutOfRange,
                          "vertex " + std::to_string(s[i]) + " outside [0," +
                              std::to_string(raw.n_vertices) + ")");
                if (i > 0 && s[i] == s[i - 1])
                    raise(ErrorCode::RepeatedVertexInTuple,
                          "vertex " + std::to_string(s[i]) + " repeated in hyperedge");
            }
            canonical.insert(std::move(s));
        }
        out.edges[static_cast<std::size_t>(k)].assign(canonical.begin(), canonical.end());
    }
    return out;
}

LabeledDerivativeSum edge_labeled_derivative(const MultiHypergraph& graph, int k) {
    if (k < 0 || k >= graph.relation_count())
        raise(ErrorCode::BadRelationIndex, "relation index " + std::to_string(k));
    LabeledDerivativeSum sum;
    const auto& rel = graph.edges[static_cast<std::size_t>(k)];
    sum.terms.reserve(rel.size());
    for (std::size_t e = 0; e < rel.size(); ++e) {
        LabeledMultiHypergraph term;
        term.base = graph;
        auto& list = term.base.edges[static_cast<std::size_t>(k)];
        list.erase(list.begin() + static_cast<std::ptrdiff_t>(e));
        term.labels = rel[e]; // labels keep the stored tuple order
        sum.terms.push_back(std::move(term));
    }
    return sum;
}

LabeledDerivativeSum vertex_labeled_derivative(const MultiHypergraph& graph) {
    LabeledDerivativeSum sum;
    sum.terms.reserve(static_cast<std::size_t>(graph.n_vertices));
    for (VertexId v = 0; v < graph.n_vertices; ++v)
        sum.terms.push_back(LabeledMultiHypergraph{graph, {v}});
    return sum;
}

std::vector<std::vector<int>> index_orbit(const std::vector<int>& tuple) {
    std::vector<int> sorted = tuple;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::vector<int>> orbit;
    do {
        orbit.push_back(sorted);
    } while (std::next_permutation(sorted.begin(), sorted.end()));
    return orbit;
}

namespace {

// Cheap invariants that must match before trying bijections.
bool iso_prefilter(const MultiHypergraph& f, const MultiHypergraph& g) {
    if (f.n_vertices != g.n_vertices) return false;
    if (f.relation_count() != g.relation_count()) return false;
    for (int k = 0; k < f.relation_count(); ++k)
        if (f.edge_count(k) != g.edge_count(k)) return false;
    // per-relation degree multisets
    for (int k = 0; k < f.relation_count(); ++k) {
        std::vector<int> df(static_cast<std::size_t>(f.n_vertices), 0);
        std::vector<int> dg(static_cast<std::size_t>(g.n_vertices), 0);
        for (const auto& t : f.edges[static_cast<std::size_t>(k)])
            for (VertexId v : t) ++df[static_cast<std::size_t>(v)];
        for (const auto& t : g.edges[static_cast<std::size_t>(k)])
            for (VertexId v : t) ++dg[static_cast<std::size_t>(v)];
        std::sort(df.begin(), df.end());
        std::sort(dg.begin(), dg.end());
        if (df != dg) return false;
    }
    return true;
}

MultiHypergraph apply_vertex_map(const MultiHypergraph& f, const std::vector<VertexId>& perm) {
    MultiHypergraph out;
    out.n_vertices = f.n_vertices;
    out.edges.resize(f.edges.size());
    for (std::size_t k = 0; k < f.edges.size(); ++k) {
        auto& rel = out.edges[k];
        rel.reserve(f.edges[k].size());
        for (const Tuple& t : f.edges[k]) {
            Tuple m(t.size());
            for (std::size_t i = 0; i < t.size(); ++i)
                m[i] = perm[static_cast<std::size_t>(t[i])];
            std::sort(m.begin(), m.end());
            rel.push_back(std::move(m));
        }
        std::sort(rel.begin(), rel.end());
    }
    return out;
}

} // namespace

bool isomorphic(const MultiHypergraph& f, const MultiHypergraph& g, int max_vertices) {
    if (f.n_vertices != g.n_vertices) return false;
    if (f.n_vertices > max_vertices)
        raise(ErrorCode::TooLargeForExactIso,
              std::to_string(f.n_vertices) + " vertices exceeds brute-force bound " +
                  std::to_string(max_vertices));
    if (!iso_prefilter(f, g)) return false;
    std::vector<VertexId> perm(static_cast<std::size_t>(f.n_vertices));
    std::iota(perm.begin(), perm.end(), 0);
    do {
        if (apply_vertex_map(f, perm) == g) return true;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return false;
}

bool is_linear_hypergraph(const MultiHypergraph& graph) {
    // Each unordered vertex pair may lie in at most one hyperedge overall.
    std::set<std::pair<VertexId, VertexId>> seen;
    for (const auto& rel : graph.edges) {
        for (const Tuple& t : rel) {
            for (std::size_t i = 0; i < t.size(); ++i)
                for (std::size_t j = i + 1; j < t.size(); ++j) {
                    auto key = std::minmax(t[i], t[j]);
                    if (!seen.insert({key.first, key.second}).second) return false;
                }
        }
    }
    return true;
}

QuantumGraph::QuantumGraph(Signature signature,
                           std::vector<std::pair<double, MultiHypergraph>> raw_terms)
    : sig(std::move(signature)) {
    std::map<MultiHypergraph, double> merged;
    for (auto& [coeff, graph] : raw_terms) {
        if (!std::isfinite(coeff))
            raise(ErrorCode::ValidationError, "quantum-graph coefficient must be finite");
        merged[validate_and_canonicalize(sig, graph)] += coeff;
    }
    for (auto& [graph, coeff] : merged)
        if (coeff != 0.0) terms.emplace_back(coeff, graph);
}

QuantumGraph QuantumGraph::single(const Signature& sig, const MultiHypergraph& graph,
                                  double coeff) {
    return QuantumGraph(sig, {{coeff, graph}});
}

QuantumGraph QuantumGraph::merge_isomorphic() const {
    QuantumGraph out;
    out.sig = sig;
    std::vector<bool> used(terms.size(), false);
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (used[i]) continue;
        double coeff = terms[i].first;
        for (std::size_t j = i + 1; j < terms.size(); ++j) {
            if (used[j]) continue;
            if (isomorphic(terms[i].second, terms[j].second)) {
                coeff += terms[j].first;
                used[j] = true;
            }
        }
        if (coeff != 0.0) out.terms.emplace_back(coeff, terms[i].second);
    }
    return out;
}

bool QuantumGraph::all_constituents_linear() const {
    for (const auto& [coeff, graph] : terms)
        if (!is_linear_hypergraph(graph)) return false;
    return true;
}

MultiHypergraph make_graph(const Signature& sig, int n_vertices,
                           std::vector<std::vector<Tuple>> edges) {
    MultiHypergraph raw;
    raw.n_vertices = n_vertices;
    raw.edges = std::move(edges);
    return validate_and_canonicalize(sig, raw);
}

MultiHypergraph single_edge_graph(const Signature& sig, int k) {
    const int d = sig.arity(k);
    Tuple t(static_cast<std::size_t>(d));
    std::iota(t.begin(), t.end(), 0);
    std::vector<std::vector<Tuple>> edges(static_cast<std::size_t>(sig.relation_count()));
    edges[static_cast<std::size_t>(k)].push_back(t);
    return make_graph(sig, d, std::move(edges));
}

MultiHypergraph triangle_graph(const Signature& sig, int k) {
    if (sig.arity(k) != 2)
        raise(ErrorCode::ArityMismatch, "triangle requires a binary relation");
    std::vector<std::vector<Tuple>> edges(static_cast<std::size_t>(sig.relation_count()));
    edges[static_cast<std::size_t>(k)] = {{0, 1}, {1, 2}, {0, 2}};
    return make_graph(sig, 3, std::move(edges));
}

MultiHypergraph empty_graph(const Signature& sig, int n_vertices) {
    std::vector<std::vector<Tuple>> edges(static_cast<std::size_t>(sig.relation_count()));
    return make_graph(sig, n_vertices, std::move(edges));
}

} // namespace hypermax
