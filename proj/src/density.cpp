#include "hypermax/density.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace hypermax {

GradientVector GradientVector::zeros(const Signature& sig, int m) {
    GradientVector g;
    g.a_part.resize(static_cast<std::size_t>(sig.relation_count()));
    for (int k = 0; k < sig.relation_count(); ++k)
        g.a_part[static_cast<std::size_t>(k)].assign(
            canonical_multi_indices(m, sig.arity(k)).size(), 0.0);
    g.pi_part.assign(static_cast<std::size_t>(m), 0.0);
    g.pi_reduced.assign(static_cast<std::size_t>(m - 1), 0.0);
    return g;
}

void GradientVector::add_scaled(const GradientVector& other, double factor) {
    for (std::size_t k = 0; k < a_part.size(); ++k)
        for (std::size_t i = 0; i < a_part[k].size(); ++i)
            a_part[k][i] += factor * other.a_part[k][i];
    for (std::size_t i = 0; i < pi_part.size(); ++i) pi_part[i] += factor * other.pi_part[i];
    for (std::size_t i = 0; i < pi_reduced.size(); ++i)
        pi_reduced[i] += factor * other.pi_reduced[i];
}

std::vector<double> GradientVector::flatten() const {
    std::vector<double> out;
    out.reserve(flat_size());
    for (const auto& rel : a_part) out.insert(out.end(), rel.begin(), rel.end());
    out.insert(out.end(), pi_reduced.begin(), pi_reduced.end());
    return out;
}

std::size_t GradientVector::flat_size() const {
    std::size_t n = pi_reduced.size();
    for (const auto& rel : a_part) n += rel.size();
    return n;
}

double GradientVector::squared_norm() const {
    double s = 0.0;
    for (const auto& rel : a_part)
        for (double v : rel) s += v * v;
    for (double v : pi_reduced) s += v * v;
    return s;
}

namespace {

// Exhaustive sum over assignments of the free (pin < 0) vertices; edge
// factors from the arrays, pi factors over free vertices only.
double sum_over_assignments(const MultiHypergraph& f, const StepFunction& w,
                            std::vector<int>& assign, const std::vector<bool>& free_vertex) {
    const int m = w.block_count();
    std::vector<int> free_ids;
    for (int v = 0; v < f.n_vertices; ++v)
        if (free_vertex[static_cast<std::size_t>(v)]) free_ids.push_back(v);

    const double terms = std::pow(static_cast<double>(m), static_cast<double>(free_ids.size()));
    if (terms > kDensityTermGuard)
        raise(ErrorCode::TooManyTerms,
              "m^" + std::to_string(free_ids.size()) + " assignments exceed the exact guard");

    for (int v : free_ids) assign[static_cast<std::size_t>(v)] = 0;

    double total = 0.0;
    while (true) {
        double prod = 1.0;
        for (int k = 0; k < f.relation_count() && prod != 0.0; ++k) {
            std::vector<int> blocks(static_cast<std::size_t>(w.signature().arity(k)));
            for (const Tuple& e : f.edges[static_cast<std::size_t>(k)]) {
                for (std::size_t i = 0; i < e.size(); ++i)
                    blocks[i] = assign[static_cast<std::size_t>(e[i])];
                prod *= w.at(k, blocks);
                if (prod == 0.0) break;
            }
        }
        if (prod != 0.0) {
            for (int v : free_ids) prod *= w.pi()[static_cast<std::size_t>(assign[static_cast<std::size_t>(v)])];
            total += prod;
        }
        // odometer over the free vertices
        std::size_t pos = free_ids.size();
        while (pos > 0) {
            int v = free_ids[pos - 1];
            if (++assign[static_cast<std::size_t>(v)] < m) break;
            assign[static_cast<std::size_t>(v)] = 0;
            --pos;
        }
        if (pos == 0) break;
    }
    return total;
}

void check_same_signature(const MultiHypergraph& f, const StepFunction& w) {
    if (f.relation_count() != w.signature().relation_count())
        raise(ErrorCode::ArityMismatch, "graph and step function have different signatures");
    for (int k = 0; k < f.relation_count(); ++k)
        for (const Tuple& e : f.edges[static_cast<std::size_t>(k)])
            if (static_cast<int>(e.size()) != w.signature().arity(k))
                raise(ErrorCode::ArityMismatch, "edge arity does not match signature");
}

} // namespace

double density(const MultiHypergraph& f, const StepFunction& w) {
    check_same_signature(f, w);
    std::vector<int> assign(static_cast<std::size_t>(f.n_vertices), -1);
    std::vector<bool> free_vertex(static_cast<std::size_t>(f.n_vertices), true);
    return sum_over_assignments(f, w, assign, free_vertex);
}

double partial_density(const LabeledMultiHypergraph& fl, const std::vector<int>& idx,
                       const StepFunction& w) {
    check_same_signature(fl.base, w);
    if (idx.size() != fl.labels.size())
        raise(ErrorCode::IndexArityMismatch,
              std::to_string(idx.size()) + " block indices for " +
                  std::to_string(fl.labels.size()) + " labels");
    std::vector<int> assign(static_cast<std::size_t>(fl.base.n_vertices), -1);
    std::vector<bool> free_vertex(static_cast<std::size_t>(fl.base.n_vertices), true);
    for (std::size_t p = 0; p < fl.labels.size(); ++p) {
        const int v = fl.labels[p];
        const int block = idx[p];
        if (block < 0 || block >= w.block_count())
            raise(ErrorCode::IndexArityMismatch, "block index out of range");
        assign[static_cast<std::size_t>(v)] = block;
        free_vertex[static_cast<std::size_t>(v)] = false;
    }
    return sum_over_assignments(fl.base, w, assign, free_vertex);
}

double quantum_density(const QuantumGraph& q, const StepFunction& w) {
    double total = 0.0;
    for (const auto& [coeff, graph] : q.terms) total += coeff * density(graph, w);
    return total;
}

GradientVector density_gradient(const MultiHypergraph& f, const StepFunction& w) {
    check_same_signature(f, w);
    const Signature& sig = w.signature();
    const int m = w.block_count();
    GradientVector g = GradientVector::zeros(sig, m);

    for (int k = 0; k < sig.relation_count(); ++k) {
        const int d = sig.arity(k);
        const LabeledDerivativeSum dsum = edge_labeled_derivative(f, k);
        if (dsum.terms.empty()) continue;
        const auto canon = canonical_multi_indices(m, d);
        for (std::size_t ci = 0; ci < canon.size(); ++ci) {
            double orbit_sum = 0.0;
            for (const auto& j : index_orbit(canon[ci]))
                for (const auto& term : dsum.terms) orbit_sum += partial_density(term, j, w);
            double weight = 1.0;
            for (int b : canon[ci]) weight *= w.pi()[static_cast<std::size_t>(b)];
            g.a_part[static_cast<std::size_t>(k)][ci] = weight * orbit_sum;
        }
    }

    const LabeledDerivativeSum vsum = vertex_labeled_derivative(f);
    for (int i = 0; i < m; ++i) {
        double total = 0.0;
        for (const auto& term : vsum.terms) total += partial_density(term, {i}, w);
        g.pi_part[static_cast<std::size_t>(i)] = total;
    }
    for (int i = 0; i + 1 < m; ++i)
        g.pi_reduced[static_cast<std::size_t>(i)] =
            g.pi_part[static_cast<std::size_t>(i)] - g.pi_part[static_cast<std::size_t>(m - 1)];
    return g;
}

GradientVector density_gradient(const QuantumGraph& q, const StepFunction& w) {
    GradientVector g = GradientVector::zeros(w.signature(), w.block_count());
    for (const auto& [coeff, graph] : q.terms)
        g.add_scaled(density_gradient(graph, w), coeff);
    return g;
}

std::vector<double> marginal(const std::vector<QuantumGraph>& fset, const StepFunction& w) {
    std::vector<double> out;
    out.reserve(fset.size());
    for (const auto& q : fset) out.push_back(quantum_density(q, w));
    return out;
}

JacobianResult jacobian(const std::vector<QuantumGraph>& fset, const StepFunction& w) {
    JacobianResult result;
    for (const auto& q : fset)
        result.rows.push_back(density_gradient(q, w).flatten());
    if (result.rows.empty()) return result;

    const Eigen::Index rows = static_cast<Eigen::Index>(result.rows.size());
    const Eigen::Index cols = static_cast<Eigen::Index>(result.rows.front().size());
    Eigen::MatrixXd jac(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            jac(i, j) = result.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
    const auto& sv = svd.singularValues();
    result.singular_values.assign(sv.data(), sv.data() + sv.size());
    const double cutoff = 1e-8 * (sv.size() > 0 ? sv(0) : 0.0);
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff && sv(i) > 0.0) ++result.rank;
    return result;
}

} // namespace hypermax
