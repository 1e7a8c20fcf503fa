#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "hypermax/core.hpp"
#include "hypermax/stepfn.hpp"

namespace hypermax {

/// AST of a universally quantified formula over symmetric relational atoms.
/// Grammar (ASCII): `forall x,y,z : <expr>` with connectives not, and, or,
/// =>, <=>; precedence not > and > or > "=>" > "<=>", "=>" right-associative.
struct Formula {
    enum class Kind { Atom, Not, And, Or, Implies, Iff };

    struct Node {
        Kind kind = Kind::Atom;
        // Atom payload
        int relation = -1;
        std::vector<int> vars; // indices into `variables`
        // Connective payload
        std::unique_ptr<Node> lhs;
        std::unique_ptr<Node> rhs;
        int position = 0; // source offset, for diagnostics
    };

    Signature sig;
    std::vector<std::string> variables; // quantified, in source order
    std::unique_ptr<Node> matrix;
    std::string text;
};

/// Multilinear polynomial over atoms: each term maps a set of atoms to a
/// real coefficient: idempotence (a^k = a) is built into the term keys.
struct MultilinearPoly {
    using Atom = std::pair<int, std::vector<int>>; // (relation, sorted var ids)
    using Term = std::vector<Atom>;                // sorted, unique
    std::map<Term, double> terms;
};

Formula parse_formula(const std::string& text, const Signature& sig);

/// Arithmetizes the matrix (not p -> 1-p, and -> product, or/=>/<=> by the
/// usual identities), reduces to a multilinear polynomial, and emits one
/// constituent per term: vertices are the term's variables, edges its
/// atoms. Isomorphic constituents are merged.
QuantumGraph compile_formula(const Formula& f);

MultilinearPoly arithmetize(const Formula& f);

/// Mean over the solution set of the compiled quantum-graph density.
double query_probability(const Formula& f, const std::vector<StepFunction>& solutions);

} // namespace hypermax
