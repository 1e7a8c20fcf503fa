#include "hypermax/logic.hpp"

#include <algorithm>
#include <cctype>

#include "hypermax/density.hpp"

namespace hypermax {

namespace {

enum class Tok { Forall, Ident, Comma, Colon, LParen, RParen, Not, And, Or, Implies, Iff, End };

struct Token {
    Tok kind;
    std::string text;
    int position;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) { advance(); }

    const Token& peek() const { return current_; }

    Token take() {
        Token t = current_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        const int start = static_cast<int>(pos_);
        if (pos_ >= text_.size()) {
            current_ = {Tok::End, "", start};
            return;
        }
        const char c = text_[pos_];
        if (c == ',') { ++pos_; current_ = {Tok::Comma, ",", start}; return; }
        if (c == ':') { ++pos_; current_ = {Tok::Colon, ":", start}; return; }
        if (c == '(') { ++pos_; current_ = {Tok::LParen, "(", start}; return; }
        if (c == ')') { ++pos_; current_ = {Tok::RParen, ")", start}; return; }
        if (text_.compare(pos_, 3, "<=>") == 0) { pos_ += 3; current_ = {Tok::Iff, "<=>", start}; return; }
        if (text_.compare(pos_, 2, "=>") == 0) { pos_ += 2; current_ = {Tok::Implies, "=>", start}; return; }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t end = pos_;
            while (end < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_'))
                ++end;
            std::string word = text_.substr(pos_, end - pos_);
            pos_ = end;
            if (word == "forall") current_ = {Tok::Forall, word, start};
            else if (word == "not") current_ = {Tok::Not, word, start};
            else if (word == "and") current_ = {Tok::And, word, start};
            else if (word == "or") current_ = {Tok::Or, word, start};
            else current_ = {Tok::Ident, word, start};
            return;
        }
        raise(ErrorCode::SyntaxError,
              "unexpected character '" + std::string(1, c) + "' at position " +
                  std::to_string(start));
    }

    const std::string& text_;
    std::size_t pos_ = 0;
    Token current_{Tok::End, "", 0};
};

class Parser {
public:
    Parser(const std::string& text, const Signature& sig) : lex_(text), sig_(sig) {}

    Formula parse() {
        Formula f;
        f.sig = sig_;
        expect(Tok::Forall, "expected 'forall'");
        while (true) {
            Token v = expect(Tok::Ident, "expected variable name");
            if (std::find(f.variables.begin(), f.variables.end(), v.text) != f.variables.end())
                raise(ErrorCode::SyntaxError, "variable '" + v.text + "' quantified twice at position " +
                                                  std::to_string(v.position));
            f.variables.push_back(v.text);
            if (lex_.peek().kind != Tok::Comma) break;
            lex_.take();
        }
        expect(Tok::Colon, "expected ':'");
        vars_ = &f.variables;
        f.matrix = parse_iff();
        if (lex_.peek().kind != Tok::End)
            raise(ErrorCode::SyntaxError,
                  "trailing input at position " + std::to_string(lex_.peek().position));
        return f;
    }

private:
    using NodePtr = std::unique_ptr<Formula::Node>;

    Token expect(Tok kind, const std::string& what) {
        if (lex_.peek().kind != kind)
            raise(ErrorCode::SyntaxError,
                  what + " at position " + std::to_string(lex_.peek().position));
        return lex_.take();
    }

    NodePtr parse_iff() {
        NodePtr lhs = parse_implies();
        while (lex_.peek().kind == Tok::Iff) {
            const int pos = lex_.take().position;
            NodePtr rhs = parse_implies();
            lhs = make_binary(Formula::Kind::Iff, std::move(lhs), std::move(rhs), pos);
        }
        return lhs;
    }

    NodePtr parse_implies() {
        NodePtr lhs = parse_or();
        if (lex_.peek().kind == Tok::Implies) {
            const int pos = lex_.take().position;
            NodePtr rhs = parse_implies(); // right-associative
            lhs = make_binary(Formula::Kind::Implies, std::move(lhs), std::move(rhs), pos);
        }
        return lhs;
    }

    NodePtr parse_or() {
        NodePtr lhs = parse_and();
        while (lex_.peek().kind == Tok::Or) {
            const int pos = lex_.take().position;
            lhs = make_binary(Formula::Kind::Or, std::move(lhs), parse_and(), pos);
        }
        return lhs;
    }

    NodePtr parse_and() {
        NodePtr lhs = parse_unary();
        while (lex_.peek().kind == Tok::And) {
            const int pos = lex_.take().position;
            lhs = make_binary(Formula::Kind::And, std::move(lhs), parse_unary(), pos);
        }
        return lhs;
    }

    NodePtr parse_unary() {
        if (lex_.peek().kind == Tok::Not) {
            const int pos = lex_.take().position;
            auto node = std::make_unique<Formula::Node>();
            node->kind = Formula::Kind::Not;
            node->lhs = parse_unary();
            node->position = pos;
            return node;
        }
        if (lex_.peek().kind == Tok::LParen) {
            lex_.take();
            NodePtr inner = parse_iff();
            expect(Tok::RParen, "expected ')'");
            return inner;
        }
        return parse_atom();
    }

    NodePtr parse_atom() {
        Token name = expect(Tok::Ident, "expected relation atom");
        int rel = sig_.relation_index(name.text);
        if (rel < 0) {
            // default names R1..Rr when the signature is unnamed
            for (int k = 0; k < sig_.relation_count(); ++k)
                if (sig_.relation_name(k) == name.text) { rel = k; break; }
        }
        if (rel < 0)
            raise(ErrorCode::UnknownRelation,
                  "relation '" + name.text + "' at position " + std::to_string(name.position));
        expect(Tok::LParen, "expected '(' after relation name");
        auto node = std::make_unique<Formula::Node>();
        node->kind = Formula::Kind::Atom;
        node->relation = rel;
        node->position = name.position;
        while (true) {
            Token v = expect(Tok::Ident, "expected variable");
            const auto it = std::find(vars_->begin(), vars_->end(), v.text);
            if (it == vars_->end())
                raise(ErrorCode::UnquantifiedVariable,
                      "variable '" + v.text + "' at position " + std::to_string(v.position));
            const int var = static_cast<int>(it - vars_->begin());
            if (std::find(node->vars.begin(), node->vars.end(), var) != node->vars.end())
                raise(ErrorCode::RepeatedVariableInAtom,
                      "variable '" + v.text + "' repeated at position " +
                          std::to_string(v.position));
            node->vars.push_back(var);
            if (lex_.peek().kind != Tok::Comma) break;
            lex_.take();
        }
        expect(Tok::RParen, "expected ')'");
        if (static_cast<int>(node->vars.size()) != sig_.arity(rel))
            raise(ErrorCode::ArityError,
                  "relation '" + name.text + "' expects " + std::to_string(sig_.arity(rel)) +
                      " arguments, got " + std::to_string(node->vars.size()));
        return node;
    }

    static NodePtr make_binary(Formula::Kind kind, NodePtr lhs, NodePtr rhs, int pos) {
        auto node = std::make_unique<Formula::Node>();
        node->kind = kind;
        node->lhs = std::move(lhs);
        node->rhs = std::move(rhs);
        node->position = pos;
        return node;
    }

    Lexer lex_;
    const Signature& sig_;
    const std::vector<std::string>* vars_ = nullptr;
};

using Poly = MultilinearPoly;

Poly poly_const(double c) {
    Poly p;
    if (c != 0.0) p.terms[{}] = c;
    return p;
}

Poly poly_atom(int relation, std::vector<int> vars) {
    std::sort(vars.begin(), vars.end()); // atoms are symmetric
    Poly p;
    p.terms[{{relation, std::move(vars)}}] = 1.0;
    return p;
}

Poly poly_add(const Poly& a, const Poly& b, double bscale = 1.0) {
    Poly out = a;
    for (const auto& [term, coeff] : b.terms) {
        const double v = out.terms[term] + bscale * coeff;
        if (v == 0.0) out.terms.erase(term);
        else out.terms[term] = v;
    }
    return out;
}

Poly poly_mul(const Poly& a, const Poly& b) {
    Poly out;
    for (const auto& [ta, ca] : a.terms) {
        for (const auto& [tb, cb] : b.terms) {
            Poly::Term merged;
            merged.reserve(ta.size() + tb.size());
            std::merge(ta.begin(), ta.end(), tb.begin(), tb.end(), std::back_inserter(merged));
            merged.erase(std::unique(merged.begin(), merged.end()), merged.end()); // a^k -> a
            const double v = out.terms[merged] + ca * cb;
            if (v == 0.0) out.terms.erase(merged);
            else out.terms[merged] = v;
        }
    }
    return out;
}

Poly arithmetize_node(const Formula::Node& node) {
    switch (node.kind) {
        case Formula::Kind::Atom:
            return poly_atom(node.relation, node.vars);
        case Formula::Kind::Not:
            return poly_add(poly_const(1.0), arithmetize_node(*node.lhs), -1.0);
        case Formula::Kind::And:
            return poly_mul(arithmetize_node(*node.lhs), arithmetize_node(*node.rhs));
        case Formula::Kind::Or: {
            const Poly p = arithmetize_node(*node.lhs);
            const Poly q = arithmetize_node(*node.rhs);
            return poly_add(poly_add(p, q), poly_mul(p, q), -1.0);
        }
        case Formula::Kind::Implies: {
            const Poly p = arithmetize_node(*node.lhs);
            const Poly q = arithmetize_node(*node.rhs);
            // 1 - p(1-q)
            return poly_add(poly_const(1.0), poly_mul(p, poly_add(poly_const(1.0), q, -1.0)),
                            -1.0);
        }
        case Formula::Kind::Iff: {
            // (p => q)(q => p), expanded then reduced
            const Poly p = arithmetize_node(*node.lhs);
            const Poly q = arithmetize_node(*node.rhs);
            const Poly pq = poly_add(poly_const(1.0),
                                     poly_mul(p, poly_add(poly_const(1.0), q, -1.0)), -1.0);
            const Poly qp = poly_add(poly_const(1.0),
                                     poly_mul(q, poly_add(poly_const(1.0), p, -1.0)), -1.0);
            return poly_mul(pq, qp);
        }
    }
    raise(ErrorCode::SyntaxError, "unreachable formula node");
}

} // namespace

Formula parse_formula(const std::string& text, const Signature& sig) {
    Parser parser(text, sig);
    Formula f = parser.parse();
    f.text = text;
    return f;
}

MultilinearPoly arithmetize(const Formula& f) {
    if (!f.matrix) raise(ErrorCode::SyntaxError, "empty formula");
    return arithmetize_node(*f.matrix);
}

QuantumGraph compile_formula(const Formula& f) {
    const MultilinearPoly poly = arithmetize(f);
    std::vector<std::pair<double, MultiHypergraph>> terms;
    for (const auto& [atoms, coeff] : poly.terms) {
        // vertices are the variables used by this term, in quantifier order
        std::vector<int> used;
        for (const auto& [rel, vars] : atoms)
            for (int v : vars) used.push_back(v);
        std::sort(used.begin(), used.end());
        used.erase(std::unique(used.begin(), used.end()), used.end());
        std::vector<int> vertex_of(f.variables.size(), -1);
        for (std::size_t i = 0; i < used.size(); ++i)
            vertex_of[static_cast<std::size_t>(used[i])] = static_cast<int>(i);

        MultiHypergraph g;
        g.n_vertices = static_cast<int>(used.size());
        g.edges.resize(static_cast<std::size_t>(f.sig.relation_count()));
        for (const auto& [rel, vars] : atoms) {
            Tuple t(vars.size());
            for (std::size_t i = 0; i < vars.size(); ++i)
                t[i] = vertex_of[static_cast<std::size_t>(vars[i])];
            g.edges[static_cast<std::size_t>(rel)].push_back(std::move(t));
        }
        terms.emplace_back(coeff, std::move(g));
    }
    return QuantumGraph(f.sig, std::move(terms)).merge_isomorphic();
}

double query_probability(const Formula& f, const std::vector<StepFunction>& solutions) {
    if (solutions.empty())
        raise(ErrorCode::EmptySolutionSet, "query needs at least one solution");
    const QuantumGraph q = compile_formula(f);
    double total = 0.0;
    for (const StepFunction& w : solutions) total += quantum_density(q, w);
    return total / static_cast<double>(solutions.size());
}

} // namespace hypermax
