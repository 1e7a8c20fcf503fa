#include "hypermax/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace hypermax {

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int draw_block(std::mt19937_64& rng, const std::vector<double>& pi) {
    const double u = uniform01(rng);
    double c = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) {
        c += pi[i];
        if (u < c) return static_cast<int>(i);
    }
    return static_cast<int>(pi.size()) - 1;
}

// Enumerates i_0 < i_1 < ... < i_{d-1} over [0,n).
bool next_combination(std::vector<int>& comb, int n) {
    const int d = static_cast<int>(comb.size());
    for (int pos = d - 1; pos >= 0; --pos) {
        if (comb[static_cast<std::size_t>(pos)] < n - (d - pos)) {
            ++comb[static_cast<std::size_t>(pos)];
            for (int p = pos + 1; p < d; ++p)
                comb[static_cast<std::size_t>(p)] = comb[static_cast<std::size_t>(p - 1)] + 1;
            return true;
        }
    }
    return false;
}

} // namespace

MultiHypergraph sample_w_random(const StepFunction& w, const SampleConfig& cfg) {
    if (cfg.n < 1) raise(ErrorCode::ValidationError, "vertex count must be >= 1");
    w.check_range(Mode::GraphonUnit);
    std::mt19937_64 rng(mix(cfg.seed, 0x77c6a1d6u));

    std::vector<int> block(static_cast<std::size_t>(cfg.n));
    for (int v = 0; v < cfg.n; ++v) block[static_cast<std::size_t>(v)] = draw_block(rng, w.pi());

    const Signature& sig = w.signature();
    MultiHypergraph g;
    g.n_vertices = cfg.n;
    g.edges.resize(static_cast<std::size_t>(sig.relation_count()));
    std::vector<int> blocks;
    for (int k = 0; k < sig.relation_count(); ++k) {
        const int d = sig.arity(k);
        if (d > cfg.n) continue;
        std::vector<int> comb(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) comb[static_cast<std::size_t>(i)] = i;
        do {
            blocks.resize(static_cast<std::size_t>(d));
            for (int i = 0; i < d; ++i)
                blocks[static_cast<std::size_t>(i)] = block[static_cast<std::size_t>(comb[static_cast<std::size_t>(i)])];
            const double p = w.at(k, blocks);
            if (p >= 1.0 || (p > 0.0 && uniform01(rng) < p))
                g.edges[static_cast<std::size_t>(k)].push_back(Tuple(comb.begin(), comb.end()));
        } while (next_combination(comb, cfg.n));
    }
    return validate_and_canonicalize(sig, g);
}

EmpiricalDensity empirical_density(const MultiHypergraph& f, const MultiHypergraph& g,
                                   const Signature& sig, const SampleConfig& cfg) {
    if (g.n_vertices < 1) raise(ErrorCode::EmptyGraph, "host graph has no vertices");
    EmpiricalDensity out;
    const double exact_terms =
        std::pow(static_cast<double>(g.n_vertices), static_cast<double>(f.n_vertices));
    if (exact_terms <= kDensityTermGuard) {
        out.value = density(f, StepFunction::from_finite_graph(sig, g));
        out.exact = true;
        return out;
    }

    // Monte Carlo over uniform vertex maps with repetition, matching the
    // exact summation's semantics.
    const MultiHypergraph fc = validate_and_canonicalize(sig, f);
    const MultiHypergraph gc = validate_and_canonicalize(sig, g);
    std::mt19937_64 rng(mix(cfg.seed, 0x51ab3e1bu));
    long long hits = 0;
    std::vector<VertexId> map(static_cast<std::size_t>(fc.n_vertices));
    for (long long s = 0; s < cfg.mc_samples; ++s) {
        for (auto& v : map)
            v = static_cast<VertexId>(rng() % static_cast<std::uint64_t>(gc.n_vertices));
        bool all = true;
        for (int k = 0; k < fc.relation_count() && all; ++k) {
            for (const Tuple& e : fc.edges[static_cast<std::size_t>(k)]) {
                Tuple img(e.size());
                for (std::size_t i = 0; i < e.size(); ++i)
                    img[i] = map[static_cast<std::size_t>(e[i])];
                std::sort(img.begin(), img.end());
                if (std::adjacent_find(img.begin(), img.end()) != img.end() ||
                    !gc.has_edge(k, img)) {
                    all = false;
                    break;
                }
            }
        }
        if (all) ++hits;
    }
    const double p = static_cast<double>(hits) / static_cast<double>(cfg.mc_samples);
    out.value = p;
    out.exact = false;
    out.std_error = std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(cfg.mc_samples));
    return out;
}

std::vector<ConvergenceRow> convergence_report(const StepFunction& w,
                                               const std::vector<MultiHypergraph>& fset,
                                               const std::vector<int>& n_list,
                                               const SampleConfig& cfg) {
    std::vector<ConvergenceRow> rows;
    for (int n : n_list) {
        std::vector<std::vector<double>> per_graph(fset.size());
        for (int trial = 0; trial < cfg.trials; ++trial) {
            SampleConfig sample_cfg = cfg;
            sample_cfg.n = n;
            sample_cfg.seed = mix(cfg.seed, static_cast<std::uint64_t>(trial) * 2654435761u +
                                                static_cast<std::uint64_t>(n));
            const MultiHypergraph g = sample_w_random(w, sample_cfg);
            for (std::size_t fi = 0; fi < fset.size(); ++fi)
                per_graph[fi].push_back(
                    empirical_density(fset[fi], g, w.signature(), sample_cfg).value);
        }
        for (std::size_t fi = 0; fi < fset.size(); ++fi) {
            ConvergenceRow row;
            row.n = n;
            row.graph_index = static_cast<int>(fi);
            row.target = density(fset[fi], w);
            row.trials = cfg.trials;
            double mean = 0.0;
            for (double v : per_graph[fi]) mean += v;
            mean /= static_cast<double>(per_graph[fi].size());
            double var = 0.0;
            for (double v : per_graph[fi]) var += (v - mean) * (v - mean);
            var = per_graph[fi].size() > 1
                      ? var / static_cast<double>(per_graph[fi].size() - 1)
                      : 0.0;
            row.mean = mean;
            row.stddev = std::sqrt(var);
            row.std_error = row.stddev / std::sqrt(static_cast<double>(per_graph[fi].size()));
            row.z_gap = row.std_error > 0.0 ? (row.mean - row.target) / row.std_error : 0.0;
            rows.push_back(row);
        }
    }
    return rows;
}

} // namespace hypermax
