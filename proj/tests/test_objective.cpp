#include <doctest.h>

#include <cmath>
#include <random>

#include "hypermax/objective.hpp"
#include "test_util.hpp"

using namespace hypermax;
using testutil::random_stepfn;

namespace {

// Independent oracle: plain loop over full multi-indices, no canonical
// shortcuts shared with the implementation.
double naive_objective(const ObjectiveConfig& cfg, const StepFunction& w) {
    const Signature& sig = w.signature();
    double total = 0.0;
    for (int k = 0; k < sig.relation_count(); ++k) {
        const int d = sig.arity(k);
        const int m = w.block_count();
        std::vector<int> idx(static_cast<std::size_t>(d), 0);
        double rel = 0.0;
        while (true) {
            double p = 1.0;
            for (int b : idx) p *= w.pi()[static_cast<std::size_t>(b)];
            rel += cfg.scalar_fn.f0(w.at(k, idx)) * p;
            int pos = d - 1;
            while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == m - 1) {
                idx[static_cast<std::size_t>(pos)] = 0;
                --pos;
            }
            if (pos < 0) break;
            ++idx[static_cast<std::size_t>(pos)];
        }
        total += cfg.weight(sig, k) * rel;
    }
    return total;
}

// Per-relation contribution to f_s, for the homogeneity identity.
double relation_contribution(const ObjectiveConfig& cfg, const StepFunction& w, int k) {
    const Signature& sig = w.signature();
    const int d = sig.arity(k);
    const int m = w.block_count();
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    double rel = 0.0;
    while (true) {
        double p = 1.0;
        for (int b : idx) p *= w.pi()[static_cast<std::size_t>(b)];
        rel += cfg.scalar_fn.f0(w.at(k, idx)) * p;
        int pos = d - 1;
        while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == m - 1) {
            idx[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
        ++idx[static_cast<std::size_t>(pos)];
    }
    return cfg.weight(sig, k) * rel;
}

StepFunction with_entry(const StepFunction& w, int k, const std::vector<int>& canon, double value) {
    std::vector<std::vector<double>> arrays;
    for (int rel = 0; rel < w.signature().relation_count(); ++rel) arrays.push_back(w.array(rel));
    StepFunction out = StepFunction::raw(w.signature(), w.pi(), std::move(arrays), Mode::RealValued);
    for (const auto& o : index_orbit(canon)) out.at_mut(k, o) = value;
    return out;
}

StepFunction with_pi(const StepFunction& w, const std::vector<double>& pi) {
    std::vector<std::vector<double>> arrays;
    for (int rel = 0; rel < w.signature().relation_count(); ++rel) arrays.push_back(w.array(rel));
    return StepFunction::raw(w.signature(), pi, std::move(arrays), Mode::RealValued);
}

void check_objective_fd(const ObjectiveConfig& cfg, const StepFunction& w, double h = 1e-5,
                        double rel_tol = 1e-6, double abs_floor = 1e-8) {
    const GradientVector g = objective_gradient(cfg, w);
    const Signature& sig = w.signature();
    for (int k = 0; k < sig.relation_count(); ++k) {
        const auto canon = canonical_multi_indices(w.block_count(), sig.arity(k));
        for (std::size_t ci = 0; ci < canon.size(); ++ci) {
            const double v = w.at(k, canon[ci]);
            const double fd = (naive_objective(cfg, with_entry(w, k, canon[ci], v + h)) -
                               naive_objective(cfg, with_entry(w, k, canon[ci], v - h))) /
                              (2 * h);
            CHECK(std::abs(g.a_part[static_cast<std::size_t>(k)][ci] - fd) <=
                  std::max(abs_floor, rel_tol * std::abs(fd)));
        }
    }
    for (int i = 0; i < w.block_count(); ++i) {
        std::vector<double> up = w.pi(), dn = w.pi();
        up[static_cast<std::size_t>(i)] += h;
        dn[static_cast<std::size_t>(i)] -= h;
        const double fd =
            (naive_objective(cfg, with_pi(w, up)) - naive_objective(cfg, with_pi(w, dn))) / (2 * h);
        CHECK(std::abs(g.pi_part[static_cast<std::size_t>(i)] - fd) <=
              std::max(abs_floor, rel_tol * std::abs(fd)));
    }
}

} // namespace

TEST_CASE("rate function values") {
    Signature sig({2});
    const ObjectiveConfig entropy = ObjectiveConfig::entropy();
    CHECK(objective_value(entropy, StepFunction::constant(sig, 0.5)) == doctest::Approx(0.0));

    // h_{1/2}(1) = log 2, relation weight 1/2! = 1/2
    CHECK_THROWS_WITH_AS(
        static_cast<void>(objective_value(entropy, StepFunction::constant(sig, 1.0))),
        doctest::Contains("DomainViolation"), Error);
    CHECK(objective_value(entropy, StepFunction::constant(sig, 1.0), true) ==
          doctest::Approx(std::log(2.0) / 2.0).epsilon(1e-9));

    // quadratic kernel: f0(x) = x^2 at constant p
    ObjectiveConfig quad;
    quad.scalar_fn = quadratic_kernel(1.0, 0.0);
    Signature sig2({2, 1});
    const double p = 0.3;
    const double wsum = 0.5 + 1.0; // weights 1/2! and 1/1!
    CHECK(objective_value(quad, StepFunction::constant(sig2, p)) ==
          doctest::Approx(p * p * wsum));
}

TEST_CASE("rate function is non-negative, zero only at one-half") {
    Signature sig({2, 1});
    const ObjectiveConfig entropy = ObjectiveConfig::entropy();
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 30; ++trial) {
        const StepFunction w = random_stepfn(sig, 3, rng, 0.05, 0.95);
        const double value = objective_value(entropy, w);
        CHECK(value >= 0.0);
        bool all_half = true;
        for (int k = 0; k < 2; ++k)
            for (double v : w.array(k)) all_half = all_half && std::abs(v - 0.5) < 1e-12;
        if (!all_half) CHECK(value > 0.0);
    }
    CHECK(objective_value(entropy, StepFunction::constant(sig, 0.5)) == doctest::Approx(0.0));
}

TEST_CASE("objective gradient closed forms") {
    Signature sig({2});
    // f0 = x^2 at m = 1: d f_s / dA = 2 A w
    ObjectiveConfig quad;
    quad.scalar_fn = quadratic_kernel(1.0, 0.0);
    const StepFunction c = StepFunction::constant(sig, 0.4);
    const GradientVector g = objective_gradient(quad, c);
    CHECK(g.a_part[0][0] == doctest::Approx(2.0 * 0.4 * 0.5));

    // entropy kernel at m = 2, pi = (1/2, 1/2): off-diagonal coordinate
    std::mt19937_64 rng(47);
    const StepFunction w = random_stepfn(sig, 2, rng, 0.2, 0.8, true);
    const GradientVector ge = objective_gradient(ObjectiveConfig::entropy(), w);
    const double a01 = w.at(0, {0, 1});
    CHECK(ge.a_part[0][1] ==
          doctest::Approx(0.5 * 2.0 * std::log(a01 / (1.0 - a01)) * 0.25).epsilon(1e-12));
}

TEST_CASE("objective gradients match finite differences") {
    std::mt19937_64 rng(53);
    for (const Signature& sig : {Signature({2}), Signature({2, 1}), Signature({3})}) {
        for (int trial = 0; trial < 5; ++trial) {
            const StepFunction w = random_stepfn(sig, 2 + static_cast<int>(rng() % 3), rng,
                                                 0.15, 0.85);
            check_objective_fd(ObjectiveConfig::entropy(), w);
            ObjectiveConfig quad;
            quad.scalar_fn = quadratic_kernel(0.7, 0.3);
            check_objective_fd(quad, w);
        }
    }
}

TEST_CASE("pi homogeneity of the objective") {
    Signature sig({2, 1});
    std::mt19937_64 rng(59);
    const ObjectiveConfig entropy = ObjectiveConfig::entropy();
    for (int trial = 0; trial < 10; ++trial) {
        const StepFunction w = random_stepfn(sig, 3, rng);
        const GradientVector g = objective_gradient(entropy, w);
        double pi_inner = 0.0;
        for (int i = 0; i < 3; ++i)
            pi_inner += w.pi()[static_cast<std::size_t>(i)] * g.pi_part[static_cast<std::size_t>(i)];
        double expect = 0.0;
        for (int k = 0; k < 2; ++k)
            expect += sig.arity(k) * relation_contribution(entropy, w, k);
        CHECK(pi_inner == doctest::Approx(expect).epsilon(1e-10));
    }
}

TEST_CASE("objective is split-invariant") {
    Signature sig({2});
    std::mt19937_64 rng(61);
    const ObjectiveConfig entropy = ObjectiveConfig::entropy();
    for (int trial = 0; trial < 10; ++trial) {
        const StepFunction w = random_stepfn(sig, 3, rng);
        const double lambda = testutil::uniform01(rng);
        const int k = static_cast<int>(rng() % 3);
        CHECK(objective_value(entropy, w.split(lambda, k)) ==
              doctest::Approx(objective_value(entropy, w)).epsilon(1e-12));
    }
}

TEST_CASE("rate function is convex in A for fixed pi") {
    Signature sig({2});
    std::mt19937_64 rng(67);
    const ObjectiveConfig entropy = ObjectiveConfig::entropy();
    for (int trial = 0; trial < 20; ++trial) {
        const StepFunction a = random_stepfn(sig, 3, rng, 0.05, 0.95);
        StepFunction b = random_stepfn(sig, 3, rng, 0.05, 0.95);
        b = StepFunction::make(sig, a.pi(), {b.array(0)}, Mode::GraphonUnit);
        std::vector<double> mid(a.array(0).size());
        for (std::size_t i = 0; i < mid.size(); ++i)
            mid[i] = 0.5 * (a.array(0)[i] + b.array(0)[i]);
        const StepFunction m = StepFunction::make(sig, a.pi(), {mid}, Mode::GraphonUnit);
        CHECK(objective_value(entropy, m) <=
              0.5 * objective_value(entropy, a) + 0.5 * objective_value(entropy, b) + 1e-12);
    }
}

TEST_CASE("tabulated kernels interpolate their samples") {
    // tabulate x^2 on a fine grid and compare against the closed form
    std::vector<double> xs, f0, f0p;
    for (int i = 0; i <= 100; ++i) {
        const double x = i / 100.0;
        xs.push_back(x);
        f0.push_back(x * x);
        f0p.push_back(2 * x);
    }
    ObjectiveConfig tab;
    tab.scalar_fn = tabulated_kernel(xs, f0, f0p);
    ObjectiveConfig quad;
    quad.scalar_fn = quadratic_kernel(1.0, 0.0);

    Signature sig({2});
    std::mt19937_64 rng(79);
    const StepFunction w = random_stepfn(sig, 3, rng, 0.1, 0.9);
    CHECK(objective_value(tab, w) == doctest::Approx(objective_value(quad, w)).epsilon(1e-4));
    const GradientVector a = objective_gradient(tab, w);
    const GradientVector b = objective_gradient(quad, w);
    for (std::size_t i = 0; i < a.a_part[0].size(); ++i)
        CHECK(a.a_part[0][i] == doctest::Approx(b.a_part[0][i]).epsilon(1e-4));

    CHECK_THROWS_WITH_AS(static_cast<void>(tabulated_kernel({0.0}, {0.0}, {0.0})),
                         doctest::Contains("ValidationError"), Error);
}

TEST_CASE("gradient requires strictly interior entries") {
    Signature sig({2});
    CHECK_THROWS_WITH_AS(
        static_cast<void>(objective_gradient(ObjectiveConfig::entropy(),
                                             StepFunction::constant(sig, 1.0))),
        doctest::Contains("DomainViolation"), Error);
}
