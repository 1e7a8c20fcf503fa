#include <doctest.h>

#include <cmath>
#include <random>

#include "hypermax/density.hpp"
#include "hypermax/stepfn.hpp"
#include "test_util.hpp"

using namespace hypermax;
using testutil::random_graph;
using testutil::random_stepfn;
using testutil::uniform01;

TEST_CASE("parameter counts n(m,r,d)") {
    CHECK(step_parameter_count(Signature({2}), 1) == 1);
    CHECK(step_parameter_count(Signature({2}), 2) == 3); // A11, A12, A22
    CHECK(step_parameter_count(Signature({2}), 4) == 10);
    CHECK(step_parameter_count(Signature({2, 1}), 2) == 5);
    CHECK(step_parameter_count(Signature({3}), 2) == 4);
    CHECK(canonical_multi_indices(2, 2).size() == 3);
    CHECK(canonical_multi_indices(3, 3).size() == 10);

    const StepFunction w =
        StepFunction::make(Signature({2}), {0.5, 0.5}, {{0.1, 0.2, 0.2, 0.3}});
    CHECK(w.free_parameter_count() == 4); // 3 canonical entries + 1 simplex coordinate
}

TEST_CASE("construction validates the simplex and symmetry") {
    Signature sig({2});
    CHECK_THROWS_WITH_AS(
        static_cast<void>(StepFunction::make(sig, {0.6, 0.6}, {{0.1, 0.2, 0.2, 0.3}})),
        doctest::Contains("SimplexViolation"), Error);
    CHECK_THROWS_WITH_AS(
        static_cast<void>(StepFunction::make(sig, {0.5, 0.5}, {{0.1, 0.9, 0.2, 0.3}})),
        doctest::Contains("SymmetryViolation"), Error);
    CHECK_THROWS_WITH_AS(
        static_cast<void>(StepFunction::make(sig, {0.5, 0.5}, {{0.1, 1.9, 1.9, 0.3}})),
        doctest::Contains("RangeViolation"), Error);
    // interior mode rejects the boundary
    CHECK_THROWS_WITH_AS(static_cast<void>(StepFunction::make(sig, {1.0}, {{0.0}},
                                                              Mode::GraphonInterior)),
                         doctest::Contains("RangeViolation"), Error);

    const StepFunction w = StepFunction::constant(sig, 0.3);
    CHECK(w.block_count() == 1);
    CHECK(w.at(0, {0, 0}) == doctest::Approx(0.3));
}

TEST_CASE("value_at follows the right-closed cell convention") {
    Signature sig({2});
    const StepFunction c = StepFunction::constant(sig, 0.42);
    CHECK(c.value_at(0, {0.1, 0.99}) == doctest::Approx(0.42));

    const StepFunction w =
        StepFunction::make(sig, {0.5, 0.5}, {{0.0, 1.0, 1.0, 0.0}});
    CHECK(w.value_at(0, {0.25, 0.75}) == doctest::Approx(1.0));
    CHECK(w.value_at(0, {0.5, 0.5}) == doctest::Approx(0.0)); // boundary goes left
    CHECK(w.value_at(0, {0.0, 0.0}) == doctest::Approx(0.0)); // x = 0 -> first cell
    CHECK(w.value_at(0, {1.0, 0.25}) == doctest::Approx(1.0));
    CHECK(w.value_at(0, {1.0, 0.75}) == doctest::Approx(0.0)); // both in the last cell
}

TEST_CASE("value_at agrees with independent cell lookup on random points") {
    Signature sig({2, 1});
    std::mt19937_64 rng(3);
    const StepFunction w = random_stepfn(sig, 4, rng);
    for (int trial = 0; trial < 200; ++trial) {
        const double x = uniform01(rng);
        const double y = uniform01(rng);
        // independent cell computation from cumulative boundaries
        auto cell = [&](double v) {
            if (v <= 0) return 0;
            double c = 0;
            for (int i = 0; i < w.block_count(); ++i) {
                const double lo = c;
                c += w.pi()[static_cast<std::size_t>(i)];
                if (v > lo && v <= c) return i;
            }
            return w.block_count() - 1;
        };
        CHECK(w.value_at(0, {x, y}) == doctest::Approx(w.at(0, {cell(x), cell(y)})));
        CHECK(w.value_at(1, {x}) == doctest::Approx(w.at(1, {cell(x)})));
    }
}

TEST_CASE("split keeps the function pointwise unchanged") {
    Signature sig({2});
    const StepFunction c = StepFunction::constant(sig, 0.7);
    const StepFunction s = c.split(0.4, 0);
    CHECK(s.block_count() == 2);
    CHECK(s.pi()[0] == doctest::Approx(0.4));
    CHECK(s.pi()[1] == doctest::Approx(0.6));
    CHECK(s.at(0, {0, 1}) == doctest::Approx(0.7));

    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const StepFunction w = random_stepfn(sig, 3, rng);
        const double lambda = uniform01(rng);
        const int k = static_cast<int>(rng() % 3);
        CHECK(l1_distance(w, w.split(lambda, k)) == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("split with lambda 0 then dropping the empty block recovers the input") {
    Signature sig({2});
    std::mt19937_64 rng(9);
    const StepFunction w = random_stepfn(sig, 3, rng);
    const StepFunction back = w.split(0.0, 1).drop_empty_blocks();
    CHECK(back.block_count() == 3);
    CHECK(l1_distance(w, back) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("common refinement overlays boundaries and preserves values") {
    Signature sig({2});
    const StepFunction w = StepFunction::make(sig, {0.5, 0.5}, {{0.1, 0.8, 0.8, 0.3}});
    const StepFunction v = StepFunction::make(sig, {0.3, 0.7}, {{0.2, 0.6, 0.6, 0.9}});
    auto [rw, rv] = common_refinement(w, v);
    CHECK(rw.block_count() == 3); // boundaries {0.3, 0.5, 1.0}
    CHECK(rw.same_partition(rv));
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const double x = uniform01(rng);
        const double y = uniform01(rng);
        CHECK(rw.value_at(0, {x, y}) == doctest::Approx(w.value_at(0, {x, y})));
        CHECK(rv.value_at(0, {x, y}) == doctest::Approx(v.value_at(0, {x, y})));
    }

    auto [aw, av] = common_refinement(w, w);
    CHECK(aw.block_count() == 2); // identical partitions stay put
}

TEST_CASE("refinement preserves densities of both arguments") {
    Signature sig({2});
    std::mt19937_64 rng(17);
    const StepFunction w = random_stepfn(sig, 3, rng);
    const StepFunction v = random_stepfn(sig, 2, rng);
    auto [rw, rv] = common_refinement(w, v);
    const MultiHypergraph tri = triangle_graph(sig);
    CHECK(testutil::naive_density(tri, rw) ==
          doctest::Approx(testutil::naive_density(tri, w)).epsilon(1e-12));
    CHECK(testutil::naive_density(tri, rv) ==
          doctest::Approx(testutil::naive_density(tri, v)).epsilon(1e-12));
}

TEST_CASE("L1 distance") {
    Signature sig({2});
    const StepFunction p = StepFunction::constant(sig, 0.8);
    const StepFunction q = StepFunction::constant(sig, 0.25);
    CHECK(l1_distance(p, p) == doctest::Approx(0.0));
    CHECK(l1_distance(p, q) == doctest::Approx(0.55));

    const StepFunction cb = StepFunction::make(sig, {0.5, 0.5}, {{0.0, 1.0, 1.0, 0.0}});
    const StepFunction half = StepFunction::constant(sig, 0.5);
    CHECK(l1_distance(cb, half) == doctest::Approx(0.5)); // 4 cells x 1/2 x 1/4
}

TEST_CASE("cut norm on closed-form instances") {
    Signature sig({2});
    CHECK(cut_norm(StepFunction::constant(sig, 0.6))[0].value == doctest::Approx(0.6));

    const StepFunction pm = StepFunction::make(sig, {0.5, 0.5}, {{-1.0, 1.0, 1.0, -1.0}},
                                               Mode::RealValued);
    const auto res = cut_norm(pm);
    CHECK(res[0].value == doctest::Approx(0.25)); // one off-diagonal box
    CHECK(res[0].axis_subsets[0].size() == 1);
    CHECK(res[0].axis_subsets[1].size() == 1);

    // unary relation: positive-part selection
    Signature sig1({1});
    const StepFunction u =
        StepFunction::make(sig1, {0.25, 0.25, 0.5}, {{0.4, -0.8, 0.2}}, Mode::RealValued);
    const auto r1 = cut_norm(u);
    CHECK(r1[0].value == doctest::Approx(0.25 * 0.4 + 0.5 * 0.2));
}

TEST_CASE("heuristic cut norm matches exact enumeration") {
    Signature sig({2});
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 40; ++trial) {
        const int m = 2 + static_cast<int>(rng() % 7);
        const StepFunction w = random_stepfn(sig, m, rng, -1.0, 1.0);
        const double exact = cut_norm_total(w);
        CutNormOptions heur;
        heur.exact = false;
        heur.restarts = 40;
        heur.seed = 1000 + static_cast<std::uint64_t>(trial);
        const double approx = cut_norm_total(w, heur);
        CHECK(approx <= exact + 1e-12);
        CHECK(approx == doctest::Approx(exact).epsilon(1e-10));
    }
}

TEST_CASE("exact cut norm guard") {
    Signature sig({2});
    std::mt19937_64 rng(29);
    const StepFunction w = random_stepfn(sig, 11, rng);
    CHECK_THROWS_WITH_AS(static_cast<void>(cut_norm(w)), doctest::Contains("ExactBoundExceeded"),
                         Error);
}

TEST_CASE("aligned cut distance") {
    Signature sig({2});
    std::mt19937_64 rng(31);
    const StepFunction w = random_stepfn(sig, 3, rng);
    const StepFunction v = w.permute_blocks({2, 0, 1});
    CHECK(cut_distance_aligned(w, v) == doctest::Approx(0.0).epsilon(1e-12));

    // one entry perturbed by eps: at most eps/4, strictly positive
    const double eps = 1e-3;
    StepFunction u = StepFunction::make(sig, {0.5, 0.5}, {{0.3, 0.6, 0.6, 0.4}});
    StepFunction u2 = StepFunction::make(sig, {0.5, 0.5}, {{0.3 + eps, 0.6, 0.6, 0.4}});
    const double dist = cut_distance_aligned(u, u2);
    CHECK(dist > 0.0);
    CHECK(dist <= eps / 4 + 1e-15);

    const StepFunction odd = StepFunction::make(sig, {0.3, 0.7}, {{0.1, 0.2, 0.2, 0.3}});
    CHECK_THROWS_WITH_AS(static_cast<void>(cut_distance_aligned(u, odd)),
                         doctest::Contains("PartitionsNotPermutable"), Error);
}

TEST_CASE("cut norm is bounded by the L1 norm") {
    Signature sig({2, 1});
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 20; ++trial) {
        const StepFunction w = random_stepfn(sig, 4, rng, -1.0, 1.0);
        const auto cuts = cut_norm(w);
        const auto l1s = l1_norms(w);
        for (std::size_t k = 0; k < cuts.size(); ++k) CHECK(cuts[k].value <= l1s[k] + 1e-12);

        StepFunction v = random_stepfn(sig, 4, rng, -1.0, 1.0);
        v = StepFunction::make(sig, w.pi(), {v.array(0), v.array(1)}, Mode::RealValued);
        CHECK(cut_distance_aligned(w, v) <= l1_distance(w, v) + 1e-12);
    }
}

// The counting inequality needs the |E(F)| factor: the factor-free form
// fails already for constants, e.g. W = 0.9, V = 0.8 and the 2-edge path
// (0.81 - 0.64 = 0.17 > 0.1).
TEST_CASE("counting inequality with the edge factor holds for linear graphs") {
    Signature sig({2});
    std::mt19937_64 rng(41);
    int checked = 0;
    for (int trial = 0; trial < 15; ++trial) {
        const int m = 2 + static_cast<int>(rng() % 3);
        const StepFunction w = random_stepfn(sig, m, rng);
        StepFunction v = random_stepfn(sig, m, rng);
        v = StepFunction::make(sig, w.pi(), {v.array(0)}, Mode::GraphonUnit);
        const double dist = cut_distance_aligned(w, v);
        for (int g = 0; g < 4; ++g) {
            const MultiHypergraph f = random_graph(sig, 3 + static_cast<int>(rng() % 2), rng);
            if (!is_linear_hypergraph(f)) continue;
            const double tw = testutil::naive_density(f, w);
            const double tv = testutil::naive_density(f, v);
            const double edges = static_cast<double>(f.total_edge_count());
            CHECK(std::abs(tw - tv) <= edges * dist + 1e-12);
            ++checked;
        }
    }
    CHECK(checked > 20);

    // single-edge F: the factor-free bound is exact
    const StepFunction a = StepFunction::constant(sig, 0.9);
    const StepFunction b = StepFunction::constant(sig, 0.8);
    const MultiHypergraph e = single_edge_graph(sig);
    CHECK(std::abs(testutil::naive_density(e, a) - testutil::naive_density(e, b)) <=
          cut_distance_aligned(a, b) + 1e-12);
}

TEST_CASE("from_finite_graph structure") {
    Signature sig({2});
    const StepFunction e = StepFunction::from_finite_graph(sig, single_edge_graph(sig));
    CHECK(e.block_count() == 2);
    CHECK(e.pi()[0] == doctest::Approx(0.5));
    CHECK(e.at(0, {0, 1}) == doctest::Approx(1.0));
    CHECK(e.at(0, {0, 0}) == doctest::Approx(0.0)); // diagonal cells stay 0

    const StepFunction z = StepFunction::from_finite_graph(sig, empty_graph(sig, 4));
    for (double v : z.array(0)) CHECK(v == 0.0);

    CHECK_THROWS_WITH_AS(
        static_cast<void>(StepFunction::from_finite_graph(sig, empty_graph(sig, 0))),
        doctest::Contains("EmptyGraph"), Error);
}

TEST_CASE("canonical block order sorts by descending pi") {
    Signature sig({2});
    const StepFunction w =
        StepFunction::make(sig, {0.2, 0.5, 0.3}, {{0.1, 0.2, 0.3, 0.2, 0.4, 0.5, 0.3, 0.5, 0.6}});
    const StepFunction c = w.canonical_block_order();
    CHECK(c.pi()[0] == doctest::Approx(0.5));
    CHECK(c.pi()[1] == doctest::Approx(0.3));
    CHECK(c.pi()[2] == doctest::Approx(0.2));
    CHECK(l1_distance_aligned(w, c) == doctest::Approx(0.0).epsilon(1e-12));
}
