#include <doctest.h>

#include <nlohmann/json.hpp>
#include <random>

#include "hypermax/json_io.hpp"
#include "test_util.hpp"

using namespace hypermax;
using nlohmann::json;
using testutil::random_stepfn;

TEST_CASE("signature round trip") {
    const Signature named({2, 1}, {"Friends", "Sm"});
    const Signature back = signature_from_json(to_json(named));
    CHECK(back.arities == named.arities);
    CHECK(back.names == named.names);

    const Signature bare({3});
    CHECK(signature_from_json(to_json(bare)).names.empty());
}

TEST_CASE("hypergraph round trip canonicalizes") {
    Signature sig({2});
    const json j{{"n", 3}, {"edges", {{{2, 1}, {0, 2}}}}};
    const MultiHypergraph g = hypergraph_from_json(j, sig);
    CHECK(g.edges[0] == std::vector<Tuple>{{0, 2}, {1, 2}});
    CHECK(hypergraph_from_json(to_json(g), sig) == g);
}

TEST_CASE("quantum graph round trip") {
    Signature sig({2});
    QuantumGraph q(sig, {{1.5, single_edge_graph(sig)}, {-0.25, triangle_graph(sig)}});
    const QuantumGraph back = quantum_from_json(to_json(q), sig);
    REQUIRE(back.terms.size() == q.terms.size());
    for (std::size_t i = 0; i < q.terms.size(); ++i) {
        CHECK(back.terms[i].first == q.terms[i].first);
        CHECK(back.terms[i].second == q.terms[i].second);
    }
    // bare-graph shorthand gives coefficient 1
    const QuantumGraph single = quantum_from_json(to_json(single_edge_graph(sig)), sig);
    REQUIRE(single.terms.size() == 1);
    CHECK(single.terms[0].first == 1.0);
}

TEST_CASE("step function round trip is bit-exact") {
    Signature sig({2, 1});
    std::mt19937_64 rng(13);
    const StepFunction w = random_stepfn(sig, 3, rng);
    const StepFunction back = stepfn_from_json(to_json(w));
    CHECK(back.pi() == w.pi());
    CHECK(back.array(0) == w.array(0));
    CHECK(back.array(1) == w.array(1));
    CHECK(back.mode() == w.mode());
}

TEST_CASE("constraint set round trip") {
    Signature sig({2});
    ConstraintSet cs;
    cs.sig = sig;
    cs.constraints.push_back({QuantumGraph::single(sig, single_edge_graph(sig)), 0.3});
    cs.constraints.push_back({QuantumGraph::single(sig, triangle_graph(sig)), 0.02});
    const ConstraintSet back = constraints_from_json(to_json(cs));
    REQUIRE(back.constraints.size() == 2);
    CHECK(back.sig == sig);
    CHECK(back.constraints[0].target == 0.3);
    CHECK(back.constraints[1].graph.terms[0].second == triangle_graph(sig));
}

TEST_CASE("solver config round trip") {
    SolverConfig cfg;
    cfg.m = 3;
    cfg.restarts = 12;
    cfg.seed = 99;
    cfg.inner_tol = 1e-10;
    cfg.fixed_pi = std::vector<double>{0.25, 0.25, 0.5};
    cfg.mode = Mode::GraphonInterior;
    const SolverConfig back = solver_config_from_json(to_json(cfg));
    CHECK(back.m == cfg.m);
    CHECK(back.restarts == cfg.restarts);
    CHECK(back.seed == cfg.seed);
    CHECK(back.inner_tol == cfg.inner_tol);
    CHECK(back.mode == cfg.mode);
    REQUIRE(back.fixed_pi.has_value());
    CHECK(*back.fixed_pi == *cfg.fixed_pi);
}

TEST_CASE("objective config serialization") {
    Signature sig({2, 1});
    const ObjectiveConfig entropy = ObjectiveConfig::entropy();
    const json j = to_json(entropy, sig);
    CHECK(j.at("kernel") == "entropy");
    CHECK(j.at("relation_weights")[0] == doctest::Approx(0.5));
    CHECK(j.at("relation_weights")[1] == doctest::Approx(1.0));

    const ObjectiveConfig back = objective_from_json(json{{"kernel", "entropy"}});
    CHECK(back.scalar_fn.name == "entropy");

    const ObjectiveConfig quad = objective_from_json(
        json{{"kernel", {{"name", "quadratic"}, {"c", 2.0}, {"center", 0.3}}}});
    CHECK(quad.scalar_fn.f0(0.5) == doctest::Approx(2.0 * 0.04));
}

TEST_CASE("solutions can be loaded from reports, arrays, or single objects") {
    Signature sig({2});
    std::mt19937_64 rng(17);
    const StepFunction w = random_stepfn(sig, 2, rng);

    CHECK(solutions_from_json(to_json(w)).size() == 1);
    CHECK(solutions_from_json(json::array({to_json(w), to_json(w)})).size() == 2);

    json report;
    report["solutions"] = json::array({json{{"stepfn", to_json(w)}}});
    const auto sols = solutions_from_json(report);
    REQUIRE(sols.size() == 1);
    CHECK(sols[0].array(0) == w.array(0));
}

TEST_CASE("missing keys and bad files raise typed errors") {
    CHECK_THROWS_WITH_AS(static_cast<void>(signature_from_json(json{{"foo", 1}})),
                         doctest::Contains("ValidationError"), Error);
    CHECK_THROWS_WITH_AS(static_cast<void>(read_json_file("/nonexistent/file.json")),
                         doctest::Contains("IoError"), Error);
}
