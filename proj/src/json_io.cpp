#include "hypermax/json_io.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

namespace hypermax {

using nlohmann::json;

namespace {

const json& require(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key))
        raise(ErrorCode::ValidationError, std::string("missing JSON key '") + key + "'");
    return j.at(key);
}

} // namespace

json to_json(const Signature& sig) {
    json j{{"arities", sig.arities}};
    if (!sig.names.empty()) j["names"] = sig.names;
    return j;
}

Signature signature_from_json(const json& j) {
    Signature sig(require(j, "arities").get<std::vector<int>>(),
                  j.value("names", std::vector<std::string>{}));
    return sig;
}

json to_json(const MultiHypergraph& g) {
    return json{{"n", g.n_vertices}, {"edges", g.edges}};
}

MultiHypergraph hypergraph_from_json(const json& j, const Signature& sig) {
    MultiHypergraph g;
    g.n_vertices = require(j, "n").get<int>();
    g.edges = require(j, "edges").get<std::vector<std::vector<Tuple>>>();
    return validate_and_canonicalize(sig, g);
}

json to_json(const QuantumGraph& q) {
    json terms = json::array();
    for (const auto& [coeff, graph] : q.terms)
        terms.push_back(json{{"coeff", coeff}, {"graph", to_json(graph)}});
    return json{{"terms", terms}};
}

QuantumGraph quantum_from_json(const json& j, const Signature& sig) {
    std::vector<std::pair<double, MultiHypergraph>> terms;
    if (j.contains("terms")) {
        for (const auto& t : j.at("terms"))
            terms.emplace_back(require(t, "coeff").get<double>(),
                               hypergraph_from_json(require(t, "graph"), sig));
    } else {
        // bare hypergraph shorthand, coefficient 1
        terms.emplace_back(1.0, hypergraph_from_json(j, sig));
    }
    return QuantumGraph(sig, std::move(terms));
}

json to_json(const StepFunction& w) {
    json arrays = json::array();
    for (int k = 0; k < w.signature().relation_count(); ++k) arrays.push_back(w.array(k));
    return json{{"arities", w.signature().arities},
                {"pi", w.pi()},
                {"arrays", arrays},
                {"mode", mode_name(w.mode())}};
}

StepFunction stepfn_from_json(const json& j) {
    Signature sig(require(j, "arities").get<std::vector<int>>(),
                  j.value("names", std::vector<std::string>{}));
    return StepFunction::make(sig, require(j, "pi").get<std::vector<double>>(),
                              require(j, "arrays").get<std::vector<std::vector<double>>>(),
                              mode_from_name(j.value("mode", "graphon")));
}

json to_json(const ConstraintSet& cs) {
    json constraints = json::array();
    for (const auto& c : cs.constraints)
        constraints.push_back(json{{"quantum", to_json(c.graph)}, {"target", c.target}});
    return json{{"signature", to_json(cs.sig)}, {"constraints", constraints}};
}

ConstraintSet constraints_from_json(const json& j) {
    ConstraintSet cs;
    cs.sig = signature_from_json(require(j, "signature"));
    for (const auto& c : require(j, "constraints")) {
        Constraint constraint;
        if (c.contains("quantum"))
            constraint.graph = quantum_from_json(c.at("quantum"), cs.sig);
        else if (c.contains("graph"))
            constraint.graph = quantum_from_json(c.at("graph"), cs.sig);
        else
            raise(ErrorCode::ValidationError, "constraint needs 'quantum' or 'graph'");
        constraint.target = require(c, "target").get<double>();
        cs.constraints.push_back(std::move(constraint));
    }
    return cs;
}

json to_json(const SolverConfig& cfg) {
    json j{{"m", cfg.m},
           {"restarts", cfg.restarts},
           {"seed", cfg.seed},
           {"penalty",
            json{{"mu0", cfg.penalty.mu0},
                 {"growth", cfg.penalty.growth},
                 {"mu_max", cfg.penalty.mu_max},
                 {"max_outer", cfg.penalty.max_outer}}},
           {"inner_tol", cfg.inner_tol},
           {"constraint_tol", cfg.constraint_tol},
           {"max_inner_iterations", cfg.max_inner_iterations},
           {"interior_eps", cfg.interior_eps},
           {"pi_floor", cfg.pi_floor},
           {"mode", mode_name(cfg.mode)},
           {"threads", cfg.threads}};
    if (cfg.fixed_pi) j["fixed_pi"] = *cfg.fixed_pi;
    return j;
}

SolverConfig solver_config_from_json(const json& j) {
    SolverConfig cfg;
    cfg.m = j.value("m", cfg.m);
    cfg.restarts = j.value("restarts", cfg.restarts);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("penalty")) {
        const json& p = j.at("penalty");
        cfg.penalty.mu0 = p.value("mu0", cfg.penalty.mu0);
        cfg.penalty.growth = p.value("growth", cfg.penalty.growth);
        cfg.penalty.mu_max = p.value("mu_max", cfg.penalty.mu_max);
        cfg.penalty.max_outer = p.value("max_outer", cfg.penalty.max_outer);
    }
    cfg.inner_tol = j.value("inner_tol", cfg.inner_tol);
    cfg.constraint_tol = j.value("constraint_tol", cfg.constraint_tol);
    cfg.max_inner_iterations = j.value("max_inner_iterations", cfg.max_inner_iterations);
    cfg.interior_eps = j.value("interior_eps", cfg.interior_eps);
    cfg.pi_floor = j.value("pi_floor", cfg.pi_floor);
    cfg.mode = mode_from_name(j.value("mode", "graphon"));
    if (j.contains("fixed_pi")) cfg.fixed_pi = j.at("fixed_pi").get<std::vector<double>>();
    cfg.threads = j.value("threads", cfg.threads);
    return cfg;
}

json to_json(const ObjectiveConfig& obj, const Signature& sig) {
    json j{{"kernel", obj.scalar_fn.name}};
    json weights = json::array();
    for (int k = 0; k < sig.relation_count(); ++k) weights.push_back(obj.weight(sig, k));
    j["relation_weights"] = weights;
    return j;
}

ObjectiveConfig objective_from_json(const json& j) {
    ObjectiveConfig obj;
    if (!j.is_object() || !j.contains("kernel")) {
        obj.scalar_fn = entropy_kernel();
    } else if (j.at("kernel").is_string()) {
        obj.scalar_fn = kernel_by_name(j.at("kernel").get<std::string>());
    } else {
        const json& k = j.at("kernel");
        const std::string name = require(k, "name").get<std::string>();
        if (name == "entropy") obj.scalar_fn = entropy_kernel();
        else if (name == "quadratic")
            obj.scalar_fn = quadratic_kernel(k.value("c", 1.0), k.value("center", 0.0));
        else if (name == "tabulated")
            obj.scalar_fn = tabulated_kernel(require(k, "x").get<std::vector<double>>(),
                                             require(k, "f0").get<std::vector<double>>(),
                                             require(k, "f0_prime").get<std::vector<double>>());
        else
            raise(ErrorCode::ValidationError, "unknown kernel '" + name + "'");
    }
    if (j.is_object() && j.contains("relation_weights"))
        obj.relation_weights = j.at("relation_weights").get<std::vector<double>>();
    return obj;
}

json to_json(const Solution& s) {
    return json{{"stepfn", to_json(s.w)},
                {"objective", s.objective},
                {"beta", s.beta},
                {"kkt_residual", s.kkt_residual},
                {"constraint_residual", s.constraint_residual},
                {"jacobian_rank", s.jacobian_rank},
                {"converged", s.converged}};
}

json to_json(const SolveReport& report) {
    json solutions = json::array();
    for (const auto& s : report.solutions) solutions.push_back(to_json(s));
    return json{{"status", report.status == SolveStatus::Converged ? "converged" : "non-convergent"},
                {"best_index", report.best_index},
                {"feasible_restarts", report.feasible_restarts},
                {"underparameterized", report.underparameterized},
                {"inner_iterations", report.inner_iterations},
                {"constraints_all_linear", report.constraints_all_linear},
                {"config", to_json(report.config)},
                {"solutions", solutions}};
}

json to_json(const EscalationReport& report) {
    json levels = json::array();
    for (const auto& level : report.levels)
        levels.push_back(json{{"m", level.m},
                              {"best_objective", level.best_objective},
                              {"objective_delta", level.objective_delta},
                              {"l1_gap_to_prev_split", level.l1_gap_to_prev_split},
                              {"pod_holds", level.pod_holds},
                              {"report", to_json(level.report)}});
    return json{{"pod_all", report.pod_all}, {"levels", levels}};
}

json to_json(const std::vector<ConvergenceRow>& rows) {
    json out = json::array();
    for (const auto& r : rows)
        out.push_back(json{{"n", r.n},
                           {"graph_index", r.graph_index},
                           {"target", r.target},
                           {"mean", r.mean},
                           {"stddev", r.stddev},
                           {"std_error", r.std_error},
                           {"z_gap", r.z_gap},
                           {"trials", r.trials}});
    return json{{"rows", out}};
}

std::vector<StepFunction> solutions_from_json(const json& j) {
    std::vector<StepFunction> out;
    if (j.is_array()) {
        for (const auto& w : j) out.push_back(stepfn_from_json(w));
    } else if (j.contains("solutions")) {
        for (const auto& s : j.at("solutions")) out.push_back(stepfn_from_json(require(s, "stepfn")));
    } else if (j.contains("arities")) {
        out.push_back(stepfn_from_json(j));
    } else {
        raise(ErrorCode::ValidationError, "expected a step function, array, or solve report");
    }
    return out;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::IoError, "cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        raise(ErrorCode::ValidationError, "invalid JSON in '" + path + "': " + e.what());
    }
    return j;
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) raise(ErrorCode::IoError, "cannot write '" + path + "'");
    out << j.dump(2) << "\n";
}

} // namespace hypermax
