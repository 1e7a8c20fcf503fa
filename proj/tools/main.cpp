// hypermax: file-based pipeline for maximum-entropy step-function
// hypergraphons under quantum-graph density constraints.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "hypermax/json_io.hpp"
#include "hypermax/logic.hpp"
#include "hypermax/sampler.hpp"
#include "hypermax/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hypermax;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string fnv1a_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::IoError, "cannot open '" + path + "'");
    std::uint64_t hash = 1469598103934665603ull;
    char buffer[4096];
    while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            hash ^= static_cast<unsigned char>(buffer[i]);
            hash *= 1099511628211ull;
        }
        if (!in) break;
    }
    char out[20];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(hash));
    return out;
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buffer[32];
    std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buffer;
}

struct RunContext {
    std::string command;
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    int threads = 1;
    std::vector<std::pair<std::string, std::string>> inputs; // path, hash
    std::vector<std::string> outputs;

    json load(const std::string& path) {
        json j = read_json_file(path);
        inputs.emplace_back(path, fnv1a_file(path));
        return j;
    }

    std::string write(const std::string& name, const json& body) {
        fs::create_directories(out_dir);
        const std::string path = (fs::path(out_dir) / name).string();
        write_json_file(path, body);
        outputs.push_back(path);
        return path;
    }

    void write_manifest() {
        json inputs_json = json::array();
        for (const auto& [path, hash] : inputs)
            inputs_json.push_back(json{{"path", path}, {"fnv1a64", hash}});
        const json manifest{{"command", command},   {"version", kVersion},
                            {"timestamp", utc_now()}, {"seed", seed},
                            {"threads", threads},     {"inputs", inputs_json},
                            {"outputs", outputs}};
        const std::string stem = command + "-manifest.json";
        write_json_file((fs::path(out_dir) / stem).string(), manifest);
    }
};

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::Infeasible:
        case ErrorCode::InfeasibleUpToMax:
            return 2;
        case ErrorCode::NonConvergent:
            return 3;
        case ErrorCode::IoError:
            return 1;
        default:
            return 4;
    }
}

// |analytic - central difference| / max(1, |fd|) over every coordinate of
// every supplied gradient; the CLI-facing correctness probe.
json gradient_check(const StepFunction& w, const std::vector<QuantumGraph>& graphs,
                    const ObjectiveConfig* obj, double h) {
    struct Probe {
        std::string label;
        GradientVector analytic;
        std::function<double(const StepFunction&)> value;
    };
    std::vector<Probe> probes;
    for (std::size_t i = 0; i < graphs.size(); ++i)
        probes.push_back({"constraint " + std::to_string(i), density_gradient(graphs[i], w),
                          [&graphs, i](const StepFunction& v) {
                              return quantum_density(graphs[i], v);
                          }});
    if (obj)
        probes.push_back({"objective", objective_gradient(*obj, w),
                          [obj](const StepFunction& v) { return objective_value(*obj, v); }});

    const Signature& sig = w.signature();
    double max_rel = 0.0;
    json rows = json::array();
    for (const auto& probe : probes) {
        double worst = 0.0;
        for (int k = 0; k < sig.relation_count(); ++k) {
            const auto canon = canonical_multi_indices(w.block_count(), sig.arity(k));
            for (std::size_t ci = 0; ci < canon.size(); ++ci) {
                auto shifted = [&](double delta) {
                    std::vector<std::vector<double>> arrays;
                    for (int rel = 0; rel < sig.relation_count(); ++rel)
                        arrays.push_back(w.array(rel));
                    StepFunction v =
                        StepFunction::raw(sig, w.pi(), std::move(arrays), Mode::RealValued);
                    for (const auto& o : index_orbit(canon[ci]))
                        v.at_mut(k, o) = w.at(k, canon[ci]) + delta;
                    return v;
                };
                const double fd = (probe.value(shifted(h)) - probe.value(shifted(-h))) / (2 * h);
                const double got = probe.analytic.a_part[static_cast<std::size_t>(k)][ci];
                worst = std::max(worst, std::abs(got - fd) / std::max(1.0, std::abs(fd)));
            }
        }
        for (int i = 0; i < w.block_count(); ++i) {
            auto shifted = [&](double delta) {
                std::vector<double> pi = w.pi();
                pi[static_cast<std::size_t>(i)] += delta;
                std::vector<std::vector<double>> arrays;
                for (int rel = 0; rel < sig.relation_count(); ++rel) arrays.push_back(w.array(rel));
                return StepFunction::raw(sig, std::move(pi), std::move(arrays), Mode::RealValued);
            };
            const double fd = (probe.value(shifted(h)) - probe.value(shifted(-h))) / (2 * h);
            const double got = probe.analytic.pi_part[static_cast<std::size_t>(i)];
            worst = std::max(worst, std::abs(got - fd) / std::max(1.0, std::abs(fd)));
        }
        rows.push_back(json{{"gradient", probe.label}, {"max_rel_error", worst}});
        max_rel = std::max(max_rel, worst);
    }
    return json{{"max_rel_error", max_rel}, {"per_gradient", rows}, {"step", h}};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"maximum-entropy hypergraphon solver"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.fallthrough(); // global flags are accepted after the subcommand

    RunContext run;
    app.add_option("--out-dir", run.out_dir, "output directory")->capture_default_str();
    app.add_option("--seed", run.seed, "seed override for stochastic commands");
    app.add_option("--threads", run.threads, "parallelism cap");

    std::string constraints_path, solver_path, objective_path, stepfn_path, stepfn2_path;
    std::string graph_path, solutions_path, formula_text;
    int m_from = 2, m_to = 3, sample_n = 100;
    std::vector<int> n_list;
    int trials = 10;
    double fd_step = 1e-5;
    bool seed_given = false, threads_given = false;

    auto* solve_cmd = app.add_subcommand("solve", "solve a constrained instance");
    solve_cmd->add_option("constraints", constraints_path)->required();
    solve_cmd->add_option("solver", solver_path)->required();
    solve_cmd->add_option("--objective", objective_path);

    auto* escalate_cmd = app.add_subcommand("escalate", "solve at increasing block counts");
    escalate_cmd->add_option("constraints", constraints_path)->required();
    escalate_cmd->add_option("solver", solver_path)->required();
    escalate_cmd->add_option("--objective", objective_path);
    escalate_cmd->add_option("--m-from", m_from)->required();
    escalate_cmd->add_option("--m-to", m_to)->required();

    auto* eval_cmd = app.add_subcommand("eval", "evaluate a subgraph density");
    eval_cmd->add_option("graph", graph_path)->required();
    eval_cmd->add_option("stepfn", stepfn_path)->required();

    auto* grad_cmd = app.add_subcommand("grad-check", "compare gradients to finite differences");
    grad_cmd->add_option("stepfn", stepfn_path)->required();
    grad_cmd->add_option("constraints", constraints_path)->required();
    grad_cmd->add_option("--objective", objective_path);
    grad_cmd->add_option("--step", fd_step)->capture_default_str();

    auto* sample_cmd = app.add_subcommand("sample", "draw a W-random hypergraph");
    sample_cmd->add_option("stepfn", stepfn_path)->required();
    sample_cmd->add_option("--n", sample_n)->required();

    auto* conv_cmd = app.add_subcommand("convergence", "empirical density convergence table");
    conv_cmd->add_option("stepfn", stepfn_path)->required();
    conv_cmd->add_option("constraints", constraints_path)
        ->description("graphs whose densities to track (constraint file or graph array)")
        ->required();
    conv_cmd->add_option("--n-list", n_list)->required();
    conv_cmd->add_option("--trials", trials)->capture_default_str();

    auto* cut_cmd = app.add_subcommand("cut-distance", "aligned cut distance of two step functions");
    cut_cmd->add_option("stepfn_a", stepfn_path)->required();
    cut_cmd->add_option("stepfn_b", stepfn2_path)->required();

    auto* compile_cmd = app.add_subcommand("compile", "compile a formula to a quantum graph");
    compile_cmd->add_option("constraints", constraints_path)
        ->description("signature source (constraints or signature JSON)")
        ->required();
    compile_cmd->add_option("formula", formula_text)->required();

    auto* query_cmd = app.add_subcommand("query", "formula probability against solutions");
    query_cmd->add_option("constraints", constraints_path)->required();
    query_cmd->add_option("formula", formula_text)->required();
    query_cmd->add_option("solutions", solutions_path)->required();

    auto* fit_cmd = app.add_subcommand("fit-beta", "regress multipliers at a step function");
    fit_cmd->add_option("stepfn", stepfn_path)->required();
    fit_cmd->add_option("constraints", constraints_path)->required();
    fit_cmd->add_option("--objective", objective_path);

    auto* m0_cmd = app.add_subcommand("m0", "base size of a constraint set");
    m0_cmd->add_option("constraints", constraints_path)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }
    seed_given = app.count("--seed") > 0;
    threads_given = app.count("--threads") > 0;

    try {
        auto load_signature = [&](const json& j) {
            return j.contains("signature") ? signature_from_json(j.at("signature"))
                                           : signature_from_json(j);
        };
        auto load_objective = [&]() {
            if (objective_path.empty()) return ObjectiveConfig::entropy();
            return objective_from_json(run.load(objective_path));
        };

        if (*solve_cmd || *escalate_cmd) {
            run.command = *solve_cmd ? "solve" : "escalate";
            const ConstraintSet cs = constraints_from_json(run.load(constraints_path));
            SolverConfig cfg = solver_config_from_json(run.load(solver_path));
            if (seed_given) cfg.seed = run.seed;
            if (threads_given) cfg.threads = run.threads;
            run.seed = cfg.seed;
            run.threads = cfg.threads;
            const ObjectiveConfig obj = load_objective();
            if (cfg.m >= 1 && step_parameter_count(cs.sig, cfg.m) < static_cast<long long>(cs.size()))
                std::cerr << "warning: n(m,r,d) < number of constraints at m = " << cfg.m << "\n";

            if (*solve_cmd) {
                const SolveReport report = solve(cs, cfg, obj);
                run.write("report.json", to_json(report));
                run.write_manifest();
                std::cout << "best objective " << report.best().objective << " over "
                          << report.solutions.size() << " distinct solutions\n";
                return report.status == SolveStatus::Converged ? 0 : 3;
            }
            const EscalationReport report = escalate(cs, cfg, obj, m_from, m_to);
            run.write("escalation.json", to_json(report));
            run.write_manifest();
            std::cout << "pod " << (report.pod_all ? "holds" : "fails") << " across "
                      << report.levels.size() << " levels\n";
            bool converged = true;
            for (const auto& level : report.levels)
                converged = converged && level.report.status == SolveStatus::Converged;
            return converged ? 0 : 3;
        }

        if (*eval_cmd) {
            run.command = "eval";
            const json gj = run.load(graph_path);
            const StepFunction w = stepfn_from_json(run.load(stepfn_path));
            const QuantumGraph q = quantum_from_json(gj, w.signature());
            const double value = quantum_density(q, w);
            run.write("density.json", json{{"value", value}});
            run.write_manifest();
            std::cout << value << "\n";
            return 0;
        }

        if (*grad_cmd) {
            run.command = "grad-check";
            const StepFunction w = stepfn_from_json(run.load(stepfn_path));
            const json cj = run.load(constraints_path);
            std::vector<QuantumGraph> graphs;
            if (cj.contains("constraints")) {
                for (const auto& c : constraints_from_json(cj).constraints)
                    graphs.push_back(c.graph);
            } else if (cj.is_array()) {
                for (const auto& g : cj) graphs.push_back(quantum_from_json(g, w.signature()));
            } else {
                graphs.push_back(quantum_from_json(cj, w.signature()));
            }
            const ObjectiveConfig obj = load_objective();
            const json result = gradient_check(w, graphs, &obj, fd_step);
            run.write("gradcheck.json", result);
            run.write_manifest();
            std::cout << "max relative error " << result.at("max_rel_error").get<double>() << "\n";
            return 0;
        }

        if (*sample_cmd) {
            run.command = "sample";
            const StepFunction w = stepfn_from_json(run.load(stepfn_path));
            SampleConfig cfg;
            cfg.n = sample_n;
            cfg.seed = run.seed;
            const MultiHypergraph g = sample_w_random(w, cfg);
            run.write("graph.json", to_json(g));
            run.write_manifest();
            std::cout << "sampled " << g.n_vertices << " vertices, " << g.total_edge_count()
                      << " edges\n";
            return 0;
        }

        if (*conv_cmd) {
            run.command = "convergence";
            const StepFunction w = stepfn_from_json(run.load(stepfn_path));
            const json cj = run.load(constraints_path);
            std::vector<MultiHypergraph> fset;
            if (cj.contains("constraints")) {
                for (const auto& c : constraints_from_json(cj).constraints)
                    for (const auto& [coeff, graph] : c.graph.terms) fset.push_back(graph);
            } else if (cj.is_array()) {
                for (const auto& g : cj) fset.push_back(hypergraph_from_json(g, w.signature()));
            } else {
                fset.push_back(hypergraph_from_json(cj, w.signature()));
            }
            SampleConfig cfg;
            cfg.seed = run.seed;
            cfg.trials = trials;
            const auto rows = convergence_report(w, fset, n_list, cfg);
            run.write("convergence.json", to_json(rows));
            run.write_manifest();
            for (const auto& row : rows)
                std::cout << "n=" << row.n << " graph=" << row.graph_index << " mean=" << row.mean
                          << " target=" << row.target << " z=" << row.z_gap << "\n";
            return 0;
        }

        if (*cut_cmd) {
            run.command = "cut-distance";
            const StepFunction a = stepfn_from_json(run.load(stepfn_path));
            const StepFunction b = stepfn_from_json(run.load(stepfn2_path));
            auto [ra, rb] = common_refinement(a, b);
            const CutDistanceResult result = cut_distance_aligned_detail(ra, rb);
            json per_rel = json::array();
            for (const auto& r : result.per_relation)
                per_rel.push_back(json{{"value", r.value}, {"axis_subsets", r.axis_subsets}});
            run.write("cutdistance.json", json{{"value", result.value},
                                               {"block_permutation", result.permutation},
                                               {"per_relation", per_rel}});
            run.write_manifest();
            std::cout << result.value << "\n";
            return 0;
        }

        if (*compile_cmd) {
            run.command = "compile";
            const Signature sig = load_signature(run.load(constraints_path));
            const QuantumGraph q = compile_formula(parse_formula(formula_text, sig));
            run.write("quantum.json", to_json(q));
            run.write_manifest();
            std::cout << q.terms.size() << " constituents\n";
            return 0;
        }

        if (*query_cmd) {
            run.command = "query";
            const Signature sig = load_signature(run.load(constraints_path));
            const Formula f = parse_formula(formula_text, sig);
            const auto solutions = solutions_from_json(run.load(solutions_path));
            const double p = query_probability(f, solutions);
            run.write("query.json", json{{"probability", p}, {"formula", formula_text},
                                         {"solutions", solutions.size()}});
            run.write_manifest();
            std::cout << p << "\n";
            return 0;
        }

        if (*fit_cmd) {
            run.command = "fit-beta";
            const StepFunction w = stepfn_from_json(run.load(stepfn_path));
            const ConstraintSet cs = constraints_from_json(run.load(constraints_path));
            const MultiplierFit fit = fit_multipliers(w, cs, load_objective());
            run.write("beta.json", json{{"beta", fit.beta}, {"residual", fit.residual}});
            run.write_manifest();
            std::cout << "residual " << fit.residual << "\n";
            return 0;
        }

        if (*m0_cmd) {
            run.command = "m0";
            const ConstraintSet cs = constraints_from_json(run.load(constraints_path));
            M0Options opts;
            opts.seed = run.seed;
            const int m0 = find_m0(cs, opts);
            run.write("m0.json", json{{"m0", m0}});
            run.write_manifest();
            std::cout << m0 << "\n";
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << json{{"error", {{"code", error_code_name(e.code())},
                                     {"message", e.message()}}}}.dump()
                  << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << json{{"error", {{"code", "Internal"}, {"message", e.what()}}}}.dump() << "\n";
        return 1;
    }
    return 1;
}
