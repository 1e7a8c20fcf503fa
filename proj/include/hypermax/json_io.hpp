#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>

#include "hypermax/logic.hpp"
#include "hypermax/sampler.hpp"
#include "hypermax/solver.hpp"

// JSON object forms used by the CLI and by every file-based interface.
//   signature     {"arities":[...], "names":[...]}            (names optional)
//   hypergraph    {"n":..., "edges":[[[v,...],...] per relation]}
//   quantum graph {"terms":[{"coeff":..., "graph":...}]}
//   step function {"arities":[...], "pi":[...], "arrays":[[...row-major...]], "mode":...}
// Array flattening is lexicographic (row-major) in the full multi-index.

namespace hypermax {

nlohmann::json to_json(const Signature& sig);
Signature signature_from_json(const nlohmann::json& j);

nlohmann::json to_json(const MultiHypergraph& g);
MultiHypergraph hypergraph_from_json(const nlohmann::json& j, const Signature& sig);

nlohmann::json to_json(const QuantumGraph& q);
QuantumGraph quantum_from_json(const nlohmann::json& j, const Signature& sig);

nlohmann::json to_json(const StepFunction& w);
StepFunction stepfn_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ConstraintSet& cs);
ConstraintSet constraints_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SolverConfig& cfg);
SolverConfig solver_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ObjectiveConfig& obj, const Signature& sig);
ObjectiveConfig objective_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Solution& s);
nlohmann::json to_json(const SolveReport& report);
nlohmann::json to_json(const EscalationReport& report);
nlohmann::json to_json(const std::vector<ConvergenceRow>& rows);

/// Loads solutions either from a solve report ({"solutions":[...]}) or from
/// a plain array of step functions.
std::vector<StepFunction> solutions_from_json(const nlohmann::json& j);

nlohmann::json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);

} // namespace hypermax
