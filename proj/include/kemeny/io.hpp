#pragma once

#include <json.hpp>
#include <string>

#include "kemeny/analysis.hpp"
#include "kemeny/birth_death.hpp"
#include "kemeny/chain.hpp"
#include "kemeny/series.hpp"
#include "kemeny/sim.hpp"

namespace kemeny::io {

using json = nlohmann::json;

/// Chain file: {"kind": "dtmc"|"ctmc", "matrix": [[...], ...],
///              "labels": [...]?}
MarkovChain chain_from_json(const json& j, double tol = 1e-12);
json chain_to_json(const MarkovChain& chain);
MarkovChain load_chain(const std::string& path, double tol = 1e-12);

/// Rate rules: {"rule": "pow", "base": b} | {"rule": "const", "value": c}
/// | {"rule": "inverse_square"}
/// | {"rule": "table", "values": [...], "extend": "last"|"error"}
RateRule rule_from_json(const json& j);
json rule_to_json(const RateRule& rule);

/// Family config: {"family": "mm1"|"sped_up_mm1"|"designed_f"|"power_law"
///                 |"mm_infinity"|"table", "kind": "ctmc"|"dtmc", ...}
BirthDeathSpec bd_from_json(const json& j);
json bd_to_json(const BirthDeathSpec& spec);
BirthDeathSpec load_bd_config(const std::string& path);

json report_to_json(const AnalysisReport& report);
json series_to_json(const SeriesResult& result);
json estimate_to_json(const SimulationEstimate& estimate);

}  // namespace kemeny::io
