#include "kemeny/io.hpp"

#include <fstream>

namespace kemeny::io {

namespace {

TimeKind kind_from_string(const std::string& s) {
  if (s == "dtmc") return TimeKind::Discrete;
  if (s == "ctmc") return TimeKind::Continuous;
  throw InvalidArgumentError("unknown chain kind '" + s +
                             "' (expected \"dtmc\" or \"ctmc\")");
}

json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw InvalidArgumentError("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InvalidArgumentError("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

}  // namespace

MarkovChain chain_from_json(const json& j, double tol) {
  try {
    const auto kind = kind_from_string(j.at("kind").get<std::string>());
    const auto& rows = j.at("matrix");
    if (!rows.is_array() || rows.empty())
      throw InvalidArgumentError("matrix must be a nonempty array of rows");
    const long m = static_cast<long>(rows.size());
    Matrix a(m, m);
    for (long i = 0; i < m; ++i) {
      const auto& row = rows[i];
      if (!row.is_array() || static_cast<long>(row.size()) != m)
        throw InvalidArgumentError("matrix row " + std::to_string(i) +
                                   " is not length " + std::to_string(m));
      for (long k = 0; k < m; ++k) a(i, k) = row[k].get<double>();
    }
    std::vector<std::string> labels;
    if (j.contains("labels"))
      labels = j.at("labels").get<std::vector<std::string>>();
    return MarkovChain::validate(std::move(a), kind, std::move(labels),
                                 {tol});
  } catch (const json::exception& e) {
    throw InvalidArgumentError(std::string("bad chain document: ") +
                               e.what());
  }
}

json chain_to_json(const MarkovChain& chain) {
  json rows = json::array();
  for (long i = 0; i < chain.size(); ++i) {
    json row = json::array();
    for (long k = 0; k < chain.size(); ++k) row.push_back(chain.rates()(i, k));
    rows.push_back(std::move(row));
  }
  json j{{"kind", to_string(chain.kind())}, {"matrix", std::move(rows)}};
  if (!chain.labels().empty()) j["labels"] = chain.labels();
  return j;
}

MarkovChain load_chain(const std::string& path, double tol) {
  return chain_from_json(parse_file(path), tol);
}

RateRule rule_from_json(const json& j) {
  try {
    const std::string kind = j.at("rule").get<std::string>();
    if (kind == "pow") return RateRule::power(j.at("base").get<double>());
    if (kind == "const")
      return RateRule::constant(j.at("value").get<double>());
    if (kind == "inverse_square") return RateRule::inverse_square();
    if (kind == "table") {
      auto values = j.at("values").get<std::vector<double>>();
      const std::string ext =
          j.value("extend", std::string("error"));
      if (ext != "last" && ext != "error")
        throw InvalidArgumentError("table extend must be \"last\" or "
                                   "\"error\"");
      return RateRule::table(std::move(values),
                             ext == "last" ? RateRule::Extend::Last
                                           : RateRule::Extend::Error);
    }
    throw InvalidArgumentError("unknown rule kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw InvalidArgumentError(std::string("bad rate rule: ") + e.what());
  }
}

json rule_to_json(const RateRule& rule) {
  switch (rule.kind()) {
    case RateRule::Kind::Power:
      return {{"rule", "pow"}, {"base", rule.base()}};
    case RateRule::Kind::Constant:
      return {{"rule", "const"}, {"value", rule.value()}};
    case RateRule::Kind::InverseSquare:
      return {{"rule", "inverse_square"}};
    default:
      return {{"rule", "table"},
              {"values", rule.values()},
              {"extend",
               rule.extend() == RateRule::Extend::Last ? "last" : "error"}};
  }
}

BirthDeathSpec bd_from_json(const json& j) {
  try {
    const std::string family = j.at("family").get<std::string>();
    const TimeKind kind =
        kind_from_string(j.value("kind", std::string("ctmc")));
    if (family == "mm1")
      return BirthDeathSpec::mm1(j.at("lambda").get<double>(),
                                 j.at("mu").get<double>(), kind);
    if (family == "sped_up_mm1")
      return BirthDeathSpec::sped_up_mm1(
          j.at("rho").get<double>(), rule_from_json(j.at("lambda_rule")),
          kind);
    if (family == "designed_f")
      return BirthDeathSpec::designed_f(rule_from_json(j.at("f_rule")),
                                        rule_from_json(j.at("lambda_rule")),
                                        kind);
    if (family == "power_law")
      return BirthDeathSpec::power_law(j.at("alpha").get<double>(), kind);
    if (family == "mm_infinity")
      return BirthDeathSpec::mm_infinity(j.at("lambda").get<double>(),
                                         j.at("mu").get<double>(), kind);
    if (family == "table")
      return BirthDeathSpec::table(rule_from_json(j.at("lambda_rule")),
                                   rule_from_json(j.at("mu_rule")), kind);
    throw InvalidArgumentError("unknown family '" + family + "'");
  } catch (const json::exception& e) {
    throw InvalidArgumentError(std::string("bad family config: ") + e.what());
  }
}

json bd_to_json(const BirthDeathSpec& spec) {
  json j{{"family", to_string(spec.family())},
         {"kind", to_string(spec.kind())}};
  switch (spec.family()) {
    case BdFamily::MM1:
      j["lambda"] = spec.param1();
      j["mu"] = spec.param2();
      break;
    case BdFamily::SpedUpMM1:
      j["rho"] = spec.param1();
      j["lambda_rule"] = rule_to_json(*spec.lambda_rule());
      break;
    case BdFamily::DesignedF:
      j["f_rule"] = rule_to_json(*spec.f_rule());
      j["lambda_rule"] = rule_to_json(*spec.lambda_rule());
      break;
    case BdFamily::PowerLaw:
      j["alpha"] = spec.param1();
      break;
    case BdFamily::MMInfinity:
      j["lambda"] = spec.param1();
      j["mu"] = spec.param2();
      break;
    case BdFamily::Table:
      j["lambda_rule"] = rule_to_json(*spec.lambda_rule());
      j["mu_rule"] = rule_to_json(*spec.mu_rule());
      break;
  }
  return j;
}

BirthDeathSpec load_bd_config(const std::string& path) {
  return bd_from_json(parse_file(path));
}

json report_to_json(const AnalysisReport& report) {
  json j;
  j["kprime"] = report.kprime;
  if (report.k) j["k"] = *report.k;
  j["kprime_by_state"] = std::vector<double>(
      report.kprime_by_state.data(),
      report.kprime_by_state.data() + report.kprime_by_state.size());
  j["spread"] = report.spread;
  j["deviation_trace"] = report.deviation_trace;
  if (report.hunter_bound_ok) j["hunter_bound_ok"] = *report.hunter_bound_ok;
  j["residuals"] = report.residuals;
  return j;
}

json series_to_json(const SeriesResult& r) {
  json j;
  j["verdict"] = to_string(r.verdict);
  j["terms_used"] = r.terms_used;
  switch (r.verdict) {
    case SeriesVerdict::Converged:
      j["value"] = r.value;
      j["tail_bound"] = r.tail_bound;
      break;
    case SeriesVerdict::Diverged:
      j["reason"] = to_string(r.reason);
      break;
    case SeriesVerdict::Undecided:
      j["partial_sum"] = r.value;
      break;
  }
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

json estimate_to_json(const SimulationEstimate& e) {
  return {{"value", e.value},
          {"std_error", e.std_error},
          {"R", e.trajectories},
          {"horizon", e.horizon},
          {"seed", e.seed},
          {"horizon_warning", e.horizon_warning}};
}

}  // namespace kemeny::io
