// kemeny: analyze chains, evaluate birth-death families, run renewal
// simulations, and design rate families from f-sequences.
//
// Exit codes: 0 verdicted success, 2 bad input file, 3 numerical failure,
// 4 constancy violation, 5 not positive recurrent, 6 periodic chain.

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "kemeny/analysis.hpp"
#include "kemeny/birth_death.hpp"
#include "kemeny/io.hpp"
#include "kemeny/version.hpp"

using namespace kemeny;
using io::json;

namespace {

enum ExitCode {
  kOk = 0,
  kBadInput = 2,
  kNumericalFailure = 3,
  kConstancyViolation = 4,
  kNotPositiveRecurrent = 5,
  kPeriodicChain = 6,
};

int log_level() {
  static int level = [] {
    const char* env = std::getenv("KEMENY_LOG");
    if (!env) return 0;
    const std::string v = env;
    if (v == "debug") return 2;
    if (v == "info") return 1;
    return 0;
  }();
  return level;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::fprintf(stderr, "[info] %s\n", msg.c_str());
}

void log_debug(const std::string& msg) {
  if (log_level() >= 2) std::fprintf(stderr, "[debug] %s\n", msg.c_str());
}

void emit(const json& doc, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << doc.dump(2) << "\n";
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw InvalidArgumentError("cannot write " + out_path);
  out << doc.dump(2) << "\n";
  log_info("wrote " + out_path);
}

void write_csv_matrix(const Matrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgumentError("cannot write " + path);
  char buf[64];
  for (long i = 0; i < m.rows(); ++i) {
    for (long j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      out << buf << (j + 1 == m.cols() ? "" : ",");
    }
    out << "\n";
  }
  log_info("wrote " + path);
}

json base_report(json config) {
  return {{"tool", "kemeny"},
          {"version", version_string},
          {"config", std::move(config)}};
}

struct AnalyzeArgs {
  std::string input, method = "both", out, emit_mfpt, emit_deviation;
  double tol = 1e-9;
};

int run_analyze(const AnalyzeArgs& a) {
  MarkovChain chain = io::load_chain(a.input);
  log_info("loaded " + std::string(to_string(chain.kind())) + " chain with " +
           std::to_string(chain.size()) + " states");
  json doc = base_report({{"command", "analyze"},
                          {"input", a.input},
                          {"method", a.method},
                          {"tol", a.tol}});
  doc["kind"] = to_string(chain.kind());
  doc["states"] = chain.size();
  doc["aperiodic"] = chain.aperiodic();

  if (a.method == "trace") {
    auto dev = deviation_matrix(chain);
    doc["kprime"] = dev.d.trace();
    doc["deviation_trace"] = dev.d.trace();
    doc["residuals"] = {{"deviation_fixed_point", dev.fixed_point_residual},
                        {"deviation_row_sum", dev.row_sum_residual},
                        {"deviation_left_null", dev.left_null_residual}};
    if (!a.emit_deviation.empty()) write_csv_matrix(dev.d, a.emit_deviation);
  } else {
    auto rep = kemeny_exact(chain, a.tol);
    json body = io::report_to_json(rep);
    for (auto& [key, value] : body.items()) doc[key] = value;
    if (a.method == "both")
      doc["route_delta"] = std::abs(rep.kprime - rep.deviation_trace);
    if (!a.emit_mfpt.empty()) {
      if (!rep.mfpt)
        throw InvalidArgumentError(
            "mean first passage matrix is only emitted for discrete chains");
      write_csv_matrix(*rep.mfpt, a.emit_mfpt);
    }
    if (!a.emit_deviation.empty())
      write_csv_matrix(deviation_matrix(chain).d, a.emit_deviation);
  }
  emit(doc, a.out);
  return kOk;
}

struct BdArgs {
  std::string config, out, ladder_out;
  double rtol = 1e-12;
  long max_terms = 10'000'000;
  std::vector<long> ladder;
};

int run_bd(const BdArgs& a) {
  BirthDeathSpec spec = io::load_bd_config(a.config);
  ScanOptions opts;
  opts.rtol = a.rtol;
  opts.max_terms = a.max_terms;

  json doc = base_report({{"command", "bd"},
                          {"config_path", a.config},
                          {"family", io::bd_to_json(spec)},
                          {"rtol", a.rtol},
                          {"max_terms", a.max_terms}});

  auto theta = theta_series(spec, opts);
  doc["theta"] = io::series_to_json(theta);
  doc["necessary_condition"] =
      io::series_to_json(necessary_condition(spec, opts));
  if (theta.is_converged())
    doc["e_pi_theta0"] = io::series_to_json(e_pi_theta0(spec, opts));
  auto kp = kemeny_bd(spec, opts);
  doc["kprime"] = io::series_to_json(kp);
  doc["verdict"] = to_string(kp.verdict);
  doc["terms_used"] = kp.terms_used;

  if (!a.ladder.empty()) {
    json rows = json::array();
    std::string csv = "N,kprime,abs_delta\n";
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (long n_top : a.ladder) {
      auto rep = kemeny_exact(truncate(spec, n_top));
      // delta against the series value when finite, against the previous
      // rung otherwise (visualizes unbounded growth)
      const double ref = kp.is_converged() ? kp.value : prev;
      const double delta = std::isnan(ref)
                               ? std::numeric_limits<double>::quiet_NaN()
                               : std::abs(rep.kprime - ref);
      rows.push_back({{"N", n_top},
                      {"kprime", rep.kprime},
                      {"abs_delta", delta}});
      char line[96];
      std::snprintf(line, sizeof line, "%ld,%.17g,%.17g\n", n_top,
                    rep.kprime, delta);
      csv += line;
      prev = rep.kprime;
    }
    doc["truncation_ladder"] = rows;
    if (!a.ladder_out.empty()) {
      std::ofstream out(a.ladder_out);
      if (!out) throw InvalidArgumentError("cannot write " + a.ladder_out);
      out << csv;
      log_info("wrote " + a.ladder_out);
    }
  }
  emit(doc, a.out);
  return kOk;
}

struct SimulateArgs {
  std::string input, estimator, out;
  double horizon = 0.0;
  long trajectories = 0;
  std::uint64_t seed = 0;
  long start = -1, target = -1;
};

int run_simulate(const SimulateArgs& a) {
  MarkovChain chain = io::load_chain(a.input);
  SimConfig cfg{a.horizon, a.trajectories, a.seed};

  json config{{"command", "simulate"}, {"input", a.input},
              {"estimator", a.estimator}, {"horizon", a.horizon},
              {"trajectories", a.trajectories}, {"seed", a.seed}};

  SimulationEstimate est;
  double exact = std::numeric_limits<double>::quiet_NaN();
  if (a.estimator == "deficit") {
    if (a.start < 0 || a.target < 0)
      throw CLI::ValidationError(
          "--start and --target are required for the deficit estimator");
    config["start"] = a.start;
    config["target"] = a.target;
    est = visit_deficit(chain, a.start, a.target, cfg);
    if (chain.size() <= 2000) {
      auto st = stationary_distribution(chain);
      exact = st.pi(a.target) * hitting_times(chain, a.target).h(a.start);
    }
  } else {
    if (a.start >= 0 || a.target >= 0)
      throw CLI::ValidationError(
          "the step-count estimator takes no start or target state");
    est = step_count_identity(chain, cfg);
    if (chain.size() <= 2000) exact = kemeny_via_trace(chain);
  }

  json doc = base_report(std::move(config));
  for (auto& [key, value] : io::estimate_to_json(est).items())
    doc[key] = value;
  if (!std::isnan(exact)) {
    doc["exact"] = exact;
    doc["within_3se"] = std::abs(est.value - exact) <= 3.0 * est.std_error;
  }
  emit(doc, a.out);
  return kOk;
}

struct DesignArgs {
  std::string f_rule, lambda_rule, kind = "ctmc", emit_config, out;
};

int run_design(const DesignArgs& a) {
  json f = json::parse(a.f_rule);
  json lam = json::parse(a.lambda_rule);
  auto spec = design_from_f(io::rule_from_json(f), io::rule_from_json(lam),
                            a.kind == "dtmc" ? TimeKind::Discrete
                                             : TimeKind::Continuous);
  json config = io::bd_to_json(spec);
  json doc = base_report({{"command", "design"},
                          {"f_rule", f},
                          {"lambda_rule", lam},
                          {"kind", a.kind}});
  doc["family_config"] = config;
  json preview = json::array();
  for (long j = 1; j <= 10; ++j) preview.push_back(spec.mu(j));
  doc["mu_preview"] = preview;
  if (!a.emit_config.empty()) {
    std::ofstream out(a.emit_config);
    if (!out) throw InvalidArgumentError("cannot write " + a.emit_config);
    out << config.dump(2) << "\n";
    log_info("wrote " + a.emit_config);
  }
  emit(doc, a.out);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kemeny-constant analysis for finite and birth-death Markov "
               "chains"};
  app.set_version_flag("--version", version_string);
  app.require_subcommand(1);

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand(
      "analyze", "exact Kemeny analysis of a chain file");
  analyze->add_option("input", an.input, "chain JSON file")->required();
  analyze->add_option("--method", an.method, "hitting | trace | both")
      ->check(CLI::IsMember({"hitting", "trace", "both"}));
  analyze->add_option("--tol", an.tol, "constancy tolerance (relative)");
  analyze->add_option("--out", an.out, "write the JSON report here");
  analyze->add_option("--emit-mfpt", an.emit_mfpt,
                      "write the mean first passage matrix as CSV");
  analyze->add_option("--emit-deviation", an.emit_deviation,
                      "write the deviation matrix as CSV");

  BdArgs bd;
  auto* bd_cmd = app.add_subcommand(
      "bd", "birth-death series analysis from a family config");
  bd_cmd->add_option("config", bd.config, "family config JSON")->required();
  bd_cmd->add_option("--rtol", bd.rtol, "series relative tolerance");
  bd_cmd->add_option("--max-terms", bd.max_terms, "series term budget");
  bd_cmd->add_option("--truncate-ladder", bd.ladder,
                     "truncation sizes, e.g. --truncate-ladder 10 20 40");
  bd_cmd->add_option("--ladder-out", bd.ladder_out,
                     "write the ladder table as CSV");
  bd_cmd->add_option("--out", bd.out, "write the JSON report here");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand(
      "simulate", "seeded renewal estimators on a chain file");
  sim_cmd->add_option("input", sim.input, "chain JSON file")->required();
  sim_cmd->add_option("--estimator", sim.estimator, "deficit | stepcount")
      ->required()
      ->check(CLI::IsMember({"deficit", "stepcount"}));
  sim_cmd->add_option("--horizon", sim.horizon, "steps n or time t")
      ->required();
  sim_cmd->add_option("--trajectories", sim.trajectories,
                      "total trajectory budget R")
      ->required();
  sim_cmd->add_option("--seed", sim.seed, "64-bit seed")->required();
  sim_cmd->add_option("--start", sim.start, "deficit start state i");
  sim_cmd->add_option("--target", sim.target, "deficit target state j");
  sim_cmd->add_option("--out", sim.out, "write the JSON report here");

  DesignArgs de;
  auto* design = app.add_subcommand(
      "design", "derive death rates from an f-sequence");
  design->add_option("--f-rule", de.f_rule, "rule JSON for f_j")->required();
  design->add_option("--lambda-rule", de.lambda_rule,
                     "rule JSON for lambda_j")
      ->required();
  design->add_option("--kind", de.kind, "ctmc | dtmc")
      ->check(CLI::IsMember({"ctmc", "dtmc"}));
  design->add_option("--emit-config", de.emit_config,
                     "write the family config here");
  design->add_option("--out", de.out, "write the JSON report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    log_debug("dispatching subcommand");
    if (*analyze) return run_analyze(an);
    if (*bd_cmd) return run_bd(bd);
    if (*sim_cmd) return run_simulate(sim);
    if (*design) return run_design(de);
  } catch (const ConstancyViolationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConstancyViolation;
  } catch (const NotPositiveRecurrentError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kNotPositiveRecurrent;
  } catch (const PeriodicChainError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kPeriodicChain;
  } catch (const SingularSystemError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kNumericalFailure;
  } catch (const ChainValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    for (const auto& v : e.violations())
      std::fprintf(stderr, "  violation: %s\n", v.message.c_str());
    return kBadInput;
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const KemenyError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kBadInput;
  } catch (const io::json::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kBadInput;
  }
  return kOk;
}
