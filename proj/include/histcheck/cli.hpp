#pragma once

// Command-line front end: validate, decohere, approx, commutators, bound, scan.
//
// Exit codes: 0 pass, 1 IO/parse error, 2 check failed, 3 budget exceeded, 64 usage.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "histcheck/criteria.hpp"
#include "histcheck/errors.hpp"
#include "histcheck/histories.hpp"
#include "histcheck/json_io.hpp"
#include "histcheck/partition.hpp"
#include "histcheck/search.hpp"

namespace histcheck::cli {

enum ExitCode : int { kPass = 0, kIoError = 1, kCheckFail = 2, kBudget = 3, kUsage = 64 };

class UsageError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

enum class Format { text, json };

struct RunConfig {
  std::string command;
  std::string input;
  std::size_t k = 2;
  std::size_t k_max = 3;
  std::size_t n_max = kDefaultNMax;
  double eps = 1e-2;
  double tol = kDefaultTol;
  double p_null = kDefaultPNull;
  std::uint64_t seed = 0;
  std::string mode = "dh";
  std::string ensemble = "haar";
  std::string experiment = "theorem1";
  std::size_t d = 2;
  std::string groups;
  std::size_t trials = 100;
  std::size_t state_trials = 8;
  Format format = Format::text;
  std::string out;
  bool verbose = false;
  Budget budget;

  /// Range checks that CLI11 validators do not express (open intervals).
  void validate() const {
    if (!(eps > 0.0 && eps < 1.0)) throw UsageError("--eps must lie in (0, 1)");
    if (!(tol > 0.0)) throw UsageError("--tol must be > 0");
    if (!(p_null >= 0.0)) throw UsageError("--p-null must be >= 0");
    if (k < 1 || k_max < 1 || n_max < 1) throw UsageError("--k, --k-max and --n-max must be >= 1");
    if (trials < 1 || state_trials < 1) throw UsageError("--trials and --state-trials must be >= 1");
    if (d < 1) throw UsageError("--d must be >= 1");
  }
};

namespace detail {

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open input file '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("malformed JSON in '" + path + "': " + e.what());
  }
}

/// Parses "0|1,2" into {{0}, {1, 2}}.
inline std::vector<std::vector<std::size_t>> parse_groups(const std::string& text) {
  std::vector<std::vector<std::size_t>> groups;
  if (text.empty()) return groups;
  std::stringstream blocks(text);
  std::string block;
  while (std::getline(blocks, block, '|')) {
    std::vector<std::size_t> group;
    std::stringstream items(block);
    std::string item;
    while (std::getline(items, item, ',')) {
      try {
        std::size_t pos = 0;
        const auto v = std::stoull(item, &pos);
        if (pos != item.size()) throw std::invalid_argument(item);
        group.push_back(static_cast<std::size_t>(v));
      } catch (const std::exception&) {
        throw UsageError("--groups: bad basis index '" + item + "'");
      }
    }
    groups.push_back(std::move(group));
  }
  return groups;
}

inline std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

inline std::string fmt(Complex v) {
  std::ostringstream s;
  s << std::setprecision(6) << v.real() << (v.imag() < 0 ? "-" : "+") << std::abs(v.imag()) << "i";
  return s.str();
}

inline std::string fmt(const History& h) {
  std::string s = "(";
  for (std::size_t j = 0; j < h.size(); ++j) s += (j ? "," : "") + std::to_string(h[j]);
  return s + ")";
}

struct WitnessText {
  std::string operator()(const PairWitness& w) const {
    return "k=" + std::to_string(w.k) + " alpha=" + fmt(w.alpha) + " beta=" + fmt(w.beta) + " (codes " +
           std::to_string(w.alpha_code) + "," + std::to_string(w.beta_code) + ") D=" + fmt(w.value) +
           " state=" + to_string(w.state_kind) + "#" + std::to_string(w.state_index);
  }
  std::string operator()(const CommutatorWitness& w) const {
    return "n=" + std::to_string(w.n) + " mu'=" + std::to_string(w.first) + " mu''=" + std::to_string(w.second);
  }
  std::string operator()(const LoopWitness& w) const {
    return "n=" + std::to_string(w.n) + " mu0=" + std::to_string(w.origin) + " mu'=" + std::to_string(w.first) +
           " mu''=" + std::to_string(w.second);
  }
  std::string operator()(const BlockWitness& w) const {
    return "block=" + std::to_string(w.block) + " unit=(" + std::to_string(w.row) + "," + std::to_string(w.col) + ")";
  }
};

inline void print_report(std::ostream& out, const CheckReport& r) {
  out << "check: " << r.check << '\n';
  out << "verdict: " << to_string(r.verdict) << '\n';
  out << "worst_value: " << fmt(r.worst_value) << '\n';
  if (r.witness) out << "witness: " << std::visit(WitnessText{}, *r.witness) << '\n';
  for (const auto& [k, v] : r.params) out << "param " << k << ": " << fmt(v) << '\n';
  for (const auto& [k, v] : r.diagnostics) out << "diagnostic " << k << ": " << fmt(v) << '\n';
  if (!r.horizon_note.empty()) out << "horizon: " << r.horizon_note << '\n';
}

inline void print_table(std::ostream& out, const CommutatorTable& t) {
  out << "n mu' mu'' norm\n";
  for (std::size_t n = 1; n <= t.n_max(); ++n) {
    for (std::size_t a = 0; a < t.m(); ++a) {
      for (std::size_t b = 0; b < t.m(); ++b) out << n << ' ' << a << ' ' << b << ' ' << fmt(t.at(n, a, b)) << '\n';
    }
  }
}

inline Json table_to_json(const CommutatorTable& t) {
  Json rows = Json::array();
  for (std::size_t n = 1; n <= t.n_max(); ++n) {
    for (std::size_t a = 0; a < t.m(); ++a) {
      for (std::size_t b = 0; b < t.m(); ++b) rows.push_back({n, a, b, t.at(n, a, b)});
    }
  }
  return rows;
}

struct Loaded {
  ComplexMatrix unitary;
  ProjectivePartition partition;
  DensityOperator rho;
};

/// Reads a bundle that must carry a unitary; rho defaults to the first partition state.
inline Loaded load_dynamics(const RunConfig& cfg) {
  auto bundle = bundle_from_json(read_json_file(cfg.input), cfg.tol);
  if (!bundle.unitary) throw ParseError("input has no \"unitary\"");
  if (!is_unitary(*bundle.unitary, std::max(cfg.tol, 1e-8))) throw ParseError("input \"unitary\" is not unitary");
  auto rho = bundle.rho ? *bundle.rho : partition_states(bundle.partition).front();
  return Loaded{*bundle.unitary, bundle.partition, rho};
}

inline int verdict_code(const CheckReport& r) { return r.passed() ? kPass : kCheckFail; }

inline void emit_report(std::ostream& out, const RunConfig& cfg, const CheckReport& r, Json extra = Json::object()) {
  if (cfg.format == Format::json) {
    auto j = to_json(r);
    for (auto& [k, v] : extra.items()) j[k] = v;
    out << j.dump(2) << '\n';
  } else {
    print_report(out, r);
  }
}

}  // namespace detail

inline int cmd_validate(const RunConfig& cfg, std::ostream& out) {
  std::optional<Bundle> bundle;
  try {
    bundle = bundle_from_json(detail::read_json_file(cfg.input), cfg.tol);
  } catch (const PartitionError& e) {
    if (cfg.format == Format::json) {
      out << Json{{"valid", false}, {"error", to_string(e.kind())}, {"first", e.first()}, {"second", e.second()},
                  {"residual", e.residual()}, {"message", e.what()}}
                 .dump(2)
          << '\n';
    } else {
      out << "invalid partition: " << e.what() << '\n';
    }
    return kCheckFail;
  } catch (const InvalidArgument& e) {
    // Overlapping or incomplete basis groups.
    if (cfg.format == Format::json) {
      out << Json{{"valid", false}, {"error", "InvalidBasisGroups"}, {"message", e.what()}}.dump(2) << '\n';
    } else {
      out << "invalid partition: " << e.what() << '\n';
    }
    return kCheckFail;
  }
  const auto& p = bundle->partition;
  const bool fine = is_fine_grained(p);
  std::optional<bool> unitary_ok;
  if (bundle->unitary) unitary_ok = is_unitary(*bundle->unitary, cfg.tol);
  if (cfg.format == Format::json) {
    Json j = {{"valid", true}, {"dim", p.dim()}, {"m", p.size()}, {"ranks", p.ranks()}, {"fine_grained", fine}};
    if (unitary_ok) j["unitary"] = *unitary_ok;
    out << j.dump(2) << '\n';
  } else {
    out << "valid projective partition: d=" << p.dim() << ", m=" << p.size() << '\n';
    out << "ranks:";
    for (const auto r : p.ranks()) out << ' ' << r;
    out << '\n';
    out << (fine ? "fine-grained, m=d" : "coarse-grained") << '\n';
    if (unitary_ok) out << "unitary: " << (*unitary_ok ? "yes" : "no") << '\n';
  }
  return unitary_ok.value_or(true) ? kPass : kCheckFail;
}

inline int cmd_decohere(const RunConfig& cfg, std::ostream& out) {
  const auto in = detail::load_dynamics(cfg);
  const auto g = full_gram(in.unitary, in.partition, in.rho, cfg.k, cfg.budget);
  const auto r = check_exact(g, cfg.tol);
  Json extra = Json::object();
  if (r.passed()) {
    const auto probs = probabilities(g);
    if (cfg.format == Format::json) {
      extra["probabilities"] = probs;
    } else {
      detail::print_report(out, r);
      out << "probabilities:\n";
      for (HistoryCode a = 0; a < probs.size(); ++a) {
        out << "  " << detail::fmt(history_from_code(a, g.m(), g.k())) << ' ' << detail::fmt(probs[a]) << '\n';
      }
      return kPass;
    }
  }
  if (cfg.verbose && cfg.format == Format::json) extra["gram"] = to_json(g);
  detail::emit_report(out, cfg, r, extra);
  return detail::verdict_code(r);
}

inline int cmd_approx(const RunConfig& cfg, std::ostream& out) {
  const auto mode = approx_mode_from_string(cfg.mode);
  const auto in = detail::load_dynamics(cfg);
  const auto r = check_approx(full_gram(in.unitary, in.partition, in.rho, cfg.k, cfg.budget), Epsilon(cfg.eps), mode,
                              cfg.p_null);
  detail::emit_report(out, cfg, r);
  return detail::verdict_code(r);
}

inline int cmd_commutators(const RunConfig& cfg, std::ostream& out) {
  const auto in = detail::load_dynamics(cfg);
  const auto table = commutator_table(in.unitary, in.partition, cfg.n_max);
  const auto r = check_commutators(table, cfg.tol);
  Json extra = Json::object();
  if (cfg.verbose && cfg.format == Format::json) extra["table"] = detail::table_to_json(table);
  detail::emit_report(out, cfg, r, extra);
  if (cfg.verbose && cfg.format == Format::text) detail::print_table(out, table);
  return detail::verdict_code(r);
}

inline int cmd_bound(const RunConfig& cfg, std::ostream& out) {
  const auto in = detail::load_dynamics(cfg);
  const Epsilon eps(cfg.eps);
  const auto table = commutator_table(in.unitary, in.partition, cfg.n_max);
  const auto r = check_theorem2_bound(table, in.partition.dim(), eps, cfg.n_max);
  Json extra = Json::object();
  if (cfg.verbose) {
    const auto loop = check_loop_condition(in.unitary, in.partition, cfg.n_max, eps);
    if (cfg.format == Format::json) {
      extra["table"] = detail::table_to_json(table);
      extra["loop_condition"] = to_json(loop);
    } else {
      detail::print_report(out, r);
      detail::print_table(out, table);
      detail::print_report(out, loop);
      return detail::verdict_code(r);
    }
  }
  detail::emit_report(out, cfg, r, extra);
  return detail::verdict_code(r);
}

inline int cmd_scan(const RunConfig& cfg, std::ostream& out) {
  Ensemble ens;
  ens.kind = ensemble_kind_from_string(cfg.ensemble);
  ens.dim = cfg.d;
  ens.groups = detail::parse_groups(cfg.groups);
  ens.trials = cfg.trials;
  ens.seed = cfg.seed;
  try {
    ens.partition();
  } catch (const InvalidArgument& e) {
    throw UsageError(std::string("--groups: ") + e.what());
  }

  ExperimentOptions opts;
  opts.state_trials = cfg.state_trials;
  opts.p_null = cfg.p_null;
  opts.budget = cfg.budget;

  ExperimentResult result;
  if (cfg.experiment == "theorem1") {
    result = run_theorem1_experiment(ens, cfg.k_max, cfg.n_max, cfg.tol, opts);
  } else if (cfg.experiment == "theorem2") {
    if (cfg.k_max < 2) throw UsageError("--k-max must be >= 2 for theorem2");
    result = run_theorem2_experiment(ens, Epsilon(cfg.eps), cfg.k_max, cfg.n_max, opts);
  } else {
    throw UsageError("--experiment must be theorem1 or theorem2");
  }

  if (cfg.format == Format::json) {
    out << to_jsonl(result);
  } else {
    out << "experiment: " << result.experiment << '\n';
    out << "ensemble: " << to_string(ens.kind) << " d=" << ens.dim << " trials=" << ens.trials << " seed=" << ens.seed
        << '\n';
    for (const auto& [k, v] : result.counts) {
      if (k != "violations") out << k << ": " << v << '\n';
    }
    out << "violations: " << result.violations.size() << '\n';
    for (const auto i : result.violations) {
      out << "  trial " << i << " seed " << result.trials[i].seed << ": " << result.trials[i].note << '\n';
    }
  }
  return result.violations.empty() ? kPass : kCheckFail;
}

/// Parses argv, dispatches, and maps errors to exit codes. `out` receives results
/// (unless --out redirects them), `err` diagnostics.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Decoherence checks for histories over a fixed projective partition"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string format = "text";

  auto common = [&](CLI::App* sub, bool needs_input) {
    if (needs_input) sub->add_option("input", cfg.input, "JSON input file")->required();
    sub->add_option("--tol", cfg.tol, "Tolerance for exact checks");
    sub->add_option("--p-null", cfg.p_null, "Probability below which a history is null");
    sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}));
    sub->add_option("--out", cfg.out, "Write output to this file instead of stdout");
    sub->add_flag("--verbose", cfg.verbose, "Print tables and extra detail");
  };

  auto* validate = app.add_subcommand("validate", "Validate a partition (and unitary, if present)");
  common(validate, true);

  auto* decohere = app.add_subcommand("decohere", "Exact decoherence of all length-k histories");
  common(decohere, true);
  decohere->add_option("--k", cfg.k, "History length");

  auto* approx = app.add_subcommand("approx", "Approximate decoherence ratio conditions");
  common(approx, true);
  approx->add_option("--k", cfg.k, "History length");
  approx->add_option("--eps", cfg.eps, "Approximation parameter in (0, 1)");
  approx->add_option("--mode", cfg.mode, "dh, dh_re or strong")->check(CLI::IsMember({"dh", "dh_re", "strong"}));

  auto* commutators = app.add_subcommand("commutators", "Commutator conditions up to n_max iterations");
  common(commutators, true);
  commutators->add_option("--n-max", cfg.n_max, "Iteration horizon");

  auto* bound = app.add_subcommand("bound", "Commutator norm bound 2 d^(3/2) sqrt(eps)");
  common(bound, true);
  bound->add_option("--n-max", cfg.n_max, "Iteration horizon");
  bound->add_option("--eps", cfg.eps, "Approximation parameter in (0, 1)");

  auto* scan = app.add_subcommand("scan", "Ensemble experiment, JSON lines with --format json");
  common(scan, false);
  scan->add_option("--experiment", cfg.experiment, "theorem1 or theorem2")
      ->check(CLI::IsMember({"theorem1", "theorem2"}));
  scan->add_option("--ensemble", cfg.ensemble, "haar, permutation, block_diagonal or diagonal_phase")
      ->check(CLI::IsMember({"haar", "permutation", "block_diagonal", "diagonal_phase"}));
  scan->add_option("--d", cfg.d, "Hilbert space dimension");
  scan->add_option("--groups", cfg.groups, "Basis groups, e.g. 0|1,2 (default fine-grained)");
  scan->add_option("--trials", cfg.trials, "Number of trials");
  scan->add_option("--state-trials", cfg.state_trials, "Random states per trial for the all-states check");
  scan->add_option("--seed", cfg.seed, "Master seed");
  scan->add_option("--k-max", cfg.k_max, "Longest history length");
  std::size_t scan_n_max = 4;
  scan->add_option("--n-max", scan_n_max, "Iteration horizon");
  scan->add_option("--eps", cfg.eps, "Approximation parameter in (0, 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success&) {
    out << app.help();
    return kPass;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    cfg.format = format == "json" ? Format::json : Format::text;
    cfg.command = app.get_subcommands().front()->get_name();
    if (cfg.command == "scan") cfg.n_max = scan_n_max;
    cfg.validate();
    try {
      cfg.budget = Budget::from_env();
    } catch (const InvalidArgument& e) {
      throw UsageError(e.what());
    }

    std::ofstream file;
    if (!cfg.out.empty()) {
      file.open(cfg.out, std::ios::binary);
      if (!file) throw IoError("cannot open output file '" + cfg.out + "'");
    }
    std::ostream& sink = cfg.out.empty() ? out : file;

    if (cfg.command == "validate") return cmd_validate(cfg, sink);
    if (cfg.command == "decohere") return cmd_decohere(cfg, sink);
    if (cfg.command == "approx") return cmd_approx(cfg, sink);
    if (cfg.command == "commutators") return cmd_commutators(cfg, sink);
    if (cfg.command == "bound") return cmd_bound(cfg, sink);
    return cmd_scan(cfg, sink);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const BudgetExceeded& e) {
    err << "budget exceeded: " << e.what() << '\n';
    return kBudget;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
    return kIoError;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kIoError;
  } catch (const PartitionError& e) {
    err << "invalid partition: " << e.what() << '\n';
    return kIoError;
  } catch (const InvalidArgument& e) {
    err << "invalid input: " << e.what() << '\n';
    return kIoError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  }
}

}  // namespace histcheck::cli
