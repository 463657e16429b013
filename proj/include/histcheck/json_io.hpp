#pragma once

// JSON encodings.
//
//   matrix     {"dim": d, "entries": [[[re, im], ...], ...]}            (row-major)
//   partition  {"dim": d, "projectors": [matrix, ...]}
//              {"dim": d, "basis_groups": [[0], [1, 2]]}
//   density    matrix with "type": "density"
//   bundle     {"unitary": matrix, "partition": partition, "rho": density?}
//   gram       {"k": k, "m": m, "entries": [[alpha_code, beta_code, re, im], ...]}  (sparse)
//   report     {"check", "verdict", "worst_value", "witness", "params", "horizon_note", ...}
//   experiment JSON lines: one {"type": "trial", ...} per trial, then {"type": "summary", ...}

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "histcheck/criteria.hpp"
#include "histcheck/errors.hpp"
#include "histcheck/histories.hpp"
#include "histcheck/linalg.hpp"
#include "histcheck/partition.hpp"
#include "histcheck/search.hpp"

namespace histcheck {

using Json = nlohmann::json;

namespace detail {

inline const Json& require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing key '") + key + "'");
  return j.at(key);
}

inline double finite_number(const Json& j, const char* what) {
  if (!j.is_number()) throw ParseError(std::string(what) + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ParseError(std::string(what) + " is not finite");
  return v;
}

inline std::size_t index_value(const Json& j, const char* what) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw ParseError(std::string(what) + " must be a non-negative integer");
  }
  return j.get<std::size_t>();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Matrices, partitions, states

inline Json to_json(const ComplexMatrix& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.dim(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < m.dim(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return {{"dim", m.dim()}, {"entries", std::move(rows)}};
}

inline ComplexMatrix matrix_from_json(const Json& j) {
  const std::size_t d = detail::index_value(detail::require(j, "dim"), "dim");
  if (d == 0) throw ParseError("dim must be >= 1");
  const auto& rows = detail::require(j, "entries");
  if (!rows.is_array() || rows.size() != d) throw ParseError("entries must have dim rows");
  ComplexMatrix m(d);
  for (std::size_t i = 0; i < d; ++i) {
    const auto& row = rows[i];
    if (!row.is_array() || row.size() != d) throw ParseError("matrix is not square: row " + std::to_string(i));
    for (std::size_t c = 0; c < d; ++c) {
      const auto& e = row[c];
      if (!e.is_array() || e.size() != 2) throw ParseError("entry must be [re, im]");
      m(i, c) = {detail::finite_number(e[0], "entry real part"), detail::finite_number(e[1], "entry imaginary part")};
    }
  }
  return m;
}

inline Json to_json(const ProjectivePartition& p) {
  Json projectors = Json::array();
  for (const auto& proj : p.projectors()) projectors.push_back(to_json(proj));
  return {{"dim", p.dim()}, {"projectors", std::move(projectors)}};
}

/// Parses either encoding and validates the result at tolerance tol.
inline ProjectivePartition partition_from_json(const Json& j, double tol = kDefaultTol) {
  const std::size_t d = detail::index_value(detail::require(j, "dim"), "dim");
  if (j.contains("basis_groups")) {
    const auto& groups_json = j.at("basis_groups");
    if (!groups_json.is_array()) throw ParseError("basis_groups must be an array");
    std::vector<std::vector<std::size_t>> groups;
    for (const auto& g : groups_json) {
      if (!g.is_array()) throw ParseError("each basis group must be an array");
      std::vector<std::size_t> group;
      for (const auto& i : g) group.push_back(detail::index_value(i, "basis index"));
      groups.push_back(std::move(group));
    }
    return partition_from_basis_groups(d, groups);
  }
  const auto& list = detail::require(j, "projectors");
  if (!list.is_array()) throw ParseError("projectors must be an array");
  std::vector<ComplexMatrix> projectors;
  for (const auto& pj : list) {
    auto m = matrix_from_json(pj);
    if (m.dim() != d) throw ParseError("projector dimension does not match partition dim");
    projectors.push_back(std::move(m));
  }
  return validate_partition(std::move(projectors), tol);
}

inline Json to_json(const DensityOperator& rho) {
  auto j = to_json(rho.matrix());
  j["type"] = "density";
  return j;
}

inline DensityOperator density_from_json(const Json& j, double tol = kDefaultTol) {
  if (j.contains("type") && j.at("type") != "density") throw ParseError("expected \"type\": \"density\"");
  return DensityOperator::validated(matrix_from_json(j), tol);
}

/// Unitary + partition + optional initial state, as read from a CLI input file.
struct Bundle {
  std::optional<ComplexMatrix> unitary;
  ProjectivePartition partition;
  std::optional<DensityOperator> rho;
};

/// Accepts a full bundle or a bare partition object (unitary then absent).
inline Bundle bundle_from_json(const Json& j, double tol = kDefaultTol) {
  if (!j.is_object()) throw ParseError("input must be a JSON object");
  if (!j.contains("partition")) return Bundle{std::nullopt, partition_from_json(j, tol), std::nullopt};
  auto partition = partition_from_json(j.at("partition"), tol);
  std::optional<ComplexMatrix> u;
  if (j.contains("unitary")) {
    u = matrix_from_json(j.at("unitary"));
    if (u->dim() != partition.dim()) throw ParseError("unitary dimension does not match partition");
  }
  std::optional<DensityOperator> rho;
  if (j.contains("rho")) {
    rho = density_from_json(j.at("rho"), tol);
    if (rho->dim() != partition.dim()) throw ParseError("rho dimension does not match partition");
  }
  return Bundle{std::move(u), std::move(partition), std::move(rho)};
}

inline Json to_json(const Bundle& b) {
  Json j = {{"partition", to_json(b.partition)}};
  if (b.unitary) j["unitary"] = to_json(*b.unitary);
  if (b.rho) j["rho"] = to_json(*b.rho);
  return j;
}

// ---------------------------------------------------------------------------
// Grams

inline Json to_json(const DecoherenceGram& g, double export_threshold = 1e-14) {
  Json entries = Json::array();
  for (HistoryCode a = 0; a < g.size(); ++a) {
    for (HistoryCode b = 0; b < g.size(); ++b) {
      const auto v = g(a, b);
      if (std::abs(v) > export_threshold) entries.push_back({a, b, v.real(), v.imag()});
    }
  }
  return {{"k", g.k()}, {"m", g.m()}, {"entries", std::move(entries)}};
}

inline DecoherenceGram gram_from_json(const Json& j) {
  const auto k = detail::index_value(detail::require(j, "k"), "k");
  const auto m = detail::index_value(detail::require(j, "m"), "m");
  const auto n = history_count(m, k);
  DecoherenceGram g(m, k, n);
  for (const auto& e : detail::require(j, "entries")) {
    if (!e.is_array() || e.size() != 4) throw ParseError("gram entry must be [alpha, beta, re, im]");
    const auto a = detail::index_value(e[0], "alpha code");
    const auto b = detail::index_value(e[1], "beta code");
    if (a >= n || b >= n) throw ParseError("gram entry code out of range");
    g(a, b) = {detail::finite_number(e[2], "re"), detail::finite_number(e[3], "im")};
  }
  return g;
}

// ---------------------------------------------------------------------------
// Reports

namespace detail {

inline Json params_to_json(const std::map<std::string, double>& params) {
  Json j = Json::object();
  for (const auto& [k, v] : params) j[k] = v;
  return j;
}

inline std::map<std::string, double> params_from_json(const Json& j) {
  std::map<std::string, double> out;
  if (!j.is_object()) throw ParseError("params must be an object");
  for (const auto& [k, v] : j.items()) out.emplace(k, finite_number(v, "param"));
  return out;
}

inline History history_from_json(const Json& j) {
  if (!j.is_array()) throw ParseError("history must be an array");
  History h;
  for (const auto& x : j) h.push_back(index_value(x, "history index"));
  return h;
}

inline StateKind state_kind_from_string(const std::string& s) {
  for (auto k : {StateKind::given, StateKind::partition, StateKind::random, StateKind::classical}) {
    if (s == to_string(k)) return k;
  }
  throw ParseError("unknown state kind '" + s + "'");
}

struct WitnessToJson {
  Json operator()(const PairWitness& w) const {
    return {{"type", "history_pair"},
            {"k", w.k},
            {"alpha", w.alpha},
            {"beta", w.beta},
            {"alpha_code", w.alpha_code},
            {"beta_code", w.beta_code},
            {"value", {w.value.real(), w.value.imag()}},
            {"state_kind", to_string(w.state_kind)},
            {"state_index", w.state_index}};
  }
  Json operator()(const CommutatorWitness& w) const {
    return {{"type", "commutator"}, {"n", w.n}, {"mu_prime", w.first}, {"mu_double_prime", w.second}};
  }
  Json operator()(const LoopWitness& w) const {
    return {{"type", "loop"}, {"n", w.n}, {"mu0", w.origin}, {"mu_prime", w.first}, {"mu_double_prime", w.second}};
  }
  Json operator()(const BlockWitness& w) const {
    return {{"type", "block_unit"}, {"mu", w.block}, {"row", w.row}, {"col", w.col}};
  }
};

inline Witness witness_from_json(const Json& j) {
  const auto type = require(j, "type").get<std::string>();
  if (type == "history_pair") {
    PairWitness w;
    w.k = index_value(require(j, "k"), "k");
    w.alpha = history_from_json(require(j, "alpha"));
    w.beta = history_from_json(require(j, "beta"));
    w.alpha_code = index_value(require(j, "alpha_code"), "alpha_code");
    w.beta_code = index_value(require(j, "beta_code"), "beta_code");
    const auto& v = require(j, "value");
    if (!v.is_array() || v.size() != 2) throw ParseError("witness value must be [re, im]");
    w.value = {finite_number(v[0], "re"), finite_number(v[1], "im")};
    w.state_kind = state_kind_from_string(require(j, "state_kind").get<std::string>());
    w.state_index = index_value(require(j, "state_index"), "state_index");
    return w;
  }
  if (type == "commutator") {
    return CommutatorWitness{index_value(require(j, "n"), "n"), index_value(require(j, "mu_prime"), "mu_prime"),
                             index_value(require(j, "mu_double_prime"), "mu_double_prime")};
  }
  if (type == "loop") {
    return LoopWitness{index_value(require(j, "n"), "n"), index_value(require(j, "mu0"), "mu0"),
                       index_value(require(j, "mu_prime"), "mu_prime"),
                       index_value(require(j, "mu_double_prime"), "mu_double_prime")};
  }
  if (type == "block_unit") {
    return BlockWitness{index_value(require(j, "mu"), "mu"), index_value(require(j, "row"), "row"),
                        index_value(require(j, "col"), "col")};
  }
  throw ParseError("unknown witness type '" + type + "'");
}

}  // namespace detail

inline Json to_json(const Witness& w) { return std::visit(detail::WitnessToJson{}, w); }

inline Json to_json(const CheckReport& r) {
  Json j = {{"check", r.check},
            {"verdict", to_string(r.verdict)},
            {"worst_value", r.worst_value},
            {"witness", r.witness ? to_json(*r.witness) : Json(nullptr)},
            {"params", detail::params_to_json(r.params)},
            {"diagnostics", detail::params_to_json(r.diagnostics)},
            {"horizon_note", r.horizon_note}};
  return j;
}

inline CheckReport report_from_json(const Json& j) {
  CheckReport r;
  r.check = detail::require(j, "check").get<std::string>();
  const auto verdict = detail::require(j, "verdict").get<std::string>();
  if (verdict != "pass" && verdict != "fail") throw ParseError("verdict must be pass or fail");
  r.verdict = verdict == "pass" ? Verdict::pass : Verdict::fail;
  r.worst_value = detail::finite_number(detail::require(j, "worst_value"), "worst_value");
  if (const auto& w = detail::require(j, "witness"); !w.is_null()) r.witness = detail::witness_from_json(w);
  r.params = detail::params_from_json(detail::require(j, "params"));
  if (j.contains("diagnostics")) r.diagnostics = detail::params_from_json(j.at("diagnostics"));
  r.horizon_note = detail::require(j, "horizon_note").get<std::string>();
  return r;
}

// ---------------------------------------------------------------------------
// Experiments

inline Json to_json(const Ensemble& e) {
  return {{"kind", to_string(e.kind)},
          {"d", e.dim},
          {"basis_groups", e.basis_groups()},
          {"trials", e.trials},
          {"seed", e.seed}};
}

inline Json to_json(const TrialRecord& t) {
  Json reports = Json::array();
  for (const auto& r : t.reports) reports.push_back(to_json(r));
  return {{"type", "trial"},
          {"trial", t.trial},
          {"seed", t.seed},
          {"unitary", to_json(t.unitary)},
          {"reports", std::move(reports)},
          {"implication_violation", t.implication_violation},
          {"note", t.note}};
}

inline Json summary_to_json(const ExperimentResult& r) {
  return {{"type", "summary"},
          {"experiment", r.experiment},
          {"ensemble", to_json(r.ensemble)},
          {"params", detail::params_to_json(r.params)},
          {"counts", r.counts},
          {"violations", r.violations}};
}

/// One line per trial followed by the summary line.
inline std::string to_jsonl(const ExperimentResult& r) {
  std::ostringstream out;
  for (const auto& t : r.trials) out << to_json(t).dump() << '\n';
  out << summary_to_json(r).dump() << '\n';
  return out.str();
}

}  // namespace histcheck
