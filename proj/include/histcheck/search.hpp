#pragma once

// Ensemble experiments over random and structured unitaries, checking that the
// finite-horizon versions of the decoherence criteria relate the way the
// exact and approximate equivalence results say they must.
//
// Every trial is reproducible from (ensemble, trial seed) alone. Trial seeds are
// derived from the master seed by counting, so the trial set is independent of
// evaluation order.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "histcheck/criteria.hpp"
#include "histcheck/errors.hpp"
#include "histcheck/histories.hpp"
#include "histcheck/linalg.hpp"
#include "histcheck/partition.hpp"

namespace histcheck {

enum class EnsembleKind { haar, permutation, block_diagonal, diagonal_phase };

inline const char* to_string(EnsembleKind k) {
  switch (k) {
    case EnsembleKind::haar: return "haar";
    case EnsembleKind::permutation: return "permutation";
    case EnsembleKind::block_diagonal: return "block_diagonal";
    case EnsembleKind::diagonal_phase: return "diagonal_phase";
  }
  return "haar";
}

inline EnsembleKind ensemble_kind_from_string(const std::string& s) {
  if (s == "haar") return EnsembleKind::haar;
  if (s == "permutation") return EnsembleKind::permutation;
  if (s == "block_diagonal") return EnsembleKind::block_diagonal;
  if (s == "diagonal_phase") return EnsembleKind::diagonal_phase;
  throw InvalidArgument("unknown ensemble '" + s + "'");
}

struct Ensemble {
  EnsembleKind kind = EnsembleKind::haar;
  std::size_t dim = 2;
  /// Computational-basis groups of the partition; empty means fine-grained.
  std::vector<std::vector<std::size_t>> groups;
  std::size_t trials = 100;
  std::uint64_t seed = 0;

  std::vector<std::vector<std::size_t>> basis_groups() const {
    if (!groups.empty()) return groups;
    std::vector<std::vector<std::size_t>> fine(dim);
    for (std::size_t i = 0; i < dim; ++i) fine[i] = {i};
    return fine;
  }

  ProjectivePartition partition() const { return partition_from_basis_groups(dim, basis_groups()); }
};

/// splitmix64 finalizer.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of trial `index` under `master`.
inline std::uint64_t trial_seed(std::uint64_t master, std::size_t index) {
  return mix_seed(mix_seed(master) + static_cast<std::uint64_t>(index));
}

/// One unitary from the ensemble.
///   haar:            Haar on the full space
///   permutation:     uniformly random permutation matrix
///   block_diagonal:  independent Haar unitaries inside each basis group
///   diagonal_phase:  uniform phases on the computational basis
inline ComplexMatrix sample_unitary(const Ensemble& ens, Rng& rng) {
  const std::size_t d = ens.dim;
  switch (ens.kind) {
    case EnsembleKind::haar: return haar_random_unitary(d, rng);
    case EnsembleKind::permutation: {
      std::vector<std::size_t> perm(d);
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      // Fisher-Yates with an explicit draw so the sequence does not depend on std::shuffle.
      for (std::size_t i = d; i > 1; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(perm[i - 1], perm[pick(rng)]);
      }
      ComplexMatrix u(d);
      for (std::size_t j = 0; j < d; ++j) u(perm[j], j) = 1.0;
      return u;
    }
    case EnsembleKind::block_diagonal: {
      ComplexMatrix u(d);
      for (const auto& group : ens.basis_groups()) {
        const auto block = haar_random_unitary(group.size(), rng);
        for (std::size_t a = 0; a < group.size(); ++a) {
          for (std::size_t b = 0; b < group.size(); ++b) u(group[a], group[b]) = block(a, b);
        }
      }
      return u;
    }
    case EnsembleKind::diagonal_phase: {
      std::uniform_real_distribution<double> angle(0.0, 2.0 * 3.14159265358979323846);
      ComplexMatrix u(d);
      for (std::size_t i = 0; i < d; ++i) u(i, i) = std::polar(1.0, angle(rng));
      return u;
    }
  }
  throw InvalidArgument("unknown ensemble kind");
}

inline ComplexMatrix sample_unitary(const Ensemble& ens, std::uint64_t seed) {
  Rng rng(seed);
  return sample_unitary(ens, rng);
}

struct TrialRecord {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  ComplexMatrix unitary{1};
  std::vector<CheckReport> reports;
  bool implication_violation = false;
  std::string note;

  const CheckReport& report(const std::string& name) const {
    for (const auto& r : reports) {
      if (r.check == name) return r;
    }
    throw InvalidArgument("trial has no report '" + name + "'");
  }
};

struct ExperimentResult {
  std::string experiment;
  Ensemble ensemble;
  std::map<std::string, double> params;
  std::vector<TrialRecord> trials;
  /// Named tallies over trials (passes per statement, premise failures, ...).
  std::map<std::string, std::size_t> counts;
  /// Indices into `trials` of implication violations; expected empty.
  std::vector<std::size_t> violations;
};

struct ExperimentOptions {
  /// Random states per trial for the sampled all-states check.
  std::size_t state_trials = 8;
  double p_null = kDefaultPNull;
  Budget budget = {};
};

// ---------------------------------------------------------------------------
// Exact decoherence: statements (a) partition states, (b) commutators, (c) all states

inline constexpr const char* kStatementA = "exact_all_partition_states";
inline constexpr const char* kStatementB = "commutators";
inline constexpr const char* kStatementC = "exact_all_states";
inline constexpr const char* kClassicality = "classicality_preservation";

/// Evaluates one trial. A commutator pass up to n_max implies decoherence of all
/// histories up to length n_max + 1, so when k_max <= n_max + 1 a (b)-pass
/// together with an (a)- or (c)-fail is an implication violation.
inline TrialRecord run_theorem1_trial(const Ensemble& ens, const ProjectivePartition& p, std::size_t index,
                                      std::uint64_t seed, std::size_t k_max, std::size_t n_max, double tol,
                                      const ExperimentOptions& opts = {}) {
  TrialRecord t;
  t.trial = index;
  t.seed = seed;
  t.unitary = sample_unitary(ens, seed);
  const auto& u = t.unitary;

  auto a = check_exact_all_partition_states(u, p, k_max, tol, opts.budget);
  auto b = check_commutators(u, p, n_max, tol);
  auto c = check_exact_all_states(u, p, k_max, opts.state_trials, tol, mix_seed(seed), opts.budget);
  auto cl = check_classicality_preservation(u, p, tol);

  const bool in_horizon = k_max <= n_max + 1;
  if (b.passed() && (!a.passed() || !c.passed())) {
    if (in_horizon) {
      t.implication_violation = true;
      t.note = !a.passed() ? "commutators pass but partition-state decoherence fails"
                           : "commutators pass but all-state decoherence fails";
    } else {
      t.note = "k_max beyond n_max + 1: commutator pass does not reach k_max";
    }
  }
  t.reports = {std::move(a), std::move(b), std::move(c), std::move(cl)};
  return t;
}

inline ExperimentResult run_theorem1_experiment(const Ensemble& ens, std::size_t k_max, std::size_t n_max,
                                                double tol, const ExperimentOptions& opts = {}) {
  if (k_max == 0 || n_max == 0) throw InvalidArgument("k_max and n_max must be >= 1");
  const auto p = ens.partition();
  history_count(p.size(), k_max, opts.budget);

  ExperimentResult result;
  result.experiment = "theorem1";
  result.ensemble = ens;
  result.params = {{"k_max", static_cast<double>(k_max)},
                   {"n_max", static_cast<double>(n_max)},
                   {"tol", tol},
                   {"state_trials", static_cast<double>(opts.state_trials)}};
  for (const char* key : {"a_pass", "b_pass", "c_pass", "classicality_pass", "all_pass", "all_fail",
                          "a_pass_b_fail", "out_of_horizon"}) {
    result.counts[key] = 0;
  }
  result.trials.reserve(ens.trials);
  for (std::size_t i = 0; i < ens.trials; ++i) {
    auto t = run_theorem1_trial(ens, p, i, trial_seed(ens.seed, i), k_max, n_max, tol, opts);
    const bool a = t.report(kStatementA).passed();
    const bool b = t.report(kStatementB).passed();
    const bool c = t.report(kStatementC).passed();
    result.counts["a_pass"] += a;
    result.counts["b_pass"] += b;
    result.counts["c_pass"] += c;
    result.counts["classicality_pass"] += t.report(kClassicality).passed();
    result.counts["all_pass"] += a && b && c;
    result.counts["all_fail"] += !a && !b && !c;
    // Possible at a finite horizon: (a) only reaches k_max, (b) is checked to n_max.
    result.counts["a_pass_b_fail"] += a && !b;
    result.counts["out_of_horizon"] += !t.implication_violation && !t.note.empty();
    if (t.implication_violation) result.violations.push_back(i);
    result.trials.push_back(std::move(t));
  }
  result.counts["violations"] = result.violations.size();
  return result;
}

// ---------------------------------------------------------------------------
// Approximate decoherence: the history-count-scaled ratio condition on partition
// states (premise) against the commutator-norm bound (conclusion)

inline constexpr const char* kPremise = "approx_strong_all_partition_states";
inline constexpr const char* kConclusion = "commutator_norm_bound";

/// Evaluates one trial. The premise is checked for k <= k_max, so the conclusion
/// is asserted only for n <= min(n_max, k_max - 1); the bound on the remaining
/// n <= n_max is recorded as "commutator_norm_bound_full" without being enforced.
inline TrialRecord run_theorem2_trial(const Ensemble& ens, const ProjectivePartition& p, std::size_t index,
                                      std::uint64_t seed, Epsilon eps, std::size_t k_max, std::size_t n_max,
                                      const ExperimentOptions& opts = {}) {
  TrialRecord t;
  t.trial = index;
  t.seed = seed;
  t.unitary = sample_unitary(ens, seed);
  const auto& u = t.unitary;

  auto premise = check_approx_all_partition_states(u, p, k_max, eps, ApproxMode::strong, opts.p_null, opts.budget);
  auto dh = check_approx_all_partition_states(u, p, k_max, eps, ApproxMode::dh, opts.p_null, opts.budget);
  const auto table = commutator_table(u, p, n_max);
  const std::size_t horizon = std::min(n_max, k_max - 1);
  auto conclusion = check_theorem2_bound(table, p.dim(), eps, horizon);
  auto full = check_theorem2_bound(table, p.dim(), eps, n_max);
  full.check = "commutator_norm_bound_full";
  auto loop = check_loop_condition(u, p, n_max, eps);

  if (premise.passed() && !conclusion.passed()) {
    t.implication_violation = true;
    t.note = "premise passes but commutator norm bound fails within horizon";
  } else if (premise.passed() && !full.passed()) {
    t.note = "commutator norm bound fails beyond the premise horizon";
  }
  t.reports = {std::move(premise), std::move(dh), std::move(conclusion), std::move(full), std::move(loop)};
  return t;
}

inline ExperimentResult run_theorem2_experiment(const Ensemble& ens, Epsilon eps, std::size_t k_max,
                                                std::size_t n_max, const ExperimentOptions& opts = {}) {
  if (k_max < 2) throw InvalidArgument("k_max must be >= 2 so the conclusion horizon k_max - 1 is nonempty");
  if (n_max == 0) throw InvalidArgument("n_max must be >= 1");
  const auto p = ens.partition();
  history_count(p.size(), k_max, opts.budget);

  ExperimentResult result;
  result.experiment = "theorem2";
  result.ensemble = ens;
  result.params = {{"eps", eps.value()},
                   {"k_max", static_cast<double>(k_max)},
                   {"n_max", static_cast<double>(n_max)},
                   {"conclusion_horizon", static_cast<double>(std::min(n_max, k_max - 1))},
                   {"p_null", opts.p_null}};
  for (const char* key : {"premise_pass", "premise_fail", "dh_pass", "conclusion_pass", "conclusion_fail",
                          "contrapositive_consistent", "out_of_horizon"}) {
    result.counts[key] = 0;
  }
  result.trials.reserve(ens.trials);
  for (std::size_t i = 0; i < ens.trials; ++i) {
    auto t = run_theorem2_trial(ens, p, i, trial_seed(ens.seed, i), eps, k_max, n_max, opts);
    const bool premise = t.report(kPremise).passed();
    const bool conclusion = t.report(kConclusion).passed();
    result.counts["premise_pass"] += premise;
    result.counts["premise_fail"] += !premise;
    result.counts["dh_pass"] += t.report("approx_dh_all_partition_states").passed();
    result.counts["conclusion_pass"] += conclusion;
    result.counts["conclusion_fail"] += !conclusion;
    // Conclusion failing must come with a failing premise.
    result.counts["contrapositive_consistent"] += !conclusion && !premise;
    result.counts["out_of_horizon"] += !t.implication_violation && !t.note.empty();
    if (t.implication_violation) result.violations.push_back(i);
    result.trials.push_back(std::move(t));
  }
  result.counts["violations"] = result.violations.size();
  return result;
}

// ---------------------------------------------------------------------------
// Witness search

struct ViolationWitness {
  /// Partition state index nu (rho = P_nu / Tr P_nu).
  std::size_t state = 0;
  std::size_t k = 0;
  PairWitness pair;
  double magnitude = 0.0;
};

namespace detail {

/// True when the pair breaks |D[a,b]| < eps sqrt(D[a,a] D[b,b]) / m^k (with the
/// null-history fallback used by the ratio checks).
inline bool violates_strong(const DecoherenceGram& g, HistoryCode a, HistoryCode b, double eps, double p_null) {
  const double lhs = std::abs(g(a, b));
  if (g.is_null(a, p_null) || g.is_null(b, p_null)) return lhs > eps * p_null;
  const double rhs = eps * std::sqrt(g.diagonal(a) * g.diagonal(b)) / static_cast<double>(g.size());
  return !(lhs < rhs);
}

}  // namespace detail

/// Searches for a partition state and history pair breaking the strong ratio
/// condition, given a triple (n, origin, first, second) whose commutator
/// ||[U^n P_origin U^dagger^n, P_second]||_2 reaches 2 d^{3/2} sqrt(eps).
///
/// Order: the state P_origin first, then the others; history lengths k <= n + 1
/// first, then up to k_cap; within a Gram, pairs whose entries at time n lie in
/// {first, second} and differ, then all remaining pairs, each lexicographically.
/// Returns nullopt when the triple does not reach the bound, when first == second,
/// or when nothing is found within k_cap.
inline std::optional<ViolationWitness> find_violation_witness(const ComplexMatrix& u, const ProjectivePartition& p,
                                                              std::size_t n, std::size_t origin, std::size_t first,
                                                              std::size_t second, Epsilon eps, std::size_t k_cap,
                                                              double p_null = kDefaultPNull,
                                                              const Budget& budget = {}) {
  detail::require_compatible(u, p);
  if (n == 0) throw InvalidArgument("n must be >= 1");
  if (origin >= p.size() || first >= p.size() || second >= p.size()) {
    throw InvalidArgument("partition index out of range");
  }
  if (first == second || k_cap == 0) return std::nullopt;

  const auto evolved = matrix_power(u, n) * p[origin] * matrix_power(adjoint(u), n);
  if (hs_norm(commutator(evolved, p[second])) < commutator_norm_bound(p.dim(), eps)) return std::nullopt;

  std::vector<std::size_t> state_order{origin};
  for (std::size_t nu = 0; nu < p.size(); ++nu) {
    if (nu != origin) state_order.push_back(nu);
  }
  std::vector<std::size_t> k_order;
  for (std::size_t k = 1; k <= std::min(n + 1, k_cap); ++k) k_order.push_back(k);
  for (std::size_t k = n + 2; k <= k_cap; ++k) k_order.push_back(k);

  const auto states = partition_states(p);
  for (const auto k : k_order) {
    if (k > 1 && history_count(p.size(), k, Budget{std::numeric_limits<std::uint64_t>::max()}) > budget.max_histories) {
      break;
    }
    for (const auto nu : state_order) {
      const auto g = full_gram(u, p, states[nu], k, budget);
      auto preferred = [&](HistoryCode a, HistoryCode b) {
        if (n > k) return false;
        const auto ha = history_from_code(a, g.m(), k);
        const auto hb = history_from_code(b, g.m(), k);
        const auto x = ha[n - 1];
        const auto y = hb[n - 1];
        return x != y && (x == first || x == second) && (y == first || y == second);
      };
      for (int pass = 0; pass < 2; ++pass) {
        for (HistoryCode a = 0; a < g.size(); ++a) {
          for (HistoryCode b = a + 1; b < g.size(); ++b) {
            if (preferred(a, b) != (pass == 0)) continue;
            if (detail::violates_strong(g, a, b, eps.value(), p_null)) {
              ViolationWitness w;
              w.state = nu;
              w.k = k;
              w.pair = PairWitness{k, history_from_code(a, g.m(), k), history_from_code(b, g.m(), k), a, b, g(a, b),
                                   StateKind::partition, nu};
              w.magnitude = std::abs(g(a, b));
              return w;
            }
          }
        }
      }
    }
  }
  return std::nullopt;
}

}  // namespace histcheck
