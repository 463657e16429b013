#pragma once

// Decoherence criteria over a fixed partition and unitary map:
//
//   exact (medium) decoherence of a history set,
//   the commutator conditions [U^n P_a U^dagger^n, P_b] = 0,
//   classicality preservation of block-diagonal states,
//   ratio-based approximate decoherence (plain, real-part and history-count scaled),
//   the loop condition and the commutator-norm bound 2 d^{3/2} sqrt(eps).
//
// Quantifiers over all n are checked up to an explicit horizon n_max, and every
// strict inequality is evaluated strictly: equality at the threshold is a failure.
// Scans visit candidates in lexicographic order and only replace the running
// maximum on a strict increase, so witnesses are deterministic.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "histcheck/errors.hpp"
#include "histcheck/histories.hpp"
#include "histcheck/linalg.hpp"
#include "histcheck/partition.hpp"

namespace histcheck {

/// Default history-probability threshold below which a history counts as null.
inline constexpr double kDefaultPNull = 1e-12;
inline constexpr std::size_t kDefaultNMax = 64;

/// Approximation parameter, 0 < eps < 1.
class Epsilon {
 public:
  explicit Epsilon(double value) : value_(value) {
    if (!(value > 0.0 && value < 1.0)) {
      throw InvalidArgument("epsilon must lie in (0, 1), got " + std::to_string(value));
    }
  }
  double value() const noexcept { return value_; }

 private:
  double value_;
};

enum class Verdict { pass, fail };

inline const char* to_string(Verdict v) { return v == Verdict::pass ? "pass" : "fail"; }

/// Which initial state a history-pair witness refers to.
enum class StateKind { given, partition, random, classical };

inline const char* to_string(StateKind s) {
  switch (s) {
    case StateKind::given: return "given";
    case StateKind::partition: return "partition";
    case StateKind::random: return "random";
    case StateKind::classical: return "classical";
  }
  return "given";
}

/// Off-diagonal Gram entry (alpha, beta) at history length k.
struct PairWitness {
  std::size_t k = 0;
  History alpha;
  History beta;
  HistoryCode alpha_code = 0;
  HistoryCode beta_code = 0;
  Complex value{};
  StateKind state_kind = StateKind::given;
  std::size_t state_index = 0;

  friend bool operator==(const PairWitness&, const PairWitness&) = default;
};

/// Commutator [U^n P_first U^dagger^n, P_second].
struct CommutatorWitness {
  std::size_t n = 0;
  std::size_t first = 0;
  std::size_t second = 0;

  friend bool operator==(const CommutatorWitness&, const CommutatorWitness&) = default;
};

/// Loop-condition triple: P_second (U^n P_origin U^dagger^n) P_first ... with first != second.
struct LoopWitness {
  std::size_t n = 0;
  std::size_t origin = 0;
  std::size_t first = 0;
  std::size_t second = 0;

  friend bool operator==(const LoopWitness&, const LoopWitness&) = default;
};

/// Classicality preservation: U |f_a><f_b| U^dagger fails to be block-diagonal,
/// where f_a, f_b are frame vectors of block `block`.
struct BlockWitness {
  std::size_t block = 0;
  std::size_t row = 0;
  std::size_t col = 0;

  friend bool operator==(const BlockWitness&, const BlockWitness&) = default;
};

using Witness = std::variant<PairWitness, CommutatorWitness, LoopWitness, BlockWitness>;

struct CheckReport {
  std::string check;
  Verdict verdict = Verdict::pass;
  /// Magnitude of the worst violation (or worst ratio for ratio conditions); always >= 0.
  double worst_value = 0.0;
  /// Location of worst_value; always present on failure.
  std::optional<Witness> witness;
  /// Echo of tolerances and limits used.
  std::map<std::string, double> params;
  /// Secondary quantities (skipped null pairs, chain bound, form disagreement, ...).
  std::map<std::string, double> diagnostics;
  std::string horizon_note;

  bool passed() const noexcept { return verdict == Verdict::pass; }

  std::optional<double> diagnostic(const std::string& key) const {
    const auto it = diagnostics.find(key);
    if (it == diagnostics.end()) return std::nullopt;
    return it->second;
  }

  friend bool operator==(const CheckReport&, const CheckReport&) = default;
};

namespace detail {

inline std::string horizon_note(std::size_t horizon, const char* what) {
  return std::string("pass up to horizon ") + what + " = " + std::to_string(horizon);
}

inline void require_compatible(const ComplexMatrix& u, const ProjectivePartition& p) {
  if (u.dim() != p.dim()) throw DimensionMismatch(u.dim(), p.dim());
}

/// Worst off-diagonal modulus of a Gram.
inline std::pair<double, std::optional<PairWitness>> worst_off_diagonal(const DecoherenceGram& g) {
  double worst = 0.0;
  std::optional<PairWitness> witness;
  for (HistoryCode a = 0; a < g.size(); ++a) {
    for (HistoryCode b = 0; b < g.size(); ++b) {
      if (a == b) continue;
      const double v = std::abs(g(a, b));
      if (!witness || v > worst) {
        worst = v;
        witness = PairWitness{g.k(), history_from_code(a, g.m(), g.k()), history_from_code(b, g.m(), g.k()), a, b,
                              g(a, b)};
      }
    }
  }
  return {worst, witness};
}

/// Folds `sub` into `acc` when it is strictly worse; keeps the first worst otherwise.
inline void absorb(CheckReport& acc, const CheckReport& sub) {
  if (!acc.witness || sub.worst_value > acc.worst_value) {
    acc.worst_value = std::max(acc.worst_value, sub.worst_value);
    if (sub.witness) acc.witness = sub.witness;
  }
  if (!sub.passed()) acc.verdict = Verdict::fail;
}

inline void tag_state(CheckReport& r, StateKind kind, std::size_t index) {
  if (r.witness) {
    if (auto* pw = std::get_if<PairWitness>(&*r.witness)) {
      pw->state_kind = kind;
      pw->state_index = index;
    }
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Exact decoherence

/// Medium decoherence on a precomputed Gram: max |D[a,b]|, a != b, must not exceed tol.
inline CheckReport check_exact(const DecoherenceGram& g, double tol) {
  CheckReport r;
  r.check = "exact";
  auto [worst, witness] = detail::worst_off_diagonal(g);
  r.worst_value = worst;
  if (worst > tol) {
    r.verdict = Verdict::fail;
    r.witness = *witness;
  } else if (witness) {
    r.witness = *witness;
  }
  r.params = {{"k", static_cast<double>(g.k())}, {"tol", tol}};
  return r;
}

inline CheckReport check_exact(const ComplexMatrix& u, const ProjectivePartition& p, const DensityOperator& rho,
                               std::size_t k, double tol = kDefaultTol, const Budget& budget = {}) {
  return check_exact(full_gram(u, p, rho, k, budget), tol);
}

namespace detail {
/// check_exact over every k in 1..k_max for one state; the report's witness is tagged by the caller.
inline CheckReport check_exact_up_to(const ComplexMatrix& u, const ProjectivePartition& p,
                                     const DensityOperator& rho, std::size_t k_max, double tol,
                                     const Budget& budget) {
  CheckReport acc;
  for (std::size_t k = 1; k <= k_max; ++k) absorb(acc, check_exact(u, p, rho, k, tol, budget));
  return acc;
}
}  // namespace detail

/// Exact decoherence for every partition state and every history length k <= k_max.
inline CheckReport check_exact_all_partition_states(const ComplexMatrix& u, const ProjectivePartition& p,
                                                    std::size_t k_max, double tol = kDefaultTol,
                                                    const Budget& budget = {}) {
  detail::require_compatible(u, p);
  if (k_max == 0) throw InvalidArgument("k_max must be >= 1");
  history_count(p.size(), k_max, budget);
  CheckReport r;
  const auto states = partition_states(p);
  for (std::size_t nu = 0; nu < states.size(); ++nu) {
    auto sub = detail::check_exact_up_to(u, p, states[nu], k_max, tol, budget);
    detail::tag_state(sub, StateKind::partition, nu);
    detail::absorb(r, sub);
  }
  r.check = "exact_all_partition_states";
  r.params = {{"k_max", static_cast<double>(k_max)}, {"tol", tol}};
  r.horizon_note = detail::horizon_note(k_max, "k_max");
  return r;
}

/// Exact decoherence over `trials` Hilbert-Schmidt random states, their
/// block-diagonal projections, and every partition state, for all k <= k_max.
/// A sampled stand-in for "all density operators".
inline CheckReport check_exact_all_states(const ComplexMatrix& u, const ProjectivePartition& p, std::size_t k_max,
                                          std::size_t trials, double tol, std::uint64_t seed,
                                          const Budget& budget = {}) {
  detail::require_compatible(u, p);
  if (trials == 0) throw InvalidArgument("trials must be >= 1");
  auto r = check_exact_all_partition_states(u, p, k_max, tol, budget);
  Rng rng(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto rho = random_density(p.dim(), rng);
    auto sub = detail::check_exact_up_to(u, p, rho, k_max, tol, budget);
    detail::tag_state(sub, StateKind::random, t);
    detail::absorb(r, sub);

    auto sub_cl = detail::check_exact_up_to(u, p, project_classical(rho, p), k_max, tol, budget);
    detail::tag_state(sub_cl, StateKind::classical, t);
    detail::absorb(r, sub_cl);
  }
  r.check = "exact_all_states";
  r.params = {{"k_max", static_cast<double>(k_max)},
              {"trials", static_cast<double>(trials)},
              {"tol", tol},
              {"seed", static_cast<double>(seed)}};
  return r;
}

// ---------------------------------------------------------------------------
// Commutator conditions

/// HS norms c(n, a, b) = ||[U^n P_a U^dagger^n, P_b]||_2 for 1 <= n <= n_max.
class CommutatorTable {
 public:
  CommutatorTable(std::size_t n_max, std::size_t m) : n_max_(n_max), m_(m), norms_(n_max * m * m, 0.0) {}

  std::size_t n_max() const noexcept { return n_max_; }
  std::size_t m() const noexcept { return m_; }

  double at(std::size_t n, std::size_t a, std::size_t b) const { return norms_.at(index(n, a, b)); }
  double& at(std::size_t n, std::size_t a, std::size_t b) { return norms_.at(index(n, a, b)); }

  /// Largest entry with n <= horizon, first in (n, a, b) order on ties.
  std::pair<double, CommutatorWitness> max_up_to(std::size_t horizon) const {
    double worst = -1.0;
    CommutatorWitness w;
    for (std::size_t n = 1; n <= std::min(horizon, n_max_); ++n) {
      for (std::size_t a = 0; a < m_; ++a) {
        for (std::size_t b = 0; b < m_; ++b) {
          if (at(n, a, b) > worst) {
            worst = at(n, a, b);
            w = {n, a, b};
          }
        }
      }
    }
    return {std::max(worst, 0.0), w};
  }

 private:
  std::size_t index(std::size_t n, std::size_t a, std::size_t b) const {
    if (n == 0 || n > n_max_ || a >= m_ || b >= m_) throw InvalidArgument("commutator table index out of range");
    return ((n - 1) * m_ + a) * m_ + b;
  }

  std::size_t n_max_;
  std::size_t m_;
  std::vector<double> norms_;
};

/// Heisenberg-evolved projectors U^n P_a U^dagger^n for n = 1..n_max, built by
/// iterated conjugation (no re-unitarization).
template <typename Visitor>
void for_each_evolved_projector(const ComplexMatrix& u, const ProjectivePartition& p, std::size_t n_max,
                                Visitor&& visit) {
  const auto u_dag = adjoint(u);
  std::vector<ComplexMatrix> evolved = p.projectors();
  for (std::size_t n = 1; n <= n_max; ++n) {
    for (std::size_t a = 0; a < p.size(); ++a) {
      evolved[a] = u * evolved[a] * u_dag;
      visit(n, a, std::as_const(evolved[a]));
    }
  }
}

inline CommutatorTable commutator_table(const ComplexMatrix& u, const ProjectivePartition& p, std::size_t n_max) {
  detail::require_compatible(u, p);
  if (n_max == 0) throw InvalidArgument("n_max must be >= 1");
  CommutatorTable table(n_max, p.size());
  for_each_evolved_projector(u, p, n_max, [&](std::size_t n, std::size_t a, const ComplexMatrix& evolved) {
    for (std::size_t b = 0; b < p.size(); ++b) table.at(n, a, b) = hs_norm(commutator(evolved, p[b]));
  });
  return table;
}

inline CheckReport check_commutators(const CommutatorTable& table, double tol) {
  CheckReport r;
  r.check = "commutators";
  const auto [worst, w] = table.max_up_to(table.n_max());
  r.worst_value = worst;
  r.witness = w;
  r.verdict = worst <= tol ? Verdict::pass : Verdict::fail;
  r.params = {{"n_max", static_cast<double>(table.n_max())}, {"tol", tol}};
  r.horizon_note = detail::horizon_note(table.n_max(), "n_max");
  return r;
}

inline CheckReport check_commutators(const ComplexMatrix& u, const ProjectivePartition& p,
                                     std::size_t n_max = kDefaultNMax, double tol = kDefaultTol) {
  return check_commutators(commutator_table(u, p, n_max), tol);
}

// ---------------------------------------------------------------------------
// Classicality preservation

/// Orthonormal basis of the range of a projector, by modified Gram-Schmidt over
/// its columns (largest-norm column first).
inline std::vector<Eigen::VectorXcd> projector_frame(const ComplexMatrix& proj, std::size_t rank) {
  const auto& m = proj.eigen();
  std::vector<Eigen::VectorXcd> frame;
  std::vector<bool> used(static_cast<std::size_t>(m.cols()), false);
  while (frame.size() < rank) {
    double best = -1.0;
    Eigen::Index best_col = -1;
    Eigen::VectorXcd best_vec;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (used[static_cast<std::size_t>(c)]) continue;
      Eigen::VectorXcd v = m.col(c);
      for (const auto& f : frame) v -= f.dot(v) * f;
      const double n = v.norm();
      if (n > best) {
        best = n;
        best_col = c;
        best_vec = std::move(v);
      }
    }
    if (best_col < 0 || best <= 1e-8) throw InternalInconsistency("projector rank exceeds its column span");
    used[static_cast<std::size_t>(best_col)] = true;
    frame.push_back(best_vec / best);
  }
  return frame;
}

/// Checks that U rho U^dagger is block-diagonal for every block-diagonal rho.
/// The condition is linear in rho, so it suffices to check the matrix units
/// |f_a><f_b| of every block's frame: each U |f_a><f_b| U^dagger must have no
/// weight between different blocks.
inline CheckReport check_classicality_preservation(const ComplexMatrix& u, const ProjectivePartition& p,
                                                   double tol = kDefaultTol) {
  detail::require_compatible(u, p);
  CheckReport r;
  r.check = "classicality_preservation";
  r.params = {{"tol", tol}};
  bool first = true;
  for (std::size_t mu = 0; mu < p.size(); ++mu) {
    const auto frame = projector_frame(p[mu], p.ranks()[mu]);
    std::vector<Eigen::VectorXcd> images;
    images.reserve(frame.size());
    for (const auto& f : frame) images.emplace_back(u.eigen() * f);
    for (std::size_t a = 0; a < frame.size(); ++a) {
      for (std::size_t b = 0; b < frame.size(); ++b) {
        ComplexMatrix::Storage unit = images[a] * images[b].adjoint();
        const ComplexMatrix y(ComplexMatrix::Unchecked{}, std::move(unit));
        const double residual = hs_norm(y - block_diagonal_part(y, p));
        if (first || residual > r.worst_value) {
          r.worst_value = residual;
          r.witness = BlockWitness{mu, a, b};
          first = false;
        }
      }
    }
  }
  r.verdict = r.worst_value <= tol ? Verdict::pass : Verdict::fail;
  return r;
}

// ---------------------------------------------------------------------------
// Approximate decoherence

namespace detail {

/// Shared scan for the ratio conditions |D[a,b]| < eps * sqrt(D[a,a] D[b,b]) / divisor.
/// Pairs with a null history are checked against the absolute fallback
/// |D[a,b]| <= eps * p_null instead and counted as skipped.
inline CheckReport ratio_scan(const DecoherenceGram& g, double eps, double divisor, bool real_part_only,
                              double p_null) {
  CheckReport r;
  double worst = 0.0;
  std::size_t skipped = 0;
  bool failed = false;
  std::optional<PairWitness> witness;
  for (HistoryCode a = 0; a < g.size(); ++a) {
    for (HistoryCode b = 0; b < g.size(); ++b) {
      if (a == b) continue;
      const Complex v = g(a, b);
      const double lhs = real_part_only ? std::abs(v.real()) : std::abs(v);
      double ratio = 0.0;
      bool violates = false;
      if (g.is_null(a, p_null) || g.is_null(b, p_null)) {
        ++skipped;
        const double rhs = eps * p_null;
        ratio = lhs / rhs;
        violates = lhs > rhs;
      } else {
        const double rhs = eps * std::sqrt(g.diagonal(a) * g.diagonal(b)) / divisor;
        ratio = lhs / rhs;
        violates = !(lhs < rhs);
      }
      if (!witness || ratio > worst) {
        worst = std::max(worst, ratio);
        witness = PairWitness{g.k(), history_from_code(a, g.m(), g.k()), history_from_code(b, g.m(), g.k()), a, b, v};
      }
      if (violates) failed = true;
    }
  }
  r.worst_value = worst;
  r.witness = witness;
  r.verdict = failed ? Verdict::fail : Verdict::pass;
  r.diagnostics = {{"skipped_null_pairs", static_cast<double>(skipped)}};
  return r;
}

}  // namespace detail

/// |D[a,b]| (or |Re D[a,b]|) < eps * sqrt(D[a,a] D[b,b]) for all a != b.
inline CheckReport check_approx_dh(const DecoherenceGram& g, Epsilon eps, bool real_part_only = false,
                                   double p_null = kDefaultPNull) {
  auto r = detail::ratio_scan(g, eps.value(), 1.0, real_part_only, p_null);
  r.check = real_part_only ? "approx_dh_re" : "approx_dh";
  r.params = {{"k", static_cast<double>(g.k())}, {"eps", eps.value()}, {"p_null", p_null}};
  return r;
}

inline CheckReport check_approx_dh(const ComplexMatrix& u, const ProjectivePartition& p, const DensityOperator& rho,
                                   std::size_t k, Epsilon eps, bool real_part_only = false,
                                   double p_null = kDefaultPNull, const Budget& budget = {}) {
  return check_approx_dh(full_gram(u, p, rho, k, budget), eps, real_part_only, p_null);
}

/// As check_approx_dh with the right-hand side further divided by the number of
/// histories m^k.
inline CheckReport check_approx_strong(const DecoherenceGram& g, Epsilon eps, double p_null = kDefaultPNull) {
  auto r = detail::ratio_scan(g, eps.value(), static_cast<double>(g.size()), false, p_null);
  r.check = "approx_strong";
  r.params = {{"k", static_cast<double>(g.k())}, {"eps", eps.value()}, {"p_null", p_null}};
  return r;
}

inline CheckReport check_approx_strong(const ComplexMatrix& u, const ProjectivePartition& p,
                                       const DensityOperator& rho, std::size_t k, Epsilon eps,
                                       double p_null = kDefaultPNull, const Budget& budget = {}) {
  return check_approx_strong(full_gram(u, p, rho, k, budget), eps, p_null);
}

/// Which ratio condition check_approx evaluates.
enum class ApproxMode { dh, dh_re, strong };

inline const char* to_string(ApproxMode mode) {
  switch (mode) {
    case ApproxMode::dh: return "dh";
    case ApproxMode::dh_re: return "dh_re";
    case ApproxMode::strong: return "strong";
  }
  return "dh";
}

inline ApproxMode approx_mode_from_string(const std::string& s) {
  if (s == "dh") return ApproxMode::dh;
  if (s == "dh_re") return ApproxMode::dh_re;
  if (s == "strong") return ApproxMode::strong;
  throw InvalidArgument("unknown approximation mode '" + s + "' (expected dh, dh_re or strong)");
}

inline CheckReport check_approx(const DecoherenceGram& g, Epsilon eps, ApproxMode mode,
                                double p_null = kDefaultPNull) {
  switch (mode) {
    case ApproxMode::dh: return check_approx_dh(g, eps, false, p_null);
    case ApproxMode::dh_re: return check_approx_dh(g, eps, true, p_null);
    case ApproxMode::strong: return check_approx_strong(g, eps, p_null);
  }
  throw InvalidArgument("unknown approximation mode");
}

/// A ratio condition for every partition state and every k <= k_max.
inline CheckReport check_approx_all_partition_states(const ComplexMatrix& u, const ProjectivePartition& p,
                                                     std::size_t k_max, Epsilon eps,
                                                     ApproxMode mode = ApproxMode::strong,
                                                     double p_null = kDefaultPNull, const Budget& budget = {}) {
  detail::require_compatible(u, p);
  if (k_max == 0) throw InvalidArgument("k_max must be >= 1");
  history_count(p.size(), k_max, budget);
  CheckReport r;
  double skipped = 0.0;
  const auto states = partition_states(p);
  for (std::size_t nu = 0; nu < states.size(); ++nu) {
    for (std::size_t k = 1; k <= k_max; ++k) {
      auto sub = check_approx(full_gram(u, p, states[nu], k, budget), eps, mode, p_null);
      skipped += sub.diagnostic("skipped_null_pairs").value_or(0.0);
      detail::tag_state(sub, StateKind::partition, nu);
      detail::absorb(r, sub);
    }
  }
  r.check = std::string("approx_") + to_string(mode) + "_all_partition_states";
  r.params = {{"k_max", static_cast<double>(k_max)}, {"eps", eps.value()}, {"p_null", p_null}};
  r.diagnostics = {{"skipped_null_pairs", skipped}};
  r.horizon_note = detail::horizon_note(k_max, "k_max");
  return r;
}

// ---------------------------------------------------------------------------
// Loop condition and commutator-norm bound

/// For all n <= n_max, all origins and all first != second:
///   |Tr[P_second A P_first A P_second]| < d eps,   A = U^n P_origin U^dagger^n,
/// together with the equivalent form ||P_first A P_second||_2 < sqrt(d eps).
/// Both are evaluated; the trace must equal the squared norm to 1e-9.
inline CheckReport check_loop_condition(const ComplexMatrix& u, const ProjectivePartition& p, std::size_t n_max,
                                        Epsilon eps) {
  detail::require_compatible(u, p);
  if (n_max == 0) throw InvalidArgument("n_max must be >= 1");
  const double d = static_cast<double>(p.dim());
  const double trace_bound = d * eps.value();
  const double norm_bound = std::sqrt(trace_bound);

  CheckReport r;
  r.check = "loop_condition";
  bool failed = false;
  bool have = false;
  double max_disagreement = 0.0;
  double worst_norm = 0.0;
  std::size_t evaluated = 0;
  for_each_evolved_projector(u, p, n_max, [&](std::size_t n, std::size_t origin, const ComplexMatrix& a) {
    for (std::size_t first = 0; first < p.size(); ++first) {
      const auto pa = p[first] * a;
      for (std::size_t second = 0; second < p.size(); ++second) {
        if (first == second) continue;
        const double trace_form = std::abs(trace(p[second] * a * pa * p[second]));
        const double norm_form = hs_norm(pa * p[second]);
        const double disagreement = std::abs(trace_form - norm_form * norm_form);
        if (disagreement > 1e-9) {
          throw InternalInconsistency("loop condition trace form " + std::to_string(trace_form) +
                                      " != squared norm form " + std::to_string(norm_form * norm_form));
        }
        max_disagreement = std::max(max_disagreement, disagreement);
        worst_norm = std::max(worst_norm, norm_form);
        ++evaluated;
        if (!(trace_form < trace_bound) || !(norm_form < norm_bound)) failed = true;
        if (!have || trace_form > r.worst_value) {
          r.worst_value = trace_form;
          r.witness = LoopWitness{n, origin, first, second};
          have = true;
        }
      }
    }
  });
  r.verdict = failed ? Verdict::fail : Verdict::pass;
  r.params = {{"n_max", static_cast<double>(n_max)}, {"eps", eps.value()}, {"trace_bound", trace_bound},
              {"norm_bound", norm_bound}};
  r.diagnostics = {{"max_norm", worst_norm},
                   {"max_form_disagreement", max_disagreement},
                   {"evaluated_triples", static_cast<double>(evaluated)}};
  r.horizon_note = detail::horizon_note(n_max, "n_max");
  return r;
}

/// 2 d^{3/2} sqrt(eps).
inline double commutator_norm_bound(std::size_t d, Epsilon eps) {
  const double dd = static_cast<double>(d);
  return 2.0 * dd * std::sqrt(dd) * std::sqrt(eps.value());
}

/// max over n <= horizon and all pairs of ||[U^n P_a U^dagger^n, P_b]||_2 < 2 d^{3/2} sqrt(eps).
inline CheckReport check_theorem2_bound(const CommutatorTable& table, std::size_t d, Epsilon eps,
                                        std::size_t horizon) {
  CheckReport r;
  r.check = "commutator_norm_bound";
  const double threshold = commutator_norm_bound(d, eps);
  const auto [worst, w] = table.max_up_to(horizon);
  r.worst_value = worst;
  r.witness = w;
  r.verdict = worst < threshold ? Verdict::pass : Verdict::fail;
  const double dd = static_cast<double>(d);
  const double others = table.m() > 0 ? static_cast<double>(table.m() - 1) : 0.0;
  const std::size_t reach = std::min(horizon, table.n_max());
  r.params = {{"n_max", static_cast<double>(reach)}, {"eps", eps.value()}, {"threshold", threshold}};
  r.diagnostics = {{"chain_bound", 2.0 * others * std::sqrt(dd * eps.value())}};
  r.horizon_note = detail::horizon_note(reach, "n_max");
  return r;
}

inline CheckReport check_theorem2_bound(const ComplexMatrix& u, const ProjectivePartition& p, std::size_t n_max,
                                        Epsilon eps) {
  return check_theorem2_bound(commutator_table(u, p, n_max), p.dim(), eps, n_max);
}

}  // namespace histcheck
