#pragma once

// Histories over a fixed partition, their class and branch operators, and the
// decoherence functional D[a, b] = Tr[C_a rho C_b^dagger].
//
// Histories of length k are numbered lexicographically: the code of
// (a_1, ..., a_k) is the base-m integer with a_1 as most significant digit.

#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <iterator>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "histcheck/errors.hpp"
#include "histcheck/linalg.hpp"
#include "histcheck/partition.hpp"

namespace histcheck {

/// Time-ordered sequence of partition indices, a_1 first.
using History = std::vector<std::size_t>;
using HistoryCode = std::uint64_t;

/// Enumeration limits.
struct Budget {
  static constexpr std::uint64_t kDefaultMaxHistories = std::uint64_t{1} << 20;
  /// Dense Grams store (m^k)^2 complex entries; this bounds them at 1 GiB.
  static constexpr std::uint64_t kMaxGramEntries = std::uint64_t{1} << 26;

  std::uint64_t max_histories = kDefaultMaxHistories;

  /// Default budget, overridden by the HISTCHECK_BUDGET environment variable when set.
  static Budget from_env() {
    Budget b;
    if (const char* env = std::getenv("HISTCHECK_BUDGET"); env != nullptr && *env != '\0') {
      char* end = nullptr;
      const auto v = std::strtoull(env, &end, 10);
      if (end == nullptr || *end != '\0' || v == 0) {
        throw InvalidArgument(std::string("HISTCHECK_BUDGET must be a positive integer, got '") + env + "'");
      }
      b.max_histories = v;
    }
    return b;
  }
};

/// m^k, or BudgetExceeded when it is larger than the budget (or overflows).
inline std::uint64_t history_count(std::size_t m, std::size_t k, const Budget& budget = {}) {
  if (m == 0) throw InvalidArgument("partition size must be >= 1");
  if (k == 0) throw InvalidArgument("history length must be >= 1");
  // Saturating m^k so the error can report the requested size.
  std::uint64_t count = 1;
  for (std::size_t j = 0; j < k; ++j) {
    if (count > std::numeric_limits<std::uint64_t>::max() / m) {
      count = std::numeric_limits<std::uint64_t>::max();
      break;
    }
    count *= m;
  }
  if (count > budget.max_histories) throw BudgetExceeded(count, budget.max_histories, "number of histories m^k");
  return count;
}

inline HistoryCode history_code(const History& h, std::size_t m) {
  HistoryCode code = 0;
  for (const auto a : h) {
    if (a >= m) throw InvalidArgument("history index " + std::to_string(a) + " >= partition size");
    code = code * m + a;
  }
  return code;
}

inline History history_from_code(HistoryCode code, std::size_t m, std::size_t k) {
  History h(k);
  for (std::size_t j = k; j-- > 0;) {
    h[j] = static_cast<std::size_t>(code % m);
    code /= m;
  }
  return h;
}

/// All m^k histories of length k in lexicographic order, generated lazily.
class HistorySet {
 public:
  class iterator {
   public:
    using iterator_category = std::forward_iterator_tag;
    using value_type = History;
    using difference_type = std::ptrdiff_t;
    using pointer = const History*;
    using reference = const History&;

    iterator() = default;
    iterator(const HistorySet* set, HistoryCode code) : set_(set), code_(code) {
      if (code_ < set_->size()) current_ = history_from_code(code_, set_->m_, set_->k_);
    }

    reference operator*() const { return current_; }
    pointer operator->() const { return &current_; }
    HistoryCode code() const noexcept { return code_; }

    iterator& operator++() {
      ++code_;
      // Increment the base-m odometer in place.
      for (std::size_t j = current_.size(); j-- > 0;) {
        if (++current_[j] < set_->m_) break;
        current_[j] = 0;
      }
      return *this;
    }
    iterator operator++(int) {
      auto tmp = *this;
      ++*this;
      return tmp;
    }
    friend bool operator==(const iterator& a, const iterator& b) { return a.code_ == b.code_; }

   private:
    const HistorySet* set_ = nullptr;
    HistoryCode code_ = 0;
    History current_;
  };

  HistorySet(std::size_t m, std::size_t k, const Budget& budget = {})
      : m_(m), k_(k), size_(history_count(m, k, budget)) {}

  std::size_t m() const noexcept { return m_; }
  std::size_t k() const noexcept { return k_; }
  std::uint64_t size() const noexcept { return size_; }

  iterator begin() const { return iterator(this, 0); }
  iterator end() const { return iterator(this, size_); }

 private:
  std::size_t m_;
  std::size_t k_;
  std::uint64_t size_;
};

inline HistorySet enumerate_histories(std::size_t m, std::size_t k, const Budget& budget = {}) {
  return HistorySet(m, k, budget);
}

namespace detail {
inline void check_history(const History& h, const ComplexMatrix& u, const ProjectivePartition& p) {
  if (u.dim() != p.dim()) throw DimensionMismatch(u.dim(), p.dim());
  if (h.empty()) throw InvalidArgument("history must have length >= 1");
  for (const auto a : h) {
    if (a >= p.size()) throw InvalidArgument("history index " + std::to_string(a) + " >= partition size");
  }
}
}  // namespace detail

/// Schroedinger-picture chain P_{a_k} U ... P_{a_1} U.
inline ComplexMatrix branch_operator(const History& h, const ComplexMatrix& u, const ProjectivePartition& p) {
  detail::check_history(h, u, p);
  auto b = ComplexMatrix::identity(u.dim());
  for (const auto a : h) b = p[a] * (u * b);
  return b;
}

/// Heisenberg-picture class operator (U^dagger)^k P_{a_k} U ... P_{a_1} U.
inline ComplexMatrix class_operator(const History& h, const ComplexMatrix& u, const ProjectivePartition& p) {
  auto c = branch_operator(h, u, p);
  const auto u_dag = adjoint(u);
  for (std::size_t j = 0; j < h.size(); ++j) c = u_dag * c;
  return c;
}

/// Tr[A rho B^dagger] = sum_ij (A rho)_ij conj(B_ij).
inline Complex decoherence_value(const ComplexMatrix& a_rho, const ComplexMatrix& b) {
  return a_rho.eigen().cwiseProduct(b.eigen().conjugate()).sum();
}

inline Complex decoherence_functional(const History& ha, const History& hb, const ComplexMatrix& u,
                                      const ProjectivePartition& p, const DensityOperator& rho) {
  if (ha.size() != hb.size()) {
    throw InvalidArgument("histories have unequal lengths " + std::to_string(ha.size()) + " and " +
                          std::to_string(hb.size()));
  }
  if (rho.dim() != p.dim()) throw DimensionMismatch(rho.dim(), p.dim());
  const auto ba = branch_operator(ha, u, p);
  const auto bb = branch_operator(hb, u, p);
  return decoherence_value(ba * rho.matrix(), bb);
}

/// Dense m^k x m^k matrix of decoherence-functional values, indexed by history code.
class DecoherenceGram {
 public:
  DecoherenceGram(std::size_t m, std::size_t k, std::uint64_t size)
      : m_(m), k_(k), size_(size), entries_(size * size) {}

  std::size_t m() const noexcept { return m_; }
  std::size_t k() const noexcept { return k_; }
  std::uint64_t size() const noexcept { return size_; }

  Complex operator()(HistoryCode a, HistoryCode b) const { return entries_[a * size_ + b]; }
  Complex& operator()(HistoryCode a, HistoryCode b) { return entries_[a * size_ + b]; }

  /// Real diagonal entry D[a, a].
  double diagonal(HistoryCode a) const { return entries_[a * size_ + a].real(); }

  bool is_null(HistoryCode a, double p_null) const { return diagonal(a) <= p_null; }

  Complex total() const {
    Complex s{};
    for (const auto& v : entries_) s += v;
    return s;
  }

 private:
  std::size_t m_;
  std::size_t k_;
  std::uint64_t size_;
  std::vector<Complex> entries_;
};

/// Receives every Gram that full_gram builds on the current thread while installed.
/// Used by the test suites to audit structural invariants of all Grams they produce.
class ScopedGramObserver {
 public:
  using Callback = std::function<void(const DecoherenceGram&)>;

  explicit ScopedGramObserver(Callback cb) : previous_(std::move(slot())) { slot() = std::move(cb); }
  ~ScopedGramObserver() { slot() = std::move(previous_); }
  ScopedGramObserver(const ScopedGramObserver&) = delete;
  ScopedGramObserver& operator=(const ScopedGramObserver&) = delete;

  static void notify(const DecoherenceGram& g) {
    if (slot()) slot()(g);
  }

 private:
  static Callback& slot() {
    thread_local Callback cb;
    return cb;
  }
  Callback previous_;
};

/// Branch operators of all m^k histories, built along the prefix tree so each
/// length-j prefix product is formed once. A prefix whose operator has HS norm
/// at most prune_norm is null, and so are all of its descendants; those entries
/// are returned as std::nullopt.
inline std::vector<std::optional<ComplexMatrix>> all_branch_operators(const ComplexMatrix& u,
                                                                      const ProjectivePartition& p,
                                                                      std::size_t k, const Budget& budget = {},
                                                                      double prune_norm = 1e-14) {
  if (u.dim() != p.dim()) throw DimensionMismatch(u.dim(), p.dim());
  const std::size_t m = p.size();
  history_count(m, k, budget);

  std::vector<std::optional<ComplexMatrix>> level;
  level.emplace_back(ComplexMatrix::identity(u.dim()));
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<std::optional<ComplexMatrix>> next;
    next.reserve(level.size() * m);
    for (const auto& prefix : level) {
      if (!prefix) {
        for (std::size_t mu = 0; mu < m; ++mu) next.emplace_back(std::nullopt);
        continue;
      }
      const auto evolved = u * *prefix;
      for (std::size_t mu = 0; mu < m; ++mu) {
        auto child = p[mu] * evolved;
        if (hs_norm(child) <= prune_norm) {
          next.emplace_back(std::nullopt);
        } else {
          next.emplace_back(std::move(child));
        }
      }
    }
    level = std::move(next);
  }
  return level;
}

/// D[a, b] for all pairs of length-k histories.
inline DecoherenceGram full_gram(const ComplexMatrix& u, const ProjectivePartition& p, const DensityOperator& rho,
                                 std::size_t k, const Budget& budget = {}) {
  if (rho.dim() != p.dim()) throw DimensionMismatch(rho.dim(), p.dim());
  const std::uint64_t n = history_count(p.size(), k, budget);
  if (n > Budget::kMaxGramEntries / n) {
    throw BudgetExceeded(n, std::uint64_t{1} << 13, "histories in a dense decoherence Gram");
  }
  const auto branches = all_branch_operators(u, p, k, budget);

  std::vector<std::optional<ComplexMatrix>> branch_rho(n);
  for (std::uint64_t a = 0; a < n; ++a) {
    if (branches[a]) branch_rho[a] = *branches[a] * rho.matrix();
  }

  DecoherenceGram g(p.size(), k, n);
  for (std::uint64_t a = 0; a < n; ++a) {
    if (!branches[a]) continue;
    g(a, a) = {decoherence_value(*branch_rho[a], *branches[a]).real(), 0.0};
    for (std::uint64_t b = a + 1; b < n; ++b) {
      if (!branches[b]) continue;
      const auto v = decoherence_value(*branch_rho[a], *branches[b]);
      g(a, b) = v;
      g(b, a) = std::conj(v);
    }
  }
  ScopedGramObserver::notify(g);
  return g;
}

/// Diagonal of the Gram; entries in [-1e-12, 0) are clamped to zero.
inline std::vector<double> probabilities(const DecoherenceGram& g) {
  std::vector<double> out(g.size());
  for (std::uint64_t a = 0; a < g.size(); ++a) {
    const double v = g.diagonal(a);
    if (v < -1e-9) {
      throw InternalInconsistency("negative diagonal entry " + std::to_string(v) + " at history code " +
                                  std::to_string(a));
    }
    out[a] = v < 0.0 ? 0.0 : v;
  }
  return out;
}

struct CoarseGrainReport {
  double max_violation = 0.0;
  std::size_t worst_group = 0;
  /// Interference term per group.
  std::vector<double> violations;
};

/// Probability sum-rule check: for each group G of history codes, the interference
/// term |sum_{a,b in G} D[a,b] - sum_{a in G} D[a,a]|.
inline CoarseGrainReport coarse_grain_check(const DecoherenceGram& g,
                                            const std::vector<std::vector<HistoryCode>>& grouping) {
  std::vector<int> seen(g.size(), 0);
  for (const auto& group : grouping) {
    for (const auto a : group) {
      if (a >= g.size()) throw InvalidArgument("grouping references history code " + std::to_string(a) + " out of range");
      if (seen[a]++ != 0) throw InvalidArgument("grouping is not disjoint at history code " + std::to_string(a));
    }
  }
  for (std::uint64_t a = 0; a < g.size(); ++a) {
    if (seen[a] == 0) throw InvalidArgument("grouping does not cover history code " + std::to_string(a));
  }

  CoarseGrainReport report;
  report.violations.reserve(grouping.size());
  for (std::size_t gi = 0; gi < grouping.size(); ++gi) {
    Complex interference{};
    const auto& group = grouping[gi];
    for (const auto a : group) {
      for (const auto b : group) {
        if (a != b) interference += g(a, b);
      }
    }
    const double v = std::abs(interference);
    report.violations.push_back(v);
    if (v > report.max_violation) {
      report.max_violation = v;
      report.worst_group = gi;
    }
  }
  return report;
}

}  // namespace histcheck
