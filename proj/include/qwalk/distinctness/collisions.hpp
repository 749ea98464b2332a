#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "qwalk/combinatorics.hpp"
#include "qwalk/cost_ledger.hpp"
#include "qwalk/distinctness/instance.hpp"
#include "qwalk/distinctness/tripartition.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/history_set.hpp"

namespace qwalk {

/// Walk parameters: set sizes s₁, s₂, swap batch m, collision-pair count n₂.
struct Parameters {
  int s1 = 0, s2 = 0, m = 0, n2 = 0;
  friend bool operator==(const Parameters&, const Parameters&) = default;
};

/// m = max(1, ⌊s₁²n₂/N²⌋).
inline int derive_m(int s1, int n2, std::size_t N) {
  const auto num = static_cast<std::uint64_t>(s1) * static_cast<std::uint64_t>(s1) * static_cast<std::uint64_t>(n2);
  const auto den = static_cast<std::uint64_t>(N) * static_cast<std::uint64_t>(N);
  return std::max<int>(1, static_cast<int>(num / den));
}

/// Desk-scale (s₁, s₂) for a preprocessed length N.
inline std::pair<int, int> default_set_sizes(std::size_t N) {
  const double n = static_cast<double>(N);
  const int s2 = std::max(1, std::min(static_cast<int>(std::lround(std::pow(n, 4.0 / 7.0))), static_cast<int>(2 * N / 81)));
  const int s1 = std::max(2, std::min(static_cast<int>(std::lround(std::pow(n, 5.0 / 7.0))), static_cast<int>(N / 12)));
  return {s1, std::min(s1, s2)};
}

/// Why a parameter set cannot drive the walk, or nullopt when it can.
inline std::optional<std::string> parameter_problem(const Parameters& p) {
  if (p.s1 < 1 || p.s2 < 1 || p.m < 1) return "s1, s2, m must be positive";
  if (p.m > p.s2) return "m exceeds s2";
  if (2 * p.m > p.s1) return "2m exceeds s1";
  if (p.n2 < p.s2 + p.m) return "too few collision pairs (n2 < s2 + m)";
  return std::nullopt;
}

/// P(A₁,A₂) and local indexing of A₁ ∪ A₂ for one instance and partition.
class CollisionIndex {
 public:
  CollisionIndex(const Instance& inst, const Tripartition& part)
      : CollisionIndex(inst, (part.N() == inst.size() ? part.classes()
                                                      : throw ParameterError("CollisionIndex: partition size mismatch"))) {}

  /// Explicit classes A₁, A₂, A₃ (0-based indices).
  CollisionIndex(const Instance& inst, std::array<std::vector<std::int64_t>, 3> cls) : values_(inst.values) {
    std::vector<int> seen(inst.size(), 0);
    for (auto& c : cls) {
      std::sort(c.begin(), c.end());
      for (auto i : c) {
        if (i < 0 || i >= static_cast<std::int64_t>(inst.size()) || seen[i]++)
          throw ParameterError("CollisionIndex: classes must partition the index set");
      }
    }
    for (int v : seen)
      if (!v) throw ParameterError("CollisionIndex: classes must cover the index set");
    a1_ = cls[0], a2_ = cls[1], a3_ = cls[2];
    std::map<std::int64_t, std::vector<std::int64_t>> by_value;
    for (auto j : a2_) by_value[values_[j]].push_back(j);
    std::map<std::int64_t, int> use;
    for (auto i : a1_) {
      auto it = by_value.find(values_[i]);
      if (it == by_value.end()) continue;
      for (auto j : it->second) {
        pairs_.emplace_back(i, j);
        ++use[i], ++use[j];
      }
    }
    for (auto& [k, c] : use)
      if (c > 1) disjoint_ = false;
    local_of_.assign(inst.size(), -1);
    std::vector<std::int64_t> l12 = a1_;
    l12.insert(l12.end(), a2_.begin(), a2_.end());
    std::sort(l12.begin(), l12.end());
    global_ = l12;
    for (std::size_t k = 0; k < l12.size(); ++k) local_of_[l12[k]] = static_cast<int>(k);
  }

  const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs() const { return pairs_; }
  int n2() const { return static_cast<int>(pairs_.size()); }
  bool disjoint() const { return disjoint_; }
  const std::vector<std::int64_t>& a1() const { return a1_; }
  const std::vector<std::int64_t>& a2() const { return a2_; }
  const std::vector<std::int64_t>& a3() const { return a3_; }
  const std::vector<std::int64_t>& values() const { return values_; }

  /// Bitmask indexing needs |A₁ ∪ A₂| ≤ 64 and n₂ ≤ 64.
  bool mask_capable() const { return global_.size() <= 64 && pairs_.size() <= 64; }
  void require_masks() const {
    if (!mask_capable()) throw CapacityError("CollisionIndex: |A1 u A2| or n2 exceeds 64 (local bitmask limit)");
  }

  int local_count() const { return static_cast<int>(global_.size()); }
  std::int64_t global(int local) const { return global_.at(local); }
  int local(std::int64_t g) const { return local_of_.at(g); }
  Mask all_local() const {
    require_masks();
    return global_.size() == 64 ? ~Mask{0} : ((Mask{1} << global_.size()) - 1);
  }
  Mask pair_mask(int p) const {
    return (Mask{1} << local_of_[pairs_[p].first]) | (Mask{1} << local_of_[pairs_[p].second]);
  }

  /// I(S₂): both indices of every pair in S₂ (S₂ a mask over pair indices).
  Mask indices_of(Mask S2) const {
    Mask m = 0;
    for (Mask s = S2; s; s &= s - 1) m |= pair_mask(std::countr_zero(s));
    return m;
  }

  /// (A₁ ∪ A₂) ∖ I(S₂).
  Mask region(Mask S2) const { return all_local() & ~indices_of(S2); }

  /// Pairs fully contained in a local index set.
  Mask pairs_within(Mask S1) const {
    Mask out = 0;
    for (int p = 0; p < n2(); ++p) {
      Mask pm = pair_mask(p);
      if ((S1 & pm) == pm) out |= Mask{1} << p;
    }
    return out;
  }
  int pair_count(Mask S1) const { return popcount(pairs_within(S1)); }

 private:
  std::vector<std::int64_t> values_;
  std::vector<std::int64_t> a1_, a2_, a3_, global_;
  std::vector<int> local_of_;
  std::vector<std::pair<std::int64_t, std::int64_t>> pairs_;
  bool disjoint_ = true;
};

struct MarkedCount {
  std::uint64_t true_count = 0;
  std::uint64_t closed_form = 0;
};

/// |{S₁ ⊆ region : |S₁| = s₁, |P(S₁)| ≥ m}| for `pairs` disjoint pairs inside a region,
/// by inclusion–exclusion, next to the closed form C(pairs, m)·C(region − 2m, s₁ − 2m).
inline MarkedCount count_inner_marked(int s1, int m, int region, int pairs) {
  if (s1 < 0 || m < 0 || pairs < 0 || region < 2 * pairs) throw ParameterError("count_inner_marked: bad arguments");
  MarkedCount r;
  r.closed_form = binomial(pairs, m) * binomial(region - 2 * m, s1 - 2 * m);
  if (m == 0) {
    r.true_count = binomial(region, s1);
    return r;
  }
  __int128 acc = 0;
  for (int j = m; j <= pairs && 2 * j <= s1; ++j) {
    __int128 term = static_cast<__int128>(binomial(j - 1, m - 1)) * binomial(pairs, j) * binomial(region - 2 * j, s1 - 2 * j);
    acc += ((j - m) % 2 ? -term : term);
  }
  r.true_count = static_cast<std::uint64_t>(acc);
  return r;
}

inline MarkedCount count_inner_marked(const Parameters& p, int region, int pairs) {
  return count_inner_marked(p.s1, p.m, region, pairs);
}

struct CheckResult {
  bool marked = false;
  std::optional<std::array<std::int64_t, 3>> witness;  // 0-based (i ∈ A₁, j ∈ A₂, k ∈ A₃)
  CostLedger ledger;
};

/// Marked iff some pair (i,j) ∈ S₂ has a k ∈ A₃ with χᵢ = χⱼ = χₖ. Emulates Grover over A₃
/// with value lookups in Q(S₂); charged ⌈(π/4)√|A₃|⌉ queries and lookups.
inline CheckResult check_marked(const std::vector<std::pair<std::int64_t, std::int64_t>>& S2,
                                const std::vector<std::int64_t>& values, const std::vector<std::int64_t>& a3) {
  CheckResult r;
  HistoryFreeSet q;
  for (auto& [i, j] : S2) q.insert(Item{pair_z(i, j), values[i]});
  const auto g = static_cast<std::uint64_t>(std::ceil(std::numbers::pi / 4 * std::sqrt(static_cast<double>(a3.size()))));
  r.ledger.queries += g;
  r.ledger.ds_ops += g;
  r.ledger.checks += 1;
  for (auto k : a3) {
    auto hit = q.lookup_by_value(values[k]);
    if (!hit.empty()) {
      auto [i, j] = unpair_z(hit.front().z);
      r.marked = true;
      r.witness = std::array<std::int64_t, 3>{i, j, k};
      break;
    }
  }
  return r;
}

inline CheckResult check_marked(Mask S2, const CollisionIndex& ci) {
  std::vector<std::pair<std::int64_t, std::int64_t>> pr;
  for (Mask s = S2; s; s &= s - 1) pr.push_back(ci.pairs()[std::countr_zero(s)]);
  return check_marked(pr, ci.values(), ci.a3());
}

}  // namespace qwalk
