#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <vector>

#include "qwalk/combinatorics.hpp"
#include "qwalk/cost_ledger.hpp"
#include "qwalk/distinctness/collisions.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/history_set.hpp"

namespace qwalk {

using LocalState = std::map<Mask, std::complex<double>>;  // sparse over local index subsets

/// Normalized garbage superposition over S̃₁ for the outer edge (S₂, S₂′).
struct GarbageState {
  Mask S2 = 0, S2p = 0;
  LocalState amps;
  double norm() const {
    double s = 0;
    for (auto& [k, a] : amps) s += std::norm(a);
    return std::sqrt(s);
  }
};

inline bool adjacent(Mask S2, Mask S2p, const Parameters& p) {
  return popcount(S2) == p.s2 && popcount(S2p) == p.s2 && popcount(S2 & S2p) == p.s2 - p.m;
}

/// |M^{S₂}| as the true set count.
inline std::uint64_t inner_marked_size(const CollisionIndex& ci, const Parameters& p) {
  return count_inner_marked(p.s1, p.m, ci.local_count() - 2 * p.s2, ci.n2() - p.s2).true_count;
}

/// α² for one S̃₁ as an exact fraction num/den.
struct Fraction {
  std::uint64_t num = 0, den = 1;
  friend bool operator==(const Fraction& a, const Fraction& b) {
    return static_cast<unsigned __int128>(a.num) * b.den == static_cast<unsigned __int128>(b.num) * a.den;
  }
};

inline Fraction garbage_weight(const CollisionIndex& ci, const Parameters& p, Mask S2, Mask St) {
  const int pc = ci.pair_count(St);
  const auto M = count_inner_marked(p.s1, p.m, popcount(ci.region(S2)), ci.n2() - p.s2).true_count;
  return {binomial(ci.n2() - p.s2, p.m), binomial(pc + p.m, p.m) * M};
}

/// ψ(S₂,S₂′) from the closed-form amplitudes α_{S̃₁} = √(C(n₂−s₂,m)/(C(|P(S̃₁)|+m,m)·|M^{S₂}|)).
inline GarbageState garbage_state(const CollisionIndex& ci, const Parameters& p, Mask S2, Mask S2p) {
  ci.require_masks();
  if (!adjacent(S2, S2p, p)) throw ParameterError("garbage_state: (S2, S2') is not an outer edge");
  GarbageState g;
  g.S2 = S2, g.S2p = S2p;
  const Mask universe = ci.all_local() & ~ci.indices_of(S2 | S2p);
  for (Mask St : subsets_of(universe, p.s1 - 2 * p.m)) {
    Fraction w = garbage_weight(ci, p, S2, St);
    g.amps[St] = std::sqrt(static_cast<double>(w.num) / static_cast<double>(w.den));
  }
  return g;
}

/// Uniform |π^{S₂}(M^{S₂})⟩⁰: 1/√|M| on every marked S₁ ⊆ region(S₂).
inline LocalState uniform_marked_state(const CollisionIndex& ci, const Parameters& p, Mask S2) {
  LocalState s;
  std::vector<Mask> marked;
  for (Mask S1 : subsets_of(ci.region(S2), p.s1))
    if (ci.pair_count(S1) >= p.m) marked.push_back(S1);
  const double a = 1.0 / std::sqrt(static_cast<double>(marked.size()));
  for (Mask S1 : marked) s[S1] = a;
  return s;
}

/// LDwG output: for each S₂′ ∈ Γ(S₂), the coefficient vector (1/√|Γ|)·ψ(S₂,S₂′) over S̃₁.
using LdwgOutput = std::map<Mask, LocalState>;

/// Superpose I ⊆ S₂ (|I|=m); superpose J ⊆ P(S₁) (|J|=m); strip I(J) from S₁; S₂′ = (S₂∖I) ∪ J.
inline LdwgOutput ldwg_apply(const CollisionIndex& ci, const Parameters& p, Mask S2, const LocalState& in,
                             double support_tol = 1e-9) {
  ci.require_masks();
  LdwgOutput out;
  const auto Is = subsets_of(S2, p.m);
  const double norm_I = 1.0 / std::sqrt(static_cast<double>(Is.size()));
  const Mask region = ci.region(S2);
  for (auto& [S1, a] : in) {
    if (std::abs(a) == 0) continue;
    if ((S1 & ~region) != 0 || popcount(S1) != p.s1)
      throw ParameterError("ldwg_apply: input component outside the inner vertex set");
    const Mask P1 = ci.pairs_within(S1);
    if (popcount(P1) < p.m) {
      if (std::abs(a) <= support_tol) continue;
      throw ParameterError("ldwg_apply: input not supported on M^{S2}");
    }
    const auto Js = subsets_of(P1, p.m);
    const double norm_J = 1.0 / std::sqrt(static_cast<double>(Js.size()));
    for (Mask I : Is)
      for (Mask J : Js) {
        const Mask S2p = (S2 & ~I) | J;
        const Mask St = S1 & ~ci.indices_of(J);
        out[S2p][St] += a * norm_I * norm_J;
      }
  }
  return out;
}

/// Adjoint of ldwg_apply: maps an output back to the inner vertex register of S₂.
inline LocalState ldwg_adjoint(const CollisionIndex& ci, const Parameters& p, Mask S2, const LdwgOutput& out) {
  ci.require_masks();
  LocalState in;
  const double norm_I = 1.0 / std::sqrt(static_cast<double>(binomial(p.s2, p.m)));
  for (auto& [S2p, st] : out) {
    if (!adjacent(S2, S2p, p)) throw ParameterError("ldwg_adjoint: component on a non-neighbour");
    const Mask J = S2p & ~S2;
    for (auto& [St, a] : st) {
      const Mask S1 = St | ci.indices_of(J);
      const double norm_J = 1.0 / std::sqrt(static_cast<double>(binomial(ci.pair_count(S1), p.m)));
      in[S1] += a * norm_I * norm_J;
    }
  }
  return in;
}

/// ψ(S₂,S₂′) extracted from the LDwG output (component of S₂′ divided by 1/√|Γ|).
inline LocalState garbage_from_ldwg(const LdwgOutput& out, Mask S2p, const Parameters& p, int n2) {
  LocalState g;
  auto it = out.find(S2p);
  if (it == out.end()) return g;
  const double gamma = static_cast<double>(binomial(p.s2, p.m) * binomial(n2 - p.s2, p.m));
  for (auto& [k, a] : it->second) g[k] = a * std::sqrt(gamma);
  return g;
}

/// Edge state |Q(S₂),Q(S₂′)⟩|ψ⟩.
struct EdgeState {
  Mask S2 = 0, S2p = 0;
  LocalState psi;
};

/// |Q(S₂),Q(S₂′)⟩|ψ⟩ ↦ |Q(S₂′),Q(S₂)⟩|ψ⟩. With a ledger, the move is carried out on an edge
/// encoding (m deletions and m insertions on Q(S₂)).
inline EdgeState garbage_swap_apply(const EdgeState& e, const CollisionIndex* ci = nullptr, CostLedger* ledger = nullptr) {
  if (ci && ledger) {
    EdgeEncoding enc;
    auto item = [&](int p) {
      auto [i, j] = ci->pairs()[p];
      return Item{pair_z(i, j), ci->values()[i]};
    };
    for (Mask s = e.S2; s; s &= s - 1) enc.outer.insert(item(std::countr_zero(s)));
    for (Mask s = e.S2 & ~e.S2p; s; s &= s - 1) enc.outer_removed.insert(item(std::countr_zero(s)));
    for (Mask s = e.S2p & ~e.S2; s; s &= s - 1) enc.outer_added.insert(item(std::countr_zero(s)));
    enc.swap_outer(ledger);
  }
  return EdgeState{e.S2p, e.S2, e.psi};
}

inline double max_abs_difference(const LocalState& a, const LocalState& b) {
  double d = 0;
  for (auto& [k, x] : a) {
    auto it = b.find(k);
    d = std::max(d, std::abs(x - (it == b.end() ? std::complex<double>(0) : it->second)));
  }
  for (auto& [k, y] : b)
    if (!a.count(k)) d = std::max(d, std::abs(y));
  return d;
}

inline double l2_distance(const LocalState& a, const LocalState& b) {
  double s = 0;
  for (auto& [k, x] : a) {
    auto it = b.find(k);
    s += std::norm(x - (it == b.end() ? std::complex<double>(0) : it->second));
  }
  for (auto& [k, y] : b)
    if (!a.count(k)) s += std::norm(y);
  return std::sqrt(s);
}

}  // namespace qwalk
