#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "qwalk/combinatorics.hpp"
#include "qwalk/distinctness/collisions.hpp"
#include "qwalk/distinctness/garbage.hpp"
#include "qwalk/distinctness/instance.hpp"
#include "qwalk/distinctness/solver.hpp"
#include "qwalk/hash_family.hpp"
#include "qwalk/history_set.hpp"
#include "qwalk/markov_chain.hpp"
#include "qwalk/nested_update.hpp"
#include "qwalk/random.hpp"
#include "qwalk/walk_quantize.hpp"

namespace qwalk {

/// n = 12 input with one 3-collision at 0-based positions 1, 5, 9.
inline std::vector<std::int64_t> battery_values() { return {3, 100, 7, 11, 13, 100, 17, 19, 23, 100, 29, 31}; }

/// A₁ = {0..3} ∪ {12..19}, A₂ = {4..7} ∪ {24..31}, A₃ = the rest (0-based, preprocessed length 36).
inline std::array<std::vector<std::int64_t>, 3> battery_classes() {
  std::array<std::vector<std::int64_t>, 3> c;
  for (std::int64_t i = 0; i < 36; ++i) {
    const bool a1 = i < 4 || (i >= 12 && i < 20);
    const bool a2 = (i >= 4 && i < 8) || (i >= 24 && i < 32);
    c[a1 ? 0 : (a2 ? 1 : 2)].push_back(i);
  }
  return c;
}

inline std::shared_ptr<const CollisionIndex> battery_index() {
  static const auto ci = std::make_shared<const CollisionIndex>(preprocess(battery_values()), battery_classes());
  return ci;
}

/// (s₁, s₂, m) combinations of the battery, n₂ = 9.
inline std::vector<Parameters> battery_params() {
  const int n2 = battery_index()->n2();
  return {{3, 1, 1, n2}, {4, 1, 1, n2}, {4, 2, 1, n2}, {4, 2, 2, n2}, {5, 2, 1, n2}};
}

struct CheckOutcome {
  explicit CheckOutcome(std::string n = {}) : name(std::move(n)) {}
  std::string name;
  bool pass = true;
  double max_deviation = 0;
  std::string detail;
};

inline std::string params_tag(const Parameters& p) {
  return "(s1=" + std::to_string(p.s1) + ",s2=" + std::to_string(p.s2) + ",m=" + std::to_string(p.m) + ")";
}

inline std::vector<Mask> outer_vertices(const Parameters& p) { return all_subsets(p.n2, p.s2); }

inline std::vector<Mask> outer_neighbours(Mask S2, const Parameters& p) {
  std::vector<Mask> out;
  const Mask full = p.n2 == 64 ? ~Mask{0} : ((Mask{1} << p.n2) - 1);
  for (Mask I : subsets_of(S2, p.m))
    for (Mask J : subsets_of(full & ~S2, p.m)) out.push_back((S2 & ~I) | J);
  std::sort(out.begin(), out.end());
  return out;
}

/// ψ(S₂,S₂′) against ψ(S₂′,S₂) on every edge: amplitudes and exact rational weights.
/// `perturb` adds 1e-6 to one amplitude of the first edge (negative control).
inline CheckOutcome check_garbage_symmetry(const CollisionIndex& ci, const std::vector<Parameters>& ps,
                                           bool perturb = false) {
  CheckOutcome r{"garbage_symmetry"};
  bool first = true;
  for (auto& p : ps) {
    std::size_t edges = 0;
    for (Mask S2 : outer_vertices(p))
      for (Mask S2p : outer_neighbours(S2, p)) {
        auto a = garbage_state(ci, p, S2, S2p);
        auto b = garbage_state(ci, p, S2p, S2);
        if (perturb && first && !a.amps.empty()) a.amps.begin()->second += 1e-6;
        first = false;
        const double d = max_abs_difference(a.amps, b.amps);
        r.max_deviation = std::max(r.max_deviation, d);
        bool exact = true;
        for (auto& [St, amp] : a.amps)
          if (!(garbage_weight(ci, p, S2, St) == garbage_weight(ci, p, S2p, St))) exact = false;
        if (d > 1e-12 || !exact) {
          if (r.pass) r.detail = "edge " + std::to_string(S2) + "-" + std::to_string(S2p) + " " + params_tag(p);
          r.pass = false;
        }
        ++edges;
      }
    if (r.pass) r.detail += params_tag(p) + ":" + std::to_string(edges) + " edges ";
  }
  return r;
}

inline CheckOutcome check_garbage_normalization(const CollisionIndex& ci, const std::vector<Parameters>& ps) {
  CheckOutcome r{"garbage_normalization"};
  for (auto& p : ps)
    for (Mask S2 : outer_vertices(p))
      for (Mask S2p : outer_neighbours(S2, p)) {
        auto g = garbage_state(ci, p, S2, S2p);
        double s = 0;
        for (auto& [k, a] : g.amps) s += std::norm(a);
        const double d = std::abs(s - 1.0);
        r.max_deviation = std::max(r.max_deviation, d);
        if (d > 1e-12) {
          if (r.pass) r.detail = "edge " + std::to_string(S2) + "-" + std::to_string(S2p) + " " + params_tag(p);
          r.pass = false;
        }
      }
  return r;
}

/// LDwG on |π^{S₂}(M^{S₂})⟩⁰ against (1/√|Γ|) Σ_{S₂′} |S₂′⟩|ψ(S₂,S₂′)⟩, L2 distance per vertex.
inline CheckOutcome check_ldwg_target(const CollisionIndex& ci, const std::vector<Parameters>& ps) {
  CheckOutcome r{"ldwg_target"};
  for (auto& p : ps)
    for (Mask S2 : outer_vertices(p)) {
      auto out = ldwg_apply(ci, p, S2, uniform_marked_state(ci, p, S2));
      auto nb = outer_neighbours(S2, p);
      const double w = 1.0 / std::sqrt(static_cast<double>(nb.size()));
      double s = 0;
      for (Mask S2p : nb) {
        LocalState tgt;
        for (auto& [k, a] : garbage_state(ci, p, S2, S2p).amps) tgt[k] = a * w;
        auto it = out.find(S2p);
        const double d = l2_distance(it == out.end() ? LocalState{} : it->second, tgt);
        s += d * d;
      }
      for (auto& [S2p, st] : out)
        if (!std::binary_search(nb.begin(), nb.end(), S2p))
          for (auto& [k, a] : st) s += std::norm(a);
      const double d = std::sqrt(s);
      r.max_deviation = std::max(r.max_deviation, d);
      if (d > 1e-10) {
        if (r.pass) r.detail = "vertex " + std::to_string(S2) + " " + params_tag(p);
        r.pass = false;
      }
    }
  return r;
}

/// LDwG followed by its adjoint is the identity on M^{S₂}-supported inputs (random and uniform).
inline CheckOutcome check_ldwg_inverse(const CollisionIndex& ci, const std::vector<Parameters>& ps,
                                       std::uint64_t seed = 7) {
  CheckOutcome r{"ldwg_inverse"};
  Rng rng(seed);
  for (auto& p : ps)
    for (Mask S2 : outer_vertices(p)) {
      LocalState in = uniform_marked_state(ci, p, S2);
      for (auto& [k, a] : in) a = cplx(rng.uniform() - 0.5, rng.uniform() - 0.5);
      auto back = ldwg_adjoint(ci, p, S2, ldwg_apply(ci, p, S2, in));
      const double d = l2_distance(back, in);
      r.max_deviation = std::max(r.max_deviation, d);
      if (d > 1e-10) {
        if (r.pass) r.detail = "vertex " + std::to_string(S2) + " " + params_tag(p);
        r.pass = false;
      }
    }
  return r;
}

/// Garbage Swap: involution, agreement with ψ(S₂′,S₂) rebuilt from scratch, 2m table operations per move.
inline CheckOutcome check_garbage_swap(const CollisionIndex& ci, const std::vector<Parameters>& ps) {
  CheckOutcome r{"garbage_swap"};
  for (auto& p : ps)
    for (Mask S2 : outer_vertices(p))
      for (Mask S2p : outer_neighbours(S2, p)) {
        EdgeState e{S2, S2p, garbage_state(ci, p, S2, S2p).amps};
        CostLedger L;
        auto once = garbage_swap_apply(e, &ci, &L);
        auto twice = garbage_swap_apply(once);
        const double d1 = max_abs_difference(once.psi, garbage_state(ci, p, S2p, S2).amps);
        const double d2 = max_abs_difference(twice.psi, e.psi);
        const bool regs = once.S2 == S2p && once.S2p == S2 && twice.S2 == S2 && twice.S2p == S2p;
        const bool ops = L.ds_ops == static_cast<std::uint64_t>(2 * p.m);
        r.max_deviation = std::max({r.max_deviation, d1, d2});
        if (d1 > 1e-12 || d2 > 0 || !regs || !ops) {
          if (r.pass) r.detail = "edge " + std::to_string(S2) + "-" + std::to_string(S2p) + " " + params_tag(p);
          r.pass = false;
        }
      }
  return r;
}

/// Brute-force |{S₁ ⊆ [region] : |S₁| = s₁, S₁ holds ≥ m of the pairs {2t, 2t+1}}|.
inline std::uint64_t brute_force_marked(int s1, int m, int region, int pairs) {
  std::uint64_t c = 0;
  for (Mask S : all_subsets(region, s1)) {
    int h = 0;
    for (int t = 0; t < pairs; ++t) h += ((S >> (2 * t)) & 3) == 3;
    c += h >= m;
  }
  return c;
}

inline std::vector<std::array<int, 4>> marked_count_grid() {
  std::vector<std::array<int, 4>> g;  // (region, pairs, s1, m)
  for (int region : {6, 8, 10, 12})
    for (int pairs : {1, 2, 3})
      for (int s1 : {2, 4, 5})
        for (int m : {1, 2})
          if (2 * pairs <= region && s1 <= region) g.push_back({region, pairs, s1, m});
  return g;
}

inline CheckOutcome check_marked_count() {
  CheckOutcome r{"marked_count"};
  int n = 0;
  for (auto [region, pairs, s1, m] : marked_count_grid()) {
    auto mc = count_inner_marked(s1, m, region, pairs);
    const auto bf = brute_force_marked(s1, m, region, pairs);
    ++n;
    if (mc.true_count != bf) {
      r.pass = false;
      r.max_deviation = std::max(r.max_deviation, std::abs(static_cast<double>(mc.true_count) - static_cast<double>(bf)));
    }
  }
  auto ex = count_inner_marked(4, 1, 8, 2);
  if (ex.true_count != 29 || ex.closed_form != 30) r.pass = false;
  r.detail = std::to_string(n) + " combinations; (region 8, pairs 2, s1 4, m 1) true " +
             std::to_string(ex.true_count) + " closed form " + std::to_string(ex.closed_form);
  return r;
}

/// Implementation check of LDwG and Garbage Swap for the battery family.
inline CheckOutcome check_implementation(const std::shared_ptr<const CollisionIndex>& ci, const Parameters& p) {
  CheckOutcome r{"implementation " + params_tag(p)};
  DistinctnessWalk dw(ci, p);
  InnerFlip flip(dw.family(), InnerOptions{});
  auto rep = verify_implementation(dw.outer(), flip, dw.implementation());
  r.pass = rep.pass;
  r.max_deviation = std::max({rep.ldwg_form_deviation, rep.swap_deviation, rep.unitarity_deviation});
  r.detail = rep.failure;
  return r;
}

/// Unitarity and W|π⟩ = |π⟩ on small Johnson chains.
inline CheckOutcome check_walk_operator() {
  CheckOutcome r{"walk_operator"};
  for (auto [n, k, m] : std::vector<std::array<int, 3>>{{3, 1, 1}, {4, 2, 1}, {5, 2, 1}, {5, 2, 2}, {6, 2, 1}}) {
    auto c = std::make_shared<const MarkovChain>(MarkovChain::johnson(n, k, m));
    EdgeSpace es(*c);
    WalkOperator W(c, DataOracle::trivial(es), Mode::abstract);
    const double u = W.unitarity_error();
    CVec pi = W.pi(), w = pi;
    W.apply(w);
    const double f = (w - pi).cwiseAbs().maxCoeff();
    r.max_deviation = std::max({r.max_deviation, u, f});
    if (u > 1e-12 || f > 1e-10) r.pass = false;
  }
  return r;
}

inline CheckOutcome check_history_set(std::uint64_t seed = 11) {
  CheckOutcome r{"history_set"};
  Rng rng(seed);
  std::vector<Item> items;
  for (int i = 0; i < 64; ++i) items.push_back(Item{i, static_cast<std::int64_t>(rng.below(16))});
  std::set<std::vector<std::uint8_t>> encodings;
  for (int h = 0; h < 100; ++h) {
    auto order = items;
    rng.shuffle(order);
    HistoryFreeSet s;
    for (auto& it : order) s.insert(it);
    encodings.insert(s.serialize());
  }
  if (encodings.size() != 1) r.pass = false;
  HistoryFreeSet s;
  std::set<std::pair<std::int64_t, std::int64_t>> model;
  int divergences = 0;
  for (int op = 0; op < 2000; ++op) {
    Item it{static_cast<std::int64_t>(rng.below(40)), static_cast<std::int64_t>(rng.below(8))};
    if (model.count({it.value, it.z})) {
      s.erase(it);
      model.erase({it.value, it.z});
    } else {
      s.insert(it);
      model.insert({it.value, it.z});
    }
    auto got = s.lookup_by_value(it.value);
    std::size_t want = 0;
    for (auto& [v, z] : model) want += v == it.value;
    divergences += got.size() != want;
  }
  if (divergences) r.pass = false;
  r.max_deviation = divergences;
  r.detail = std::to_string(encodings.size()) + " distinct encodings over 100 histories; " +
             std::to_string(divergences) + " fuzz divergences";
  return r;
}

inline CheckOutcome check_kwise() {
  CheckOutcome r{"kwise"};
  for (auto [k, p] : std::vector<std::pair<int, std::uint64_t>>{{2, 5}, {3, 5}, {3, 7}})
    if (!verify_kwise(k, p).pass) r.pass = false;
  if (verify_kwise(3, 5, 1).pass) r.pass = false;  // degree k−2 is not 3-wise
  r.detail = "(2,5) (3,5) (3,7) exact; degree-1 family rejected for k=3";
  return r;
}

struct BatteryOptions {
  bool perturb_psi = false;
  bool include_implementation = true;
};

inline std::vector<CheckOutcome> run_battery(const BatteryOptions& o = {}) {
  auto ci = battery_index();
  auto ps = battery_params();
  std::vector<CheckOutcome> out;
  out.push_back(check_garbage_symmetry(*ci, ps, o.perturb_psi));
  out.push_back(check_garbage_normalization(*ci, ps));
  out.push_back(check_ldwg_target(*ci, ps));
  out.push_back(check_ldwg_inverse(*ci, ps));
  out.push_back(check_garbage_swap(*ci, ps));
  out.push_back(check_marked_count());
  if (o.include_implementation) out.push_back(check_implementation(ci, ps.front()));
  out.push_back(check_walk_operator());
  out.push_back(check_history_set());
  out.push_back(check_kwise());
  return out;
}

}  // namespace qwalk
