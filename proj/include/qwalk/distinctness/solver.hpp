#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qwalk/combinatorics.hpp"
#include "qwalk/cost_ledger.hpp"
#include "qwalk/cost_model.hpp"
#include "qwalk/distinctness/collisions.hpp"
#include "qwalk/distinctness/garbage.hpp"
#include "qwalk/distinctness/instance.hpp"
#include "qwalk/distinctness/setup.hpp"
#include "qwalk/distinctness/tripartition.hpp"
#include "qwalk/markov_chain.hpp"
#include "qwalk/nested_update.hpp"
#include "qwalk/random.hpp"
#include "qwalk/walk_quantize.hpp"

namespace qwalk {

/// Outer collision-pair walk J(n₂, s₂, m) with the Element Distinctness inner walks of one partition.
class DistinctnessWalk {
 public:
  DistinctnessWalk(std::shared_ptr<const CollisionIndex> ci, Parameters p, CostMode cost_mode = CostMode::query,
                   const ChainLimits& lim = {})
      : ci_(std::move(ci)), p_(p), cost_mode_(cost_mode) {
    if (auto why = parameter_problem(p_)) throw ParameterError("DistinctnessWalk: " + *why);
    if (p_.n2 != ci_->n2()) throw ParameterError("DistinctnessWalk: n2 does not match the collision index");
    outer_ = std::make_shared<const MarkovChain>(MarkovChain::johnson(p_.n2, p_.s2, p_.m, lim));
    R_ = ci_->local_count() - 2 * p_.s2;
    if (R_ < p_.s1) throw ParameterError("DistinctnessWalk: inner region smaller than s1");
    marked_.resize(outer_->vertex_count());
    for (Vertex x = 0; x < outer_->vertex_count(); ++x) marked_[x] = check_marked(outer_->label(x), *ci_).marked ? 1 : 0;
  }

  const MarkovChain& outer() const { return *outer_; }
  std::shared_ptr<const MarkovChain> outer_ptr() const { return outer_; }
  const CollisionIndex& index() const { return *ci_; }
  const Parameters& params() const { return p_; }
  const std::vector<char>& marked() const { return marked_; }
  int inner_region() const { return R_; }

  /// Marked fraction s₂/n₂, exact when P(A₁,A₂) holds one pair of the 3-collision.
  double eps() const { return static_cast<double>(p_.s2) / static_cast<double>(p_.n2); }

  double eps_inner() const {
    const auto M = count_inner_marked(p_.s1, p_.m, R_, p_.n2 - p_.s2).true_count;
    return static_cast<double>(M) / binomial_real(R_, p_.s1);
  }

  /// Inner chain J(R, s₁, 1), shared by every outer vertex (regions differ only by relabeling).
  std::shared_ptr<const MarkovChain> inner_chain(const ChainLimits& lim = {}) const {
    if (!inner_) inner_ = std::make_shared<const MarkovChain>(MarkovChain::johnson(R_, p_.s1, 1, lim));
    return inner_;
  }

  /// S₁ (local mask) of inner vertex v of outer vertex x.
  Mask inner_set(Vertex x, Vertex v) const {
    return expand_bits(inner_chain()->label(v), ci_->region(outer_->label(x)));
  }

  InnerWalkFamily family() const {
    ci_->require_masks();
    InnerWalkFamily f;
    auto self = std::make_shared<DistinctnessWalk>(*this);
    f.chain = [self](Vertex) { return self->inner_chain(); };
    f.marked = [self](Vertex x) {
      auto ch = self->inner_chain();
      std::vector<char> mk(ch->vertex_count());
      for (Vertex v = 0; v < mk.size(); ++v) mk[v] = self->ci_->pair_count(self->inner_set(x, v)) >= self->p_.m;
      return mk;
    };
    f.label = [self](Vertex x, Vertex v) { return static_cast<std::uint64_t>(self->inner_set(x, v)); };
    f.S_inner = p_.s1;
    f.U_inner = 1;
    f.C_inner = 0;
    f.eps_inner = std::min(1.0, eps_inner());
    f.delta_inner = johnson_gap(R_, p_.s1, 1);
    return f;
  }

  /// Abstract-mode family bounds without materializing the inner chain.
  InnerWalkFamily family_bounds() const {
    InnerWalkFamily f;
    f.S_inner = p_.s1;
    f.U_inner = 1;
    f.C_inner = 0;
    f.eps_inner = std::min(1.0, eps_inner());
    f.delta_inner = johnson_gap(R_, p_.s1, 1);
    return f;
  }

  /// LDwG and Garbage Swap built from the three-step procedure and the garbage symmetry.
  ImplementationPair implementation() const {
    ci_->require_masks();
    ImplementationPair impl;
    auto ci = ci_;
    auto outer = outer_;
    const Parameters p = p_;
    impl.ldwg = [ci, outer, p](Vertex x, const LabelState& d0) {
      LocalState in;
      for (auto& [k, a] : d0) in[static_cast<Mask>(k)] += a;
      auto out = ldwg_apply(*ci, p, outer->label(x), in);
      std::map<Vertex, LabelState> res;
      for (auto& [S2p, st] : out) {
        auto y = outer->index_of(S2p);
        if (!y) throw ConsistencyError("ldwg: S2' outside the outer vertex set");
        LabelState ls;
        for (auto& [k, a] : st) ls.emplace_back(static_cast<std::uint64_t>(k), a);
        res[*y] = std::move(ls);
      }
      return res;
    };
    impl.garbage_swap = [](Vertex, Vertex, const LabelState& psi) { return psi; };
    impl.T = cost_mode_ == CostMode::time ? p_.m : 0;
    return impl;
  }

 private:
  std::shared_ptr<const CollisionIndex> ci_;
  Parameters p_;
  CostMode cost_mode_;
  std::shared_ptr<const MarkovChain> outer_;
  mutable std::shared_ptr<const MarkovChain> inner_;
  std::vector<char> marked_;
  int R_ = 0;
};

enum class ModeChoice { automatic, abstract, concrete };

struct SolveOptions {
  ModeChoice mode = ModeChoice::automatic;
  int repetitions = 16;   // repetitions that reach the walk search
  int max_attempts = 256;  // all repetitions, including partitions the walk cannot use
  std::optional<int> s1, s2, m;
  ReflectionVariant outer_variant = ReflectionVariant::exact;
  InnerOptions inner;
  CostMode cost_mode = CostMode::query;
};

struct RepetitionLog {
  int index = 0;
  bool searched = false;
  std::string outcome;  // "found", "not found", or the failure reason
  Parameters params;
  Mode mode = Mode::abstract;
  std::optional<std::array<std::int64_t, 3>> witness;  // 0-based positions in the preprocessed input
  CostLedger ledger;
};

struct SolveResult {
  std::optional<Triple> triple;  // 1-based original positions
  std::size_t n = 0, N = 0;
  int s1 = 0, s2 = 0;
  Mode mode = Mode::abstract;
  CostLedger ledger;
  std::vector<RepetitionLog> repetitions;
};

/// Set sizes used by solve: overrides, else the desk-scale clamp of the optimized exponents.
inline std::pair<int, int> solve_set_sizes(std::size_t N, const SolveOptions& o) {
  auto [s1, s2] = default_set_sizes(N);
  if (o.s1) s1 = *o.s1;
  if (o.s2) s2 = *o.s2;
  if (s1 < 1 || s2 < 1 || s2 > s1) throw ParameterError("solve: need 1 <= s2 <= s1");
  target_sizes(N, s1, s2);
  return {s1, s2};
}

inline Mode resolve_mode(std::size_t N, ModeChoice c) {
  if (c == ModeChoice::abstract) return Mode::abstract;
  if (c == ModeChoice::concrete) return Mode::concrete;
  return N <= 36 ? Mode::concrete : Mode::abstract;
}

/// One tripartition repetition: partition, setup, outer walk, nested search, witness.
inline RepetitionLog solve_repetition(const Instance& inst, int s1, int s2, std::uint64_t seed, Mode mode,
                                      const SolveOptions& o, int index = 0) {
  RepetitionLog log;
  log.index = index;
  log.mode = mode;
  auto& L = log.ledger;
  const std::size_t N = inst.size();
  Tripartition pre = sample_tripartition(N, s1, s2, derive_seed(seed, 1), &L);
  SetupResult st = setup_state(inst, pre.hash(), s1, s2, derive_seed(seed, 2), mode);
  L += st.ledger;
  if (!st.ok) {
    log.outcome = st.failure;
    return log;
  }
  auto ci = std::make_shared<const CollisionIndex>(inst, *st.partition);
  Parameters p{s1, s2, o.m ? *o.m : derive_m(s1, ci->n2(), N), ci->n2()};
  log.params = p;
  if (auto why = parameter_problem(p)) {
    log.outcome = "parameters: " + *why;
    return log;
  }
  std::optional<DistinctnessWalk> dw;
  try {
    dw.emplace(ci, p, o.cost_mode);
  } catch (const ParameterError& e) {
    log.outcome = std::string("outer walk: ") + e.what();
    return log;
  }
  NestedSearchOptions nopt;
  nopt.outer.variant = o.outer_variant;
  nopt.inner = o.inner;
  nopt.setup_cost_outer = static_cast<double>(st.ledger.queries);
  nopt.check_cost_outer = std::ceil(std::numbers::pi / 4 * std::sqrt(static_cast<double>(ci->a3().size())));
  NestedSearchResult nr;
  if (mode == Mode::concrete) {
    nopt.start_amplitudes = st.state.amplitudes;
    nr = nested_search(dw->outer_ptr(), dw->marked(), dw->family(), dw->implementation(), dw->eps(),
                       derive_seed(seed, 3), nopt, Mode::concrete);
  } else {
    ImplementationPair impl;
    impl.T = o.cost_mode == CostMode::time ? p.m : 0;
    nr = nested_search(dw->outer_ptr(), dw->marked(), dw->family_bounds(), impl, dw->eps(), derive_seed(seed, 3),
                       nopt, Mode::abstract);
  }
  L += nr.search.ledger;
  log.searched = true;
  if (!nr.search.vertex) {
    log.outcome = "not found";
    return log;
  }
  auto chk = check_marked(dw->outer().label(*nr.search.vertex), *ci);
  L += chk.ledger;
  if (!chk.marked) {
    log.outcome = "not found";
    return log;
  }
  log.witness = chk.witness;
  log.outcome = "found";
  return log;
}

/// Preprocess, then repeat independent tripartitions until a verified 3-collision is found.
inline SolveResult solve(const std::vector<std::int64_t>& values, std::uint64_t seed, const SolveOptions& o = {}) {
  SolveResult res;
  Instance inst = preprocess(values);
  res.n = inst.n;
  res.N = inst.size();
  auto [s1, s2] = solve_set_sizes(res.N, o);
  res.s1 = s1, res.s2 = s2;
  res.mode = resolve_mode(res.N, o.mode);
  if (res.mode == Mode::concrete && 2 * res.N / 3 > 64)
    throw CapacityError("solve: concrete mode needs 2N/3 <= 64 local indices");
  int searched = 0;
  for (int r = 0; r < o.max_attempts && searched < o.repetitions; ++r) {
    auto log = solve_repetition(inst, s1, s2, derive_seed(seed, 100 + static_cast<std::uint64_t>(r)), res.mode, o, r);
    res.ledger += log.ledger;
    const bool found = log.witness.has_value();
    searched += log.searched;
    if (found) {
      auto [i, j, k] = *log.witness;
      if (i >= static_cast<std::int64_t>(inst.n) || j >= static_cast<std::int64_t>(inst.n) ||
          k >= static_cast<std::int64_t>(inst.n))
        throw ConsistencyError("solve: witness outside the original input");
      Triple t = sorted_triple(i + 1, j + 1, k + 1);
      if (!verify_triple(values, t)) throw ConsistencyError("solve: witness fails verification");
      res.triple = t;
    }
    res.repetitions.push_back(std::move(log));
    if (found) break;
  }
  return res;
}

}  // namespace qwalk
