#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qwalk/cost_ledger.hpp"
#include "qwalk/cost_model.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/markov_chain.hpp"
#include "qwalk/random.hpp"
#include "qwalk/walk_quantize.hpp"

namespace qwalk {

/// Sparse state over opaque 64-bit data labels, sorted by label.
using LabelState = std::vector<std::pair<std::uint64_t, cplx>>;

/// Per outer vertex x: inner chain P^x, marked set M^x, and the data label of each inner vertex.
struct InnerWalkFamily {
  std::function<std::shared_ptr<const MarkovChain>(Vertex)> chain;
  std::function<std::vector<char>(Vertex)> marked;
  std::function<std::uint64_t(Vertex, Vertex)> label;
  // shared upper bounds
  double S_inner = 0, U_inner = 1, C_inner = 0, eps_inner = 1, delta_inner = 1;
};

/// LDwG and Garbage Swap of an implementation, with its cost T.
struct ImplementationPair {
  /// Vertex-form data of x ↦ per neighbour y the component √P(x,y)·ψ(x,y).
  std::function<std::map<Vertex, LabelState>(Vertex, const LabelState&)> ldwg;
  /// ψ attached to (x,y) ↦ the garbage it carries on (y,x).
  std::function<LabelState(Vertex, Vertex, const LabelState&)> garbage_swap;
  double T = 0;
};

enum class InnerPath {
  edge_space,         // inner W′ operators on the inner edge space
  walk_coordinates,   // same operators expressed in the image of the inner Local Diffusion (exact variant only)
};

struct InnerOptions {
  ReflectionVariant variant = ReflectionVariant::exact;
  int precision_bits = 0;  // 0: derived from the accuracy requirement
  InnerPath path = InnerPath::walk_coordinates;
};

/// Reflection about |π^x(M^x)⟩⁰ built from the inner walk: LD′† U (I − 2|π′⟩⟨π′|) U† LD′,
/// U the exact-phase amplification |π′⟩ → |π′(M)⟩. Inner walks are materialized lazily and memoized.
class InnerFlip {
 public:
  InnerFlip(InnerWalkFamily family, InnerOptions opt, double eps_outer = 1, double delta_outer = 1)
      : fam_(std::move(family)), opt_(opt) {
    if (opt_.variant == ReflectionVariant::phase_estimation) {
      opt_.path = InnerPath::edge_space;
      const int need = default_precision_bits(eps_outer * fam_.eps_inner, delta_outer * fam_.delta_inner);
      if (opt_.precision_bits == 0) opt_.precision_bits = need;
      if (opt_.precision_bits < need)
        throw ParameterError("phase_flip_via_inner: accuracy budget infeasible at " +
                             std::to_string(opt_.precision_bits) + " bits (need " + std::to_string(need) + ")");
      if (opt_.precision_bits > 16) throw CapacityError("phase_flip_via_inner: precision too high to emulate");
    }
  }

  const InnerOptions& options() const { return opt_; }
  const InnerWalkFamily& family() const { return fam_; }

  /// Applies the flip to a vertex-form vector over the inner vertices of x.
  void apply(Vertex x, CVec& w, CostLedger* ledger = nullptr) const {
    const PerVertex& pv = vertex(x);
    const Walk& wk = *pv.walk;
    if (ledger) charge(pv, *ledger);
    if (opt_.path == InnerPath::walk_coordinates) {
      // coordinates in span{LD′|v,0⟩}: π′ ↦ √π′, S_M diagonal
      CVec c = w;
      unamplify_coords(pv, wk, c);
      c -= 2.0 * wk.sqrt_pi * wk.sqrt_pi.dot(c);
      amplify_coords(pv, wk, c);
      w = c;
      return;
    }
    const EdgeSpace& es = wk.W->edge_space();
    CVec e = CVec::Zero(static_cast<Eigen::Index>(wk.W->dim()));
    for (Vertex v = 0; v < w.size(); ++v) e[es.coin0(v)] = w[v];
    wk.W->local_diffusion(e, false);
    unamplify(pv, wk, e);
    wk.R->shift(e, cplx(-1, 0));
    amplify(pv, wk, e);
    wk.W->local_diffusion(e, true);
    for (Vertex v = 0; v < w.size(); ++v) w[v] = e[es.coin0(v)];
  }

  /// |π^x(M^x)⟩⁰ = LD′† U |π′⟩ as a vertex-form vector.
  CVec prepared(Vertex x, CostLedger* ledger = nullptr) const {
    const PerVertex& pv = vertex(x);
    const Walk& wk = *pv.walk;
    if (ledger) {
      ledger->queries += static_cast<std::uint64_t>(std::ceil(fam_.S_inner));
      ledger->charged += fam_.S_inner;
      charge_amplification(pv, *ledger);
    }
    if (opt_.path == InnerPath::walk_coordinates) {
      CVec c = wk.sqrt_pi;
      amplify_coords(pv, wk, c);
      return c * std::conj(pv.plan.final_phase);
    }
    CVec e = wk.R->pi();
    amplify(pv, wk, e);
    e *= std::conj(pv.plan.final_phase);
    wk.W->local_diffusion(e, true);
    const EdgeSpace& es = wk.W->edge_space();
    CVec out(static_cast<Eigen::Index>(es.vertex_count()));
    for (Vertex v = 0; v < es.vertex_count(); ++v) out[v] = e[es.coin0(v)];
    return out;
  }

  std::size_t inner_vertex_count(Vertex x) const { return vertex(x).walk->chain->vertex_count(); }
  const std::vector<char>& marked(Vertex x) const { return vertex(x).marked; }
  const AmplificationPlan& plan(Vertex x) const { return vertex(x).plan; }

  /// Inner walk steps charged for one reflection.
  std::uint64_t steps_per_reflection(Vertex x) const {
    const Walk& wk = *vertex(x).walk;
    if (opt_.variant == ReflectionVariant::exact)
      return static_cast<std::uint64_t>(std::ceil(1.0 / std::sqrt(wk.delta)));
    return wk.R->walk_cost();
  }

 private:
  struct Walk {
    std::shared_ptr<const MarkovChain> chain;
    std::unique_ptr<WalkOperator> W;
    std::unique_ptr<PiReflection> R;
    CVec sqrt_pi;
    double delta = 1;
  };
  struct PerVertex {
    std::shared_ptr<Walk> walk;
    std::vector<char> marked;
    AmplificationPlan plan;
  };

  const PerVertex& vertex(Vertex x) const {
    std::lock_guard<std::mutex> lk(*mu_);
    auto it = cache_.find(x);
    if (it != cache_.end()) return it->second;
    PerVertex pv;
    auto ch = fam_.chain(x);
    auto wit = walks_.find(ch.get());
    if (wit == walks_.end()) {
      auto wk = std::make_shared<Walk>();
      wk->chain = ch;
      const auto& pi = ch->stationary();
      wk->sqrt_pi = CVec(static_cast<Eigen::Index>(pi.size()));
      for (std::size_t v = 0; v < pi.size(); ++v) wk->sqrt_pi[v] = std::sqrt(pi[v]);
      wk->delta = chain_gap(*ch);
      if (opt_.path == InnerPath::edge_space) {
        EdgeSpace es(*ch);
        wk->W = std::make_unique<WalkOperator>(ch, DataOracle::trivial(es), Mode::abstract);
        wk->R = std::make_unique<PiReflection>(*wk->W, opt_.variant, opt_.precision_bits);
      }
      wit = walks_.emplace(ch.get(), wk).first;
    }
    pv.walk = wit->second;
    pv.marked = fam_.marked(x);
    if (pv.marked.size() != ch->vertex_count()) throw ParameterError("InnerWalkFamily: marked vector size mismatch");
    double eps = 0;
    const auto& pi = ch->stationary();
    for (std::size_t v = 0; v < pi.size(); ++v)
      if (pv.marked[v]) eps += pi[v];
    if (!(eps > 0)) throw ParameterError("inner walk of outer vertex " + std::to_string(x) + " has no marked vertex");
    pv.plan = plan_exact_amplification(std::min(1.0, eps));
    return cache_.emplace(x, std::move(pv)).first->second;
  }

  void charge_amplification(const PerVertex& pv, CostLedger& L) const {
    const std::uint64_t steps = steps_per_reflection_of(pv);
    L.inner_walk_steps += static_cast<std::uint64_t>(pv.plan.iterations) * steps;
    L.charged += pv.plan.iterations * (static_cast<double>(steps) * fam_.U_inner + fam_.C_inner);
  }

  void charge(const PerVertex& pv, CostLedger& L) const {
    L.inner_invocations += 1;
    const std::uint64_t steps = steps_per_reflection_of(pv);
    L.inner_walk_steps += static_cast<std::uint64_t>(2 * pv.plan.iterations + 1) * steps;
  }

  std::uint64_t steps_per_reflection_of(const PerVertex& pv) const {
    if (opt_.variant == ReflectionVariant::exact)
      return static_cast<std::uint64_t>(std::ceil(1.0 / std::sqrt(pv.walk->delta)));
    return pv.walk->R->walk_cost();
  }

  // U = G^K with G = −S_π(φ)S_M(φ); U† = (G†)^K, G† = −S_M(−φ)S_π(−φ). Global phases cancel in U R U†.
  void amplify(const PerVertex& pv, const Walk& wk, CVec& e) const {
    const cplx ph = std::polar(1.0, pv.plan.phi);
    for (int k = 0; k < pv.plan.iterations; ++k) {
      wk.W->phase_on_vertices(e, pv.marked, ph);
      wk.R->shift(e, ph);
      e = -e;
    }
  }
  void unamplify(const PerVertex& pv, const Walk& wk, CVec& e) const {
    const cplx ph = std::polar(1.0, -pv.plan.phi);
    for (int k = 0; k < pv.plan.iterations; ++k) {
      wk.R->shift(e, ph);
      wk.W->phase_on_vertices(e, pv.marked, ph);
      e = -e;
    }
  }
  void amplify_coords(const PerVertex& pv, const Walk& wk, CVec& c) const {
    const cplx ph = std::polar(1.0, pv.plan.phi);
    for (int k = 0; k < pv.plan.iterations; ++k) {
      for (Eigen::Index v = 0; v < c.size(); ++v)
        if (pv.marked[v]) c[v] *= ph;
      c += (ph - 1.0) * wk.sqrt_pi * wk.sqrt_pi.dot(c);
      c = -c;
    }
  }
  void unamplify_coords(const PerVertex& pv, const Walk& wk, CVec& c) const {
    const cplx ph = std::polar(1.0, -pv.plan.phi);
    for (int k = 0; k < pv.plan.iterations; ++k) {
      c += (ph - 1.0) * wk.sqrt_pi * wk.sqrt_pi.dot(c);
      for (Eigen::Index v = 0; v < c.size(); ++v)
        if (pv.marked[v]) c[v] *= ph;
      c = -c;
    }
  }

  InnerWalkFamily fam_;
  InnerOptions opt_;
  mutable std::map<Vertex, PerVertex> cache_;
  mutable std::map<const MarkovChain*, std::shared_ptr<Walk>> walks_;
  std::shared_ptr<std::mutex> mu_ = std::make_shared<std::mutex>();
};

inline LabelState to_labels(const InnerWalkFamily& fam, Vertex x, const CVec& w, double drop = 0.0) {
  LabelState s;
  for (Vertex v = 0; v < w.size(); ++v)
    if (std::abs(w[v]) > drop) s.emplace_back(fam.label(x, v), w[v]);
  std::sort(s.begin(), s.end(), [](auto& a, auto& b) { return a.first < b.first; });
  return s;
}

struct ComposedState {
  std::vector<CVec> inner;  // |π^x(M^x)⟩⁰ per outer vertex, over inner vertices
  std::vector<double> weight;  // π(x)
  CostLedger ledger;

  double norm() const {
    double s = 0;
    for (std::size_t x = 0; x < inner.size(); ++x) s += weight[x] * inner[x].squaredNorm();
    return std::sqrt(s);
  }
};

/// Σ_x √π(x)|x,0⟩|C(x),0⟩|π^x(M^x)⟩⁰; the ledger charges S′ and the inner amplification once per x
/// (the per-x branches run in superposition, so the symbolic charge is taken once).
inline ComposedState composed_setup(const MarkovChain& outer, const InnerFlip& flip, double setup_cost_outer = 0) {
  ComposedState cs;
  cs.inner.resize(outer.vertex_count());
  cs.weight = outer.stationary();
  cs.ledger.charged += setup_cost_outer;
  for (Vertex x = 0; x < outer.vertex_count(); ++x) {
    CostLedger tmp;
    cs.inner[x] = flip.prepared(x, &tmp);
    if (x == 0) cs.ledger += tmp;
  }
  cs.ledger.symbols.S = setup_cost_outer;
  cs.ledger.symbols.S_inner = flip.family().S_inner;
  return cs;
}

struct ImplementationReport {
  bool pass = true;
  double ldwg_form_deviation = 0;
  double swap_deviation = 0;
  double unitarity_deviation = 0;
  std::string failure;
};

inline double label_distance(const LabelState& a, const LabelState& b) {
  std::map<std::uint64_t, cplx> m;
  for (auto& [k, v] : a) m[k] += v;
  for (auto& [k, v] : b) m[k] -= v;
  double d = 0;
  for (auto& [k, v] : m) d = std::max(d, std::abs(v));
  return d;
}

inline double label_norm2(const LabelState& a) {
  double s = 0;
  for (auto& [k, v] : a) s += std::norm(v);
  return s;
}

inline cplx label_dot(const LabelState& a, const LabelState& b) {
  std::map<std::uint64_t, cplx> m(a.begin(), a.end());
  cplx s = 0;
  for (auto& [k, v] : b) {
    auto it = m.find(k);
    if (it != m.end()) s += std::conj(it->second) * v;
  }
  return s;
}

/// Checks that `impl` implements Local Diffusion and Database Swap for the outer chain with garbage.
inline ImplementationReport verify_implementation(const MarkovChain& outer, const InnerFlip& flip,
                                                  const ImplementationPair& impl, std::uint64_t seed = 1,
                                                  double tol = 1e-9) {
  ImplementationReport rep;
  const auto& fam = flip.family();
  auto fail = [&](const std::string& why) {
    if (rep.pass) rep.failure = why;
    rep.pass = false;
  };
  const std::size_t V = outer.vertex_count();
  std::vector<std::map<Vertex, LabelState>> psi(V);
  for (Vertex x = 0; x < V; ++x) {
    LabelState d0 = to_labels(fam, x, flip.prepared(x));
    auto out = impl.ldwg(x, d0);
    for (auto& [y, st] : out) {
      double p = outer.transition(x, y);
      if (p == 0) {
        fail("ldwg: output on non-neighbour (" + std::to_string(x) + "," + std::to_string(y) + ")");
        continue;
      }
      double dev = std::abs(label_norm2(st) - p);
      rep.ldwg_form_deviation = std::max(rep.ldwg_form_deviation, dev);
      if (dev > tol) fail("ldwg: coin weight off at edge (" + std::to_string(x) + "," + std::to_string(y) + ")");
      LabelState g = st;
      for (auto& [k, a] : g) a /= std::sqrt(p);
      psi[x][y] = g;
    }
    for (auto& t : outer.neighbors(x))
      if (!out.count(t.to)) fail("ldwg: missing neighbour (" + std::to_string(x) + "," + std::to_string(t.to) + ")");
  }
  for (Vertex x = 0; x < V; ++x)
    for (auto& [y, g] : psi[x]) {
      auto moved = impl.garbage_swap(x, y, g);
      auto it = psi[y].find(x);
      double d = it == psi[y].end() ? std::sqrt(label_norm2(moved)) : label_distance(moved, it->second);
      rep.swap_deviation = std::max(rep.swap_deviation, d);
      if (d > tol) fail("garbage_swap: mismatch on edge (" + std::to_string(x) + "," + std::to_string(y) + ")");
      auto back = impl.garbage_swap(y, x, moved);
      double inv = label_distance(back, g);
      double nrm = std::abs(label_norm2(moved) - label_norm2(g));
      rep.unitarity_deviation = std::max({rep.unitarity_deviation, inv, nrm});
      if (inv > tol || nrm > tol)
        fail("garbage_swap: not an involution on edge (" + std::to_string(x) + "," + std::to_string(y) + ")");
    }
  // isometry of LDwG on random marked-supported inputs
  Rng rng(seed);
  for (Vertex x = 0; x < std::min<std::size_t>(V, 4); ++x) {
    const auto& mk = flip.marked(x);
    LabelState a, b;
    for (Vertex v = 0; v < mk.size(); ++v)
      if (mk[v]) {
        a.emplace_back(fam.label(x, v), cplx(rng.uniform() - 0.5, rng.uniform() - 0.5));
        b.emplace_back(fam.label(x, v), cplx(rng.uniform() - 0.5, rng.uniform() - 0.5));
      }
    std::sort(a.begin(), a.end(), [](auto& p, auto& q) { return p.first < q.first; });
    std::sort(b.begin(), b.end(), [](auto& p, auto& q) { return p.first < q.first; });
    auto oa = impl.ldwg(x, a), ob = impl.ldwg(x, b);
    cplx in_dot = label_dot(a, b), out_dot = 0;
    double out_na = 0;
    for (auto& [y, st] : oa) {
      out_na += label_norm2(st);
      auto it = ob.find(y);
      if (it != ob.end()) out_dot += label_dot(st, it->second);
    }
    double d = std::max(std::abs(out_na - label_norm2(a)), std::abs(out_dot - in_dot));
    rep.unitarity_deviation = std::max(rep.unitarity_deviation, d);
    if (d > tol) fail("ldwg: not an isometry at vertex " + std::to_string(x));
  }
  return rep;
}

/// Builds the concrete outer walk whose data is produced by the implementation.
struct ConcreteNestedWalk {
  std::unique_ptr<WalkOperator> W;
  std::vector<std::vector<std::pair<std::uint32_t, Vertex>>> inner_keys;  // per x: (aux key, inner vertex)
};

inline ConcreteNestedWalk build_concrete_nested_walk(std::shared_ptr<const MarkovChain> outer, const InnerFlip& flip,
                                                     const ImplementationPair& impl, const ComposedState& cs) {
  const auto& fam = flip.family();
  EdgeSpace es(*outer);
  DataOracleBuilder b(es.size());
  ConcreteNestedWalk cw;
  cw.inner_keys.resize(outer->vertex_count());
  // every inner vertex label is a data key, so the inner-walk flip never leaves the data space
  for (Vertex x = 0; x < outer->vertex_count(); ++x)
    for (Vertex v = 0; v < flip.inner_vertex_count(x); ++v) cw.inner_keys[x].emplace_back(b.intern(fam.label(x, v)), v);
  for (Vertex x = 0; x < outer->vertex_count(); ++x) {
    LabelState d0 = to_labels(fam, x, cs.inner[x]);
    std::vector<std::pair<std::uint64_t, cplx>> e0(d0.begin(), d0.end());
    b.set(es.coin0(x), e0);
    auto out = impl.ldwg(x, d0);
    for (auto& t : outer->neighbors(x)) {
      auto it = out.find(t.to);
      if (it == out.end()) throw ConsistencyError("nested walk: LDwG output misses a neighbour");
      std::vector<std::pair<std::uint64_t, cplx>> g;
      const double s = 1.0 / std::sqrt(t.p);
      for (auto& [k, a] : it->second) g.emplace_back(k, a * s);
      b.set(*es.slot(x, t.to, *outer), g);
    }
  }
  cw.W = std::make_unique<WalkOperator>(outer, std::move(b).build(), Mode::concrete);
  auto keys = std::make_shared<std::vector<std::vector<std::pair<std::uint32_t, Vertex>>>>(cw.inner_keys);
  const InnerFlip* fp = &flip;
  cw.W->set_flip([fp, keys](Vertex x, cplx* block, std::size_t) {
    const auto& ks = (*keys)[x];
    CVec w(static_cast<Eigen::Index>(ks.size()));
    for (auto& [key, v] : ks) w[v] = block[key];
    fp->apply(x, w);
    for (auto& [key, v] : ks) block[key] = w[v];
  });
  return cw;
}

struct NestedSearchOptions {
  QuantumSearchOptions outer;
  InnerOptions inner;
  double setup_cost_outer = 0;  // S_C
  double check_cost_outer = 1;  // C_C
  CVec start_amplitudes;        // outer vertex amplitudes of the setup state; empty: √π
};

struct NestedSearchResult {
  SearchResult search;
  double eps = 0, delta = 0;
  double formula = 0;  // nested cost formula with the same symbols
};

/// Nested-update quantum walk search. Concrete mode simulates the data registers produced by the
/// implementation and flips through the inner walks; abstract mode runs the isomorphic coin-only walk.
inline NestedSearchResult nested_search(std::shared_ptr<const MarkovChain> outer, const std::vector<char>& marked,
                                        const InnerWalkFamily& family, const ImplementationPair& impl, double eps,
                                        std::uint64_t seed, const NestedSearchOptions& opt = {},
                                        Mode mode = Mode::abstract) {
  NestedSearchResult out;
  const double delta = chain_gap(*outer);
  out.eps = eps, out.delta = delta;
  CostParams cp;
  cp.S = opt.setup_cost_outer;
  cp.C = opt.check_cost_outer;
  cp.eps = std::min(1.0, eps);
  cp.delta = std::min(1.0, delta);
  cp.S_inner = family.S_inner, cp.U_inner = family.U_inner, cp.C_inner = family.C_inner;
  cp.eps_inner = family.eps_inner, cp.delta_inner = family.delta_inner;
  cp.T = impl.T;
  const double U_eff = nested_update_cost(cp);
  // setup charge: S_C + S′ + (1/√ε′)((1/√δ′)U′ + C′)
  const double setup = cp.S + cp.S_inner +
                       (1 / std::sqrt(cp.eps_inner)) * ((1 / std::sqrt(cp.delta_inner)) * cp.U_inner + cp.C_inner);
  out.formula = nested_cost(cp) + (1 / std::sqrt(cp.eps_inner)) * ((1 / std::sqrt(cp.delta_inner)) * cp.U_inner + cp.C_inner);

  QuantumSearchOptions qo = opt.outer;
  qo.setup_cost = setup;
  qo.update_cost = U_eff;
  qo.check_cost = cp.C;

  if (mode == Mode::abstract) {
    EdgeSpace es(*outer);
    WalkOperator W(outer, DataOracle::trivial(es), Mode::abstract);
    out.search = quantum_search(W, marked, W.pi(), eps, delta, seed, qo);
  } else {
    InnerFlip flip(family, opt.inner, eps, delta);
    ComposedState cs = composed_setup(*outer, flip, cp.S);
    auto cw = build_concrete_nested_walk(outer, flip, impl, cs);
    CVec start = cw.W->pi0();
    if (opt.start_amplitudes.size() > 0) {
      if (static_cast<std::size_t>(opt.start_amplitudes.size()) != outer->vertex_count())
        throw ParameterError("nested_search: start amplitudes do not match the outer vertex count");
      const auto& es = cw.W->edge_space();
      const std::size_t A = cw.W->aux_dim();
      start.setZero();
      for (Vertex x = 0; x < outer->vertex_count(); ++x)
        for (auto& e : cw.W->data().at(es.coin0(x))) start[es.coin0(x) * A + e.key] = opt.start_amplitudes[x] * e.amp;
    }
    cw.W->local_diffusion(start, false);
    out.search = quantum_search(*cw.W, marked, start, eps, delta, seed, qo);
    const auto refl = out.search.ledger.reflections;
    out.search.ledger.inner_invocations += refl;  // one inner reflection per outer step charged symbolically
  }
  auto& L = out.search.ledger;
  L.symbols.S = cp.S;
  L.symbols.C = cp.C;
  L.symbols.U = U_eff;
  L.symbols.S_inner = cp.S_inner;
  L.symbols.U_inner = cp.U_inner;
  L.symbols.C_inner = cp.C_inner;
  L.symbols.eps_inner = cp.eps_inner;
  L.symbols.delta_inner = cp.delta_inner;
  L.symbols.T = cp.T;
  return out;
}

}  // namespace qwalk
