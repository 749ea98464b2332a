#pragma once

#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "qwalk/combinatorics.hpp"
#include "qwalk/cost_ledger.hpp"
#include "qwalk/distinctness/collisions.hpp"
#include "qwalk/distinctness/instance.hpp"
#include "qwalk/distinctness/tripartition.hpp"
#include "qwalk/random.hpp"
#include "qwalk/walk_quantize.hpp"

namespace qwalk {

struct SetupResult {
  bool ok = false;
  std::string failure;
  std::optional<Tripartition> partition;  // final A₁, A₂, A₃
  std::vector<std::int64_t> I1;
  int n2 = 0;
  StateVector state;  // over s₂-subsets of P(A₁,A₂), colex order of pair indices
  double max_uniform_deviation = 0;
  CostLedger ledger;
};

/// Pre-partition view used by the setup: Ã₁, Ã₂ and H(·).
struct SetupView {
  std::vector<std::int64_t> a1, a2;
  std::map<std::int64_t, std::vector<std::int64_t>> a2_by_value;
  int n2_pre = 0;

  SetupView(const Instance& inst, const Tripartition& pre) {
    for (std::size_t i = 0; i < inst.size(); ++i) {
      int s = pre.pre_side(static_cast<std::int64_t>(i));
      if (s == 1) a1.push_back(static_cast<std::int64_t>(i));
      if (s == 2) a2.push_back(static_cast<std::int64_t>(i));
    }
    for (auto j : a2) a2_by_value[inst.values[j]].push_back(j);
    for (auto i : a1) {
      auto it = a2_by_value.find(inst.values[i]);
      if (it != a2_by_value.end()) n2_pre += static_cast<int>(it->second.size());
    }
  }

  /// H(I) as (j ∈ Ã₂, its partner i ∈ I) pairs.
  std::vector<std::pair<std::int64_t, std::int64_t>> hits(const Instance& inst, const std::vector<std::int64_t>& I) const {
    std::vector<std::pair<std::int64_t, std::int64_t>> h;
    for (auto i : I) {
      auto it = a2_by_value.find(inst.values[i]);
      if (it == a2_by_value.end()) continue;
      for (auto j : it->second) h.emplace_back(j, i);
    }
    std::sort(h.begin(), h.end());
    return h;
  }

  /// Largest |H(I)| over all I ⊆ Ã₁ with |I| = s.
  int max_hits(const Instance& inst, int s) const {
    std::vector<int> c;
    for (auto i : a1) {
      auto it = a2_by_value.find(inst.values[i]);
      c.push_back(it == a2_by_value.end() ? 0 : static_cast<int>(it->second.size()));
    }
    std::sort(c.rbegin(), c.rend());
    int tot = 0;
    for (int k = 0; k < s && k < static_cast<int>(c.size()); ++k) tot += c[k];
    return tot;
  }
};

/// Threshold t on |H(I)|: at least s₂ and at least ε·s₁ with ε = ñ₂/(2N).
inline int setup_threshold(int n2_pre, std::size_t N, int s1, int s2) {
  const double eps = static_cast<double>(n2_pre) / (2.0 * static_cast<double>(N));
  return std::max(s2, static_cast<int>(std::ceil(eps * s1 - 1e-12)));
}

/// Exact distribution of the measured I₁: weight C(ñ₂ − h(I₁), s₂)/C(h(I₁) + s₂, s₂) per admissible I₁,
/// obtained by enumerating every I ⊆ Ã₁ (tiny instances).
inline std::map<std::vector<std::int64_t>, double> enumerate_I1_distribution(const Instance& inst, const SetupView& v,
                                                                             int s1, int s2, int t,
                                                                             std::map<std::vector<std::int64_t>, std::map<std::vector<std::pair<std::int64_t, std::int64_t>>, double>>* joint = nullptr) {
  if (binomial(static_cast<std::int64_t>(v.a1.size()), s1) > 2'000'000)
    throw CapacityError("setup: too many I subsets to enumerate");
  std::map<std::vector<std::int64_t>, double> dist;
  const double nI = static_cast<double>(binomial(static_cast<std::int64_t>(v.a1.size()), s1));
  for (Mask sel : all_subsets(static_cast<int>(v.a1.size()), s1)) {
    std::vector<std::int64_t> I;
    for (int b : bits_of(sel)) I.push_back(v.a1[b]);
    auto H = v.hits(inst, I);
    if (static_cast<int>(H.size()) < t) continue;
    const double amp2_J = 1.0 / (nI * static_cast<double>(binomial(static_cast<std::int64_t>(H.size()), s2)));
    std::vector<Mask> Js = all_subsets(static_cast<int>(H.size()), s2);
    for (Mask jm : Js) {
      std::vector<std::pair<std::int64_t, std::int64_t>> S2;
      std::vector<std::int64_t> partners;
      for (int b : bits_of(jm)) {
        S2.emplace_back(H[b].second, H[b].first);
        partners.push_back(H[b].second);
      }
      std::sort(partners.begin(), partners.end());
      if (std::adjacent_find(partners.begin(), partners.end()) != partners.end()) continue;
      std::sort(S2.begin(), S2.end());
      std::vector<std::int64_t> I1;
      std::set_difference(I.begin(), I.end(), partners.begin(), partners.end(), std::back_inserter(I1));
      dist[I1] += amp2_J;
      if (joint) (*joint)[I1][S2] += amp2_J;
    }
  }
  return dist;
}

/// Setup of the outer walk: uniform I ⊆ Ã₁, s₂ Grover-found members of H(I), reorganization into
/// (I₁, S₂), measurement of I₁; returns the final partition and the uniform state over S₂.
inline SetupResult setup_state(const Instance& inst, const PolyHash& f, int s1, int s2, std::uint64_t seed,
                               Mode mode = Mode::abstract, int max_attempts = 256) {
  SetupResult res;
  auto pre = tripartition_from_hash(f, inst.size(), s1, s2);
  if (!pre) throw ParameterError("setup_state: hash does not give exact class sizes");
  SetupView view(inst, *pre);
  const int t = setup_threshold(view.n2_pre, inst.size(), s1, s2);
  Rng rng(seed);
  std::vector<std::int64_t> I1;
  std::map<std::vector<std::int64_t>, std::map<std::vector<std::pair<std::int64_t, std::int64_t>>, double>> joint;
  bool sampled = false;
  const double N2 = static_cast<double>(view.a2.size());
  if (view.max_hits(inst, s1) < t) {
    res.failure = "setup: no I subset reaches the |H(I)| threshold";
    return res;
  }

  if (mode == Mode::concrete) {
    auto dist = enumerate_I1_distribution(inst, view, s1, s2, t, &joint);
    if (dist.empty()) {
      res.failure = "setup: no I subset reaches the |H(I)| threshold";
      return res;
    }
    std::vector<std::vector<std::int64_t>> keys;
    std::vector<double> w;
    for (auto& [k, p] : dist) keys.push_back(k), w.push_back(p);
    I1 = keys[rng.weighted(w)];
    sampled = true;
  }
  // The query ledger follows the algorithm's own steps in both modes.
  for (int a = 0; a < max_attempts; ++a) {
    auto I = rng.sample(view.a1, static_cast<std::size_t>(s1));
    res.ledger.queries += static_cast<std::uint64_t>(s1);
    auto H = view.hits(inst, I);
    if (static_cast<int>(H.size()) < t) {
      ++res.ledger.resamples;
      continue;
    }
    std::vector<std::pair<std::int64_t, std::int64_t>> pool = H;
    std::vector<std::int64_t> partners;
    for (int r = 0; r < s2; ++r) {
      const double remaining = static_cast<double>(pool.size());
      res.ledger.queries += static_cast<std::uint64_t>(std::ceil(std::numbers::pi / 4 * std::sqrt(N2 / remaining))) + 1;
      auto pick = rng.below(pool.size());
      partners.push_back(pool[pick].second);
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    std::sort(partners.begin(), partners.end());
    if (std::adjacent_find(partners.begin(), partners.end()) != partners.end()) {
      res.failure = "setup: collision pairs of the pre-partition are not disjoint";
      return res;
    }
    if (!sampled) {
      std::sort(I.begin(), I.end());
      std::set_difference(I.begin(), I.end(), partners.begin(), partners.end(), std::back_inserter(I1));
      sampled = true;
    }
    break;
  }
  if (!sampled) {
    res.failure = "setup: |H(I)| threshold not met within the attempt budget";
    return res;
  }

  Tripartition fin = *pre;
  fin.displace(I1);
  CollisionIndex ci(inst, fin);
  if (!ci.disjoint()) {
    res.failure = "setup: collision pairs in P(A1,A2) are not disjoint";
    return res;
  }
  res.I1 = I1;
  res.n2 = ci.n2();
  res.partition = fin;
  if (res.n2 < s2) {
    res.failure = "setup: fewer than s2 collision pairs";
    return res;
  }
  const std::uint64_t V = binomial(res.n2, s2);
  if (V > 5'000'000) throw CapacityError("setup: outer vertex set too large to represent");
  res.state.mode = mode;
  res.state.amplitudes = CVec::Zero(static_cast<Eigen::Index>(V));
  const double target = 1.0 / std::sqrt(static_cast<double>(V));
  if (mode == Mode::abstract) {
    res.state.amplitudes.setConstant(target);
  } else {
    // post-measurement state from the enumerated joint amplitudes
    std::map<std::pair<std::int64_t, std::int64_t>, int> pair_index;
    for (int p = 0; p < ci.n2(); ++p) pair_index[ci.pairs()[p]] = p;
    double tot = 0;
    for (auto& [S2, w] : joint[I1]) {
      Mask m = 0;
      for (auto& pr : S2) {
        auto it = pair_index.find(pr);
        if (it == pair_index.end()) throw ConsistencyError("setup: measured S2 pair missing from P(A1,A2)");
        m |= Mask{1} << it->second;
      }
      res.state.amplitudes[static_cast<Eigen::Index>(colex_rank(m))] += std::sqrt(w);
      tot += w;
    }
    res.state.amplitudes /= std::sqrt(tot);
  }
  double dev = 0;
  for (Eigen::Index k = 0; k < res.state.amplitudes.size(); ++k)
    dev = std::max(dev, std::abs(res.state.amplitudes[k] - cplx(target, 0)));
  res.max_uniform_deviation = dev;
  res.ok = true;
  return res;
}

}  // namespace qwalk
