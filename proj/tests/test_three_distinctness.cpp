#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "qwalk/battery.hpp"
#include "test_support.hpp"

using namespace qwalk;
using namespace qwalk::testing;

namespace {

// Brute-force 3-collision search over all triples.
std::optional<Triple> brute_triple(const std::vector<std::int64_t>& v) {
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j)
      for (std::size_t k = j + 1; k < v.size(); ++k)
        if (v[i] == v[j] && v[j] == v[k])
          return Triple{static_cast<std::int64_t>(i + 1), static_cast<std::int64_t>(j + 1),
                        static_cast<std::int64_t>(k + 1)};
  return std::nullopt;
}

// Brute-force marked-set count from explicit pairs {2t, 2t+1} inside a region of size R.
std::uint64_t enumerate_marked(int s1, int m, int R, int pairs) {
  std::uint64_t c = 0;
  for (Mask S : all_subsets(R, s1)) {
    int pc = 0;
    for (int t = 0; t < pairs; ++t)
      if (((S >> (2 * t)) & 3) == 3) ++pc;
    if (pc >= m) ++c;
  }
  return c;
}

}  // namespace

TEST(Preprocess, ExampleAppendsDuplicatePairs) {
  auto I = preprocess({5, 7});
  EXPECT_EQ(I.values, (std::vector<std::int64_t>{5, 7, 10, 11, 10, 11}));
  EXPECT_EQ(I.n, 2u);
  EXPECT_EQ(I.q, 7);
}

TEST(Preprocess, AllDistinctGivesOnlyPairs) {
  std::vector<std::int64_t> v{4, 8, 15, 16, 23, 42};
  auto I = preprocess(v);
  ASSERT_EQ(I.size(), 18u);
  std::map<std::int64_t, int> c;
  for (auto x : I.values) ++c[x];
  int pairs = 0;
  for (auto& [k, n] : c) {
    EXPECT_LE(n, 2);
    pairs += n == 2;
  }
  EXPECT_EQ(pairs, 6);
  EXPECT_EQ(count_three_collisions(I.values), 0u);
}

TEST(Preprocess, PlantedTriplePreservedAndUniqueness) {
  std::vector<std::int64_t> v{9, 1, 9, 2, 9};
  auto I = preprocess(v, Triple{1, 3, 5});
  EXPECT_EQ(count_three_collisions(I.values), 1u);
  EXPECT_EQ(oracle_solve(I.values), (Triple{1, 3, 5}));
  EXPECT_THROW(preprocess({1, 1, 1, 2, 2, 2}), ParameterError);
  EXPECT_THROW(preprocess({}), ParameterError);
}

TEST(Oracle, Examples) {
  EXPECT_FALSE(oracle_solve({1, 2, 3}).has_value());
  EXPECT_EQ(oracle_solve({4, 9, 4, 1, 4}), (Triple{1, 3, 5}));
  EXPECT_TRUE(verify_triple({4, 9, 4, 1, 4}, Triple{1, 3, 5}));
  EXPECT_FALSE(verify_triple({4, 9, 4, 1, 4}, Triple{1, 2, 3}));
  EXPECT_FALSE(verify_triple({4, 4, 4}, Triple{1, 1, 3}));
  EXPECT_FALSE(verify_triple({4, 4, 4}, Triple{0, 1, 2}));
}

TEST(Oracle, AgreesWithBruteForce) {
  for (std::uint64_t s = 0; s < 300; ++s) {
    auto [v, t] = generate_instance(15, s % 2 == 0, 30, s);
    auto o = oracle_solve(v);
    auto b = brute_triple(v);
    EXPECT_EQ(o.has_value(), b.has_value());
    if (o) {
      EXPECT_TRUE(verify_triple(v, *o));
    }
    if (t) {
      EXPECT_EQ(o, t);
    }
  }
}

TEST(Tripartition, IdentityHashThresholds) {
  // f(i) = i over GF(11) reduced to [9): classes are contiguous thirds
  PolyHash f(2, 9, 9, 11, {{0, 1}});
  auto P = tripartition_from_hash(f, 9, 1, 1);
  ASSERT_TRUE(P.has_value());
  auto c = P->classes();
  EXPECT_EQ(c[0], (std::vector<std::int64_t>{0, 1, 2}));
  EXPECT_EQ(c[1], (std::vector<std::int64_t>{3, 4, 5}));
  EXPECT_EQ(c[2], (std::vector<std::int64_t>{6, 7, 8}));
  auto Q = tripartition_from_hash(f, 9, 2, 1);
  ASSERT_TRUE(Q.has_value());
  EXPECT_EQ(Q->sizes(), (std::array<std::size_t, 3>{4, 3, 2}));
}

TEST(Tripartition, DisplacementAndRecompute) {
  PolyHash f(2, 9, 9, 11, {{0, 1}});
  auto P = *tripartition_from_hash(f, 9, 2, 1);
  P.displace({1});
  EXPECT_EQ(P.side(1), 3);
  for (std::int64_t i = 0; i < 9; ++i) EXPECT_EQ(P.side(i), P.side_uncached(i));
  EXPECT_THROW(P.displace({5}), ParameterError);
}

TEST(Tripartition, TargetSizes) {
  EXPECT_EQ(target_sizes(36, 3, 1), (std::array<std::size_t, 3>{14, 12, 10}));
  EXPECT_THROW(target_sizes(35, 3, 1), ParameterError);
  EXPECT_THROW(target_sizes(36, 1, 3), ParameterError);
}

TEST(Tripartition, PlantedTripleLandsInOrderedClasses) {
  auto [v, t] = generate_instance(12, true, 48, 5);
  const std::size_t N = 36;
  int good = 0;
  const int trials = 10000;
  for (std::uint64_t s = 0; s < trials; ++s) {
    auto P = sample_tripartition(N, 3, 1, s);
    std::array<int, 3> sides{P.side(t->i - 1), P.side(t->j - 1), P.side(t->k - 1)};
    std::sort(sides.begin(), sides.end());
    if (sides == std::array<int, 3>{1, 2, 3}) ++good;
  }
  const double pr = static_cast<double>(good) / trials;
  std::printf("planted triple split across the three classes: %.4f\n", pr);
  EXPECT_GE(pr, 1.0 / 27 - 0.05);
}

TEST(CollisionIndex, RejectsBadPartitions) {
  auto inst = preprocess(battery_values());
  auto cls = battery_classes();
  cls[2].pop_back();
  EXPECT_THROW(CollisionIndex(inst, cls), ParameterError);
  auto dup = battery_classes();
  dup[0].push_back(dup[1][0]);
  EXPECT_THROW(CollisionIndex(inst, dup), ParameterError);
}

TEST(CollisionIndex, BatteryPairs) {
  auto ci = battery_index();
  EXPECT_EQ(ci->n2(), 9);
  EXPECT_TRUE(ci->disjoint());
  EXPECT_EQ(ci->local_count(), 24);
  for (auto& [i, j] : ci->pairs()) EXPECT_EQ(ci->values()[i], ci->values()[j]);
}

TEST(MarkedCount, MatchesEnumeration) {
  int combos = 0;
  for (int R = 4; R <= 12; ++R)
    for (int pairs = 0; 2 * pairs <= R && pairs <= 4; ++pairs)
      for (int s1 = 1; s1 <= R && s1 <= 6; ++s1)
        for (int m = 1; m <= 2; ++m) {
          EXPECT_EQ(count_inner_marked(s1, m, R, pairs).true_count, enumerate_marked(s1, m, R, pairs))
              << R << " " << pairs << " " << s1 << " " << m;
          ++combos;
        }
  EXPECT_GE(combos, 20);
  auto c = count_inner_marked(4, 1, 8, 2);
  EXPECT_EQ(c.true_count, 29u);
  EXPECT_EQ(c.closed_form, 30u);
}

TEST(MarkedCount, EdgeCases) {
  EXPECT_EQ(count_inner_marked(4, 3, 10, 2).true_count, 0u);
  EXPECT_EQ(count_inner_marked(4, 2, 4, 2).true_count, 1u);
  EXPECT_EQ(count_inner_marked(3, 0, 7, 2).true_count, binomial(7, 3));
  EXPECT_THROW(count_inner_marked(3, 1, 3, 2), ParameterError);
}

TEST(Garbage, NormalizedAndSymmetricOnBattery) {
  auto ci = battery_index();
  auto ps = battery_params();
  auto sym = check_garbage_symmetry(*ci, ps);
  EXPECT_TRUE(sym.pass) << sym.detail;
  EXPECT_LE(sym.max_deviation, 1e-12);
  auto nrm = check_garbage_normalization(*ci, ps);
  EXPECT_TRUE(nrm.pass) << nrm.detail;
  EXPECT_FALSE(check_garbage_symmetry(*ci, ps, true).pass);
}

TEST(Garbage, DegenerateInnerSize) {
  // s1 = 2m: the only remainder is the empty set
  auto ci = battery_index();
  Parameters p{2, 1, 1, ci->n2()};
  auto g = garbage_state(*ci, p, 0b1, 0b10);
  ASSERT_EQ(g.amps.size(), 1u);
  EXPECT_EQ(g.amps.begin()->first, 0u);
  EXPECT_NEAR(std::abs(g.amps.begin()->second), 1.0, 1e-15);
  EXPECT_THROW(garbage_state(*ci, p, 0b1, 0b1), ParameterError);
  EXPECT_THROW(garbage_state(*ci, p, 0b1, 0b110), ParameterError);
}

TEST(Ldwg, TargetInverseAndSupport) {
  auto ci = battery_index();
  auto ps = battery_params();
  auto t = check_ldwg_target(*ci, ps);
  EXPECT_TRUE(t.pass) << t.detail;
  EXPECT_LE(t.max_deviation, 1e-10);
  auto inv = check_ldwg_inverse(*ci, ps);
  EXPECT_TRUE(inv.pass) << inv.detail;
  Parameters p{3, 1, 1, ci->n2()};
  // an unmarked S1 (no pair inside) is rejected
  Mask region = ci->region(0b1);
  Mask S1 = 0;
  for (Mask cand : subsets_of(region, 3))
    if (ci->pair_count(cand) == 0) {
      S1 = cand;
      break;
    }
  ASSERT_NE(S1, 0u);
  EXPECT_THROW(ldwg_apply(*ci, p, 0b1, LocalState{{S1, 1.0}}), ParameterError);
}

TEST(GarbageSwap, InvolutionAndLedger) {
  auto ci = battery_index();
  auto c = check_garbage_swap(*ci, battery_params());
  EXPECT_TRUE(c.pass) << c.detail;
  Parameters p{4, 2, 2, ci->n2()};
  EdgeState e{0b011, 0b1100, garbage_state(*ci, p, 0b011, 0b1100).amps};
  CostLedger L;
  auto f = garbage_swap_apply(e, ci.get(), &L);
  EXPECT_EQ(f.S2, e.S2p);
  EXPECT_EQ(f.S2p, e.S2);
  EXPECT_EQ(L.ds_ops, 4u);
  auto g = garbage_swap_apply(f);
  EXPECT_EQ(g.S2, e.S2);
  EXPECT_LE(max_abs_difference(g.psi, e.psi), 0.0);
}

TEST(CheckMarked, WitnessAndLedger) {
  auto ci = battery_index();
  int marked = 0;
  for (int p = 0; p < ci->n2(); ++p) {
    auto r = check_marked(Mask{1} << p, *ci);
    if (r.marked) {
      ++marked;
      auto [i, j, k] = *r.witness;
      EXPECT_EQ(ci->values()[i], ci->values()[k]);
      EXPECT_EQ(ci->values()[j], ci->values()[k]);
    }
    EXPECT_LE(r.ledger.queries, static_cast<std::uint64_t>(std::ceil(std::sqrt(36.0))));
  }
  EXPECT_EQ(marked, 1);
  auto inst = preprocess({1, 2, 3, 4, 5, 6});
  std::array<std::vector<std::int64_t>, 3> cls;
  for (std::int64_t i = 0; i < 18; ++i) cls[i % 3].push_back(i);
  CollisionIndex none(inst, cls);
  for (int p = 0; p < none.n2(); ++p) EXPECT_FALSE(check_marked(Mask{1} << p, none).marked);
}

TEST(CheckMarked, LedgerScalesAsSqrtN) {
  for (std::size_t n : {24, 48, 96, 192}) {
    std::vector<std::pair<std::int64_t, std::int64_t>> S2{{0, 1}};
    std::vector<std::int64_t> values(3 * n);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<std::int64_t>(i);
    std::vector<std::int64_t> a3;
    for (std::size_t i = 0; i < n; ++i) a3.push_back(static_cast<std::int64_t>(2 * n + i));
    auto r = check_marked(S2, values, a3);
    EXPECT_LE(static_cast<double>(r.ledger.queries), std::sqrt(static_cast<double>(n)) + 1);
  }
}

TEST(Setup, ConcreteStateIsUniform) {
  int ok = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto [v, t] = generate_instance(12, true, 48, s);
    auto inst = preprocess(v, t);
    auto P = sample_tripartition(inst.size(), 3, 1, derive_seed(s, 1));
    auto st = setup_state(inst, P.hash(), 3, 1, derive_seed(s, 2), Mode::concrete);
    if (!st.ok) continue;
    ++ok;
    EXPECT_LE(st.max_uniform_deviation, 1e-9);
    EXPECT_NEAR(st.state.amplitudes.norm(), 1.0, 1e-12);
    EXPECT_EQ(static_cast<std::uint64_t>(st.state.amplitudes.size()), binomial(st.n2, 1));
    const auto& fin = *st.partition;
    for (auto i : st.I1) EXPECT_EQ(fin.side(i), 3);
  }
  EXPECT_GT(ok, 10);
}

TEST(Setup, QueryLedgerScaling) {
  double cmin = 1e9, cmax = 0;
  int skipped = 0;
  for (std::size_t n : {24, 48, 72, 96}) {
    auto [v, t] = generate_instance(n, true, 4 * static_cast<std::int64_t>(n), n);
    auto inst = preprocess(v, t);
    const std::size_t N = inst.size();
    auto [s1, s2] = default_set_sizes(N);
    double q = 0;
    int runs = 0;
    for (std::uint64_t s = 0; s < 200; ++s) {
      auto P = sample_tripartition(N, s1, s2, derive_seed(s, 1));
      SetupResult st;
      try {
        st = setup_state(inst, P.hash(), s1, s2, derive_seed(s, 2), Mode::abstract);
      } catch (const CapacityError&) {
        ++skipped;  // outer state too large to materialize
        continue;
      }
      q += static_cast<double>(st.ledger.queries);
      ++runs;
    }
    const double c = q / runs / (s1 + s2 * std::sqrt(static_cast<double>(N) / s1));
    cmin = std::min(cmin, c), cmax = std::max(cmax, c);
  }
  std::printf("setup ledger / (s1 + s2 sqrt(n/s1)): c in [%.3f, %.3f], %d runs skipped\n", cmin, cmax, skipped);
  EXPECT_LT(skipped, 100);
  EXPECT_GT(cmin, 0);
  EXPECT_LE(cmax / cmin, 4.0);
}

TEST(DistinctnessWalk, InnerMarkedFraction) {
  // unclamped m = floor(s1^2 n2 / N^2) is 0 at desk scale, so every inner vertex is marked
  int checked = 0;
  double clamped_min = 1;
  for (std::size_t n : {12, 24})
    for (std::uint64_t s = 0; s < 10; ++s) {
      auto [v, t] = generate_instance(n, true, 4 * static_cast<std::int64_t>(n), s);
      auto inst = preprocess(v, t);
      auto [s1, s2] = default_set_sizes(inst.size());
      auto P = sample_tripartition(inst.size(), s1, s2, derive_seed(s, 1));
      auto st = setup_state(inst, P.hash(), s1, s2, derive_seed(s, 2), Mode::abstract);
      if (!st.ok) continue;
      CollisionIndex ci(inst, *st.partition);
      const int R = ci.local_count() - 2 * s2;
      const auto raw_m = static_cast<int>(static_cast<std::uint64_t>(s1) * s1 * ci.n2() / (inst.size() * inst.size()));
      const double eps_raw = static_cast<double>(count_inner_marked(s1, raw_m, R, ci.n2() - s2).true_count) /
                             static_cast<double>(binomial(R, s1));
      EXPECT_GE(eps_raw, 0.2);
      const int m = derive_m(s1, ci.n2(), inst.size());
      const double eps_clamped = static_cast<double>(count_inner_marked(s1, m, R, ci.n2() - s2).true_count) /
                                 static_cast<double>(binomial(R, s1));
      clamped_min = std::min(clamped_min, eps_clamped);
      ++checked;
    }
  std::printf("inner marked fraction with m clamped to >= 1: min %.4f\n", clamped_min);
  EXPECT_GT(checked, 5);
}

TEST(DistinctnessWalk, OuterMarkedSetMatchesEps) {
  auto ci = battery_index();
  for (const auto& p : battery_params()) {
    DistinctnessWalk dw(ci, p);
    double frac = 0;
    for (Vertex x = 0; x < dw.outer().vertex_count(); ++x) frac += dw.marked()[x] * dw.outer().stationary()[x];
    EXPECT_NEAR(frac, dw.eps(), 1e-12) << params_tag(p);
  }
}

TEST(Solve, AllDistinctReturnsNone) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    auto [v, t] = generate_instance(24, false, 96, s);
    auto r = solve(v, s);
    EXPECT_FALSE(r.triple.has_value());
  }
  EXPECT_FALSE(solve({1, 2, 3}, 1).triple.has_value());
}

TEST(Solve, TinyTriple) {
  auto r = solve({1, 1, 1}, 1);
  ASSERT_TRUE(r.triple.has_value());
  EXPECT_EQ(*r.triple, (Triple{1, 2, 3}));
}

TEST(Solve, PlantedInstancesBothModes) {
  int hits12 = 0, hits24 = 0;
  for (std::uint64_t s = 0; s < 15; ++s) {
    auto [v, t] = generate_instance(12, true, 48, s);
    auto r = solve(v, s);
    EXPECT_EQ(r.mode, Mode::concrete);
    if (r.triple) {
      EXPECT_EQ(r.triple, oracle_solve(v));
      ++hits12;
    }
  }
  for (std::uint64_t s = 0; s < 30; ++s) {
    auto [v, t] = generate_instance(24, true, 96, s);
    auto r = solve(v, s);
    EXPECT_EQ(r.mode, Mode::abstract);
    if (r.triple) {
      EXPECT_EQ(r.triple, oracle_solve(v));
      ++hits24;
    }
  }
  EXPECT_GE(hits12, 10);
  EXPECT_GE(hits24, 20);
}

TEST(Solve, AgreesWithOracleOnRandomInstances) {
  int found = 0, planted = 0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const bool plant = s % 2 == 0;
    auto [v, t] = generate_instance(24, plant, 96, 5000 + s);
    auto r = solve(v, s);
    auto o = oracle_solve(v);
    if (!o) {
      EXPECT_FALSE(r.triple.has_value()) << s;
      continue;
    }
    ++planted;
    if (r.triple) {
      EXPECT_EQ(*r.triple, *o) << s;
      ++found;
    }
  }
  std::printf("solve found %d of %d instances holding a 3-collision\n", found, planted);
  EXPECT_GE(3 * found, 2 * planted);
}

TEST(Solve, Deterministic) {
  auto [v, t] = generate_instance(24, true, 96, 3);
  auto a = solve(v, 11), b = solve(v, 11);
  EXPECT_EQ(a.triple, b.triple);
  EXPECT_EQ(a.ledger, b.ledger);
  EXPECT_EQ(a.repetitions.size(), b.repetitions.size());
}

TEST(Solve, RejectsBadOverrides) {
  SolveOptions o;
  o.s1 = 1;
  o.s2 = 2;
  EXPECT_THROW(solve({1, 2, 3, 4}, 1, o), ParameterError);
  SolveOptions c;
  c.mode = ModeChoice::concrete;
  std::vector<std::int64_t> big(40);
  for (std::size_t i = 0; i < big.size(); ++i) big[i] = static_cast<std::int64_t>(i);
  EXPECT_THROW(solve(big, 1, c), CapacityError);
}
