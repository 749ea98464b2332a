#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <iterator>
#include <set>

#include "qwalk/history_set.hpp"
#include "qwalk/random.hpp"

using namespace qwalk;

namespace {

std::vector<Item> sample_items(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::set<Item> s;
  while (s.size() < n) s.insert(Item{rng.between(0, 500), rng.between(-20, 20)});
  return {s.begin(), s.end()};
}

// Collision-table entries recounted from scratch.
std::multiset<std::pair<std::int64_t, std::int64_t>> recount(const std::set<std::pair<std::int64_t, std::int64_t>>& inner,
                                                             const SideFn& side) {
  std::multiset<std::pair<std::int64_t, std::int64_t>> out;
  for (auto& [i, vi] : inner)
    for (auto& [j, vj] : inner)
      if (vi == vj && side(i) == 1 && side(j) == 2) out.insert({pair_z(i, j), vi});
  return out;
}

}  // namespace

TEST(HistorySet, EmptyEncodingIsConstant) {
  HistoryFreeSet a, b(12345);
  const std::vector<std::uint8_t> want{'Q', 'W', 'H', 'S', 1, 0, 0, 0, 0, 0, 0, 0, 0, 0};
  EXPECT_EQ(a.serialize(), want);
  EXPECT_EQ(b.serialize(), want);
}

TEST(HistorySet, InsertThenEraseRestoresEncoding) {
  auto items = sample_items(40, 1);
  HistoryFreeSet s;
  for (std::size_t i = 0; i < 20; ++i) s.insert(items[i]);
  auto before = s.serialize();
  s.insert(items[30]);
  s.erase(items[30]);
  EXPECT_EQ(s.serialize(), before);
  EXPECT_THROW(s.insert(items[0]), ParameterError);
  EXPECT_THROW(s.erase(items[35]), ParameterError);
}

TEST(HistorySet, UniqueEncodingOverRandomHistories) {
  auto items = sample_items(64, 2);
  HistoryFreeSet ref;
  for (auto& it : items) ref.insert(it);
  const auto want = ref.serialize();
  auto extra = sample_items(100, 3);
  Rng rng(4);
  for (int h = 0; h < 1000; ++h) {
    auto order = items;
    rng.shuffle(order);
    HistoryFreeSet s;
    // interleave transient inserts and deletes of items outside the final set
    std::vector<Item> transient;
    for (auto& it : order) {
      s.insert(it);
      const Item& e = extra[rng.below(extra.size())];
      if (!s.contains(e) && std::find(items.begin(), items.end(), e) == items.end()) {
        s.insert(e);
        transient.push_back(e);
      }
    }
    for (auto& e : transient) s.erase(e);
    ASSERT_EQ(s.serialize(), want) << "history " << h;
  }
}

TEST(HistorySet, SerializationRoundTripAndGolden) {
  HistoryFreeSet s;
  for (std::int64_t i = 0; i < 10; ++i) s.insert(Item{i, (i * 7) % 5});
  auto bytes = s.serialize();
  auto t = HistoryFreeSet::deserialize(bytes);
  EXPECT_EQ(t.serialize(), bytes);
  std::ifstream f(std::string(QWALK_TEST_DATA) + "/history_set_golden.bin", std::ios::binary);
  ASSERT_TRUE(f.good());
  std::vector<std::uint8_t> golden((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  EXPECT_EQ(bytes, golden);
  auto bad = bytes;
  bad[14 + 16] ^= 0x7f;  // level byte of the first item
  EXPECT_THROW(HistoryFreeSet::deserialize(bad), ParameterError);
  bad = bytes;
  bad.pop_back();
  EXPECT_THROW(HistoryFreeSet::deserialize(bad), ParameterError);
}

TEST(HistorySet, LookupBySelectsValue) {
  HistoryFreeSet s;
  s.insert(Item{3, 7});
  s.insert(Item{1, 7});
  s.insert(Item{2, 8});
  CostLedger L;
  auto hit = s.lookup_by_value(7, &L);
  ASSERT_EQ(hit.size(), 2u);
  EXPECT_EQ(hit[0].z, 1);
  EXPECT_EQ(hit[1].z, 3);
  EXPECT_TRUE(s.lookup_by_value(9).empty());
  EXPECT_EQ(L.ds_ops, 1u);
}

TEST(HistorySet, ModelBasedFuzz) {
  Rng rng(99);
  HistoryFreeSet s;
  std::set<Item> model;
  int divergences = 0;
  for (int op = 0; op < 10000; ++op) {
    Item it{rng.between(0, 60), rng.between(0, 15)};
    switch (rng.below(4)) {
      case 0:
        if (!model.count(it)) s.insert(it), model.insert(it);
        break;
      case 1:
        if (model.count(it)) s.erase(it), model.erase(it);
        break;
      case 2: {
        auto got = s.lookup_by_value(it.value);
        std::vector<Item> want;
        for (auto& m : model)
          if (m.value == it.value) want.push_back(m);
        if (got != want) ++divergences;
        break;
      }
      default:
        if (s.contains(it) != (model.count(it) > 0)) ++divergences;
        if (!model.empty()) {
          auto r = rng.below(model.size());
          if (!(s.select(r) == *std::next(model.begin(), static_cast<std::ptrdiff_t>(r)))) ++divergences;
        }
    }
    if (s.size() != model.size()) ++divergences;
  }
  EXPECT_EQ(std::vector<Item>(model.begin(), model.end()), s.items());
  EXPECT_EQ(divergences, 0);
}

TEST(HistorySet, EnumerateUniform) {
  HistoryFreeSet one;
  one.insert(Item{5, 5});
  EXPECT_EQ(one.enumerate_uniform(std::uint64_t{1}), (Item{5, 5}));
  HistoryFreeSet s;
  for (std::int64_t i = 0; i < 32; ++i) s.insert(Item{i, i % 4});
  std::map<std::int64_t, int> counts;
  Rng rng(8);
  CostLedger L;
  const int draws = 100000;
  for (int d = 0; d < draws; ++d) ++counts[s.enumerate_uniform(rng, &L).z];
  EXPECT_EQ(L.ds_ops, static_cast<std::uint64_t>(draws));
  double chi2 = 0;
  const double e = draws / 32.0;
  for (std::int64_t i = 0; i < 32; ++i) chi2 += (counts[i] - e) * (counts[i] - e) / e;
  // chi-square critical value, 31 degrees of freedom, p = 0.01
  EXPECT_LT(chi2, 52.19);
  HistoryFreeSet empty;
  EXPECT_THROW(empty.enumerate_uniform(std::uint64_t{1}), ParameterError);
}

TEST(HistorySet, TouchedNodesGrowLogarithmically) {
  std::vector<double> ns, touched;
  for (std::size_t n : {256, 1024, 4096, 16384}) {
    HistoryFreeSet s;
    Rng rng(n);
    for (std::size_t i = 0; i < n; ++i) s.insert(Item{static_cast<std::int64_t>(i), rng.between(0, 1 << 20)});
    double t = 0;
    for (int q = 0; q < 200; ++q) {
      (void)s.select(rng.below(n));
      t += static_cast<double>(s.touched_last_op());
    }
    ns.push_back(static_cast<double>(n));
    touched.push_back(t / 200);
  }
  // 64x more items: logarithmic growth stays far below linear
  std::printf("touched nodes per select: %.1f %.1f %.1f %.1f\n", touched[0], touched[1], touched[2], touched[3]);
  EXPECT_LT(touched.back() / touched.front(), 4.0);
}

TEST(EdgeEncoding, CollisionAwareInsertOrderIndependent) {
  SideFn side = [](std::int64_t i) { return i < 10 ? 1 : (i < 20 ? 2 : 3); };
  EdgeEncoding a, b;
  a.collision_aware_insert(3, 42, side);
  a.collision_aware_insert(13, 42, side);
  b.collision_aware_insert(13, 42, side);
  b.collision_aware_insert(3, 42, side);
  EXPECT_EQ(a.serialize(), b.serialize());
  EXPECT_EQ(a.collision_count, 1u);
  EXPECT_TRUE(a.collisions.contains(Item{pair_z(3, 13), 42}));
  EdgeEncoding c;
  c.collision_aware_insert(3, 42, side);
  auto before = c.collisions.serialize();
  c.collision_aware_insert(4, 43, side);
  c.collision_aware_insert(25, 42, side);
  EXPECT_EQ(c.collisions.serialize(), before);
  EXPECT_EQ(c.collision_count, 0u);
  EXPECT_THROW(c.collision_aware_insert(3, 42, side), ParameterError);
}

TEST(EdgeEncoding, RandomSequencesMatchRecount) {
  SideFn side = [](std::int64_t i) { return 1 + static_cast<int>(i % 3); };
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    EdgeEncoding e;
    std::set<std::pair<std::int64_t, std::int64_t>> inner;
    std::map<std::int64_t, std::int64_t> value_of;
    for (int op = 0; op < 200; ++op) {
      const std::int64_t i = rng.between(0, 40);
      if (!value_of.count(i)) value_of[i] = rng.between(0, 6);
      const std::int64_t chi = value_of[i];
      if (inner.count({i, chi})) {
        e.collision_aware_erase(i, chi, side);
        inner.erase({i, chi});
      } else {
        e.collision_aware_insert(i, chi, side);
        inner.insert({i, chi});
      }
    }
    auto want = recount(inner, side);
    std::multiset<std::pair<std::int64_t, std::int64_t>> got;
    for (auto& it : e.collisions.items()) got.insert({it.z, it.value});
    EXPECT_EQ(got, want);
    EXPECT_EQ(e.collision_count, want.size());
    EXPECT_TRUE(e.consistent());
  }
}

TEST(EdgeEncoding, SwapOuterMovesEdge) {
  EdgeEncoding e;
  for (std::int64_t i : {1, 2, 3}) e.outer.insert(Item{i, i});
  e.outer_removed.insert(Item{2, 2});
  e.outer_added.insert(Item{7, 7});
  auto [base, other] = e.decode_outer();
  CostLedger L;
  e.swap_outer(&L);
  EXPECT_EQ(L.ds_ops, 2u);
  auto [base2, other2] = e.decode_outer();
  EXPECT_EQ(base2, other);
  EXPECT_EQ(other2, base);
  EXPECT_TRUE(e.consistent());
}
