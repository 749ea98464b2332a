#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <functional>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "qwalk/cost_ledger.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/random.hpp"

namespace qwalk {

/// (index z, value χ) record, ordered by (χ, z).
struct Item {
  std::int64_t z = 0;
  std::int64_t value = 0;
  friend bool operator==(const Item&, const Item&) = default;
  friend bool operator<(const Item& a, const Item& b) {
    return std::tie(a.value, a.z) < std::tie(b.value, b.z);
  }
};

/// Unique-encoding set: a skip list whose node levels are a keyed hash of the item,
/// so the structure (and its serialization) depends only on the stored items.
class HistoryFreeSet {
 public:
  static constexpr int kMaxLevel = 32;
  static constexpr std::uint64_t kDefaultKey = 0x5157414c4b534554ULL;
  static constexpr std::uint16_t kFormatVersion = 1;

  explicit HistoryFreeSet(std::uint64_t key = kDefaultKey) : key_(key) {
    nodes_.push_back(Node{});  // head
    nodes_[0].level = kMaxLevel;
    nodes_[0].next.assign(kMaxLevel, kNil);
    nodes_[0].width.assign(kMaxLevel, 1);
  }

  std::uint64_t key() const { return key_; }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  /// Level of an item: 1 + trailing zeros of a keyed 64-bit hash.
  int level_of(const Item& it) const {
    std::uint64_t h = splitmix64(key_ ^ splitmix64(static_cast<std::uint64_t>(it.z) * 0x9e3779b97f4a7c15ULL +
                                                   splitmix64(static_cast<std::uint64_t>(it.value))));
    return std::min(kMaxLevel, 1 + std::countr_zero(h | (std::uint64_t{1} << 63)));
  }

  void insert(const Item& it, CostLedger* ledger = nullptr) {
    touched_ = 0;
    std::array<std::uint32_t, kMaxLevel> update{};
    std::array<std::size_t, kMaxLevel> rank{};
    std::uint32_t x = find_path(it, update, rank);
    std::uint32_t nx = nodes_[x].next[0];
    if (nx != kNil && nodes_[nx].item == it) throw ParameterError("HistoryFreeSet::insert: duplicate item");
    const int L = level_of(it);
    std::uint32_t id;
    if (!free_.empty()) {
      id = free_.back();
      free_.pop_back();
    } else {
      id = static_cast<std::uint32_t>(nodes_.size());
      nodes_.emplace_back();
    }
    Node& n = nodes_[id];
    n.item = it;
    n.level = L;
    n.next.assign(L, kNil);
    n.width.assign(L, 0);
    for (int l = 0; l < kMaxLevel; ++l) {
      Node& u = nodes_[update[l]];
      if (l < L) {
        n.next[l] = u.next[l];
        n.width[l] = u.width[l] - (rank[0] - rank[l]);
        u.next[l] = id;
        u.width[l] = rank[0] - rank[l] + 1;
      } else {
        u.width[l] += 1;
      }
    }
    ++size_;
    if (ledger) ++ledger->ds_ops;
  }

  void erase(const Item& it, CostLedger* ledger = nullptr) {
    touched_ = 0;
    std::array<std::uint32_t, kMaxLevel> update{};
    std::array<std::size_t, kMaxLevel> rank{};
    std::uint32_t x = find_path(it, update, rank);
    std::uint32_t id = nodes_[x].next[0];
    if (id == kNil || !(nodes_[id].item == it)) throw ParameterError("HistoryFreeSet::erase: item not present");
    Node& n = nodes_[id];
    for (int l = 0; l < kMaxLevel; ++l) {
      Node& u = nodes_[update[l]];
      if (l < n.level && u.next[l] == id) {
        u.width[l] += n.width[l] - 1;
        u.next[l] = n.next[l];
      } else {
        u.width[l] -= 1;
      }
    }
    n.next.clear();
    n.width.clear();
    free_.push_back(id);
    --size_;
    if (ledger) ++ledger->ds_ops;
  }

  bool contains(const Item& it) const {
    touched_ = 0;
    std::uint32_t x = lower_bound_node(it);
    return x != kNil && nodes_[x].item == it;
  }

  /// All items with value χ, ordered by z.
  std::vector<Item> lookup_by_value(std::int64_t value, CostLedger* ledger = nullptr) const {
    touched_ = 0;
    std::vector<Item> out;
    std::uint32_t x = lower_bound_node(Item{std::numeric_limits<std::int64_t>::min(), value});
    while (x != kNil && nodes_[x].item.value == value) {
      out.push_back(nodes_[x].item);
      x = nodes_[x].next[0];
      ++touched_;
    }
    if (ledger) ++ledger->ds_ops;
    return out;
  }

  /// Item of 0-based rank r in (χ, z) order.
  Item select(std::size_t r) const {
    if (r >= size_) throw ParameterError("HistoryFreeSet::select: rank out of range");
    touched_ = 0;
    const std::size_t target = r + 1;
    std::uint32_t x = 0;
    std::size_t acc = 0;
    for (int l = kMaxLevel - 1; l >= 0; --l) {
      while (nodes_[x].next[l] != kNil && acc + nodes_[x].width[l] <= target) {
        acc += nodes_[x].width[l];
        x = nodes_[x].next[l];
        ++touched_;
      }
    }
    return nodes_[x].item;
  }

  /// Uniformly random stored item; one data-structure operation.
  Item enumerate_uniform(Rng& rng, CostLedger* ledger = nullptr) const {
    if (empty()) throw ParameterError("HistoryFreeSet::enumerate_uniform: empty set");
    if (ledger) ++ledger->ds_ops;
    return select(static_cast<std::size_t>(rng.below(size_)));
  }

  Item enumerate_uniform(std::uint64_t seed, CostLedger* ledger = nullptr) const {
    Rng rng(seed);
    return enumerate_uniform(rng, ledger);
  }

  /// Items in (χ, z) order.
  std::vector<Item> items() const {
    std::vector<Item> out;
    out.reserve(size_);
    for (std::uint32_t x = nodes_[0].next[0]; x != kNil; x = nodes_[x].next[0]) out.push_back(nodes_[x].item);
    return out;
  }

  /// Nodes visited by the most recent operation.
  std::size_t touched_last_op() const { return touched_; }

  /// Versioned little-endian encoding: "QWHS", u16 version, u64 count, then per item
  /// i64 value, i64 z, u8 level, in (χ, z) order. The hash key is not part of the encoding.
  std::vector<std::uint8_t> serialize() const {
    std::vector<std::uint8_t> out{'Q', 'W', 'H', 'S'};
    put(out, kFormatVersion, 2);
    put(out, size_, 8);
    for (std::uint32_t x = nodes_[0].next[0]; x != kNil; x = nodes_[x].next[0]) {
      put(out, static_cast<std::uint64_t>(nodes_[x].item.value), 8);
      put(out, static_cast<std::uint64_t>(nodes_[x].item.z), 8);
      put(out, static_cast<std::uint64_t>(nodes_[x].level), 1);
    }
    return out;
  }

  static HistoryFreeSet deserialize(const std::vector<std::uint8_t>& bytes, std::uint64_t key = kDefaultKey) {
    auto fail = [] { throw ParameterError("HistoryFreeSet::deserialize: malformed encoding"); };
    if (bytes.size() < 14 || bytes[0] != 'Q' || bytes[1] != 'W' || bytes[2] != 'H' || bytes[3] != 'S') fail();
    std::size_t pos = 4;
    if (get(bytes, pos, 2) != kFormatVersion) fail();
    std::uint64_t n = get(bytes, pos, 8);
    if (bytes.size() != 14 + n * 17) fail();
    HistoryFreeSet s(key);
    for (std::uint64_t i = 0; i < n; ++i) {
      Item it;
      it.value = static_cast<std::int64_t>(get(bytes, pos, 8));
      it.z = static_cast<std::int64_t>(get(bytes, pos, 8));
      int lvl = static_cast<int>(get(bytes, pos, 1));
      if (lvl != s.level_of(it)) fail();
      s.insert(it);
    }
    return s;
  }

 private:
  static constexpr std::uint32_t kNil = std::numeric_limits<std::uint32_t>::max();

  struct Node {
    Item item;
    int level = 0;
    std::vector<std::uint32_t> next;
    std::vector<std::size_t> width;  // level-0 steps covered by each link
  };

  std::uint32_t find_path(const Item& it, std::array<std::uint32_t, kMaxLevel>& update,
                          std::array<std::size_t, kMaxLevel>& rank) const {
    std::uint32_t x = 0;
    std::size_t acc = 0;
    for (int l = kMaxLevel - 1; l >= 0; --l) {
      while (nodes_[x].next[l] != kNil && nodes_[nodes_[x].next[l]].item < it) {
        acc += nodes_[x].width[l];
        x = nodes_[x].next[l];
        ++touched_;
      }
      update[l] = x;
      rank[l] = acc;
    }
    return x;
  }

  std::uint32_t lower_bound_node(const Item& it) const {
    std::uint32_t x = 0;
    for (int l = kMaxLevel - 1; l >= 0; --l)
      while (nodes_[x].next[l] != kNil && nodes_[nodes_[x].next[l]].item < it) {
        x = nodes_[x].next[l];
        ++touched_;
      }
    ++touched_;
    return nodes_[x].next[0];
  }

  static void put(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  static std::uint64_t get(const std::vector<std::uint8_t>& in, std::size_t& pos, int bytes) {
    if (pos + bytes > in.size()) throw ParameterError("HistoryFreeSet::deserialize: truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(in[pos + i]) << (8 * i);
    pos += bytes;
    return v;
  }

  std::uint64_t key_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> free_;
  std::size_t size_ = 0;
  mutable std::size_t touched_ = 0;
};

/// Packs an oriented index pair into one z field.
inline std::int64_t pair_z(std::int64_t i, std::int64_t j) { return (i << 32) | (j & 0xffffffffLL); }
inline std::pair<std::int64_t, std::int64_t> unpair_z(std::int64_t z) { return {z >> 32, z & 0xffffffffLL}; }

/// Side of the tripartition an index belongs to (1, 2, 3).
using SideFn = std::function<int(std::int64_t)>;

/// Encoding of an edge and its data: Q(S₂) with its differences, Q(S₁) with its differences,
/// and the collision sub-table Q(P(S₁)) with a counter.
class EdgeEncoding {
 public:
  explicit EdgeEncoding(std::uint64_t key = HistoryFreeSet::kDefaultKey)
      : outer(key), outer_removed(key), outer_added(key), inner(key), inner_removed(key), inner_added(key),
        collisions(key) {}

  HistoryFreeSet outer, outer_removed, outer_added;
  HistoryFreeSet inner, inner_removed, inner_added;
  HistoryFreeSet collisions;
  std::size_t collision_count = 0;

  /// Inserts (i, χᵢ) into Q(S₁), recording any cross-partition pair it completes.
  void collision_aware_insert(std::int64_t i, std::int64_t chi, const SideFn& side, CostLedger* ledger = nullptr) {
    if (contains_index(inner, i, chi)) throw ParameterError("collision_aware_insert: index already present");
    for (const Item& p : inner.lookup_by_value(chi, ledger)) {
      auto pr = oriented(p.z, i, side);
      if (!pr) continue;
      collisions.insert(Item{pair_z(pr->first, pr->second), chi}, ledger);
      ++collision_count;
    }
    inner.insert(Item{i, chi}, ledger);
  }

  /// Exact inverse of collision_aware_insert.
  void collision_aware_erase(std::int64_t i, std::int64_t chi, const SideFn& side, CostLedger* ledger = nullptr) {
    if (!contains_index(inner, i, chi)) throw ParameterError("collision_aware_erase: index not present");
    inner.erase(Item{i, chi}, ledger);
    for (const Item& p : inner.lookup_by_value(chi, ledger)) {
      auto pr = oriented(p.z, i, side);
      if (!pr) continue;
      collisions.erase(Item{pair_z(pr->first, pr->second), chi}, ledger);
      --collision_count;
    }
  }

  /// Moves the outer edge: Q(S₂) ← Q(S₂′), differences exchanged (m deletions + m insertions).
  void swap_outer(CostLedger* ledger = nullptr) {
    for (const Item& it : outer_removed.items()) outer.erase(it, ledger);
    for (const Item& it : outer_added.items()) outer.insert(it, ledger);
    std::swap(outer_removed, outer_added);
  }

  /// Decoded (S, S′): base contents and the neighbour obtained by applying the differences.
  std::pair<std::vector<Item>, std::vector<Item>> decode_outer() const {
    auto base = outer.items();
    std::vector<Item> other;
    for (const Item& it : base)
      if (!outer_removed.contains(it)) other.push_back(it);
    for (const Item& it : outer_added.items()) other.push_back(it);
    std::sort(other.begin(), other.end());
    return {base, other};
  }

  bool consistent() const {
    if (collision_count != collisions.size()) return false;
    for (const Item& it : outer_added.items())
      if (outer.contains(it)) return false;
    for (const Item& it : outer_removed.items())
      if (!outer.contains(it)) return false;
    for (const Item& it : inner_added.items())
      if (inner.contains(it)) return false;
    for (const Item& it : inner_removed.items())
      if (!inner.contains(it)) return false;
    return true;
  }

  std::vector<std::uint8_t> serialize() const {
    std::vector<std::uint8_t> out;
    for (const HistoryFreeSet* s : {&outer, &outer_removed, &outer_added, &inner, &inner_removed, &inner_added,
                                    &collisions}) {
      auto b = s->serialize();
      out.insert(out.end(), b.begin(), b.end());
    }
    for (int k = 0; k < 8; ++k) out.push_back(static_cast<std::uint8_t>(collision_count >> (8 * k)));
    return out;
  }

 private:
  static bool contains_index(const HistoryFreeSet& s, std::int64_t i, std::int64_t chi) {
    return s.contains(Item{i, chi});
  }

  /// (a, b) with a ∈ A₁, b ∈ A₂ if the two indices straddle A₁ × A₂.
  static std::optional<std::pair<std::int64_t, std::int64_t>> oriented(std::int64_t j, std::int64_t i,
                                                                      const SideFn& side) {
    int si = side(i), sj = side(j);
    if (si == 1 && sj == 2) return std::make_pair(i, j);
    if (si == 2 && sj == 1) return std::make_pair(j, i);
    return std::nullopt;
  }
};

}  // namespace qwalk
