#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "qwalk/cost_ledger.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/hash_family.hpp"
#include "qwalk/random.hpp"

namespace qwalk {

/// Threshold partition of [N] by a hash f, with displaced set I₁ moved from A₁ to A₃.
class Tripartition {
 public:
  Tripartition(PolyHash f, std::size_t N, std::int64_t t1, std::int64_t t2)
      : f_(std::move(f)), N_(N), t1_(t1), t2_(t2), cache_(N) {
    for (std::size_t i = 0; i < N_; ++i) cache_[i] = static_cast<std::uint8_t>(hash_side(static_cast<std::int64_t>(i)));
  }

  std::size_t N() const { return N_; }
  const PolyHash& hash() const { return f_; }
  std::int64_t threshold1() const { return t1_; }
  std::int64_t threshold2() const { return t2_; }
  const std::vector<std::int64_t>& displaced() const { return displaced_; }

  /// Class (1, 2, 3) of a 0-based index.
  int side(std::int64_t i) const { return cache_.at(static_cast<std::size_t>(i)); }

  /// Same classification recomputed from (f, I₁, i) alone.
  int side_uncached(std::int64_t i) const {
    if (std::binary_search(displaced_.begin(), displaced_.end(), i)) return 3;
    return hash_side(i);
  }

  /// Class before the I₁ move.
  int pre_side(std::int64_t i) const { return hash_side(i); }

  std::array<std::vector<std::int64_t>, 3> classes() const {
    std::array<std::vector<std::int64_t>, 3> c;
    for (std::size_t i = 0; i < N_; ++i) c[cache_[i] - 1].push_back(static_cast<std::int64_t>(i));
    return c;
  }

  std::array<std::size_t, 3> sizes() const {
    std::array<std::size_t, 3> s{};
    for (auto v : cache_) ++s[v - 1];
    return s;
  }

  /// Moves I₁ ⊆ Ã₁ into A₃.
  void displace(std::vector<std::int64_t> I1) {
    std::sort(I1.begin(), I1.end());
    for (auto i : I1)
      if (hash_side(i) != 1) throw ParameterError("Tripartition::displace: I1 must lie in the first class");
    displaced_ = std::move(I1);
    for (std::size_t i = 0; i < N_; ++i) cache_[i] = static_cast<std::uint8_t>(side_uncached(static_cast<std::int64_t>(i)));
  }

 private:
  int hash_side(std::int64_t i) const {
    auto v = static_cast<std::int64_t>(f_(static_cast<std::uint64_t>(i)));
    return v < t1_ ? 1 : (v < t2_ ? 2 : 3);
  }

  PolyHash f_;
  std::size_t N_;
  std::int64_t t1_, t2_;
  std::vector<std::int64_t> displaced_;
  std::vector<std::uint8_t> cache_;
};

/// Target sizes |Ã₁| = N/3 + s₁ − s₂, |Ã₂| = N/3, |Ã₃| = N/3 − s₁ + s₂.
inline std::array<std::size_t, 3> target_sizes(std::size_t N, int s1, int s2) {
  if (N % 3 != 0) throw ParameterError("tripartition: N must be divisible by 3");
  const auto third = static_cast<std::int64_t>(N / 3);
  const std::int64_t a = third + s1 - s2, c = third - s1 + s2;
  if (s2 > s1 || a > static_cast<std::int64_t>(N) || c < 0) throw ParameterError("tripartition: need s2 <= s1 <= N/3 + s2");
  return {static_cast<std::size_t>(a), static_cast<std::size_t>(third), static_cast<std::size_t>(c)};
}

/// Threshold classification by f over [N] (range ℓ = N); nullopt unless the class sizes are exact.
inline std::optional<Tripartition> tripartition_from_hash(const PolyHash& f, std::size_t N, int s1, int s2) {
  auto t = target_sizes(N, s1, s2);
  Tripartition P(f, N, static_cast<std::int64_t>(t[0]), static_cast<std::int64_t>(t[0] + t[1]));
  if (P.sizes() != t) return std::nullopt;
  return P;
}

/// Samples 3-wise independent hashes until the threshold classes have the exact sizes.
inline Tripartition sample_tripartition(std::size_t N, int s1, int s2, std::uint64_t seed, CostLedger* ledger = nullptr,
                                        int max_tries = 1'000'000) {
  for (int a = 0; a < max_tries; ++a) {
    auto f = PolyHash::sample(3, N, N, derive_seed(seed, static_cast<std::uint64_t>(a)));
    if (auto P = tripartition_from_hash(f, N, s1, s2)) return *P;
    if (ledger) ++ledger->resamples;
  }
  throw CapacityError("sample_tripartition: no exact-size partition found");
}

}  // namespace qwalk
