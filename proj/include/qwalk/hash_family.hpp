#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "qwalk/combinatorics.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/random.hpp"

namespace qwalk {

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % p);
}

inline std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t p) {
  std::uint64_t r = 1 % p;
  a %= p;
  for (; e; e >>= 1, a = mulmod(a, a, p))
    if (e & 1) r = mulmod(r, a, p);
  return r;
}

/// Deterministic Miller–Rabin for all 64-bit inputs.
inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t q : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % q == 0) return n == q;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) d >>= 1, ++s;
  for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    std::uint64_t x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool comp = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        comp = false;
        break;
      }
    }
    if (comp) return false;
  }
  return true;
}

inline std::uint64_t next_prime(std::uint64_t n) {
  if (n <= 2) return 2;
  while (!is_prime(n)) ++n;
  return n;
}

/// Degree-(k−1) polynomial hash over GF(p), p ≥ max(n, ℓ), reduced to [0, ℓ).
/// Range reduction rejects values ≥ ℓ⌊p/ℓ⌋ and falls through to the next independent polynomial.
class PolyHash {
 public:
  PolyHash() = default;
  PolyHash(int k, std::uint64_t n, std::uint64_t ell, std::uint64_t p, std::vector<std::vector<std::uint64_t>> rounds)
      : k_(k), n_(n), ell_(ell), p_(p), rounds_(std::move(rounds)) {
    if (k < 1 || ell < 1 || p < 2 || rounds_.empty()) throw ParameterError("PolyHash: bad parameters");
    for (auto& r : rounds_) {
      if (static_cast<int>(r.size()) != k) throw ParameterError("PolyHash: coefficient count must equal k");
      for (auto c : r)
        if (c >= p) throw ParameterError("PolyHash: coefficient outside GF(p)");
    }
  }

  static PolyHash sample(int k, std::uint64_t n, std::uint64_t ell, std::uint64_t seed) {
    if (k < 1) throw ParameterError("PolyHash::sample: k must be >= 1");
    if (ell < 1 || n < 1) throw ParameterError("PolyHash::sample: empty domain or range");
    const std::uint64_t p = next_prime(std::max(n, ell));
    const int R = rounds_needed(p, ell);
    Rng rng(seed);
    std::vector<std::vector<std::uint64_t>> rounds(R, std::vector<std::uint64_t>(k));
    for (auto& r : rounds)
      for (auto& c : r) c = rng.below(p);
    return PolyHash(k, n, ell, p, std::move(rounds));
  }

  /// Rounds R with ((p mod ℓ)/p)^R ≤ 2⁻²⁰.
  static int rounds_needed(std::uint64_t p, std::uint64_t ell) {
    const std::uint64_t bad = p % ell;
    if (bad == 0) return 1;
    const double rej = static_cast<double>(bad) / static_cast<double>(p);
    return std::max(1, static_cast<int>(std::ceil(20.0 / -std::log2(rej))));
  }

  /// Value of round r's polynomial at i (Horner, highest coefficient first).
  std::uint64_t raw(std::size_t r, std::uint64_t i) const {
    const auto& c = rounds_.at(r);
    std::uint64_t acc = 0;
    const std::uint64_t x = i % p_;
    for (std::size_t d = c.size(); d-- > 0;) acc = (mulmod(acc, x, p_) + c[d]) % p_;
    return acc;
  }

  std::uint64_t operator()(std::uint64_t i) const {
    const std::uint64_t lim = ell_ * (p_ / ell_);
    std::uint64_t v = 0;
    for (std::size_t r = 0; r < rounds_.size(); ++r) {
      v = raw(r, i);
      if (v < lim) return v % ell_;
    }
    return v % ell_;
  }

  /// Upper bound on the statistical distance of one output from uniform on [ℓ].
  double marginal_distance_bound() const {
    const double rej = static_cast<double>(p_ % ell_) / static_cast<double>(p_);
    return std::pow(rej, static_cast<double>(rounds_.size()));
  }

  int k() const { return k_; }
  std::uint64_t domain() const { return n_; }
  std::uint64_t range() const { return ell_; }
  std::uint64_t prime() const { return p_; }
  const std::vector<std::vector<std::uint64_t>>& coefficients() const { return rounds_; }

 private:
  int k_ = 1;
  std::uint64_t n_ = 1, ell_ = 1, p_ = 2;
  std::vector<std::vector<std::uint64_t>> rounds_;
};

struct KwiseReport {
  bool pass = false;
  int k = 0;
  std::uint64_t p = 0;
  int degree = 0;
  std::uint64_t polynomials = 0;
  std::uint64_t point_sets = 0;
  std::uint64_t expected_count = 0;
  std::uint64_t min_count = 0, max_count = 0;
};

/// Exhaustive check that every k distinct points of GF(p) see exactly uniform value tuples
/// over the family of all polynomials of the given degree (default k−1).
inline KwiseReport verify_kwise(int k, std::uint64_t p, int degree = -1) {
  if (degree < 0) degree = k - 1;
  if (k < 1 || !is_prime(p) || static_cast<std::uint64_t>(k) > p) throw ParameterError("verify_kwise: bad (k, p)");
  const double work = std::pow(static_cast<double>(p), degree + 1) * static_cast<double>(binomial(p, k)) * k;
  if (work > 5e8) throw CapacityError("verify_kwise: enumeration too large");
  KwiseReport rep;
  rep.k = k;
  rep.p = p;
  rep.degree = degree;
  std::uint64_t npoly = 1;
  for (int i = 0; i <= degree; ++i) npoly *= p;
  std::uint64_t ntup = 1;
  for (int i = 0; i < k; ++i) ntup *= p;
  rep.polynomials = npoly;
  rep.expected_count = npoly / ntup;  // 0 when the family is too small
  bool pass = npoly % ntup == 0;
  rep.min_count = std::numeric_limits<std::uint64_t>::max();
  rep.max_count = 0;
  std::vector<std::uint64_t> counts(ntup);
  std::vector<std::uint64_t> coef(degree + 1);
  for (Mask pts : all_subsets(static_cast<int>(p), k)) {
    ++rep.point_sets;
    auto xs = bits_of(pts);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::uint64_t code = 0; code < npoly; ++code) {
      std::uint64_t c = code;
      for (auto& a : coef) a = c % p, c /= p;
      std::uint64_t t = 0;
      for (int x : xs) {
        std::uint64_t acc = 0;
        for (std::size_t d = coef.size(); d-- > 0;) acc = (acc * static_cast<std::uint64_t>(x) + coef[d]) % p;
        t = t * p + acc;
      }
      ++counts[t];
    }
    for (auto c : counts) {
      rep.min_count = std::min(rep.min_count, c);
      rep.max_count = std::max(rep.max_count, c);
    }
  }
  rep.pass = pass && rep.min_count == rep.max_count && rep.min_count == rep.expected_count;
  return rep;
}

}  // namespace qwalk
