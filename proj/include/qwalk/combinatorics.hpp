#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "qwalk/errors.hpp"

namespace qwalk {

using Mask = std::uint64_t;

/// C(n, k) exactly; throws CapacityError on 64-bit overflow.
inline std::uint64_t binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || n < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  unsigned __int128 r = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    r = r * static_cast<unsigned __int128>(n - k + i) / static_cast<unsigned __int128>(i);
    if (r > std::numeric_limits<std::uint64_t>::max()) throw CapacityError("binomial overflow");
  }
  return static_cast<std::uint64_t>(r);
}

/// C(n, k) as a double (no overflow, for cost formulas).
inline double binomial_real(double n, double k) {
  if (k < 0 || n < 0 || k > n) return 0.0;
  return std::exp(std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1));
}

inline int popcount(Mask m) { return std::popcount(m); }

/// Colexicographic rank of a subset: sum over set bits b_i (ascending) of C(b_i, i+1).
inline std::uint64_t colex_rank(Mask m) {
  std::uint64_t r = 0;
  int i = 0;
  while (m) {
    int b = std::countr_zero(m);
    r += binomial(b, i + 1);
    ++i;
    m &= m - 1;
  }
  return r;
}

/// Inverse of colex_rank for k-subsets.
inline Mask colex_unrank(std::uint64_t rank, int k) {
  Mask m = 0;
  for (int i = k; i >= 1; --i) {
    std::int64_t b = i - 1;
    while (binomial(b + 1, i) <= rank) ++b;
    rank -= binomial(b, i);
    m |= Mask{1} << b;
  }
  return m;
}

/// Next k-subset in colex order (Gosper's hack). Undefined for m == 0.
inline Mask next_colex(Mask m) {
  Mask c = m & (~m + 1);
  Mask r = m + c;
  return (((r ^ m) >> 2) / c) | r;
}

/// All k-subsets of {0..n-1} in colex order.
inline std::vector<Mask> all_subsets(int n, int k) {
  if (n > 64 || k < 0 || k > n) throw ParameterError("all_subsets: bad (n, k)");
  std::vector<Mask> out;
  out.reserve(binomial(n, k));
  if (k == 0) {
    out.push_back(0);
    return out;
  }
  Mask m = (k == 64) ? ~Mask{0} : ((Mask{1} << k) - 1);
  const Mask limit = (n == 64) ? 0 : (Mask{1} << n);
  while (true) {
    out.push_back(m);
    if (k == n) break;
    Mask nx = next_colex(m);
    if (n < 64 && nx >= limit) break;
    if (nx < m) break;
    m = nx;
  }
  return out;
}

/// All k-subsets of the bits of `universe`, in colex order of the bit positions.
inline std::vector<Mask> subsets_of(Mask universe, int k) {
  std::vector<int> bits;
  for (Mask u = universe; u; u &= u - 1) bits.push_back(std::countr_zero(u));
  std::vector<Mask> out;
  for (Mask local : all_subsets(static_cast<int>(bits.size()), k)) {
    Mask m = 0;
    for (Mask l = local; l; l &= l - 1) m |= Mask{1} << bits[std::countr_zero(l)];
    out.push_back(m);
  }
  return out;
}

/// Packs the bits of `m` selected by `sel` into the low bits (software pext).
inline Mask compress_bits(Mask m, Mask sel) {
  Mask out = 0;
  int j = 0;
  for (Mask s = sel; s; s &= s - 1, ++j) {
    if (m & (s & (~s + 1))) out |= Mask{1} << j;
  }
  return out;
}

/// Inverse of compress_bits (software pdep).
inline Mask expand_bits(Mask packed, Mask sel) {
  Mask out = 0;
  int j = 0;
  for (Mask s = sel; s; s &= s - 1, ++j) {
    if (packed & (Mask{1} << j)) out |= s & (~s + 1);
  }
  return out;
}

inline std::vector<int> bits_of(Mask m) {
  std::vector<int> v;
  for (; m; m &= m - 1) v.push_back(std::countr_zero(m));
  return v;
}

}  // namespace qwalk
