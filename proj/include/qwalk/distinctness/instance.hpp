#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "qwalk/errors.hpp"
#include "qwalk/random.hpp"

namespace qwalk {

/// Three positions (1-based, ascending) sharing one value.
struct Triple {
  std::int64_t i = 0, j = 0, k = 0;
  friend bool operator==(const Triple&, const Triple&) = default;
};

inline Triple sorted_triple(std::int64_t a, std::int64_t b, std::int64_t c) {
  std::int64_t v[3] = {a, b, c};
  std::sort(v, v + 3);
  return {v[0], v[1], v[2]};
}

struct Instance {
  std::size_t n = 0;                  // original length
  std::vector<std::int64_t> values;   // χ′ (length 3n) once preprocessed, else χ
  std::optional<Triple> planted;      // original 1-based indices
  std::int64_t q = 0;
  bool preprocessed = false;

  std::size_t size() const { return values.size(); }
};

/// Sort-based exact 3-collision finder; returns the smallest-value collision's first three positions.
inline std::optional<Triple> oracle_solve(const std::vector<std::int64_t>& values) {
  std::vector<std::pair<std::int64_t, std::int64_t>> a;
  a.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) a.emplace_back(values[i], static_cast<std::int64_t>(i) + 1);
  std::sort(a.begin(), a.end());
  for (std::size_t i = 0; i + 2 < a.size(); ++i)
    if (a[i].first == a[i + 2].first) return Triple{a[i].second, a[i + 1].second, a[i + 2].second};
  return std::nullopt;
}

inline bool verify_triple(const std::vector<std::int64_t>& values, const Triple& t) {
  auto ok = [&](std::int64_t x) { return x >= 1 && x <= static_cast<std::int64_t>(values.size()); };
  if (!ok(t.i) || !ok(t.j) || !ok(t.k) || t.i == t.j || t.j == t.k || t.i == t.k) return false;
  return values[t.i - 1] == values[t.j - 1] && values[t.j - 1] == values[t.k - 1];
}

/// Number of 3-subsets of equal positions.
inline std::uint64_t count_three_collisions(const std::vector<std::int64_t>& values) {
  std::map<std::int64_t, std::uint64_t> c;
  for (auto v : values) ++c[v];
  std::uint64_t t = 0;
  for (auto& [v, k] : c) t += k >= 3 ? k * (k - 1) * (k - 2) / 6 : 0;
  return t;
}

/// Appends n duplicate pairs χ′ᵢ = χ′ᵢ₊ₙ = q + i (i = n+1..2n, 1-based), with q = max χ.
inline Instance preprocess(const std::vector<std::int64_t>& values, std::optional<Triple> planted = std::nullopt) {
  if (values.empty()) throw ParameterError("preprocess: empty input");
  if (count_three_collisions(values) > 1)
    throw ParameterError("preprocess: input has more than one 3-collision");
  Instance I;
  I.n = values.size();
  I.q = std::max<std::int64_t>(0, *std::max_element(values.begin(), values.end()));
  I.values = values;
  I.values.resize(3 * I.n);
  const auto n = static_cast<std::int64_t>(I.n);
  for (std::int64_t i = n + 1; i <= 2 * n; ++i) {
    I.values[i - 1] = I.q + i;
    I.values[i + n - 1] = I.q + i;
  }
  I.planted = planted;
  I.preprocessed = true;
  return I;
}

/// Random instance of length n; every value occurs at most twice except an optional planted triple.
inline std::pair<std::vector<std::int64_t>, std::optional<Triple>> generate_instance(std::size_t n, bool planted,
                                                                                      std::int64_t value_range,
                                                                                      std::uint64_t seed) {
  if (n < 3 && planted) throw ParameterError("generate_instance: planted triple needs n >= 3");
  if (value_range < static_cast<std::int64_t>(n)) throw ParameterError("generate_instance: value range too small");
  Rng rng(seed);
  std::vector<std::int64_t> v(n, 0);
  std::map<std::int64_t, int> count;
  std::optional<Triple> t;
  std::int64_t tv = 0;
  if (planted) {
    std::vector<std::int64_t> pos(n);
    for (std::size_t i = 0; i < n; ++i) pos[i] = static_cast<std::int64_t>(i);
    auto p = rng.sample(pos, 3);
    tv = rng.between(1, value_range);
    for (auto i : p) v[i] = tv;
    count[tv] = 3;
    t = Triple{p[0] + 1, p[1] + 1, p[2] + 1};
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (v[i] != 0) continue;
    std::int64_t x;
    do x = rng.between(1, value_range);
    while (count[x] >= 2);
    v[i] = x;
    ++count[x];
  }
  return {v, t};
}

}  // namespace qwalk
