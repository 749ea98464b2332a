#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <vector>

#include "qwalk/hash_family.hpp"

using namespace qwalk;

namespace {

std::vector<bool> sieve(std::uint64_t n) {
  std::vector<bool> p(n + 1, true);
  p[0] = p[1] = false;
  for (std::uint64_t i = 2; i * i <= n; ++i)
    if (p[i])
      for (std::uint64_t j = i * i; j <= n; j += i) p[j] = false;
  return p;
}

// Evaluates c0 + c1 x + c2 x^2 + ... directly with powers.
std::uint64_t eval_direct(const std::vector<std::uint64_t>& c, std::uint64_t x, std::uint64_t p) {
  std::uint64_t acc = 0, pw = 1;
  for (auto a : c) {
    acc = (acc + a * pw) % p;
    pw = pw * x % p;
  }
  return acc;
}

}  // namespace

TEST(HashFamily, PrimalityMatchesSieve) {
  auto s = sieve(20000);
  for (std::uint64_t n = 0; n <= 20000; ++n) EXPECT_EQ(is_prime(n), static_cast<bool>(s[n])) << n;
  EXPECT_TRUE(is_prime(18446744073709551557ULL));
  EXPECT_FALSE(is_prime(18446744073709551555ULL));
  EXPECT_EQ(next_prime(36), 37u);
  EXPECT_EQ(next_prime(37), 37u);
  EXPECT_EQ(next_prime(0), 2u);
}

TEST(HashFamily, HornerMatchesDirectEvaluation) {
  auto f = PolyHash::sample(4, 100, 100, 3);
  for (std::uint64_t i = 0; i < 100; ++i) EXPECT_EQ(f.raw(0, i), eval_direct(f.coefficients()[0], i, f.prime()));
}

TEST(HashFamily, ConstantFunctionsWhenKIsOne) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto f = PolyHash::sample(1, 50, 50, s);
    const auto v = f(0);
    for (std::uint64_t i = 1; i < 50; ++i) EXPECT_EQ(f(i), v);
  }
}

TEST(HashFamily, ExhaustiveTriplesOverGF5) {
  // every 3 distinct points of GF(5) see each value triple exactly once over the 125 quadratics
  const std::uint64_t p = 5;
  for (std::uint64_t a = 0; a < p; ++a)
    for (std::uint64_t b = a + 1; b < p; ++b)
      for (std::uint64_t c = b + 1; c < p; ++c) {
        std::map<std::array<std::uint64_t, 3>, int> seen;
        for (std::uint64_t c0 = 0; c0 < p; ++c0)
          for (std::uint64_t c1 = 0; c1 < p; ++c1)
            for (std::uint64_t c2 = 0; c2 < p; ++c2) {
              PolyHash f(3, p, p, p, {{c0, c1, c2}});
              ++seen[{f(a), f(b), f(c)}];
            }
        EXPECT_EQ(seen.size(), 125u);
        for (auto& [k, n] : seen) EXPECT_EQ(n, 1);
      }
}

TEST(HashFamily, VerifyKwiseSmallPrimes) {
  EXPECT_TRUE(verify_kwise(2, 5).pass);
  EXPECT_TRUE(verify_kwise(3, 7).pass);
  for (std::uint64_t p : {2, 3, 5, 7, 11, 13})
    for (int k = 1; k <= 3; ++k) {
      if (static_cast<std::uint64_t>(k) > p) continue;
      auto r = verify_kwise(k, p);
      EXPECT_TRUE(r.pass) << "k=" << k << " p=" << p;
      EXPECT_EQ(r.min_count, r.max_count);
    }
}

TEST(HashFamily, TooLowDegreeFails) {
  auto r = verify_kwise(3, 7, 1);
  EXPECT_FALSE(r.pass);
  EXPECT_FALSE(verify_kwise(2, 5, 0).pass);
  EXPECT_THROW(verify_kwise(2, 8), ParameterError);
  EXPECT_THROW(verify_kwise(3, 2), ParameterError);
}

TEST(HashFamily, MarginalDistanceBound) {
  for (std::uint64_t n : {10, 36, 72, 100, 1000, 4096}) {
    auto f = PolyHash::sample(3, n, n, 1);
    EXPECT_LE(f.marginal_distance_bound(), std::ldexp(1.0, -20)) << n;
    EXPECT_GE(f.prime(), n);
    for (std::uint64_t i = 0; i < n; ++i) EXPECT_LT(f(i), n);
  }
}

TEST(HashFamily, MonteCarloPairUniformity) {
  // pair (f(0), f(1)) over seeds for n = 6 (p = 7): each of 36 cells close to 1/36
  const std::uint64_t n = 6;
  std::map<std::pair<std::uint64_t, std::uint64_t>, int> cells;
  const int draws = 72000;
  for (int s = 0; s < draws; ++s) {
    auto f = PolyHash::sample(3, n, n, static_cast<std::uint64_t>(s));
    ++cells[{f(0), f(1)}];
  }
  EXPECT_EQ(cells.size(), 36u);
  for (auto& [k, c] : cells) EXPECT_NEAR(c, draws / 36.0, 0.15 * draws / 36.0);
}

TEST(HashFamily, DeterministicAndValidated) {
  auto a = PolyHash::sample(3, 100, 33, 9), b = PolyHash::sample(3, 100, 33, 9);
  EXPECT_EQ(a.coefficients(), b.coefficients());
  EXPECT_THROW(PolyHash(2, 5, 5, 5, {{1}}), ParameterError);
  EXPECT_THROW(PolyHash(2, 5, 5, 5, {{1, 5}}), ParameterError);
  EXPECT_THROW(PolyHash::sample(0, 5, 5, 1), ParameterError);
}
