#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "qwalk/cost_model.hpp"

using namespace qwalk;

TEST(CostModel, MnrsExample) {
  CostParams p;
  p.S = 1, p.U = 1, p.C = 1, p.eps = 0.25, p.delta = 1;
  EXPECT_DOUBLE_EQ(mnrs_cost(p), 1 + 2 * (1 + 1));
  p.eps = 0;
  EXPECT_THROW(mnrs_cost(p), ParameterError);
  p.eps = 1, p.U = -1;
  EXPECT_THROW(mnrs_cost(p), ParameterError);
}

TEST(CostModel, NestedTrivializationEqualsMnrs) {
  for (double eps : {0.01, 0.3, 1.0})
    for (double delta : {0.05, 0.5}) {
      CostParams n;
      n.S = 4, n.C = 3, n.eps = eps, n.delta = delta;
      n.U_inner = 2.5, n.C_inner = 0, n.eps_inner = 1, n.delta_inner = 1, n.T = 0, n.S_inner = 0;
      CostParams m = n;
      m.U = 2.5;
      EXPECT_DOUBLE_EQ(nested_cost(n), mnrs_cost(m));
    }
}

TEST(CostModel, NestedFormulaByHand) {
  CostParams p;
  p.S = 10, p.S_inner = 5, p.C = 2, p.eps = 0.25, p.delta = 0.25;
  p.U_inner = 1, p.C_inner = 3, p.eps_inner = 0.25, p.delta_inner = 0.25, p.T = 7;
  // 10 + 5 + 2*(2*(2*(2*1 + 3) + 7) + 2)
  EXPECT_DOUBLE_EQ(nested_cost(p), 15 + 2 * (2 * (2 * (2 + 3) + 7) + 2));
}

TEST(CostModel, SubstitutionReproducesFourTerms) {
  // with constants 1 the nested formula is the four-term expression up to a bounded factor
  for (double lg = 10; lg <= 24; lg += 2) {
    const double n = std::pow(2.0, lg);
    for (double a : {0.6, 5.0 / 7, 0.8})
      for (double b : {0.5, 4.0 / 7, 0.65}) {
        if (b > a) continue;
        const double s1 = std::pow(n, a), s2 = std::pow(n, b);
        const double ratio = nested_cost(three_distinctness_params(n, s1, s2)) / three_distinctness_expression(n, s1, s2);
        EXPECT_GE(ratio, 0.25) << lg << " " << a << " " << b;
        EXPECT_LE(ratio, 4.0) << lg << " " << a << " " << b;
      }
  }
}

TEST(CostModel, TimeModeAddsBatchTerm) {
  const double n = 1 << 20, s1 = std::pow(n, 5.0 / 7), s2 = std::pow(n, 4.0 / 7);
  auto q = three_distinctness_params(n, s1, s2, CostMode::query);
  auto t = three_distinctness_params(n, s1, s2, CostMode::time);
  EXPECT_EQ(q.T, 0);
  EXPECT_DOUBLE_EQ(t.T, t.m);
  EXPECT_NEAR(nested_cost(t) - nested_cost(q), (1 / std::sqrt(t.eps)) * (1 / std::sqrt(t.delta)) * t.m, 1e-6 * nested_cost(t));
  // time objective still lands on the same exponents
  auto fq = fit_exponents(10, 24, Objective::full), ft = fit_exponents(10, 24, Objective::time);
  EXPECT_NEAR(ft.s1_slope, fq.s1_slope, 0.02);
  EXPECT_NEAR(ft.s2_slope, fq.s2_slope, 0.02);
  EXPECT_NEAR(ft.cost_slope, fq.cost_slope, 0.02);
}

TEST(CostModel, OptimizeMonotoneInN) {
  double prev = 0;
  for (int e = 8; e <= 30; ++e) {
    auto r = optimize(std::ldexp(1.0, e));
    EXPECT_GE(r.cost, prev);
    EXPECT_LE(r.s2, r.s1);
    prev = r.cost;
  }
  EXPECT_THROW(optimize(4), ParameterError);
}

TEST(CostModel, OptimizerFindsGridMinimum) {
  const double n = 1 << 16;
  auto best = optimize(n);
  for (int a = 0; a <= 64 * 5; a += 7)
    for (int b = 0; b <= a; b += 5) {
      const double s1 = std::pow(10.0, a / 64.0), s2 = std::pow(10.0, b / 64.0);
      if (s1 > n) continue;
      EXPECT_GE(objective_value(Objective::full, n, s1, s2), best.cost * (1 - 1e-12));
    }
}

TEST(CostModel, LogLogSlope) {
  std::vector<double> x{1, 10, 100, 1000}, y{2, 2 * std::pow(10.0, 0.7), 2 * std::pow(100.0, 0.7), 2 * std::pow(1000.0, 0.7)};
  EXPECT_NEAR(loglog_slope(x, y), 0.7, 1e-12);
  EXPECT_THROW(loglog_slope({1}, {1}), ParameterError);
}

TEST(CostModel, FittedExponents) {
  auto f = fit_exponents(10, 24, Objective::full);
  std::printf("fitted slopes: s1 %.4f  s2 %.4f  cost %.4f\n", f.s1_slope, f.s2_slope, f.cost_slope);
  auto d = fit_exponents(10, 24, Objective::dominant);
  std::printf("dominant-balance slopes: s1 %.4f  s2 %.4f  cost %.4f\n", d.s1_slope, d.s2_slope, d.cost_slope);
  EXPECT_NEAR(f.s1_slope, 5.0 / 7, 0.02);
  EXPECT_NEAR(f.s2_slope, 4.0 / 7, 0.02);
  EXPECT_NEAR(f.cost_slope, 5.0 / 7, 0.02);
}

TEST(CostModel, TermsBalancedAtTargetExponents) {
  for (int e = 10; e <= 24; ++e) {
    const double n = std::ldexp(1.0, e);
    auto t = three_distinctness_terms(n, std::pow(n, 5.0 / 7), std::pow(n, 4.0 / 7));
    const double hi = *std::max_element(t.begin(), t.end()), lo = *std::min_element(t.begin(), t.end());
    EXPECT_LE(hi / lo, 4.0) << e;
  }
}
