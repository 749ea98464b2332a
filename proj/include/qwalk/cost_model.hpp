#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "qwalk/errors.hpp"

namespace qwalk {

struct CostParams {
  // outer walk
  double S = 0, U = 0, C = 0, eps = 1, delta = 1;
  // inner walk
  double S_inner = 0, U_inner = 0, C_inner = 0, eps_inner = 1, delta_inner = 1;
  double T = 0;
  // symbolic sizes
  double n = 0, s1 = 0, s2 = 0, m = 0, n2 = 0;

  void validate() const {
    for (double v : {S, U, C, S_inner, U_inner, C_inner, T})
      if (!(v >= 0)) throw ParameterError("CostParams: costs must be nonnegative");
    for (double v : {eps, delta, eps_inner, delta_inner})
      if (!(v > 0 && v <= 1)) throw ParameterError("CostParams: eps/delta must lie in (0, 1]");
  }
};

/// S + (1/√ε)((1/√δ)U + C).
inline double mnrs_cost(const CostParams& p) {
  p.validate();
  return p.S + (1 / std::sqrt(p.eps)) * ((1 / std::sqrt(p.delta)) * p.U + p.C);
}

/// Cost of one outer update when it is implemented by an inner walk: (1/√ε′)((1/√δ′)U′ + C′) + T.
inline double nested_update_cost(const CostParams& p) {
  return (1 / std::sqrt(p.eps_inner)) * ((1 / std::sqrt(p.delta_inner)) * p.U_inner + p.C_inner) + p.T;
}

/// S_C + S′ + (1/√ε)((1/√δ)((1/√ε′)((1/√δ′)U′ + C′) + T) + C_C).
inline double nested_cost(const CostParams& p) {
  p.validate();
  return p.S + p.S_inner + (1 / std::sqrt(p.eps)) * ((1 / std::sqrt(p.delta)) * nested_update_cost(p) + p.C);
}

enum class CostMode { query, time };

/// Nested-walk parameters of the 3-Distinctness algorithm with all constants 1 and n₂ = n.
inline CostParams three_distinctness_params(double n, double s1, double s2, CostMode mode = CostMode::query) {
  CostParams p;
  p.n = n, p.s1 = s1, p.s2 = s2, p.n2 = n;
  p.m = std::max(1.0, s1 * s1 * p.n2 / (n * n));
  p.S = s1 + s2 * std::sqrt(n / s1);
  p.S_inner = s1;
  p.C = std::sqrt(n);
  p.eps = std::min(1.0, s2 / p.n2);
  p.delta = std::min(1.0, p.m / s2);
  p.U_inner = 1;
  p.C_inner = 0;
  p.delta_inner = std::min(1.0, 1 / s1);
  p.eps_inner = std::min(1.0, s1 * s1 * p.n2 / (p.m * n * n));
  p.T = mode == CostMode::time ? p.m : 0;
  return p;
}

/// The four terms s₁, s₂√(n/s₁), n/√s₁, n/√s₂.
inline std::array<double, 4> three_distinctness_terms(double n, double s1, double s2) {
  return {s1, s2 * std::sqrt(n / s1), n / std::sqrt(s1), n / std::sqrt(s2)};
}

inline double three_distinctness_expression(double n, double s1, double s2) {
  auto t = three_distinctness_terms(n, s1, s2);
  return t[0] + t[1] + t[2] + t[3];
}

/// Objective minimized by optimize().
enum class Objective {
  full,      // all four terms
  time,      // four terms plus the T = m term √(n₂ s₁²/n)
  dominant,  // s₁ + s₂√(n/s₁) + n/√s₂ (diagnostic only)
};

inline double objective_value(Objective o, double n, double s1, double s2) {
  auto t = three_distinctness_terms(n, s1, s2);
  switch (o) {
    case Objective::full:
      return t[0] + t[1] + t[2] + t[3];
    case Objective::time:
      return t[0] + t[1] + t[2] + t[3] + std::sqrt(n * s1 * s1 / n);
    case Objective::dominant:
      return t[0] + t[1] + t[3];
  }
  return 0;
}

struct OptimumPoint {
  double n = 0, s1 = 0, s2 = 0, cost = 0;
  std::array<double, 4> terms{};
};

inline constexpr int kGridPointsPerDecade = 64;

/// Grid minimization over s = 10^{j/64}, 1 ≤ s₂ ≤ s₁ ≤ n; ties go to the smaller s₁.
inline OptimumPoint optimize(double n, Objective obj = Objective::full) {
  if (!(n >= 8)) throw ParameterError("optimize: n must be >= 8");
  const int jmax = static_cast<int>(std::floor(kGridPointsPerDecade * std::log10(n) + 1e-9));
  std::vector<double> grid(jmax + 1);
  for (int j = 0; j <= jmax; ++j) grid[j] = std::pow(10.0, static_cast<double>(j) / kGridPointsPerDecade);
  OptimumPoint best;
  best.cost = std::numeric_limits<double>::infinity();
  for (int a = 0; a <= jmax; ++a) {
    for (int b = 0; b <= a; ++b) {
      double c = objective_value(obj, n, grid[a], grid[b]);
      if (c < best.cost) {
        best.cost = c;
        best.s1 = grid[a];
        best.s2 = grid[b];
      }
    }
  }
  best.n = n;
  best.terms = three_distinctness_terms(n, best.s1, best.s2);
  return best;
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ParameterError("loglog_slope: need >= 2 paired points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double k = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
  }
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

struct ExponentFit {
  std::vector<OptimumPoint> rows;
  double s1_slope = 0, s2_slope = 0, cost_slope = 0;
};

/// optimize() at n = 2^lo .. 2^hi and the fitted exponents.
inline ExponentFit fit_exponents(int lo_pow2 = 10, int hi_pow2 = 24, Objective obj = Objective::full) {
  ExponentFit f;
  std::vector<double> ns, a, b, c;
  for (int e = lo_pow2; e <= hi_pow2; ++e) {
    auto r = optimize(std::ldexp(1.0, e), obj);
    f.rows.push_back(r);
    ns.push_back(r.n), a.push_back(r.s1), b.push_back(r.s2), c.push_back(r.cost);
  }
  if (ns.size() >= 2) {
    f.s1_slope = loglog_slope(ns, a);
    f.s2_slope = loglog_slope(ns, b);
    f.cost_slope = loglog_slope(ns, c);
  }
  return f;
}

}  // namespace qwalk
