#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qwalk {

/// Symbolic cost parameters attached to a run. Merging keeps the first value set.
struct CostSymbols {
  std::optional<double> S, U, C, eps, delta;
  std::optional<double> S_inner, U_inner, C_inner, eps_inner, delta_inner;
  std::optional<double> T;

  CostSymbols& merge(const CostSymbols& o) {
    auto take = [](std::optional<double>& a, const std::optional<double>& b) {
      if (!a && b) a = b;
    };
    take(S, o.S), take(U, o.U), take(C, o.C), take(eps, o.eps), take(delta, o.delta);
    take(S_inner, o.S_inner), take(U_inner, o.U_inner), take(C_inner, o.C_inner);
    take(eps_inner, o.eps_inner), take(delta_inner, o.delta_inner), take(T, o.T);
    return *this;
  }
  bool operator==(const CostSymbols&) const = default;
};

/// Per-run counters of primitive operations.
struct CostLedger {
  std::uint64_t queries = 0;
  std::uint64_t ds_ops = 0;
  std::uint64_t walk_steps = 0;
  std::uint64_t checks = 0;
  std::uint64_t reflections = 0;
  std::uint64_t inner_invocations = 0;
  std::uint64_t inner_walk_steps = 0;
  std::uint64_t resamples = 0;
  /// Symbolic units: setup S, one U per walk step, one C per check.
  double charged = 0.0;
  std::vector<std::string> warnings;
  CostSymbols symbols;

  CostLedger& operator+=(const CostLedger& o) {
    queries += o.queries;
    ds_ops += o.ds_ops;
    walk_steps += o.walk_steps;
    checks += o.checks;
    reflections += o.reflections;
    inner_invocations += o.inner_invocations;
    inner_walk_steps += o.inner_walk_steps;
    resamples += o.resamples;
    charged += o.charged;
    warnings.insert(warnings.end(), o.warnings.begin(), o.warnings.end());
    symbols.merge(o.symbols);
    return *this;
  }
  friend CostLedger operator+(CostLedger a, const CostLedger& b) { return a += b; }

  void warn(std::string w) { warnings.push_back(std::move(w)); }
  bool operator==(const CostLedger&) const = default;
};

}  // namespace qwalk
