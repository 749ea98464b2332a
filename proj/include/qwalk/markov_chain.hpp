#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qwalk/combinatorics.hpp"
#include "qwalk/cost_ledger.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/random.hpp"

namespace qwalk {

using Vertex = std::uint32_t;

struct Transition {
  Vertex to;
  double p;
};

struct ChainLimits {
  std::uint64_t max_vertices = 1'000'000;
  std::uint64_t max_edges = 40'000'000;
};

struct JohnsonParams {
  int n = 0, r = 0, m = 0;
  bool operator==(const JohnsonParams&) const = default;
};

using StationaryDistribution = std::vector<double>;

/// Explicit reversible chain on an enumerated vertex set.
class MarkovChain {
 public:
  /// Generalized Johnson graph J(n, r, m); vertices are r-subsets in colex order.
  static MarkovChain johnson(int n, int r, int m, const ChainLimits& lim = {}) {
    if (n < 1 || n > 64 || r < 0 || r > n)
      throw ParameterError("johnson_chain: need 1 <= n <= 64 and 0 <= r <= n");
    if (m < 1 || m > std::min(r, n - r))
      throw ParameterError("johnson_chain: need 1 <= m <= min(r, n-r) (zero neighbors otherwise)");
    const std::uint64_t V = binomial(n, r);
    const std::uint64_t deg = binomial(r, m) * binomial(n - r, m);
    if (V > lim.max_vertices) throw CapacityError("johnson_chain: vertex count exceeds simulation cap");
    if (V * deg > lim.max_edges) throw CapacityError("johnson_chain: edge count exceeds simulation cap");

    MarkovChain c;
    c.johnson_ = JohnsonParams{n, r, m};
    c.labels_ = all_subsets(n, r);
    c.rows_.resize(V);
    const Mask full = (n == 64) ? ~Mask{0} : ((Mask{1} << n) - 1);
    const double p = 1.0 / static_cast<double>(deg);
    for (Vertex v = 0; v < V; ++v) {
      const Mask s = c.labels_[v];
      auto outs = subsets_of(s, m);
      auto ins = subsets_of(full & ~s, m);
      auto& row = c.rows_[v];
      row.reserve(deg);
      for (Mask a : outs)
        for (Mask b : ins) row.push_back({static_cast<Vertex>(colex_rank((s & ~a) | b)), p});
      std::sort(row.begin(), row.end(), [](auto& x, auto& y) { return x.to < y.to; });
    }
    c.pi_.assign(V, 1.0 / static_cast<double>(V));
    c.check_ergodic();
    return c;
  }

  /// Arbitrary reversible chain from explicit rows; the stationary law is solved by detailed balance.
  static MarkovChain from_rows(std::vector<std::vector<Transition>> rows) {
    MarkovChain c;
    const std::size_t V = rows.size();
    if (V == 0) throw ParameterError("from_rows: empty chain");
    for (auto& row : rows) {
      std::sort(row.begin(), row.end(), [](auto& x, auto& y) { return x.to < y.to; });
      row.erase(std::remove_if(row.begin(), row.end(), [](auto& t) { return t.p == 0.0; }), row.end());
      double s = 0;
      for (auto& t : row) {
        if (t.to >= V || t.p < 0 || t.p > 1) throw ParameterError("from_rows: bad transition");
        s += t.p;
      }
      if (std::abs(s - 1.0) > 1e-12) throw ParameterError("from_rows: row does not sum to 1");
    }
    c.rows_ = std::move(rows);
    c.labels_.resize(V);
    for (std::size_t i = 0; i < V; ++i) c.labels_[i] = i;
    c.check_ergodic();
    // Detailed balance along a BFS tree, then verify every pair.
    std::vector<double> w(V, -1.0);
    w[0] = 1.0;
    std::queue<Vertex> q;
    q.push(0);
    while (!q.empty()) {
      Vertex x = q.front();
      q.pop();
      for (auto& t : c.rows_[x]) {
        if (w[t.to] >= 0) continue;
        double back = c.transition(t.to, x);
        if (back <= 0) throw ParameterError("from_rows: chain is not reversible");
        w[t.to] = w[x] * t.p / back;
        q.push(t.to);
      }
    }
    double tot = 0;
    for (double x : w) tot += x;
    for (auto& x : w) x /= tot;
    c.pi_ = std::move(w);
    for (Vertex x = 0; x < V; ++x)
      for (auto& t : c.rows_[x])
        if (std::abs(c.pi_[x] * t.p - c.pi_[t.to] * c.transition(t.to, x)) > 1e-12)
          throw ParameterError("from_rows: chain is not reversible");
    return c;
  }

  std::size_t vertex_count() const { return rows_.size(); }
  const std::vector<Transition>& neighbors(Vertex x) const { return rows_.at(x); }
  const StationaryDistribution& stationary() const { return pi_; }
  const std::optional<JohnsonParams>& johnson_params() const { return johnson_; }

  /// Canonical label: subset bitmask for Johnson chains, the index otherwise.
  Mask label(Vertex x) const { return labels_.at(x); }

  std::optional<Vertex> index_of(Mask label) const {
    if (johnson_) {
      if (popcount(label) != johnson_->r) return std::nullopt;
      if (johnson_->n < 64 && (label >> johnson_->n)) return std::nullopt;
      return static_cast<Vertex>(colex_rank(label));
    }
    if (label < labels_.size()) return static_cast<Vertex>(label);
    return std::nullopt;
  }

  double transition(Vertex x, Vertex y) const {
    const auto& row = rows_.at(x);
    auto it = std::lower_bound(row.begin(), row.end(), y, [](const Transition& t, Vertex v) { return t.to < v; });
    return (it != row.end() && it->to == y) ? it->p : 0.0;
  }

  std::uint64_t edge_count() const {
    std::uint64_t e = 0;
    for (auto& r : rows_) e += r.size();
    return e;
  }

  /// ‖πP − π‖∞.
  double stationarity_residual() const {
    std::vector<double> out(pi_.size(), 0.0);
    for (Vertex x = 0; x < rows_.size(); ++x)
      for (auto& t : rows_[x]) out[t.to] += pi_[x] * t.p;
    double d = 0;
    for (std::size_t i = 0; i < out.size(); ++i) d = std::max(d, std::abs(out[i] - pi_[i]));
    return d;
  }

  double max_reversibility_violation() const {
    double d = 0;
    for (Vertex x = 0; x < rows_.size(); ++x)
      for (auto& t : rows_[x]) d = std::max(d, std::abs(pi_[x] * t.p - pi_[t.to] * transition(t.to, x)));
    return d;
  }

  double max_row_sum_error() const {
    double d = 0;
    for (auto& r : rows_) {
      double s = 0;
      for (auto& t : r) s += t.p;
      d = std::max(d, std::abs(s - 1.0));
    }
    return d;
  }

 private:
  void check_ergodic() const {
    const std::size_t V = rows_.size();
    std::vector<int> color(V, -1);
    color[0] = 0;
    std::queue<Vertex> q;
    q.push(0);
    bool odd = false;
    std::size_t seen = 1;
    while (!q.empty()) {
      Vertex x = q.front();
      q.pop();
      for (auto& t : rows_[x]) {
        if (color[t.to] < 0) {
          color[t.to] = 1 - color[x];
          ++seen;
          q.push(t.to);
        } else if (color[t.to] == color[x]) {
          odd = true;
        }
      }
    }
    if (seen != V) throw ParameterError("markov chain is not connected");
    if (!odd && V > 1) throw ParameterError("markov chain is periodic (bipartite)");
  }

  std::vector<std::vector<Transition>> rows_;
  std::vector<Mask> labels_;
  StationaryDistribution pi_;
  std::optional<JohnsonParams> johnson_;
};

inline MarkovChain johnson_chain(int n, int r, int m, const ChainLimits& lim = {}) {
  return MarkovChain::johnson(n, r, m, lim);
}

struct SpectralReport {
  double gap = 0;
  double second_eigenvalue_magnitude = 0;
  std::vector<double> eigenvalues;  // ascending
};

inline constexpr std::size_t kDenseEigenCap = 5000;

/// Dense eigendecomposition of Π^{1/2} P Π^{-1/2}.
inline SpectralReport spectral_gap(const MarkovChain& c, std::size_t cap = kDenseEigenCap) {
  const std::size_t V = c.vertex_count();
  if (V > cap) throw CapacityError("spectral_gap: chain too large for dense solve");
  const auto& pi = c.stationary();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(V, V);
  for (Vertex x = 0; x < V; ++x)
    for (auto& t : c.neighbors(x)) A(x, t.to) = std::sqrt(pi[x] / pi[t.to]) * t.p;
  A = 0.5 * (A + A.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  SpectralReport rep;
  rep.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + V);
  std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end());
  double mx = 0;
  for (std::size_t i = 0; i + 1 < V; ++i) mx = std::max(mx, std::abs(rep.eigenvalues[i]));
  rep.second_eigenvalue_magnitude = mx;
  rep.gap = 1.0 - mx;
  return rep;
}

/// Johnson-scheme eigenvalues of J(n, r, m) as (value, multiplicity), eigenspace i = 0..min(r, n-r).
inline std::vector<std::pair<double, std::uint64_t>> johnson_eigenvalues(int n, int r, int m) {
  std::vector<std::pair<double, std::uint64_t>> out;
  const double deg = static_cast<double>(binomial(r, m)) * static_cast<double>(binomial(n - r, m));
  for (int i = 0; i <= std::min(r, n - r); ++i) {
    double e = 0;
    for (int t = 0; t <= m; ++t) {
      double term = static_cast<double>(binomial(i, t)) * static_cast<double>(binomial(r - i, m - t)) *
                    static_cast<double>(binomial(n - r - i, m - t));
      e += (t % 2 ? -term : term);
    }
    std::uint64_t mult = binomial(n, i) - (i > 0 ? binomial(n, i - 1) : 0);
    out.emplace_back(e / deg, mult);
  }
  return out;
}

/// Spectral gap of J(n, r, m) from the closed-form eigenvalues.
inline double johnson_gap(int n, int r, int m) {
  auto ev = johnson_eigenvalues(n, r, m);
  double mx = 0;
  for (std::size_t i = 1; i < ev.size(); ++i)
    if (ev[i].second > 0) mx = std::max(mx, std::abs(ev[i].first));
  return 1.0 - mx;
}

/// Gap from the closed form for Johnson chains, dense solve otherwise.
inline double chain_gap(const MarkovChain& c) {
  if (auto j = c.johnson_params()) return johnson_gap(j->n, j->r, j->m);
  return spectral_gap(c).gap;
}

using VertexPredicate = std::function<bool(Vertex)>;

struct SearchResult {
  std::optional<Vertex> vertex;
  CostLedger ledger;
};

/// Randomized classical walk search: sample from π, then rounds of {check; walk}.
inline SearchResult classical_walk_search(const MarkovChain& c, const VertexPredicate& marked, double eps,
                                          std::uint64_t seed, std::optional<double> gap = std::nullopt) {
  if (!(eps > 0)) throw ParameterError("classical_walk_search: eps must be positive");
  const double delta = gap ? *gap : chain_gap(c);
  if (!(delta > 0)) throw ParameterError("classical_walk_search: chain has zero spectral gap");
  const std::uint64_t rounds = static_cast<std::uint64_t>(std::ceil(3.0 / eps));
  const std::uint64_t steps = static_cast<std::uint64_t>(std::ceil(3.0 / delta));
  Rng rng(seed);
  SearchResult res;
  res.ledger.symbols.eps = eps;
  res.ledger.symbols.delta = delta;
  const auto& pi = c.stationary();
  Vertex x = static_cast<Vertex>(rng.weighted(pi));
  res.ledger.charged += 1;  // one setup sample
  auto step = [&](Vertex v) {
    const auto& row = c.neighbors(v);
    double u = rng.uniform();
    for (auto& t : row) {
      if (u < t.p) return t.to;
      u -= t.p;
    }
    return row.back().to;
  };
  for (std::uint64_t k = 0; k < rounds; ++k) {
    ++res.ledger.checks;
    res.ledger.charged += 1;
    if (marked(x)) {
      res.vertex = x;
      return res;
    }
    for (std::uint64_t s = 0; s < steps; ++s) x = step(x);
    res.ledger.walk_steps += steps;
    res.ledger.charged += static_cast<double>(steps);
  }
  return res;
}

}  // namespace qwalk
