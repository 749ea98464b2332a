#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "qwalk/cost_ledger.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/markov_chain.hpp"
#include "qwalk/random.hpp"

namespace qwalk {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;

enum class Mode { abstract, concrete };

inline const char* to_string(Mode m) { return m == Mode::abstract ? "abstract" : "concrete"; }

/// Amplitude vector plus the mode it lives in.
struct StateVector {
  Mode mode = Mode::abstract;
  CVec amplitudes;
};

/// Directed-edge basis (X×{0}) ∪ E→, grouped by tail vertex: (x,0) then (x,y) in neighbor order.
class EdgeSpace {
 public:
  explicit EdgeSpace(const MarkovChain& c) {
    const std::size_t V = c.vertex_count();
    offset_.resize(V + 1);
    std::size_t s = 0;
    for (Vertex x = 0; x < V; ++x) {
      offset_[x] = s;
      s += 1 + c.neighbors(x).size();
    }
    offset_[V] = s;
    owner_.resize(s);
    head_.resize(s);
    reverse_.assign(s, kNone);
    for (Vertex x = 0; x < V; ++x) {
      owner_[offset_[x]] = x;
      head_[offset_[x]] = kNone;
      const auto& row = c.neighbors(x);
      for (std::size_t k = 0; k < row.size(); ++k) {
        owner_[offset_[x] + 1 + k] = x;
        head_[offset_[x] + 1 + k] = row[k].to;
      }
    }
    for (Vertex x = 0; x < V; ++x) {
      const auto& row = c.neighbors(x);
      for (std::size_t k = 0; k < row.size(); ++k) {
        auto back = slot(row[k].to, x, c);
        if (!back) throw ParameterError("EdgeSpace: chain support is not symmetric");
        reverse_[offset_[x] + 1 + k] = *back;
      }
    }
  }

  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  std::size_t size() const { return owner_.size(); }
  std::size_t vertex_count() const { return offset_.size() - 1; }
  std::size_t coin0(Vertex x) const { return offset_[x]; }
  std::size_t begin(Vertex x) const { return offset_[x]; }
  std::size_t end(Vertex x) const { return offset_[x + 1]; }
  Vertex tail(std::size_t s) const { return owner_[s]; }
  /// Head vertex of an edge slot; nullopt for (x,0).
  std::optional<Vertex> head(std::size_t s) const {
    return head_[s] == kNone ? std::nullopt : std::optional<Vertex>(static_cast<Vertex>(head_[s]));
  }
  std::size_t reverse(std::size_t s) const { return reverse_[s]; }

  std::optional<std::size_t> slot(Vertex x, Vertex y, const MarkovChain& c) const {
    const auto& row = c.neighbors(x);
    auto it = std::lower_bound(row.begin(), row.end(), y, [](const Transition& t, Vertex v) { return t.to < v; });
    if (it == row.end() || it->to != y) return std::nullopt;
    return offset_[x] + 1 + static_cast<std::size_t>(it - row.begin());
  }

 private:
  std::vector<std::size_t> offset_, owner_, head_, reverse_;
};

struct AuxEntry {
  std::uint32_t key;
  cplx amp;
};
/// Sparse normalized vector in the auxiliary data space.
using AuxState = std::vector<AuxEntry>;

/// D: basis slot -> normalized data state.
class DataOracle {
 public:
  DataOracle() = default;
  DataOracle(std::size_t aux_dim, std::vector<AuxState> per_slot, std::vector<std::uint64_t> key_labels = {})
      : aux_dim_(aux_dim), data_(std::move(per_slot)), labels_(std::move(key_labels)) {
    for (std::size_t s = 0; s < data_.size(); ++s) {
      double n2 = 0;
      for (auto& e : data_[s]) {
        if (e.key >= aux_dim_) throw ConsistencyError("DataOracle: key outside data space");
        n2 += std::norm(e.amp);
      }
      if (std::abs(n2 - 1.0) > 1e-10)
        throw ConsistencyError("DataOracle: data state of slot " + std::to_string(s) + " is not normalized");
    }
  }

  /// Coin-independent trivial data (abstract mode).
  static DataOracle trivial(const EdgeSpace& es) {
    return DataOracle(1, std::vector<AuxState>(es.size(), AuxState{{0, cplx(1, 0)}}));
  }

  std::size_t aux_dim() const { return aux_dim_; }
  std::size_t slot_count() const { return data_.size(); }
  const AuxState& at(std::size_t s) const { return data_.at(s); }
  const std::vector<std::uint64_t>& key_labels() const { return labels_; }
  bool is_trivial() const { return aux_dim_ == 1; }

 private:
  std::size_t aux_dim_ = 1;
  std::vector<AuxState> data_;
  std::vector<std::uint64_t> labels_;
};

/// Interns arbitrary 64-bit data labels into a compact key space.
class DataOracleBuilder {
 public:
  explicit DataOracleBuilder(std::size_t slots) : data_(slots) {}

  std::uint32_t intern(std::uint64_t label) {
    auto [it, fresh] = index_.try_emplace(label, static_cast<std::uint32_t>(labels_.size()));
    if (fresh) labels_.push_back(label);
    return it->second;
  }

  void set(std::size_t slot, const std::vector<std::pair<std::uint64_t, cplx>>& entries) {
    AuxState st;
    st.reserve(entries.size());
    for (auto& [lab, a] : entries)
      if (a != cplx(0, 0)) st.push_back({intern(lab), a});
    std::sort(st.begin(), st.end(), [](auto& a, auto& b) { return a.key < b.key; });
    data_.at(slot) = std::move(st);
  }

  std::optional<std::uint32_t> find(std::uint64_t label) const {
    auto it = index_.find(label);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  DataOracle build() && {
    const std::size_t dim = labels_.size();
    return DataOracle(dim, std::move(data_), std::move(labels_));
  }

 private:
  std::vector<AuxState> data_;
  std::vector<std::uint64_t> labels_;
  std::unordered_map<std::uint64_t, std::uint32_t> index_;
};

/// Replacement for the (X,0)-phase flip: acts in place on the aux block of slot (x,0).
using FlipFn = std::function<void(Vertex x, cplx* block, std::size_t aux_dim)>;

/// Matrix-free W(P) = (Swap · Diffusion · Flip · Diffusion†)².
class WalkOperator {
 public:
  WalkOperator(std::shared_ptr<const MarkovChain> chain, DataOracle data, Mode mode)
      : chain_(std::move(chain)), es_(*chain_), data_(std::move(data)), mode_(mode) {
    if (data_.slot_count() != es_.size()) throw ConsistencyError("WalkOperator: DataOracle does not cover the edge space");
    if (mode_ == Mode::abstract && !data_.is_trivial())
      throw ConsistencyError("WalkOperator: abstract mode requires trivial data");
    const std::size_t A = data_.aux_dim();
    const std::size_t V = es_.vertex_count();
    e1_.resize(V);
    v_.resize(V);
    for (Vertex x = 0; x < V; ++x) {
      for (auto& e : data_.at(es_.coin0(x))) e1_[x].push_back({es_.coin0(x) * A + e.key, e.amp});
      const auto& row = chain_->neighbors(x);
      for (std::size_t k = 0; k < row.size(); ++k) {
        std::size_t s = es_.begin(x) + 1 + k;
        double w = std::sqrt(row[k].p);
        for (auto& e : data_.at(s)) v_[x].push_back({s * A + e.key, w * e.amp});
      }
    }
    if (!data_.is_trivial()) {
      rot_.resize(es_.size());
      for (std::size_t s = 0; s < es_.size(); ++s) {
        std::size_t r = es_.reverse(s);
        if (r == EdgeSpace::kNone || s > r) continue;
        rot_[s] = make_rotation(data_.at(s), data_.at(r));
      }
    }
  }

  WalkOperator(const MarkovChain& chain, DataOracle data, Mode mode)
      : WalkOperator(std::make_shared<const MarkovChain>(chain), std::move(data), mode) {}

  std::size_t dim() const { return es_.size() * data_.aux_dim(); }
  std::size_t aux_dim() const { return data_.aux_dim(); }
  Mode mode() const { return mode_; }
  const EdgeSpace& edge_space() const { return es_; }
  const MarkovChain& chain() const { return *chain_; }
  std::shared_ptr<const MarkovChain> chain_ptr() const { return chain_; }
  const DataOracle& data() const { return data_; }

  void set_flip(FlipFn f) { flip_ = std::move(f); }
  bool has_custom_flip() const { return static_cast<bool>(flip_); }

  /// |x,0⟩|D(x,0)⟩ ↦ Σ_y √P(x,y)|x,y⟩|D(x,y)⟩, extended as a rotation in that plane.
  void local_diffusion(CVec& psi, bool adjoint = false) const {
    for (std::size_t x = 0; x < e1_.size(); ++x) {
      cplx c1 = dot(e1_[x], psi), c2 = dot(v_[x], psi);
      cplx d1 = adjoint ? (c2 - c1) : (-c2 - c1);
      cplx d2 = adjoint ? (-c1 - c2) : (c1 - c2);
      axpy(e1_[x], d1, psi);
      axpy(v_[x], d2, psi);
    }
  }

  /// |x,y⟩|D(x,y)⟩ ↦ |y,x⟩|D(y,x)⟩; an involution.
  void database_swap(CVec& psi) const {
    const std::size_t A = data_.aux_dim();
    if (data_.is_trivial()) {
      for (std::size_t s = 0; s < es_.size(); ++s) {
        std::size_t r = es_.reverse(s);
        if (r != EdgeSpace::kNone && s < r) std::swap(psi[s], psi[r]);
      }
      return;
    }
    std::vector<cplx> bx(A), by(A);
    for (std::size_t s = 0; s < es_.size(); ++s) {
      std::size_t r = es_.reverse(s);
      if (r == EdgeSpace::kNone || s > r) continue;
      cplx* ps = psi.data() + s * A;
      cplx* pr = psi.data() + r * A;
      std::copy(ps, ps + A, bx.begin());
      std::copy(pr, pr + A, by.begin());
      if (s != r) {
        rotate(rot_[s], bx.data(), false);
        rotate(rot_[s], by.data(), true);
        std::copy(bx.begin(), bx.end(), pr);
        std::copy(by.begin(), by.end(), ps);
      }
    }
  }

  /// Negates span{|x,0⟩|D(x,0)⟩}, or delegates to the installed flip.
  void phase_flip(CVec& psi) const {
    const std::size_t A = data_.aux_dim();
    for (Vertex x = 0; x < e1_.size(); ++x) {
      if (flip_) {
        flip_(x, psi.data() + es_.coin0(x) * A, A);
      } else {
        cplx c = dot(e1_[x], psi);
        axpy(e1_[x], -2.0 * c, psi);
      }
    }
  }

  void apply(CVec& psi) const {
    for (int rep = 0; rep < 2; ++rep) {
      local_diffusion(psi, true);
      phase_flip(psi);
      local_diffusion(psi, false);
      database_swap(psi);
    }
  }

  void apply_adjoint(CVec& psi) const {
    for (int rep = 0; rep < 2; ++rep) {
      database_swap(psi);
      local_diffusion(psi, true);
      phase_flip(psi);
      local_diffusion(psi, false);
    }
  }

  /// |π⟩ = Σ_x √π(x) Σ_y √P(x,y)|x,y⟩|D(x,y)⟩.
  CVec pi() const {
    CVec out = CVec::Zero(dim());
    const auto& st = chain_->stationary();
    for (Vertex x = 0; x < v_.size(); ++x) axpy(v_[x], cplx(std::sqrt(st[x]), 0), out);
    return out;
  }

  /// |π⟩⁰ = Σ_x √π(x)|x,0⟩|D(x,0)⟩.
  CVec pi0() const {
    CVec out = CVec::Zero(dim());
    const auto& st = chain_->stationary();
    for (Vertex x = 0; x < e1_.size(); ++x) axpy(e1_[x], cplx(std::sqrt(st[x]), 0), out);
    return out;
  }

  /// Normalized Σ_y √P(x,y)|x,y⟩|D(x,y)⟩.
  CVec diffused(Vertex x) const {
    CVec out = CVec::Zero(dim());
    axpy(v_.at(x), cplx(1, 0), out);
    return out;
  }

  /// Orthogonal projection onto A = span{diffused(x)}.
  CVec project_A(const CVec& psi) const {
    CVec out = CVec::Zero(dim());
    for (Vertex x = 0; x < v_.size(); ++x) axpy(v_[x], dot(v_[x], psi), out);
    return out;
  }

  /// Columns spanning A and Swap(A).
  Eigen::MatrixXcd walk_space_generators() const {
    const std::size_t V = v_.size();
    Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(dim(), 2 * V);
    for (Vertex x = 0; x < V; ++x) {
      CVec a = diffused(x);
      G.col(x) = a;
      database_swap(a);
      G.col(V + x) = a;
    }
    return G;
  }

  /// Dense matrix of an in-place action (small spaces only).
  template <class F>
  Eigen::MatrixXcd dense_of(F&& act) const {
    if (dim() > 6000) throw CapacityError("WalkOperator: too large for a dense matrix");
    Eigen::MatrixXcd M(dim(), dim());
    for (std::size_t j = 0; j < dim(); ++j) {
      CVec e = CVec::Zero(dim());
      e[j] = 1;
      act(e);
      M.col(j) = e;
    }
    return M;
  }

  Eigen::MatrixXcd dense() const {
    return dense_of([this](CVec& v) { apply(v); });
  }

  /// max |(W†W − I)_{ij}|.
  double unitarity_error() const {
    Eigen::MatrixXcd M = dense();
    return (M.adjoint() * M - Eigen::MatrixXcd::Identity(dim(), dim())).cwiseAbs().maxCoeff();
  }

  /// Probability of each tail vertex under a state.
  std::vector<double> vertex_distribution(const CVec& psi) const {
    const std::size_t A = data_.aux_dim();
    std::vector<double> p(es_.vertex_count(), 0.0);
    for (Vertex x = 0; x < p.size(); ++x)
      for (std::size_t s = es_.begin(x); s < es_.end(x); ++s)
        for (std::size_t k = 0; k < A; ++k) p[x] += std::norm(psi[s * A + k]);
    return p;
  }

  /// Probability of each basis slot (x,0) / (x,y), data register traced out.
  std::vector<double> slot_distribution(const CVec& psi) const {
    const std::size_t A = data_.aux_dim();
    std::vector<double> p(es_.size(), 0.0);
    for (std::size_t s = 0; s < es_.size(); ++s)
      for (std::size_t k = 0; k < A; ++k) p[s] += std::norm(psi[s * A + k]);
    return p;
  }

  /// Multiplies every amplitude with tail in the predicate by `phase`.
  void phase_on_vertices(CVec& psi, const std::vector<char>& marked, cplx phase) const {
    const std::size_t A = data_.aux_dim();
    for (Vertex x = 0; x < marked.size(); ++x)
      if (marked[x])
        for (std::size_t i = es_.begin(x) * A; i < es_.end(x) * A; ++i) psi[i] *= phase;
  }

 private:
  struct Entry {
    std::size_t idx;
    cplx amp;
  };
  using Sparse = std::vector<Entry>;

  struct Rotation {
    AuxState u, w;  // orthonormal plane
    cplx a;
    double b = 0;
  };

  static cplx dot(const Sparse& v, const CVec& psi) {
    cplx s = 0;
    for (auto& e : v) s += std::conj(e.amp) * psi[e.idx];
    return s;
  }
  static void axpy(const Sparse& v, cplx c, CVec& psi) {
    if (c == cplx(0, 0)) return;
    for (auto& e : v) psi[e.idx] += c * e.amp;
  }

  /// Unitary on the aux space sending u to v, acting as identity off span{u, v}.
  static Rotation make_rotation(const AuxState& u, const AuxState& v) {
    Rotation R;
    R.u = u;
    std::unordered_map<std::uint32_t, cplx> acc;
    cplx a = 0;
    {
      std::unordered_map<std::uint32_t, cplx> um;
      for (auto& e : u) um[e.key] = e.amp;
      for (auto& e : v) {
        auto it = um.find(e.key);
        if (it != um.end()) a += std::conj(it->second) * e.amp;
      }
    }
    for (auto& e : v) acc[e.key] += e.amp;
    for (auto& e : u) acc[e.key] -= a * e.amp;
    double b2 = 0;
    for (auto& [k, x] : acc) b2 += std::norm(x);
    double b = std::sqrt(b2);
    R.a = a;
    R.b = b;
    if (b > 1e-14) {
      for (auto& [k, x] : acc)
        if (std::abs(x) > 0) R.w.push_back({k, x / b});
      std::sort(R.w.begin(), R.w.end(), [](auto& p, auto& q) { return p.key < q.key; });
    } else {
      R.b = 0;
      R.a = a / std::abs(a);
    }
    return R;
  }

  /// In the (u, w) plane: [[a, −b], [b, ā]] (or its adjoint).
  static void rotate(const Rotation& R, cplx* blk, bool adjoint) {
    if (R.b == 0 && R.a == cplx(1, 0)) return;
    cplx cu = 0, cw = 0;
    for (auto& e : R.u) cu += std::conj(e.amp) * blk[e.key];
    for (auto& e : R.w) cw += std::conj(e.amp) * blk[e.key];
    cplx a = adjoint ? std::conj(R.a) : R.a;
    double b = adjoint ? -R.b : R.b;
    cplx nu = a * cu - b * cw;
    cplx nw = b * cu + std::conj(a) * cw;
    for (auto& e : R.u) blk[e.key] += (nu - cu) * e.amp;
    for (auto& e : R.w) blk[e.key] += (nw - cw) * e.amp;
  }

  std::shared_ptr<const MarkovChain> chain_;
  EdgeSpace es_;
  DataOracle data_;
  Mode mode_;
  std::vector<Sparse> e1_, v_;
  std::vector<Rotation> rot_;
  FlipFn flip_;
};

/// Orthonormal basis of A + Swap(A) (dense; small spaces).
inline Eigen::MatrixXcd walk_space_basis(const WalkOperator& W, double tol = 1e-10) {
  Eigen::MatrixXcd G = W.walk_space_generators();
  if (static_cast<double>(G.rows()) * static_cast<double>(G.cols()) > 6e7)
    throw CapacityError("walk_space_basis: walk space too large for a dense basis");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(G);
  qr.setThreshold(tol);
  const Eigen::Index r = qr.rank();
  Eigen::MatrixXcd Q = qr.householderQ() * Eigen::MatrixXcd::Identity(G.rows(), r);
  return Q;
}

struct EigenphaseReport {
  double gap = 0;               // smallest |phase| on (A+B) ⊖ π
  double invariance_error = 0;  // ‖(I − QQ†)WQ‖max
  std::size_t subspace_dim = 0;
};

/// Eigenphase gap of W on the walked space (A + B) with |π⟩ removed.
inline EigenphaseReport eigenphase_gap(const WalkOperator& W) {
  Eigen::MatrixXcd Q = walk_space_basis(W);
  CVec pi = W.pi();
  Q -= pi * (pi.adjoint() * Q);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(Q);
  qr.setThreshold(1e-10);
  const Eigen::Index r = qr.rank();
  Eigen::MatrixXcd Q2 = qr.householderQ() * Eigen::MatrixXcd::Identity(Q.rows(), r);
  Eigen::MatrixXcd WQ(Q2.rows(), r);
  for (Eigen::Index j = 0; j < r; ++j) {
    CVec c = Q2.col(j);
    W.apply(c);
    WQ.col(j) = c;
  }
  Eigen::MatrixXcd M = Q2.adjoint() * WQ;
  EigenphaseReport rep;
  rep.subspace_dim = static_cast<std::size_t>(r);
  rep.invariance_error = r ? (WQ - Q2 * M).cwiseAbs().maxCoeff() : 0.0;
  if (r == 0) {
    rep.gap = std::numbers::pi;
    return rep;
  }
  Eigen::MatrixXcd H = 0.5 * (M + M.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
  double c = std::min(1.0, es.eigenvalues().maxCoeff());
  rep.gap = std::acos(c);
  return rep;
}

enum class ReflectionVariant { exact, phase_estimation };

inline const char* to_string(ReflectionVariant v) {
  return v == ReflectionVariant::exact ? "exact" : "phase_estimation";
}

/// ⌈log₂(1/√(εδ))⌉ + 2.
inline int default_precision_bits(double eps, double delta) {
  double x = 1.0 / std::sqrt(eps * delta);
  return static_cast<int>(std::ceil(std::log2(std::max(1.0, x)))) + 2;
}

/// Phase shift about the phase-0 eigenspace of W: |π⟩ (and W-invariant states outside the walk space)
/// acquire e^{iφ}, everything else is unchanged. φ = π gives −(2|π⟩⟨π| − I).
class PiReflection {
 public:
  PiReflection(const WalkOperator& W, ReflectionVariant v, int bits = 0) : W_(W), variant_(v), bits_(bits) {
    if (v == ReflectionVariant::phase_estimation && bits < 1)
      throw ParameterError("reflect_about_pi: precision_bits must be >= 1");
    pi_ = W.pi();
  }

  ReflectionVariant variant() const { return variant_; }
  int precision_bits() const { return bits_; }
  const CVec& pi() const { return pi_; }

  /// Walk-operator applications per call.
  std::uint64_t walk_cost() const {
    return variant_ == ReflectionVariant::exact ? 0 : 2 * ((std::uint64_t{1} << bits_) - 1);
  }

  /// Norm of the ancilla branch discarded by the last phase-estimation call.
  double last_junk_norm() const { return junk_; }

  /// 2Π₀ − I: fixes |π⟩, negates the rest of the walk space.
  void reflect(CVec& psi) const {
    shift(psi, cplx(-1, 0));
    psi = -psi;
  }

  void shift(CVec& psi, cplx phase) const {
    if (variant_ == ReflectionVariant::exact) {
      CVec p0 = pi_ * pi_.dot(psi);
      CVec outside = psi - W_.project_A(psi);
      if (outside.norm() > 1e-13 * std::max(1.0, psi.norm())) {
        ensure_basis();
        CVec inside = Q_ * (Q_.adjoint() * psi);
        p0 += psi - inside;
      }
      psi += (phase - cplx(1, 0)) * p0;
      junk_ = 0;
      return;
    }
    // ancilla-0 branch of phase estimation: a = (1/L) Σ_k W^k ψ, b = (1/L) Σ_j W^{−j} a
    const std::uint64_t L = std::uint64_t{1} << bits_;
    CVec cur = psi, a = psi;
    for (std::uint64_t k = 1; k < L; ++k) {
      W_.apply(cur);
      a += cur;
    }
    a /= static_cast<double>(L);
    CVec b = a;
    for (std::uint64_t j = 1; j < L; ++j) {
      W_.apply_adjoint(b);
      b += a;
    }
    b /= static_cast<double>(L);
    const double n_in = psi.squaredNorm();
    psi += (phase - cplx(1, 0)) * b;
    // the circuit leaves ancilla garbage of norm √(‖ψ‖² − ‖sys‖²)
    junk_ = std::sqrt(std::max(0.0, n_in - psi.squaredNorm()));
  }

 private:
  void ensure_basis() const {
    if (Q_.size() == 0) Q_ = walk_space_basis(W_);
  }

  const WalkOperator& W_;
  ReflectionVariant variant_;
  int bits_;
  CVec pi_;
  mutable Eigen::MatrixXcd Q_;
  mutable double junk_ = 0;
};

/// Exact-phase amplitude amplification from a start state towards its marked component.
struct AmplificationPlan {
  double eps = 1;
  int iterations = 0;
  double phi = 0;
  cplx final_phase{1, 0};
};

/// Long's zero-failure schedule; phases verified on the 2-D model.
inline AmplificationPlan plan_exact_amplification(double eps) {
  AmplificationPlan p;
  p.eps = eps;
  if (!(eps > 0)) throw ParameterError("amplification: marked weight is zero");
  if (eps >= 1 - 1e-15) return p;
  const double beta = std::asin(std::sqrt(eps));
  const int J = static_cast<int>(std::floor((std::numbers::pi / 2 - beta) / (2 * beta)));
  p.iterations = J + 1;
  const double s = std::sin(std::numbers::pi / (4.0 * p.iterations + 2.0)) / std::sin(beta);
  p.phi = 2 * std::asin(std::min(1.0, s));
  // basis {marked, unmarked}; start = (sin β, cos β)
  cplx m = std::sin(beta), u = std::cos(beta);
  const cplx e = std::polar(1.0, p.phi);
  const double sb = std::sin(beta), cb = std::cos(beta);
  for (int k = 0; k < p.iterations; ++k) {
    m *= e;                                   // S_M(φ)
    cplx ov = sb * m + cb * u;                // ⟨start|·⟩
    m += (e - 1.0) * ov * sb;                 // S_start(φ)
    u += (e - 1.0) * ov * cb;
    m = -m, u = -u;
  }
  if (std::abs(u) > 1e-9) throw ConsistencyError("amplification: phase schedule did not converge");
  p.final_phase = m / std::abs(m);
  return p;
}

/// Maps |π⟩ to |π(M)⟩ with exact-phase amplitude amplification.
inline CVec map_pi_to_piM(const WalkOperator& W, const std::vector<char>& marked, const PiReflection& R,
                          CostLedger* ledger = nullptr) {
  CVec psi = R.pi();
  double eps = 0;
  auto pv = W.vertex_distribution(psi);
  for (Vertex x = 0; x < pv.size(); ++x)
    if (marked[x]) eps += pv[x];
  if (!(eps > 0)) throw ParameterError("map_pi_to_piM: marked set is empty");
  auto plan = plan_exact_amplification(eps);
  const cplx e = std::polar(1.0, plan.phi);
  for (int k = 0; k < plan.iterations; ++k) {
    W.phase_on_vertices(psi, marked, e);
    R.shift(psi, e);
    psi = -psi;
    if (ledger) {
      ledger->checks += 1;
      ledger->reflections += 1;
      ledger->walk_steps += R.walk_cost();
    }
  }
  psi *= std::conj(plan.final_phase);
  return psi;
}

inline std::vector<char> mark_vector(const MarkovChain& c, const VertexPredicate& marked) {
  std::vector<char> m(c.vertex_count());
  for (Vertex x = 0; x < m.size(); ++x) m[x] = marked(x) ? 1 : 0;
  return m;
}

inline CVec map_pi_to_piM(const MarkovChain& c, const VertexPredicate& marked, const DataOracle& data,
                          Mode mode = Mode::abstract) {
  WalkOperator W(c, data, mode);
  PiReflection R(W, ReflectionVariant::exact);
  return map_pi_to_piM(W, mark_vector(c, marked), R);
}

struct QuantumSearchOptions {
  ReflectionVariant variant = ReflectionVariant::exact;
  int precision_bits = 0;  // 0: default_precision_bits(eps, delta)
  int max_rounds = 3;
  /// Symbolic unit costs charged per primitive.
  double setup_cost = 1, update_cost = 1, check_cost = 1;
};

/// Quantized search on an already-built walk operator, starting from `start` (≈ |π⟩).
inline SearchResult quantum_search(const WalkOperator& W, const std::vector<char>& marked, const CVec& start,
                                   double eps, double delta, std::uint64_t seed,
                                   const QuantumSearchOptions& opt = {}) {
  if (!(eps > 0 && eps <= 1)) throw ParameterError("mnrs_search: eps must lie in (0, 1]");
  if (!(delta > 0 && delta <= 1)) throw ParameterError("mnrs_search: delta must lie in (0, 1]");
  SearchResult res;
  auto& L = res.ledger;
  L.symbols.eps = eps;
  L.symbols.delta = delta;
  L.symbols.S = opt.setup_cost;
  L.symbols.U = opt.update_cost;
  L.symbols.C = opt.check_cost;

  int bits = opt.precision_bits;
  const int need = default_precision_bits(eps, delta);
  if (opt.variant == ReflectionVariant::phase_estimation) {
    if (bits == 0) bits = need;
    if (bits < need)
      L.warn("reflect_about_pi: " + std::to_string(bits) + " precision bits below the required " +
             std::to_string(need));
  }
  PiReflection R(W, opt.variant, bits);
  const std::uint64_t steps_per_reflection =
      opt.variant == ReflectionVariant::exact ? static_cast<std::uint64_t>(std::ceil(1.0 / std::sqrt(delta)))
                                              : R.walk_cost();
  const double theta = std::asin(std::sqrt(eps));
  const int kmax = std::max(0, static_cast<int>(std::lround(std::numbers::pi / (4 * theta) - 0.5)));
  Rng rng(seed);
  for (int round = 0; round < opt.max_rounds; ++round) {
    const int k = round == 0 ? kmax : static_cast<int>(rng.below(static_cast<std::uint64_t>(kmax) + 1));
    CVec psi = start;
    L.charged += opt.setup_cost;
    for (int it = 0; it < k; ++it) {
      W.phase_on_vertices(psi, marked, cplx(-1, 0));
      R.reflect(psi);
      L.checks += 1;
      L.reflections += 1;
      L.walk_steps += steps_per_reflection;
      L.charged += opt.check_cost + static_cast<double>(steps_per_reflection) * opt.update_cost;
    }
    auto p = W.vertex_distribution(psi);
    Vertex x = static_cast<Vertex>(rng.weighted(p));
    L.checks += 1;  // classical verification of the outcome
    L.charged += opt.check_cost;
    if (marked[x]) {
      res.vertex = x;
      return res;
    }
  }
  return res;
}

/// Quantized search with data D.
inline SearchResult mnrs_search(const MarkovChain& c, const VertexPredicate& marked, const DataOracle& data,
                                double eps, std::uint64_t seed, const QuantumSearchOptions& opt = {},
                                Mode mode = Mode::abstract) {
  WalkOperator W(c, data, mode);
  return quantum_search(W, mark_vector(c, marked), W.pi(), eps, chain_gap(c), seed, opt);
}

inline SearchResult mnrs_search(const MarkovChain& c, const VertexPredicate& marked, double eps,
                                std::uint64_t seed, const QuantumSearchOptions& opt = {}) {
  EdgeSpace es(c);
  return mnrs_search(c, marked, DataOracle::trivial(es), eps, seed, opt, Mode::abstract);
}

}  // namespace qwalk
