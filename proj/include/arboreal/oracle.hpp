#pragma once

#include "arboreal/graph.hpp"
#include "arboreal/series.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace arboreal {

// Proven upper bound on the return probabilities q_k of the alpha = 1/2 lazy
// walk of a model. "none" disables certified tails; value estimates then fall
// back on the universal degree bound.
struct DecayCertificate {
  enum class Kind { none, geometric, power };
  Kind kind = Kind::none;
  double C = 0.0;
  double rho = 0.0;   // geometric: q_k <= C rho^k
  double beta = 0.0;  // power: q_k <= C k^-beta for k >= 1

  // Upper bound on sum_{k>K} q_k / k.
  double tail(long K) const {
    const double inf = std::numeric_limits<double>::infinity();
    if (kind == Kind::none || K < 1 || C < 0) return inf;
    if (C == 0.0) return 0.0;
    switch (kind) {
      case Kind::geometric:
        if (!(rho >= 0) || !(rho < 1)) return inf;
        return C * std::pow(rho, double(K + 1)) / (double(K + 1) * (1.0 - rho));
      case Kind::power:
        if (!(beta > 0)) return inf;
        return C * std::pow(double(K), -beta) / beta;
      case Kind::none:
        return inf;
    }
    return inf;
  }
};

struct Transition {
  std::uint64_t to;
  double prob;
};

// Local view of a rooted model: just enough to run the simple random walk
// near the root. States are opaque ids; chains lumped by symmetry are fine as
// long as the lumped transition probabilities are exact. transitions() must
// emit probabilities summing to one (duplicate targets are accumulated).
class LocalGraphOracle {
 public:
  virtual ~LocalGraphOracle() = default;
  virtual std::uint64_t root() const = 0;
  virtual double degree(std::uint64_t state) const = 0;
  virtual void transitions(std::uint64_t state, std::vector<Transition>& out) const = 0;
  virtual std::string name() const = 0;
  virtual DecayCertificate certificate() const { return {}; }
};

// Simple random walk on the d-regular tree, lumped to the distance from the
// root. The walk operator is self-adjoint in l2 of the uniform degree weight,
// so q_k <= rho^k with rho = (1 + 2 sqrt(d-1)/d)/2, the lazy spectral radius.
// d = 2 is the integer line, where that bound degenerates to rho = 1 and the
// exact lazy return probability binom(2k,k) 4^-k <= 1/sqrt(pi k) takes over.
class RegularTreeOracle final : public LocalGraphOracle {
 public:
  explicit RegularTreeOracle(int d) : d_(d) {
    if (d < 2) throw std::invalid_argument("regular tree needs degree >= 2");
  }
  std::uint64_t root() const override { return 0; }
  double degree(std::uint64_t) const override { return double(d_); }
  void transitions(std::uint64_t s, std::vector<Transition>& out) const override {
    out.clear();
    if (s == 0) {
      out.push_back({1, 1.0});
    } else {
      out.push_back({s - 1, 1.0 / d_});
      out.push_back({s + 1, double(d_ - 1) / d_});
    }
  }
  std::string name() const override { return "regular_tree(" + std::to_string(d_) + ")"; }
  DecayCertificate certificate() const override {
    if (d_ == 2) return {DecayCertificate::Kind::power, 1.0 / std::sqrt(std::numbers::pi), 0.0, 0.5};
    double rho = 0.5 * (1.0 + 2.0 * std::sqrt(double(d_ - 1)) / d_);
    return {DecayCertificate::Kind::geometric, 1.0, rho, 0.0};
  }

 private:
  int d_;
};

// Simple random walk on the hypercubic lattice Z^d, coordinates packed into
// 16-bit biased fields. The lazy return probability obeys the d = 1 bound
// 1/sqrt(pi k): (1+cos t)/2 averages to cos^2(t/2) per coordinate and Jensen
// pushes the k-th power inside the coordinate average.
class ZdOracle final : public LocalGraphOracle {
 public:
  explicit ZdOracle(int d) : d_(d) {
    if (d < 1 || d > 4) throw std::invalid_argument("ZdOracle supports 1 <= d <= 4");
  }
  std::uint64_t root() const override { return pack(std::vector<int>(d_, 0)); }
  double degree(std::uint64_t) const override { return 2.0 * d_; }
  void transitions(std::uint64_t s, std::vector<Transition>& out) const override {
    out.clear();
    auto x = unpack(s);
    for (int i = 0; i < d_; ++i)
      for (int step : {-1, 1}) {
        auto y = x;
        y[i] += step;
        out.push_back({pack(y), 1.0 / (2.0 * d_)});
      }
  }
  std::string name() const override { return "Z^" + std::to_string(d_); }
  DecayCertificate certificate() const override {
    return {DecayCertificate::Kind::power, 1.0 / std::sqrt(std::numbers::pi), 0.0, 0.5};
  }

 private:
  static constexpr int kBias = 1 << 15;
  std::uint64_t pack(const std::vector<int>& x) const {
    std::uint64_t s = 0;
    for (int i = 0; i < d_; ++i) {
      if (x[i] <= -kBias || x[i] >= kBias) throw std::out_of_range("ZdOracle coordinate overflow");
      s |= std::uint64_t(x[i] + kBias) << (16 * i);
    }
    return s;
  }
  std::vector<int> unpack(std::uint64_t s) const {
    std::vector<int> x(d_);
    for (int i = 0; i < d_; ++i) x[i] = int((s >> (16 * i)) & 0xffff) - kBias;
    return x;
  }
  int d_;
};

// Canopy tree rooted at the ray vertex x_m. The tree is a one-sided ray
// x_0, x_1, ... with a full binary bush of depth a hanging below each x_a;
// x_0 and the bush leaves have degree one, every other vertex degree three.
// States lump to (ray index a, depth s below the ray), 0 <= s <= a, since all
// bush vertices of a given depth are exchangeable. All vertices at distance
// < m from x_m have degree three, so p_k(x_m) matches the 3-regular tree for
// k <= 2m-1; at k = 2m the degree-one shell (x_0 and the near bush leaves)
// first shows. The walk is recurrent: no decay certificate.
class CanopyOracle final : public LocalGraphOracle {
 public:
  explicit CanopyOracle(int m) : m_(m) {
    if (m < 0) throw std::invalid_argument("canopy root index must be non-negative");
  }
  std::uint64_t root() const override { return pack(m_, 0); }
  double degree(std::uint64_t state) const override {
    auto [a, s] = unpack(state);
    if ((a == 0 && s == 0) || s == a) return 1.0;
    return 3.0;
  }
  void transitions(std::uint64_t state, std::vector<Transition>& out) const override {
    out.clear();
    auto [a, s] = unpack(state);
    if (s == 0) {
      if (a == 0) {
        out.push_back({pack(1, 0), 1.0});
      } else {
        out.push_back({pack(a - 1, 0), 1.0 / 3.0});
        out.push_back({pack(a + 1, 0), 1.0 / 3.0});
        out.push_back({pack(a, 1), 1.0 / 3.0});
      }
    } else if (s == a) {
      out.push_back({pack(a, s - 1), 1.0});
    } else {
      out.push_back({pack(a, s - 1), 1.0 / 3.0});
      out.push_back({pack(a, s + 1), 2.0 / 3.0});
    }
  }
  std::string name() const override { return "canopy(" + std::to_string(m_) + ")"; }

 private:
  static std::uint64_t pack(std::uint64_t a, std::uint64_t s) { return (a << 32) | s; }
  static std::pair<std::uint64_t, std::uint64_t> unpack(std::uint64_t state) {
    return {state >> 32, state & 0xffffffffu};
  }
  int m_;
};

// d-regular tree truncated at depth n with an infinite ray glued to every
// depth-n vertex. Rooted at the centre and lumped by distance. The rooted
// models converge locally to the d-regular tree as n grows (balls around the
// root agree up to radius n) while every member stays recurrent, so none of
// them carries a decay certificate.
class DepthTruncatedTreeOracle final : public LocalGraphOracle {
 public:
  DepthTruncatedTreeOracle(int d, int n) : d_(d), n_(n) {
    if (d < 2) throw std::invalid_argument("tree degree must be at least 2");
    if (n < 1) throw std::invalid_argument("truncation depth must be at least 1");
  }
  std::uint64_t root() const override { return 0; }
  double degree(std::uint64_t state) const override {
    if (state == 0) return d_;
    return state < std::uint64_t(n_) ? double(d_) : 2.0;
  }
  void transitions(std::uint64_t state, std::vector<Transition>& out) const override {
    out.clear();
    if (state == 0) {
      out.push_back({1, 1.0});
    } else if (state < std::uint64_t(n_)) {
      out.push_back({state - 1, 1.0 / d_});
      out.push_back({state + 1, double(d_ - 1) / d_});
    } else {
      out.push_back({state - 1, 0.5});
      out.push_back({state + 1, 0.5});
    }
  }
  std::string name() const override {
    return "truncated_tree(" + std::to_string(d_) + "," + std::to_string(n_) + ")";
  }

 private:
  int d_;
  int n_;
};

// Weighted simple random walk on a finite multigraph, rooted anywhere. Used
// to cross-check locality against whole-graph powering and to wrap explicit
// constructions of truncated infinite models.
class FiniteGraphOracle final : public LocalGraphOracle {
 public:
  FiniteGraphOracle(MultiGraph g, int root) : g_(std::move(g)), root_(root) {
    if (root < 0 || root >= g_.vertex_count) throw std::invalid_argument("root out of range");
    deg_ = degrees(g_);
    adj_.resize(g_.vertex_count);
    for (const auto& e : g_.edges) {
      adj_[e.u][e.v] += e.w;
      if (e.u != e.v) adj_[e.v][e.u] += e.w;
    }
    for (int x = 0; x < g_.vertex_count; ++x)
      if (!(deg_[x] > 0)) throw std::invalid_argument("vertex of degree zero has no walk transition");
  }
  std::uint64_t root() const override { return std::uint64_t(root_); }
  double degree(std::uint64_t state) const override { return deg_[state]; }
  void transitions(std::uint64_t state, std::vector<Transition>& out) const override {
    out.clear();
    for (const auto& [to, w] : adj_[state]) out.push_back({std::uint64_t(to), w / deg_[state]});
  }
  std::string name() const override { return "finite[" + std::to_string(g_.vertex_count) + "]"; }

 private:
  MultiGraph g_;
  int root_;
  std::vector<double> deg_;
  std::vector<std::map<int, double>> adj_;
};

// Doubles every degree by attaching a self-loop of weight deg(x) at each x.
// The walk of the doubled model is exactly the alpha = 1/2 lazy walk of the
// inner one, which makes lazification testable against a direct chain. The
// inner certificate covers the inner lazy walk, not the doubly lazy one, so
// no certificate is forwarded.
class LoopDoubledOracle final : public LocalGraphOracle {
 public:
  explicit LoopDoubledOracle(std::shared_ptr<const LocalGraphOracle> inner) : inner_(std::move(inner)) {
    if (!inner_) throw std::invalid_argument("null inner oracle");
  }
  std::uint64_t root() const override { return inner_->root(); }
  double degree(std::uint64_t state) const override { return 2.0 * inner_->degree(state); }
  void transitions(std::uint64_t state, std::vector<Transition>& out) const override {
    inner_->transitions(state, out);
    for (auto& t : out) t.prob *= 0.5;
    out.push_back({state, 0.5});
  }
  std::string name() const override { return "loop_doubled(" + inner_->name() + ")"; }

 private:
  std::shared_ptr<const LocalGraphOracle> inner_;
};

// Exact return probabilities p_k(root) for k <= K of the plain walk, from the
// ball of radius floor(K/2): a k-step excursion that returns cannot leave it,
// so transitions out of the boundary shell are dropped without error. States
// are discovered breadth-first; every state of a given distance is indexed
// before any of them is expanded, so a dropped target is provably outside.
inline ReturnSeries return_probabilities_local(const LocalGraphOracle& oracle, int K) {
  if (K < 0) throw std::invalid_argument("K must be non-negative");
  const int R = K / 2;

  std::unordered_map<std::uint64_t, int> index;
  std::vector<std::uint64_t> states{oracle.root()};
  std::vector<int> dist{0};
  index.emplace(states[0], 0);

  std::vector<int> row_ptr{0};
  std::vector<int> cols;
  std::vector<double> probs;
  std::vector<Transition> buf;
  for (std::size_t u = 0; u < states.size(); ++u) {
    oracle.transitions(states[u], buf);
    double mass = 0.0;
    for (const auto& t : buf) {
      if (!(t.prob > 0)) throw std::logic_error("oracle emitted a non-positive transition");
      mass += t.prob;
      auto it = index.find(t.to);
      if (it == index.end()) {
        if (dist[u] >= R) continue;
        it = index.emplace(t.to, int(states.size())).first;
        states.push_back(t.to);
        dist.push_back(dist[u] + 1);
      }
      cols.push_back(it->second);
      probs.push_back(t.prob);
    }
    if (std::abs(mass - 1.0) > 1e-12) throw std::logic_error("oracle transitions do not sum to one");
    row_ptr.push_back(int(cols.size()));
  }

  const int n = int(states.size());
  std::vector<double> psi(n, 0.0), next(n);
  psi[0] = 1.0;
  ReturnSeries out;
  out.alpha = 0.0;
  out.finite_mode = false;
  out.n_states = n;
  out.per_k.resize(K + 1);
  out.per_k[0] = 1.0;
  KahanSum acc;
  for (int k = 1; k <= K; ++k) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int u = 0; u < n; ++u) {
      if (psi[u] == 0.0) continue;
      for (int e = row_ptr[u]; e < row_ptr[u + 1]; ++e) next[cols[e]] += psi[u] * probs[e];
    }
    psi.swap(next);
    out.per_k[k] = psi[0];
    acc.add(psi[0] / k);
  }
  out.partial_sum = acc.value();
  return out;
}

}  // namespace arboreal
