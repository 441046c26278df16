#pragma once

#include "arboreal/rational.hpp"

#include <Eigen/Core>
#include <boost/multiprecision/eigen.hpp>

#include <algorithm>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace arboreal {

template <typename W>
struct Edge {
  int u;
  int v;
  W w;
};

// Finite undirected multigraph: parallel edges kept, loops allowed.
// A loop of weight w contributes w (once) to the degree of its vertex.
template <typename W>
struct MultiGraphT {
  int vertex_count = 0;
  std::vector<Edge<W>> edges;
};

using MultiGraph = MultiGraphT<double>;
using RationalGraph = MultiGraphT<Rational>;

template <typename W>
using DenseMatrix = Eigen::Matrix<W, Eigen::Dynamic, Eigen::Dynamic>;

template <typename W>
MultiGraphT<W> build_graph(std::vector<Edge<W>> edge_list, int vertex_count = -1) {
  int max_id = -1;
  for (const auto& e : edge_list) {
    if (e.u < 0 || e.v < 0) throw std::invalid_argument("negative vertex id");
    if (!(e.w > 0)) throw std::invalid_argument("edge weight must be positive");
    max_id = std::max(max_id, std::max(e.u, e.v));
  }
  MultiGraphT<W> g;
  g.vertex_count = vertex_count >= 0 ? vertex_count : max_id + 1;
  if (max_id >= g.vertex_count) throw std::invalid_argument("vertex id exceeds vertex_count");
  g.edges = std::move(edge_list);
  return g;
}

template <typename W>
std::vector<W> degrees(const MultiGraphT<W>& g) {
  std::vector<W> deg(g.vertex_count, W(0));
  for (const auto& e : g.edges) {
    if (e.u == e.v) {
      deg[e.u] += e.w;
    } else {
      deg[e.u] += e.w;
      deg[e.v] += e.w;
    }
  }
  return deg;
}

template <typename W>
W total_degree(const MultiGraphT<W>& g) {
  W s(0);
  for (const auto& e : g.edges) s += (e.u == e.v) ? e.w : W(2) * e.w;
  return s;
}

// Loops never appear in the Laplacian.
template <typename W>
DenseMatrix<W> laplacian(const MultiGraphT<W>& g) {
  DenseMatrix<W> L = DenseMatrix<W>::Zero(g.vertex_count, g.vertex_count);
  for (const auto& e : g.edges) {
    if (e.u == e.v) continue;
    L(e.u, e.u) += e.w;
    L(e.v, e.v) += e.w;
    L(e.u, e.v) -= e.w;
    L(e.v, e.u) -= e.w;
  }
  return L;
}

template <typename W>
std::vector<std::vector<int>> adjacency_lists(const MultiGraphT<W>& g) {
  std::vector<std::vector<int>> adj(g.vertex_count);
  for (const auto& e : g.edges) {
    if (e.u == e.v) continue;
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  return adj;
}

template <typename W>
std::vector<int> connected_components(const MultiGraphT<W>& g) {
  auto adj = adjacency_lists(g);
  std::vector<int> comp(g.vertex_count, -1);
  int next = 0;
  for (int s = 0; s < g.vertex_count; ++s) {
    if (comp[s] >= 0) continue;
    comp[s] = next;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
      int x = q.front();
      q.pop();
      for (int y : adj[x])
        if (comp[y] < 0) {
          comp[y] = next;
          q.push(y);
        }
    }
    ++next;
  }
  return comp;
}

template <typename W>
int component_count(const MultiGraphT<W>& g) {
  if (g.vertex_count == 0) return 0;
  auto comp = connected_components(g);
  return 1 + *std::max_element(comp.begin(), comp.end());
}

template <typename W>
bool is_connected(const MultiGraphT<W>& g) {
  return component_count(g) <= 1;
}

// Random-walk operator: P(x,y) = w(x,y)/deg(x), Q = alpha*I + (1-alpha)*P,
// reversing measure pi(x) = deg(x)/total, decay constants a = min_x Q(x,x)
// and c = min over positive entries of pi(x)Q(x,y).
template <typename W>
struct WalkOperator {
  const MultiGraphT<W>* source = nullptr;
  W alpha{};
  DenseMatrix<W> Q;
  std::vector<W> pi;
  W a{};
  W c{};
};

template <typename W>
WalkOperator<W> make_walk_operator(const MultiGraphT<W>& g, W alpha) {
  if (!(alpha >= 0) || !(alpha < 1)) throw std::invalid_argument("laziness alpha must be in [0,1)");
  const int n = g.vertex_count;
  auto deg = degrees(g);
  for (int x = 0; x < n; ++x)
    if (!(deg[x] > 0)) throw std::invalid_argument("vertex of degree zero has no walk transition");
  WalkOperator<W> op;
  op.source = &g;
  op.alpha = alpha;
  op.Q = DenseMatrix<W>::Zero(n, n);
  for (const auto& e : g.edges) {
    if (e.u == e.v) {
      op.Q(e.u, e.u) += (W(1) - alpha) * e.w / deg[e.u];
    } else {
      op.Q(e.u, e.v) += (W(1) - alpha) * e.w / deg[e.u];
      op.Q(e.v, e.u) += (W(1) - alpha) * e.w / deg[e.v];
    }
  }
  for (int x = 0; x < n; ++x) op.Q(x, x) += alpha;
  W total = total_degree(g);
  op.pi.resize(n);
  for (int x = 0; x < n; ++x) op.pi[x] = deg[x] / total;
  bool first = true;
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      if (!(op.Q(x, y) > 0)) continue;
      W f = op.pi[x] * op.Q(x, y);
      if (first || f < op.c) op.c = f;
      first = false;
    }
  }
  op.a = op.Q(0, 0);
  for (int x = 1; x < n; ++x) op.a = std::min(op.a, op.Q(x, x));
  return op;
}

// Largest relative reversibility defect max |pi_x Q(x,y) - pi_y Q(y,x)| / max entry;
// exactly zero in rational mode.
template <typename W>
W reversibility_defect(const WalkOperator<W>& op) {
  const int n = static_cast<int>(op.Q.rows());
  W worst(0), scale(0);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) {
      W f = op.pi[x] * op.Q(x, y);
      W b = op.pi[y] * op.Q(y, x);
      W d = f > b ? f - b : b - f;
      worst = std::max(worst, d);
      scale = std::max(scale, f);
    }
  return scale > 0 ? worst / scale : worst;
}

inline MultiGraph to_double(const RationalGraph& g) {
  MultiGraph out;
  out.vertex_count = g.vertex_count;
  out.edges.reserve(g.edges.size());
  for (const auto& e : g.edges) out.edges.push_back({e.u, e.v, e.w.convert_to<double>()});
  return out;
}

inline RationalGraph to_rational(const MultiGraph& g) {
  RationalGraph out;
  out.vertex_count = g.vertex_count;
  out.edges.reserve(g.edges.size());
  for (const auto& e : g.edges) out.edges.push_back({e.u, e.v, Rational(e.w)});
  return out;
}

template <typename W>
MultiGraphT<W> with_unit_weights(const MultiGraphT<W>& g) {
  MultiGraphT<W> out;
  out.vertex_count = g.vertex_count;
  out.edges.reserve(g.edges.size());
  for (const auto& e : g.edges) out.edges.push_back({e.u, e.v, W(1)});
  return out;
}

// Text format: one edge per line as "u v [weight]"; '#' starts a comment;
// blank lines ignored; weights are decimals or p/q rationals (default 1).
inline RationalGraph read_edge_list(std::istream& in) {
  std::vector<Edge<Rational>> edges;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tu, tv, tw;
    if (!(ls >> tu)) continue;
    if (!(ls >> tv)) throw std::invalid_argument("line " + std::to_string(line_no) + ": expected 'u v [weight]'");
    Rational w(1);
    if (ls >> tw) w = parse_rational(tw);
    std::string extra;
    if (ls >> extra) throw std::invalid_argument("line " + std::to_string(line_no) + ": trailing tokens");
    int u = std::stoi(tu);
    int v = std::stoi(tv);
    edges.push_back({u, v, w});
  }
  return build_graph(std::move(edges));
}

inline void write_edge_list(std::ostream& out, const RationalGraph& g) {
  for (const auto& e : g.edges) {
    out << e.u << ' ' << e.v;
    if (e.w != 1) out << ' ' << rational_to_string(e.w);
    out << '\n';
  }
}

inline void write_edge_list(std::ostream& out, const MultiGraph& g) { write_edge_list(out, to_rational(g)); }

}  // namespace arboreal
