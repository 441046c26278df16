#pragma once

#include "arboreal/graph.hpp"
#include "arboreal/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace arboreal {

// Nearest-neighbor discrete torus (Z/nZ)^d with unit weights. For n = 2 the
// two directions along an axis coincide, which by convention yields doubled
// (parallel) edges; collapsing them would change tau, so they are kept.
inline MultiGraph torus(int d, int n) {
  if (d < 1) throw std::invalid_argument("torus dimension must be positive");
  if (n < 2) throw std::invalid_argument("torus side must be at least 2");
  long vertices = 1;
  for (int i = 0; i < d; ++i) {
    vertices *= n;
    if (vertices > 20'000'000) throw std::invalid_argument("torus too large");
  }
  std::vector<Edge<double>> es;
  es.reserve(std::size_t(vertices) * d);
  std::vector<int> coord(d);
  for (long v = 0; v < vertices; ++v) {
    long t = v;
    for (int i = 0; i < d; ++i) {
      coord[i] = int(t % n);
      t /= n;
    }
    long stride = 1;
    for (int i = 0; i < d; ++i) {
      const long up = v + ((coord[i] + 1) % n - coord[i]) * stride;
      es.push_back({int(v), int(up), 1.0});
      stride *= n;
    }
  }
  return build_graph(es, int(vertices));
}

// Rectangular grid {0..n-1}^d with unit weights and free boundary.
inline MultiGraph box(int d, int n) {
  if (d < 1) throw std::invalid_argument("box dimension must be positive");
  if (n < 1) throw std::invalid_argument("box side must be positive");
  long vertices = 1;
  for (int i = 0; i < d; ++i) {
    vertices *= n;
    if (vertices > 20'000'000) throw std::invalid_argument("box too large");
  }
  std::vector<Edge<double>> es;
  std::vector<int> coord(d);
  for (long v = 0; v < vertices; ++v) {
    long t = v;
    for (int i = 0; i < d; ++i) {
      coord[i] = int(t % n);
      t /= n;
    }
    long stride = 1;
    for (int i = 0; i < d; ++i) {
      if (coord[i] + 1 < n) es.push_back({int(v), int(v + stride), 1.0});
      stride *= n;
    }
  }
  return build_graph(es, int(vertices));
}

// Uniform-ish simple d-regular graph on n vertices: configuration model with
// rejection until the pairing has no loops or parallel edges.
inline MultiGraph random_regular(int n, int d, std::uint64_t seed) {
  if (n < 1 || d < 1) throw std::invalid_argument("random_regular needs n >= 1 and d >= 1");
  if (d >= n) throw std::invalid_argument("simple d-regular graphs need d < n");
  if ((long(n) * d) % 2 != 0) throw std::invalid_argument("n * d must be even");
  std::mt19937_64 rng(seed);
  std::vector<int> stubs(std::size_t(n) * d);
  for (int v = 0; v < n; ++v)
    for (int i = 0; i < d; ++i) stubs[std::size_t(v) * d + i] = v;

  std::vector<char> seen(std::size_t(n) * n);
  const bool track = long(n) * n <= 100'000'000;
  for (int attempt = 0; attempt < 2000; ++attempt) {
    for (std::size_t i = stubs.size(); i > 1; --i)
      std::swap(stubs[i - 1], stubs[rng_below(rng, i)]);
    bool simple = true;
    std::vector<Edge<double>> es;
    es.reserve(stubs.size() / 2);
    std::vector<std::pair<int, int>> used;
    for (std::size_t i = 0; i + 1 < stubs.size() && simple; i += 2) {
      int u = stubs[i], v = stubs[i + 1];
      if (u == v) {
        simple = false;
        break;
      }
      if (u > v) std::swap(u, v);
      if (track) {
        char& flag = seen[std::size_t(u) * n + v];
        if (flag) {
          simple = false;
        } else {
          flag = 1;
          used.push_back({u, v});
        }
      }
      es.push_back({u, v, 1.0});
    }
    if (track)
      for (auto [u, v] : used) seen[std::size_t(u) * n + v] = 0;
    if (simple) return build_graph(es, n);
  }
  throw std::runtime_error("configuration model kept producing loops or parallel edges");
}

// Largest component of the Erdos-Renyi graph G(n, c/n), sampled by geometric
// skipping over the vertex pairs. Vertices are relabeled contiguously.
inline MultiGraph er_giant(int n, double c, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("er_giant needs at least one vertex");
  if (!(c >= 0)) throw std::invalid_argument("mean degree must be non-negative");
  const double p = std::min(1.0, c / n);
  std::vector<Edge<double>> es;
  std::mt19937_64 rng(seed);
  const long total = long(n) * (n - 1) / 2;
  if (p >= 1.0) {
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v) es.push_back({u, v, 1.0});
  } else if (p > 0.0) {
    const double denom = std::log1p(-p);
    double k = -1.0;
    for (;;) {
      k += 1.0 + std::floor(std::log(1.0 - rng_unit(rng)) / denom);
      if (k >= double(total)) break;
      const long idx = long(k);
      // invert the triangular enumeration (0,1),(0,2),...,(1,2),...
      int u = int((2.0 * n - 1.0 - std::sqrt((2.0 * n - 1.0) * (2.0 * n - 1.0) - 8.0 * double(idx))) / 2.0);
      u = std::max(0, u - 2);
      while (long(u + 1) * (2 * n - u - 2) / 2 <= idx) ++u;
      const long offset = long(u) * (2 * n - u - 1) / 2;
      const int v = int(idx - offset) + u + 1;
      es.push_back({u, v, 1.0});
    }
  }
  MultiGraph g = build_graph(es, n);

  auto comp = connected_components(g);
  std::vector<int> size(*std::max_element(comp.begin(), comp.end()) + 1, 0);
  for (int label : comp) ++size[label];
  const int best = int(std::max_element(size.begin(), size.end()) - size.begin());
  std::vector<int> relabel(n, -1);
  int next = 0;
  for (int v = 0; v < n; ++v)
    if (comp[v] == best) relabel[v] = next++;
  std::vector<Edge<double>> kept;
  for (const auto& e : g.edges)
    if (comp[e.u] == best) kept.push_back({relabel[e.u], relabel[e.v], e.w});
  return build_graph(kept, next);
}

// Ball of radius m around a vertex of the 3-regular tree: the root keeps all
// three branches, every interior vertex two children. 3 * 2^m - 2 vertices,
// and tau = 1 like any tree.
inline MultiGraph tree_ball_sequence(int m) {
  if (m < 0) throw std::invalid_argument("ball radius must be non-negative");
  if (m > 24) throw std::invalid_argument("ball too large");
  std::vector<Edge<double>> es;
  int next = 1;
  std::vector<int> frontier{0};
  for (int depth = 0; depth < m; ++depth) {
    std::vector<int> grown;
    for (int v : frontier) {
      const int kids = depth == 0 ? 3 : 2;
      for (int i = 0; i < kids; ++i) {
        es.push_back({v, next, 1.0});
        grown.push_back(next++);
      }
    }
    frontier.swap(grown);
  }
  return build_graph(es, next);
}

// Disjoint copies of g1 and g2 connected by k seeded-random bridge edges.
// With k = 1 the bridge lies in every spanning tree, so tau factorizes.
inline MultiGraph hybrid_join(const MultiGraph& g1, const MultiGraph& g2, int k, std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("joining needs at least one bridge edge");
  if (g1.vertex_count < 1 || g2.vertex_count < 1) throw std::invalid_argument("empty side");
  std::mt19937_64 rng(seed);
  std::vector<Edge<double>> es = g1.edges;
  const int shift = g1.vertex_count;
  for (const auto& e : g2.edges) es.push_back({e.u + shift, e.v + shift, e.w});
  for (int i = 0; i < k; ++i) {
    const int u = int(rng_below(rng, std::uint64_t(g1.vertex_count)));
    const int v = shift + int(rng_below(rng, std::uint64_t(g2.vertex_count)));
    es.push_back({u, v, 1.0});
  }
  return build_graph(es, g1.vertex_count + g2.vertex_count);
}

// Removes a seeded random set of at most fraction * |V| edges while keeping
// the graph connected (candidates that would disconnect it are skipped).
// Spanning trees of the result are a subset of the original's.
inline MultiGraph thin_subgraph(const MultiGraph& g, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0) || fraction > 1.0) throw std::invalid_argument("fraction must lie in [0, 1]");
  if (!is_connected(g)) throw std::invalid_argument("thinning expects a connected graph");
  long budget = long(fraction * g.vertex_count);
  if (budget == 0) return g;

  std::mt19937_64 rng(seed);
  std::vector<int> order(g.edges.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[rng_below(rng, i)]);

  std::vector<char> removed(g.edges.size(), 0);
  auto still_connected = [&]() {
    std::vector<Edge<double>> kept;
    for (std::size_t i = 0; i < g.edges.size(); ++i)
      if (!removed[i]) kept.push_back(g.edges[i]);
    return is_connected(build_graph(kept, g.vertex_count));
  };
  for (int idx : order) {
    if (budget == 0) break;
    if (g.edges[idx].u == g.edges[idx].v) continue;
    removed[idx] = 1;
    if (still_connected()) {
      --budget;
    } else {
      removed[idx] = 0;
    }
  }
  std::vector<Edge<double>> kept;
  for (std::size_t i = 0; i < g.edges.size(); ++i)
    if (!removed[i]) kept.push_back(g.edges[i]);
  return build_graph(kept, g.vertex_count);
}

}  // namespace arboreal
