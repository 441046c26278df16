#pragma once

#include "arboreal/graph.hpp"
#include "arboreal/rng.hpp"

#include <random>
#include <vector>

namespace testutil {

inline arboreal::RationalGraph cycle_graph(int n) {
  std::vector<arboreal::Edge<arboreal::Rational>> edges;
  for (int i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, arboreal::Rational(1)});
  return arboreal::build_graph(std::move(edges));
}

inline arboreal::RationalGraph path_graph(int n) {
  std::vector<arboreal::Edge<arboreal::Rational>> edges;
  for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, arboreal::Rational(1)});
  return arboreal::build_graph(std::move(edges), n);
}

inline arboreal::RationalGraph complete_graph(int n) {
  std::vector<arboreal::Edge<arboreal::Rational>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.push_back({i, j, arboreal::Rational(1)});
  return arboreal::build_graph(std::move(edges), n);
}

// Random spanning tree plus extra edges; may include loops and parallel edges.
inline arboreal::RationalGraph random_connected_multigraph(std::mt19937_64& rng, int max_vertices, int max_extra_edges,
                                                           bool rational_weights = false, bool allow_loops = true) {
  using arboreal::rng_below;
  int n = 2 + static_cast<int>(rng_below(rng, static_cast<std::uint64_t>(max_vertices - 1)));
  auto weight = [&]() {
    if (!rational_weights) return arboreal::Rational(1);
    auto num = 1 + rng_below(rng, 6);
    auto den = 1 + rng_below(rng, 6);
    return arboreal::Rational(num, den);
  };
  std::vector<arboreal::Edge<arboreal::Rational>> edges;
  for (int v = 1; v < n; ++v) edges.push_back({static_cast<int>(rng_below(rng, v)), v, weight()});
  auto extra = rng_below(rng, max_extra_edges + 1);
  for (std::uint64_t t = 0; t < extra; ++t) {
    int u = static_cast<int>(rng_below(rng, n));
    int v = static_cast<int>(rng_below(rng, n));
    if (!allow_loops && u == v) continue;
    edges.push_back({u, v, weight()});
  }
  return arboreal::build_graph(std::move(edges), n);
}

}  // namespace testutil
