#pragma once

#include "arboreal/graph.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace arboreal {

// Exact spanning-tree count: integer for unit weights, rational otherwise.
struct TreeCount {
  Rational value;
  bool is_integer() const { return boost::multiprecision::denominator(value) == 1; }
  std::string str() const { return rational_to_string(value); }
  double log() const { return log_rational(value); }
};

// Fraction-free Bareiss elimination with row pivoting; exact over big integers.
inline BigInt bareiss_determinant(DenseMatrix<BigInt> m) {
  const int n = static_cast<int>(m.rows());
  if (n == 0) return 1;
  int sign = 1;
  BigInt prev = 1;
  for (int k = 0; k + 1 < n; ++k) {
    if (m(k, k) == 0) {
      int pivot = -1;
      for (int r = k + 1; r < n; ++r)
        if (m(r, k) != 0) {
          pivot = r;
          break;
        }
      if (pivot < 0) return 0;
      m.row(k).swap(m.row(pivot));
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i) {
      for (int j = k + 1; j < n; ++j) m(i, j) = (m(i, j) * m(k, k) - m(i, k) * m(k, j)) / prev;
      m(i, k) = 0;
    }
    prev = m(k, k);
  }
  return sign < 0 ? BigInt(-m(n - 1, n - 1)) : m(n - 1, n - 1);
}

// Exact determinant of a rational matrix: clear denominators row by row, then Bareiss.
inline Rational rational_determinant(const DenseMatrix<Rational>& m) {
  const int n = static_cast<int>(m.rows());
  if (n == 0) return 1;
  DenseMatrix<BigInt> mi(n, n);
  BigInt scale = 1;
  for (int i = 0; i < n; ++i) {
    BigInt row_lcm = 1;
    for (int j = 0; j < n; ++j) row_lcm = boost::multiprecision::lcm(row_lcm, boost::multiprecision::denominator(m(i, j)));
    for (int j = 0; j < n; ++j) {
      Rational scaled = m(i, j) * Rational(row_lcm);
      mi(i, j) = boost::multiprecision::numerator(scaled);
    }
    scale *= row_lcm;
  }
  return Rational(bareiss_determinant(std::move(mi)), scale);
}

namespace detail {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int x, int y) {
    x = find(x);
    y = find(y);
    if (x == y) return false;
    parent[x] = y;
    return true;
  }
};

}  // namespace detail

// Matrix-Tree count through the cofactor deleting the last row and column.
template <typename W>
TreeCount count_spanning_trees(const MultiGraphT<W>& g);

inline TreeCount count_spanning_trees(const RationalGraph& g) {
  if (g.vertex_count < 1) throw std::invalid_argument("graph needs at least one vertex");
  if (g.vertex_count == 1) return {Rational(1)};
  if (!is_connected(g)) return {Rational(0)};
  const int n = g.vertex_count;
  DenseMatrix<Rational> L = laplacian(g);
  DenseMatrix<Rational> minor = L.topLeftCorner(n - 1, n - 1);
  Rational det = rational_determinant(minor);
  if (det < 0) throw std::logic_error("negative spanning-tree count");
  return {det};
}

template <typename W>
TreeCount count_spanning_trees(const MultiGraphT<W>& g) {
  return count_spanning_trees(to_rational(g));
}

// Independent oracle: enumerate all (n-1)-edge subsets.
inline TreeCount count_spanning_trees_bruteforce(const RationalGraph& g) {
  if (g.vertex_count < 1) throw std::invalid_argument("graph needs at least one vertex");
  if (g.edges.size() > 24) throw std::invalid_argument("brute-force edge budget (24) exceeded");
  const int n = g.vertex_count;
  if (n == 1) return {Rational(1)};

  std::vector<const Edge<Rational>*> pool;
  bool all_unit = true;
  for (const auto& e : g.edges) {
    if (e.u == e.v) continue;
    pool.push_back(&e);
    if (e.w != 1) all_unit = false;
  }
  const int m = static_cast<int>(pool.size());
  const int k = n - 1;
  if (m < k) return {Rational(0)};

  std::uint64_t tree_count = 0;
  Rational weighted_sum(0);
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    detail::UnionFind uf(n);
    bool acyclic = true;
    for (int j = 0; j < k && acyclic; ++j) acyclic = uf.unite(pool[idx[j]]->u, pool[idx[j]]->v);
    if (acyclic) {
      if (all_unit) {
        ++tree_count;
      } else {
        Rational prod(1);
        for (int j = 0; j < k; ++j) prod *= pool[idx[j]]->w;
        weighted_sum += prod;
      }
    }
    int pos = k - 1;
    while (pos >= 0 && idx[pos] == m - k + pos) --pos;
    if (pos < 0) break;
    ++idx[pos];
    for (int j = pos + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  if (all_unit) return {Rational(tree_count)};
  return {weighted_sum};
}

inline TreeCount count_spanning_trees_bruteforce(const MultiGraph& g) {
  return count_spanning_trees_bruteforce(to_rational(g));
}

// Sum of log of the nonzero Laplacian eigenvalues (= log tau + log n), with the
// zero eigenvalue removed exactly by restricting to the complement of the
// constant vector rather than by thresholding.
inline double log_det_prime_laplacian(const MultiGraph& g) {
  if (g.vertex_count < 1) throw std::invalid_argument("graph needs at least one vertex");
  if (!is_connected(g)) throw std::invalid_argument("log_det_prime_laplacian requires a connected graph");
  const int n = g.vertex_count;
  if (n == 1) return 0.0;
  Eigen::MatrixXd L = laplacian(g);
  Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(double(n)));
  v(n - 1) -= 1.0;
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n) - (2.0 / v.squaredNorm()) * (v * v.transpose());
  Eigen::MatrixXd M = H * L * H;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M.topLeftCorner(n - 1, n - 1));
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  double acc = 0.0;
  for (int i = 0; i < n - 1; ++i) {
    double lam = es.eigenvalues()(i);
    if (!(lam > 0)) throw std::runtime_error("non-positive Laplacian eigenvalue after deflation");
    acc += std::log(lam);
  }
  return acc;
}

// Cholesky-type log of tau itself; backbone for large float pipelines.
inline double log_tau_float(const MultiGraph& g) {
  if (g.vertex_count < 1) throw std::invalid_argument("graph needs at least one vertex");
  if (!is_connected(g)) throw std::invalid_argument("log_tau_float requires a connected graph");
  const int n = g.vertex_count;
  if (n == 1) return 0.0;
  if (n <= 600) return log_det_prime_laplacian(g) - std::log(double(n));
  Eigen::MatrixXd L = laplacian(g);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(L.topLeftCorner(n - 1, n - 1));
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("LDLT factorization failed");
  double acc = 0.0;
  for (int i = 0; i < n - 1; ++i) {
    double d = ldlt.vectorD()(i);
    if (!(d > 0)) throw std::runtime_error("reduced Laplacian not positive definite");
    acc += std::log(d);
  }
  return acc;
}

// Row-stochastic irreducible rational chain for the arborescence extension.
struct ChainMatrix {
  DenseMatrix<Rational> P;
  int n() const { return static_cast<int>(P.rows()); }
};

inline ChainMatrix make_chain(DenseMatrix<Rational> P) {
  const int n = static_cast<int>(P.rows());
  if (n < 1 || P.cols() != n) throw std::invalid_argument("chain matrix must be square and non-empty");
  for (int i = 0; i < n; ++i) {
    Rational row(0);
    for (int j = 0; j < n; ++j) {
      if (P(i, j) < 0) throw std::invalid_argument("negative transition probability");
      row += P(i, j);
    }
    if (row != 1) throw std::invalid_argument("chain row " + std::to_string(i) + " does not sum to 1");
  }
  auto reaches_all = [&](bool forward) {
    std::vector<char> seen(n, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      int x = stack.back();
      stack.pop_back();
      for (int y = 0; y < n; ++y) {
        bool edge = forward ? P(x, y) > 0 : P(y, x) > 0;
        if (edge && !seen[y]) {
          seen[y] = 1;
          stack.push_back(y);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](char s) { return s != 0; });
  };
  if (!reaches_all(true) || !reaches_all(false)) throw std::invalid_argument("chain is not irreducible");
  return {std::move(P)};
}

// tau'(P) = sum over roots r of det of (I - P) with row/column r deleted.
inline Rational arborescence_weight_exact(const ChainMatrix& chain) {
  const int n = chain.n();
  DenseMatrix<Rational> A = DenseMatrix<Rational>::Identity(n, n) - chain.P;
  Rational total(0);
  for (int r = 0; r < n; ++r) {
    DenseMatrix<Rational> minor(n - 1, n - 1);
    for (int i = 0, mi = 0; i < n; ++i) {
      if (i == r) continue;
      for (int j = 0, mj = 0; j < n; ++j) {
        if (j == r) continue;
        minor(mi, mj) = A(i, j);
        ++mj;
      }
      ++mi;
    }
    total += rational_determinant(minor);
  }
  return total;
}

inline double arborescence_log_weight(const ChainMatrix& chain) {
  Rational tau = arborescence_weight_exact(chain);
  if (tau <= 0) throw std::logic_error("arborescence weight must be positive for an irreducible chain");
  return log_rational(tau);
}

// Oracle: enumerate every function picking an out-edge for each non-root state
// and keep those whose forward paths all reach the root.
inline Rational arborescence_weight_bruteforce(const ChainMatrix& chain) {
  const int n = chain.n();
  if (n > 8) throw std::invalid_argument("brute-force arborescence budget (8 states) exceeded");
  Rational total(0);
  std::vector<std::vector<int>> support(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && chain.P(i, j) > 0) support[i].push_back(j);
  for (int root = 0; root < n; ++root) {
    std::vector<int> others;
    for (int v = 0; v < n; ++v)
      if (v != root) others.push_back(v);
    std::vector<std::size_t> choice(others.size(), 0);
    while (true) {
      std::vector<int> next(n, -1);
      bool feasible = true;
      for (std::size_t t = 0; t < others.size(); ++t) {
        if (support[others[t]].empty()) {
          feasible = false;
          break;
        }
        next[others[t]] = support[others[t]][choice[t]];
      }
      if (!feasible) break;
      bool arborescence = true;
      for (int v = 0; v < n && arborescence; ++v) {
        if (v == root) continue;
        int x = v, steps = 0;
        while (x != root && steps <= n) {
          x = next[x];
          ++steps;
        }
        arborescence = (x == root);
      }
      if (arborescence) {
        Rational prod(1);
        for (std::size_t t = 0; t < others.size(); ++t) prod *= chain.P(others[t], next[others[t]]);
        total += prod;
      }
      std::size_t pos = 0;
      while (pos < others.size()) {
        if (++choice[pos] < support[others[pos]].size()) break;
        choice[pos] = 0;
        ++pos;
      }
      if (pos == others.size()) break;
    }
  }
  return total;
}

}  // namespace arboreal
