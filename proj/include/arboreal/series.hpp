#pragma once

#include "arboreal/graph.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace arboreal {

struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    double y = x - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

// Per-state deviation bound of the decay lemma. Finite chains need a > 0 and
// c > 0; infinite chains need only c > 0.
inline double decay_bound(bool finite_chain, double a, double c, long k) {
  if (k < 0) throw std::invalid_argument("decay_bound needs k >= 0");
  double root = std::sqrt(double(k) + 1.0);
  if (finite_chain) {
    if (!(a > 0) || !(c > 0)) throw std::invalid_argument("finite decay bound needs a > 0 and c > 0");
    return std::min(1.0 / (a * c * root), 1.0 / (2.0 * a * a * c * c * (double(k) + 1.0)));
  }
  if (!(c > 0)) throw std::invalid_argument("infinite decay bound needs c > 0");
  return 4.0 / (c * root);
}

// Certified bound on sum_{k>K} (tr Q^k - 1)/k for an n-state chain obeying the
// decay lemma with constants a, c.
inline double lemma_tail(int n, double a, double c, long K) {
  if (!(a > 0) || !(c > 0) || K < 1) return std::numeric_limits<double>::infinity();
  double by_sqrt = 2.0 / (a * c * std::sqrt(double(K)));
  double by_linear = 1.0 / (2.0 * a * a * c * c * (double(K) + 1.0));
  return double(n) * std::min(by_sqrt, by_linear);
}

// Return probabilities of Q = alpha I + (1-alpha) P on a finite multigraph.
// per_k[k] = (1/n) tr Q^k; partial_sum = sum_{1<=k<=K} (tr Q^k - 1)/k.
struct ReturnSeries {
  std::vector<double> per_k;
  double alpha = 0.0;
  double partial_sum = 0.0;
  double tail_bound = std::numeric_limits<double>::infinity();
  bool finite_mode = true;
  int n_states = 0;
  // Base-chain (alpha = 0) constants so lazified tails stay certifiable.
  double base_min_diag = 0.0;
  double base_c_offdiag = 0.0;
  double pi_min = 0.0;
};

namespace detail {

struct SparseWalk {
  int n = 0;
  double alpha = 0.0;
  Eigen::SparseMatrix<double> Q;
  std::vector<double> pi;
  std::vector<double> deg;
  double total_degree = 0.0;
  double a = 0.0;          // min_x Q(x,x)
  double c = 0.0;          // min over positive entries of pi(x) Q(x,y)
  double base_min_diag = 0.0;
  double base_c_offdiag = 0.0;
  double pi_min = 0.0;
};

inline SparseWalk make_sparse_walk(const MultiGraph& g, double alpha) {
  if (!(alpha >= 0) || !(alpha < 1)) throw std::invalid_argument("laziness alpha must be in [0,1)");
  const int n = g.vertex_count;
  SparseWalk w;
  w.n = n;
  w.alpha = alpha;
  w.deg = degrees(g);
  for (int x = 0; x < n; ++x)
    if (!(w.deg[x] > 0)) throw std::invalid_argument("vertex of degree zero has no walk transition");
  w.total_degree = total_degree(g);
  w.pi.resize(n);
  for (int x = 0; x < n; ++x) w.pi[x] = w.deg[x] / w.total_degree;
  w.pi_min = *std::min_element(w.pi.begin(), w.pi.end());

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(2 * g.edges.size() + n);
  std::vector<double> loop_weight(n, 0.0);
  for (const auto& e : g.edges) {
    if (e.u == e.v) {
      loop_weight[e.u] += e.w;
      trips.emplace_back(e.u, e.u, (1.0 - alpha) * e.w / w.deg[e.u]);
    } else {
      trips.emplace_back(e.u, e.v, (1.0 - alpha) * e.w / w.deg[e.u]);
      trips.emplace_back(e.v, e.u, (1.0 - alpha) * e.w / w.deg[e.v]);
    }
  }
  for (int x = 0; x < n; ++x) trips.emplace_back(x, x, alpha);
  w.Q.resize(n, n);
  w.Q.setFromTriplets(trips.begin(), trips.end());

  w.base_min_diag = std::numeric_limits<double>::infinity();
  for (int x = 0; x < n; ++x) w.base_min_diag = std::min(w.base_min_diag, loop_weight[x] / w.deg[x]);
  w.a = alpha + (1.0 - alpha) * w.base_min_diag;

  w.c = std::numeric_limits<double>::infinity();
  w.base_c_offdiag = std::numeric_limits<double>::infinity();
  for (int col = 0; col < w.Q.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(w.Q, col); it; ++it) {
      if (!(it.value() > 0)) continue;
      double flow = w.pi[it.row()] * it.value();
      w.c = std::min(w.c, flow);
      if (it.row() != col && alpha < 1)
        w.base_c_offdiag = std::min(w.base_c_offdiag, flow / (1.0 - alpha));
    }
  return w;
}

// Rational matrix product written out by hand: Eigen's operator* overload set
// trips a non-SFINAE-safe container trait in multiprecision's converting
// constructor, and the exact chains are tiny anyway.
inline void multiply_into(const DenseMatrix<Rational>& A, const DenseMatrix<Rational>& B, DenseMatrix<Rational>& out) {
  const int n = static_cast<int>(A.rows());
  const int m = static_cast<int>(B.cols());
  const int inner = static_cast<int>(A.cols());
  out.resize(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      Rational acc(0);
      for (int k = 0; k < inner; ++k)
        if (A(i, k) != 0 && B(k, j) != 0) acc += A(i, k) * B(k, j);
      out(i, j) = acc;
    }
}

}  // namespace detail

inline ReturnSeries return_probabilities_finite(const MultiGraph& g, double alpha, int K) {
  if (!is_connected(g)) throw std::invalid_argument("return_probabilities_finite requires a connected graph");
  if (K < 0) throw std::invalid_argument("K must be non-negative");
  auto w = detail::make_sparse_walk(g, alpha);
  const int n = w.n;
  ReturnSeries out;
  out.alpha = alpha;
  out.finite_mode = true;
  out.n_states = n;
  out.base_min_diag = w.base_min_diag;
  out.base_c_offdiag = w.base_c_offdiag;
  out.pi_min = w.pi_min;
  out.per_k.resize(K + 1);
  out.per_k[0] = 1.0;
  Eigen::MatrixXd V = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd Vn(n, n);
  KahanSum acc;
  for (int k = 1; k <= K; ++k) {
    Vn.noalias() = w.Q * V;
    V.swap(Vn);
    double tr = V.trace();
    out.per_k[k] = tr / n;
    acc.add((tr - 1.0) / k);
  }
  out.partial_sum = acc.value();
  if (alpha > 0) out.tail_bound = lemma_tail(n, w.a, w.c, K);
  return out;
}

// q_k = sum_j C(k,j) alpha^(k-j) (1-alpha)^j p_j, given the alpha = 0 series.
inline ReturnSeries lazify_series(const ReturnSeries& p, double alpha) {
  if (p.alpha != 0.0) throw std::invalid_argument("lazify_series expects a series at alpha = 0");
  if (!(alpha > 0) || !(alpha < 1)) throw std::invalid_argument("laziness alpha must be in (0,1)");
  const int K = static_cast<int>(p.per_k.size()) - 1;
  ReturnSeries out;
  out.alpha = alpha;
  out.finite_mode = p.finite_mode;
  out.n_states = p.n_states;
  out.base_min_diag = p.base_min_diag;
  out.base_c_offdiag = p.base_c_offdiag;
  out.pi_min = p.pi_min;
  out.per_k.resize(K + 1);
  const double ratio = (1.0 - alpha) / alpha;
  for (int k = 0; k <= K; ++k) {
    double coeff = std::pow(alpha, k);
    KahanSum acc;
    for (int j = 0; j <= k; ++j) {
      acc.add(coeff * p.per_k[j]);
      coeff *= ratio * double(k - j) / double(j + 1);
    }
    out.per_k[k] = acc.value();
  }
  KahanSum partial;
  for (int k = 1; k <= K; ++k) {
    double term = out.finite_mode ? out.per_k[k] * out.n_states - 1.0 : out.per_k[k];
    partial.add(term / k);
  }
  out.partial_sum = partial.value();
  if (out.finite_mode) {
    double a = alpha + (1.0 - alpha) * p.base_min_diag;
    double c = std::min((1.0 - alpha) * p.base_c_offdiag, p.pi_min * alpha);
    out.tail_bound = lemma_tail(out.n_states, a, c, K);
  }
  return out;
}

// Exact rational return probabilities for small chains.
struct ReturnSeriesExact {
  std::vector<Rational> per_k;
  Rational alpha{0};
  bool finite_mode = true;
  int n_states = 0;
};

inline ReturnSeriesExact return_probabilities_finite_exact(const RationalGraph& g, const Rational& alpha, int K) {
  if (g.vertex_count > 12) throw std::invalid_argument("exact return series limited to 12 vertices");
  if (!is_connected(g)) throw std::invalid_argument("return_probabilities_finite requires a connected graph");
  auto op = make_walk_operator(g, alpha);
  const int n = g.vertex_count;
  ReturnSeriesExact out;
  out.alpha = alpha;
  out.n_states = n;
  out.per_k.resize(K + 1);
  out.per_k[0] = 1;
  DenseMatrix<Rational> V = DenseMatrix<Rational>::Identity(n, n);
  DenseMatrix<Rational> Vn;
  for (int k = 1; k <= K; ++k) {
    detail::multiply_into(op.Q, V, Vn);
    V.swap(Vn);
    Rational tr(0);
    for (int i = 0; i < n; ++i) tr += V(i, i);
    out.per_k[k] = tr / n;
  }
  return out;
}

inline ReturnSeriesExact lazify_series_exact(const ReturnSeriesExact& p, const Rational& alpha) {
  if (p.alpha != 0) throw std::invalid_argument("lazify_series expects a series at alpha = 0");
  if (!(alpha > 0) || !(alpha < 1)) throw std::invalid_argument("laziness alpha must be in (0,1)");
  const int K = static_cast<int>(p.per_k.size()) - 1;
  ReturnSeriesExact out;
  out.alpha = alpha;
  out.finite_mode = p.finite_mode;
  out.n_states = p.n_states;
  out.per_k.resize(K + 1);
  for (int k = 0; k <= K; ++k) {
    Rational coeff = boost::multiprecision::pow(boost::multiprecision::numerator(alpha), k);
    coeff /= boost::multiprecision::pow(boost::multiprecision::denominator(alpha), k);
    Rational acc(0);
    Rational ratio = (1 - alpha) / alpha;
    for (int j = 0; j <= k; ++j) {
      acc += coeff * p.per_k[j];
      coeff *= ratio * Rational(k - j) / Rational(j + 1);
    }
    out.per_k[k] = acc;
  }
  return out;
}

struct SeriesOptions {
  long K_max = 1'000'000;
  int check_interval = 16;
};

struct SeriesLogTau {
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  long K_used = 0;
  bool converged = false;
};

// log tau = -log(sum_x deg x) + sum_x log deg(x) - sum_{k>=1} (tr P^k - 1)/k,
// evaluated through the lazy chain Q at alpha = 1/2: the substitution shifts
// the trace sum by (n-1) log 2 and makes every deflated eigenvalue of Q land
// in [0,1), so the omitted tail is one-sided and admits two certificates: the
// decay-lemma tail and the geometric tail driven by m = min_j s_j^(1/j) >=
// mu_max with s_j = tr Q^j - 1 >= 0.
inline SeriesLogTau series_log_tau(const MultiGraph& g, double tol, SeriesOptions opt = {}) {
  if (g.vertex_count < 2) throw std::invalid_argument("series_log_tau needs at least two vertices");
  if (!is_connected(g)) throw std::invalid_argument("series_log_tau requires a connected graph");
  if (!(tol > 0)) throw std::invalid_argument("tolerance must be positive");
  auto w = detail::make_sparse_walk(g, 0.5);
  const int n = w.n;

  KahanSum base_acc;
  for (int x = 0; x < n; ++x) base_acc.add(std::log(w.deg[x]));
  const double base = -std::log(w.total_degree) + base_acc.value() + double(n - 1) * std::numbers::ln2;

  Eigen::MatrixXd V = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd Vn(n, n);
  KahanSum sq;
  double m = std::numeric_limits<double>::infinity();
  double s_k = 0.0;
  long K = 0;
  double tail = std::numeric_limits<double>::infinity();
  bool spectrum_exhausted = false;
  while (K < opt.K_max) {
    ++K;
    Vn.noalias() = w.Q * V;
    V.swap(Vn);
    s_k = V.trace() - 1.0;
    if (s_k <= 0.0) {
      // all deflated eigenvalues vanish; the true tail is zero
      spectrum_exhausted = true;
      tail = 0.0;
      break;
    }
    sq.add(s_k / K);
    m = std::min(m, std::pow(s_k, 1.0 / double(K)));
    if (K % opt.check_interval == 0 || K == opt.K_max) {
      double geom = (m < 1.0) ? s_k * m / (double(K + 1) * (1.0 - m)) : std::numeric_limits<double>::infinity();
      tail = std::min(geom, lemma_tail(n, w.a, w.c, K));
      if (tail <= tol) break;
    }
  }
  const double slack = 1e-12 + 4e-16 * double(n) * double(K);
  SeriesLogTau out;
  out.K_used = K;
  out.converged = spectrum_exhausted || tail <= tol;
  if (!std::isfinite(tail)) tail = std::numeric_limits<double>::infinity();
  out.lo = base - sq.value() - tail - slack;
  out.hi = base - sq.value() + slack;
  out.value = std::isfinite(out.lo) ? 0.5 * (out.lo + out.hi) : out.hi;
  return out;
}

// Second-largest eigenvalue of P (float helper; certification is the caller's
// problem, e.g. for asserted expander families).
inline double second_eigenvalue(const MultiGraph& g) {
  if (!is_connected(g)) throw std::invalid_argument("second_eigenvalue requires a connected graph");
  const int n = g.vertex_count;
  if (n < 2) throw std::invalid_argument("need at least two vertices");
  auto deg = degrees(g);
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : g.edges) {
    double s = e.w / std::sqrt(deg[e.u] * deg[e.v]);
    S(e.u, e.v) += s;
    if (e.u != e.v) S(e.v, e.u) += s;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(n - 2);
}

}  // namespace arboreal
