#pragma once

#include "arboreal/oracle.hpp"
#include "arboreal/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace arboreal {

// Tree entropy estimate for an infinite model. [lo, hi] is a certified
// enclosure; value is the best point estimate inside it. method records which
// pipeline produced the numbers.
struct EntropyEstimate {
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::string method;
  bool converged = true;
  long K_used = 0;
};

// Tree entropy of the d-regular infinite tree, in closed form.
inline EntropyEstimate entropy_regular_tree(int d) {
  if (d < 2) throw std::invalid_argument("tree degree must be at least 2");
  double h = 0.0;
  if (d > 2)
    h = (d - 1.0) * std::log(d - 1.0) - (0.5 * d - 1.0) * std::log(double(d) * (d - 2.0));
  return {h, h, h, "closed_form", true, 0};
}

// First-return generating data of the loop-regularized walk on the free
// product of complete graphs on s_1, ..., s_n vertices. Phi is the implicit
// generating map; G1 is its unique fixed point in (1, inf), located by a
// closed form for two factors and by doubling plus bisection otherwise.
struct GeneratingData {
  double G1 = 0.0;
  std::function<double(double)> Phi;
};

inline GeneratingData free_product_generating(const std::vector<int>& s) {
  if (s.size() < 2) throw std::invalid_argument("free product needs at least two factors");
  long total = 0;
  for (int v : s) {
    if (v < 2) throw std::invalid_argument("complete factors need at least two vertices");
    total += v;
  }
  if (total < 5) throw std::invalid_argument("total factor size must be at least 5");

  const double d = double(total);
  const double n = double(s.size());
  std::vector<double> sizes(s.begin(), s.end());
  auto phi = [sizes, d, n](double z) {
    double acc = 1.0 + 0.5 * (z - n);
    for (double sj : sizes) {
      const double u = 1.0 - sj * z / d;
      acc += 0.5 * std::sqrt(u * u + 4.0 * z / d);
    }
    return acc;
  };

  double g1 = 0.0;
  if (s.size() == 2) {
    g1 = sizes[0] * sizes[1] / (sizes[0] * sizes[1] - sizes[0] - sizes[1]);
  } else {
    double top = 2.0;
    while (phi(top) >= top) {
      top *= 2.0;
      if (top > 1e12) throw std::runtime_error("no finite fixed point found");
    }
    double lo = 1.0, hi = top;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (phi(mid) > mid ? lo : hi) = mid;
    }
    g1 = 0.5 * (lo + hi);
  }
  if (!(std::abs(phi(g1) - g1) <= 1e-9 * std::max(1.0, g1)))
    throw std::runtime_error("fixed point residual too large");
  return {g1, std::move(phi)};
}

// Tree entropy of the free product of complete graphs on s_1, ..., s_n
// vertices (s_j >= 2, sum >= 5). Integrates (Phi(t) - 1) / t up to the fixed
// point G1; the integrand is replaced by its series for tiny t, where direct
// evaluation cancels catastrophically.
inline EntropyEstimate entropy_free_product(const std::vector<int>& s, double tol = 1e-9) {
  const auto gen = free_product_generating(s);
  double d = 0.0;
  for (int v : s) d += v;
  const double n = double(s.size());
  const auto& phi = gen.Phi;
  auto integrand = [&phi, d, n](double t) {
    if (t < 1e-6) return n / d + t * (d - n) / (d * d);
    return (phi(t) - 1.0) / t;
  };
  const auto quad = integrate_adaptive(integrand, 0.0, gen.G1, 0.5 * tol, 4000);
  const double h = std::log(d) - quad.value + gen.G1 - 1.0 - std::log(gen.G1);
  const double err = quad.error + 1e-12;
  return {h, h - err, h + err, "free_product", quad.converged, 0};
}

// Periodic lattice model: a Laplacian on Z^dim with a finite cell, described
// by its hopping matrices. terms holds pairs (x, L^x) with L^x the cell-sized
// block coupling a cell to its translate by x; the Fourier symbol is
// M(s) = sum_x L^x exp(2 pi i <x, s>).
struct PeriodicLattice {
  int dim = 0;
  int cell = 1;
  std::vector<std::pair<std::vector<int>, Eigen::MatrixXd>> terms;
};

inline PeriodicLattice hypercubic_lattice(int d) {
  if (d < 1) throw std::invalid_argument("lattice dimension must be positive");
  PeriodicLattice m;
  m.dim = d;
  m.cell = 1;
  Eigen::MatrixXd diag(1, 1), hop(1, 1);
  diag(0, 0) = 2.0 * d;
  hop(0, 0) = -1.0;
  m.terms.push_back({std::vector<int>(d, 0), diag});
  for (int i = 0; i < d; ++i) {
    std::vector<int> e(d, 0);
    e[i] = 1;
    m.terms.push_back({e, hop});
    e[i] = -1;
    m.terms.push_back({e, hop});
  }
  return m;
}

namespace detail {

inline void validate_lattice(const PeriodicLattice& m) {
  if (m.dim < 1 || m.dim > 8) throw std::invalid_argument("lattice dimension out of range");
  if (m.cell < 1) throw std::invalid_argument("cell size must be positive");
  if (m.terms.empty()) throw std::invalid_argument("lattice has no hopping terms");
  std::map<std::vector<int>, Eigen::MatrixXd> sum;
  for (const auto& [x, L] : m.terms) {
    if (int(x.size()) != m.dim) throw std::invalid_argument("hopping offset has wrong dimension");
    if (L.rows() != m.cell || L.cols() != m.cell) throw std::invalid_argument("hopping matrix has wrong shape");
    auto it = sum.find(x);
    if (it == sum.end())
      sum.emplace(x, L);
    else
      it->second += L;
  }
  Eigen::MatrixXd at_zero = Eigen::MatrixXd::Zero(m.cell, m.cell);
  std::vector<int> neg(m.dim);
  for (const auto& [x, L] : sum) {
    for (int i = 0; i < m.dim; ++i) neg[i] = -x[i];
    auto it = sum.find(neg);
    if (it == sum.end() || ((it->second - L.transpose()).cwiseAbs().maxCoeff() > 1e-9))
      throw std::invalid_argument("symbol is not Hermitian: L^{-x} must equal transpose of L^x");
    at_zero += L;
  }
  if (at_zero.cwiseAbs().rowwise().sum().size() > 0 &&
      at_zero.rowwise().sum().cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("symbol at zero frequency must have vanishing row sums");
}

// Mean of log det M(s) over the half-offset midpoint grid ((j + 1/2) / N)^dim.
inline double lattice_mean_logdet(const PeriodicLattice& m, int N) {
  const double two_pi = 2.0 * std::numbers::pi;
  long nodes = 1;
  for (int i = 0; i < m.dim; ++i) nodes *= N;

  std::vector<double> s(m.dim);
  Eigen::MatrixXcd M(m.cell, m.cell);
  Eigen::LDLT<Eigen::MatrixXcd> ldlt;
  KahanSum acc;
  for (long node = 0; node < nodes; ++node) {
    long t = node;
    for (int i = 0; i < m.dim; ++i) {
      s[i] = (double(t % N) + 0.5) / N;
      t /= N;
    }
    double logdet = 0.0;
    if (m.cell == 1) {
      double v = 0.0;
      for (const auto& [x, L] : m.terms) {
        double phase = 0.0;
        for (int i = 0; i < m.dim; ++i) phase += x[i] * s[i];
        v += L(0, 0) * std::cos(two_pi * phase);
      }
      if (!(v > 0)) throw std::runtime_error("symbol determinant vanished on the grid");
      logdet = std::log(v);
    } else {
      M.setZero();
      for (const auto& [x, L] : m.terms) {
        double phase = 0.0;
        for (int i = 0; i < m.dim; ++i) phase += x[i] * s[i];
        M += L.cast<std::complex<double>>() * std::exp(std::complex<double>(0.0, two_pi * phase));
      }
      ldlt.compute(M);
      if (ldlt.info() != Eigen::Success) throw std::runtime_error("symbol factorization failed");
      const auto dvec = ldlt.vectorD();
      for (int i = 0; i < m.cell; ++i) {
        const double di = std::real(dvec(i));
        if (!(di > 0)) throw std::runtime_error("symbol determinant vanished on the grid");
        logdet += std::log(di);
      }
    }
    acc.add(logdet);
  }
  return acc.value() / double(nodes);
}

}  // namespace detail

// Tree entropy of a periodic lattice by midpoint quadrature of log det of the
// Fourier symbol over the frequency torus, normalized by the cell size.
// Richardson extrapolation between N and N/2 (order 1 in one dimension where
// the midpoint sum telescopes, order 2 above) gives the value; the reported
// error is four times the raw grid difference.
inline EntropyEstimate entropy_periodic_lattice(const PeriodicLattice& m, int N) {
  detail::validate_lattice(m);
  if (N < 4 || N % 2 != 0) throw std::invalid_argument("grid size must be an even number >= 4");
  if (double(m.dim) * std::log2(double(N)) > 28.0 + 1e-9)
    throw std::invalid_argument("grid too large: dim * log2(N) must stay <= 28");
  const double coarse = detail::lattice_mean_logdet(m, N / 2);
  const double fine = detail::lattice_mean_logdet(m, N);
  const double w = m.dim == 1 ? 2.0 : 4.0;
  const double value = (w * fine - coarse) / (w - 1.0) / m.cell;
  const double err = 4.0 * std::abs(fine - coarse) / m.cell + 1e-12;
  return {value, value - err, value + err, "lattice_quadrature", true, N};
}

inline EntropyEstimate entropy_hypercubic(int d, int N) {
  return entropy_periodic_lattice(hypercubic_lattice(d), N);
}

// A rooted local model with a sampling weight; entropy_series consumes finite
// mixtures of these and renormalizes the weights.
struct MixtureComponent {
  double weight = 1.0;
  std::shared_ptr<const LocalGraphOracle> oracle;
};

struct SeriesEntropyOptions {
  long K_max = 1'000'000;
  long K_min = 64;
  // Cap on total psi-propagation work (state visits times steps) across the
  // mixture; components that cannot certify their tail stop growing K here.
  double work_budget = 2e9;
  bool refine_value = true;
};

namespace detail {

// Least-squares power-law exponent of q_k over the last octave, clamped to
// [0.5, 3]. Only feeds the uncertified value refinement.
inline double fitted_decay_exponent(const std::vector<double>& q, long K) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  long cnt = 0;
  for (long k = std::max<long>(1, K / 2); k <= K; ++k) {
    if (!(q[k] > 0.0)) continue;
    const double x = std::log(double(k));
    const double y = std::log(q[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++cnt;
  }
  if (cnt < 2) return 1.0;
  const double denom = double(cnt) * sxx - sx * sx;
  if (!(std::abs(denom) > 0.0)) return 1.0;
  const double slope = (double(cnt) * sxy - sx * sy) / denom;
  return std::clamp(-slope, 0.5, 3.0);
}

}  // namespace detail

// Tree entropy of a rooted local model, or of a finite mixture of rooted
// models, through the lazified return series at each root:
//   h = sum_i w_i (log deg(root_i) + log 2 - sum_{k >= 1} q_k(root_i) / k)
// with q_k the return probabilities of the lazy walk, computed exactly by
// running the plain walk of the loop-doubled model on a ball. [lo, hi] is
// certified: each truncated tail is bounded by the component's decay
// certificate when present and by the universal bound 8 deg(root) / sqrt(K)
// otherwise. value additionally subtracts an empirical power-law tail
// estimate, clamped to the certified interval. converged reports whether the
// certified tails met tol before the work budget or K_max stopped growth.
inline EntropyEstimate entropy_series(const std::vector<MixtureComponent>& mixture, double tol,
                                      const SeriesEntropyOptions& opt = {}) {
  if (mixture.empty()) throw std::invalid_argument("mixture must not be empty");
  if (!(tol > 0)) throw std::invalid_argument("tolerance must be positive");
  double wsum = 0.0;
  for (const auto& c : mixture) {
    if (!c.oracle) throw std::invalid_argument("mixture component has no oracle");
    if (!(c.weight > 0)) throw std::invalid_argument("mixture weights must be positive");
    wsum += c.weight;
  }

  const double per_budget = opt.work_budget / double(mixture.size());
  double hi = 0.0, rig_total = 0.0, slack_total = 0.0, value = 0.0;
  long K_top = 0;
  for (const auto& c : mixture) {
    const double w = c.weight / wsum;
    const double deg = c.oracle->degree(c.oracle->root());
    if (!(deg > 0)) throw std::invalid_argument("root has degree zero");
    const LoopDoubledOracle lazy(c.oracle);
    const auto cert = c.oracle->certificate();

    long K = std::max<long>(2, opt.K_min);
    ReturnSeries series;
    double work = 0.0, prev_states = 0.0;
    for (;;) {
      series = return_probabilities_local(lazy, int(K));
      work += double(K) * series.n_states;
      if (std::min(cert.tail(K), 8.0 * deg / std::sqrt(double(K))) <= tol) break;
      if (2 * K > opt.K_max) break;
      const double growth =
          prev_states > 0 ? std::max(1.0, series.n_states / prev_states) : 2.0;
      if (work + 2.0 * double(K) * series.n_states * growth > per_budget) break;
      prev_states = series.n_states;
      K *= 2;
    }

    const double rig = std::min(cert.tail(K), 8.0 * deg / std::sqrt(double(K)));
    const double partial = std::log(deg) + std::numbers::ln2 - series.partial_sum;
    const double slack = 1e-12 + 1e-15 * double(K);
    double est = rig;
    if (opt.refine_value) {
      const double beta = detail::fitted_decay_exponent(series.per_k, K);
      est = std::clamp(series.per_k[K] / beta, 0.0, rig);
    }
    hi += w * partial;
    rig_total += w * rig;
    slack_total += w * slack;
    value += w * (partial - est);
    K_top = std::max(K_top, K);
  }

  EntropyEstimate out;
  out.hi = hi + slack_total;
  out.lo = hi - rig_total - slack_total;
  out.value = std::clamp(value, out.lo, out.hi);
  out.method = "local_series";
  out.K_used = K_top;
  out.converged = rig_total <= tol;
  return out;
}

inline EntropyEstimate entropy_series(std::shared_ptr<const LocalGraphOracle> oracle, double tol,
                                      const SeriesEntropyOptions& opt = {}) {
  return entropy_series(std::vector<MixtureComponent>{{1.0, std::move(oracle)}}, tol, opt);
}

// Finite mixture converging to the one-ended 3-regular tree rooted at a
// uniform vertex: component m is the canopy model rooted at height m with
// weight 2^{-m-1} (renormalized over m <= M). The model is a local limit of
// finite trees, so its tree entropy is 0; the same series rearranges to
// sum_m w_m log deg(x_m) = (1/2) log 3 for the plain-walk double sum.
inline std::vector<MixtureComponent> canopy_mixture(int M) {
  if (M < 0) throw std::invalid_argument("mixture cutoff must be non-negative");
  std::vector<MixtureComponent> mix;
  mix.reserve(M + 1);
  for (int m = 0; m <= M; ++m)
    mix.push_back({std::pow(2.0, -double(m) - 1.0), std::make_shared<CanopyOracle>(m)});
  return mix;
}

// One step of a local-convergence demonstration: the estimate for the n-th
// model and whether its certified interval contains the limit entropy.
struct ContinuityStep {
  EntropyEstimate estimate;
  bool contains_limit = false;
};

struct ContinuityReport {
  std::vector<ContinuityStep> steps;
  double limit = 0.0;
  bool eventual_containment = false;
};

// Runs entropy_series along a sequence of models converging locally to a
// limit with known entropy, recording whether the certified intervals
// eventually trap the limit. They must once the models' balls agree with the
// limit's out to the radius the series resolves, so opt should pin K at the
// locality scale rather than let the work budget outrun it.
inline ContinuityReport entropy_continuity_probe(const std::vector<std::vector<MixtureComponent>>& models,
                                                 double limit, double tol,
                                                 const SeriesEntropyOptions& opt = {}) {
  if (models.empty()) throw std::invalid_argument("model sequence must not be empty");
  ContinuityReport rep;
  rep.limit = limit;
  for (const auto& mix : models) {
    auto est = entropy_series(mix, tol, opt);
    const bool contains = est.lo <= limit && limit <= est.hi;
    rep.steps.push_back({std::move(est), contains});
  }
  rep.eventual_containment = rep.steps.back().contains_limit;
  return rep;
}

}  // namespace arboreal
