// Acceptance gate: runs every acceptance criterion at its stated tolerance
// and prints one pass/fail line per criterion. Exit code 0 iff all pass.

#include "arboreal/exact.hpp"
#include "arboreal/generators.hpp"
#include "arboreal/graph.hpp"
#include "arboreal/harness.hpp"
#include "arboreal/models.hpp"
#include "arboreal/oracle.hpp"
#include "arboreal/rng.hpp"
#include "arboreal/series.hpp"

#include "helpers.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <vector>

using namespace arboreal;

namespace {

constexpr double kCatalan = 0.915965594177219015054603514932;

struct Outcome {
  bool pass = true;
  std::string detail;
};

void expect(Outcome& o, bool cond, const std::string& msg) {
  if (cond) return;
  o.pass = false;
  if (!o.detail.empty()) o.detail += "; ";
  o.detail += msg;
}

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

// 1. Matrix-Tree equals brute-force enumeration on 500 seeded multigraphs,
//    and tau(K_n) = n^(n-2) for n = 3..9.
void exact_count_oracles(Outcome& o) {
  std::mt19937_64 rng(101);
  int mismatches = 0;
  for (int t = 0; t < 500; ++t) {
    const RationalGraph g = testutil::random_connected_multigraph(rng, 8, 12, t % 2 == 1);
    if (count_spanning_trees(g).value != count_spanning_trees_bruteforce(g).value) ++mismatches;
  }
  expect(o, mismatches == 0, std::to_string(mismatches) + " brute-force mismatches");
  for (int n = 3; n <= 9; ++n) {
    const Rational want(boost::multiprecision::pow(boost::multiprecision::cpp_int(n), unsigned(n - 2)));
    expect(o, count_spanning_trees(testutil::complete_graph(n)).value == want,
           "complete graph n=" + std::to_string(n) + " count is not n^(n-2)");
  }
}

// 2. The certified series interval at tol 1e-4 contains the exact/eigen
//    log tau on 200 random connected graphs with n <= 200.
void series_interval_containment(Outcome& o) {
  std::mt19937_64 rng(202);
  std::vector<MultiGraph> corpus;
  for (int t = 0; t < 70; ++t) corpus.push_back(to_double(testutil::random_connected_multigraph(rng, 28, 40)));
  while (corpus.size() < 135) {
    const int n = 4 + 2 * int(rng_below(rng, 99));
    const MultiGraph g = random_regular(n, 3, rng());
    if (is_connected(g)) corpus.push_back(g);
  }
  while (corpus.size() < 200) {
    const int n = 20 + int(rng_below(rng, 181));
    corpus.push_back(er_giant(n, 4.0, rng()));
  }
  int misses = 0, unconverged = 0;
  for (const MultiGraph& g : corpus) {
    const double truth = g.vertex_count <= 60 ? count_spanning_trees(g).log() : log_tau_float(g);
    const SeriesLogTau s = series_log_tau(g, 1e-4);
    if (!s.converged) ++unconverged;
    if (!(s.lo <= truth && truth <= s.hi)) ++misses;
  }
  expect(o, unconverged == 0, std::to_string(unconverged) + " graphs failed to certify");
  expect(o, misses == 0, std::to_string(misses) + " intervals missed the exact value");
}

// 3. Closed-form regular-tree entropies to 1e-12; local-series intervals
//    contain them at tol 5e-3.
void regular_tree_entropy(Outcome& o) {
  const double h4 = entropy_regular_tree(4).value;
  const double h3 = entropy_regular_tree(3).value;
  expect(o, std::abs(h4 - 3.0 * std::log(1.5)) <= 1e-12, "d=4 closed form off: " + num(h4));
  expect(o, std::abs(h3 - std::log(4.0 / std::sqrt(3.0))) <= 1e-12, "d=3 closed form off: " + num(h3));
  for (int d : {3, 4}) {
    const double h = entropy_regular_tree(d).value;
    const EntropyEstimate e = entropy_series(std::make_shared<RegularTreeOracle>(d), 5e-3);
    expect(o, e.converged, "series d=" + std::to_string(d) + " did not certify");
    expect(o, e.lo <= h && h <= e.hi,
           "series interval [" + num(e.lo) + ", " + num(e.hi) + "] misses d=" + std::to_string(d));
  }
}

// 4. Square-lattice entropy equals 4 Catalan / pi within 1e-4 at N = 2048;
//    the one-dimensional lattice gives 0 within 1e-6.
void square_lattice_catalan(Outcome& o) {
  const double want = 4.0 * kCatalan / std::numbers::pi;
  const double got = entropy_hypercubic(2, 2048).value;
  expect(o, std::abs(got - want) <= 1e-4, "d=2 value " + num(got) + " vs " + num(want));
  const double line = entropy_hypercubic(1, 4096).value;
  expect(o, std::abs(line) <= 1e-6, "d=1 value " + num(line));
}

// 5. Free products of complete graphs against their closed forms.
void free_product_entropy(Outcome& o) {
  const double h23 = entropy_free_product({2, 3}).value;
  const double want23 = (2.0 / 3.0) * std::numbers::ln2 + std::log(5.0) / 6.0;
  expect(o, std::abs(h23 - want23) <= 1e-6, "(2,3) value " + num(h23) + " vs " + num(want23));

  const double h333 = entropy_free_product({3, 3, 3}).value;
  expect(o, std::abs(h333 - std::log(16.0 / 3.0)) <= 1e-6, "(3,3,3) value " + num(h333));

  const double h223 = entropy_free_product({2, 2, 3}).value;
  const double r = std::sqrt(57.0);
  const double want223 =
      std::log(61.0 + 9.0 * r) + std::log(317.0 - 33.0 * r) / 6.0 - 3.5 * std::numbers::ln2 - std::log(7.0);
  expect(o, h223 >= 1.190 && h223 <= 1.191, "(2,2,3) value " + num(h223) + " outside [1.190, 1.191]");
  expect(o, std::abs(h223 - want223) <= 1e-6, "(2,2,3) value " + num(h223) + " vs closed form " + num(want223));

  const double g1 = free_product_generating({2, 3}).G1;
  expect(o, std::abs(g1 - 6.0) <= 1e-12, "two-factor fixed point " + num(g1) + " vs 6");
}

// 6. Torus normalized counts march monotonically toward 4 Catalan / pi and
//    land within 0.05 at n = 32.
void torus_convergence(Outcome& o) {
  HarnessOptions opt;
  opt.mode = CountMode::eigen;
  const double ref = 4.0 * kCatalan / std::numbers::pi;
  const ConvergenceReport rep = run_convergence(torus_family(2), {4, 8, 16, 32}, ref, opt);
  for (std::size_t i = 1; i < rep.rows.size(); ++i)
    expect(o, std::abs(rep.rows[i].gap) < std::abs(rep.rows[i - 1].gap),
           "gap not decreasing at n_vertices=" + std::to_string(rep.rows[i].n_vertices));
  expect(o, std::abs(rep.rows.back().gap) < 0.05, "final gap " + num(rep.rows.back().gap));
}

// 7. Box and torus at n = 32 differ by < 0.1 and approach the same reference.
void box_torus_stability(Outcome& o) {
  HarnessOptions opt;
  opt.mode = CountMode::eigen;
  const double ref = 4.0 * kCatalan / std::numbers::pi;
  const ConvergenceReport torus_rep = run_convergence(torus_family(2), {8, 16, 32}, ref, opt);
  const ConvergenceReport box_rep = run_convergence(box_family(2), {8, 16, 32}, ref, opt);
  for (std::size_t i = 1; i < box_rep.rows.size(); ++i)
    expect(o, std::abs(box_rep.rows[i].gap) < std::abs(box_rep.rows[i - 1].gap),
           "box gap not decreasing at n_vertices=" + std::to_string(box_rep.rows[i].n_vertices));
  const double diff = std::abs(box_rep.rows.back().normalized - torus_rep.rows.back().normalized);
  expect(o, diff < 0.1, "normalized difference " + num(diff) + " at n=32");
  expect(o, std::abs(box_rep.rows.back().gap) < 0.1, "box gap " + num(box_rep.rows.back().gap));
  expect(o, std::abs(torus_rep.rows.back().gap) < 0.1, "torus gap " + num(torus_rep.rows.back().gap));
}

// 8. Median normalized count over 20 random 3-regular graphs on 2000 vertices
//    lies within 0.05 of the tree entropy log(4/sqrt(3)).
void random_regular_median(Outcome& o) {
  std::vector<double> vals;
  for (int s = 0; s < 20; ++s) {
    std::uint64_t seed = 9000 + s;
    MultiGraph g = random_regular(2000, 3, seed);
    while (!is_connected(g)) g = random_regular(2000, 3, ++seed);
    vals.push_back(log_tau_float(g) / 2000.0);
  }
  std::sort(vals.begin(), vals.end());
  const double median = 0.5 * (vals[9] + vals[10]);
  const double want = std::log(4.0 / std::sqrt(3.0));
  expect(o, std::abs(median - want) < 0.05, "median " + num(median) + " vs " + num(want));
}

// 9. Determinant arborescence weight equals brute-force enumeration exactly on
//    100 random irreducible rational chains; the swap chain gives log 2.
void arborescence_identity(Outcome& o) {
  std::mt19937_64 rng(909);
  int mismatches = 0, exp_misses = 0;
  for (int t = 0; t < 100; ++t) {
    const int n = 2 + int(rng_below(rng, 5));
    DenseMatrix<Rational> P(n, n);
    for (int i = 0; i < n; ++i) {
      std::vector<std::uint64_t> row(n);
      std::uint64_t sum = 0;
      for (int j = 0; j < n; ++j) {
        row[j] = j == (i + 1) % n ? 1 + rng_below(rng, 3) : rng_below(rng, 4);
        sum += row[j];
      }
      for (int j = 0; j < n; ++j) P(i, j) = Rational(row[j], sum);
    }
    const ChainMatrix chain = make_chain(std::move(P));
    const Rational det_weight = arborescence_weight_exact(chain);
    if (det_weight != arborescence_weight_bruteforce(chain)) ++mismatches;
    const double w = det_weight.convert_to<double>();
    if (std::abs(std::exp(arborescence_log_weight(chain)) - w) > 1e-9 * std::max(1.0, w)) ++exp_misses;
  }
  expect(o, mismatches == 0, std::to_string(mismatches) + " determinant/brute mismatches");
  expect(o, exp_misses == 0, std::to_string(exp_misses) + " exp(log) inconsistencies");

  DenseMatrix<Rational> S(2, 2);
  S(0, 0) = 0; S(0, 1) = 1; S(1, 0) = 1; S(1, 1) = 0;
  const double swap_log = arborescence_log_weight(make_chain(std::move(S)));
  expect(o, std::abs(swap_log - std::numbers::ln2) <= 1e-12, "swap chain gives " + num(swap_log));
}

// 10. The truncated double sum over the canopy mixture, with certified tails,
//     brackets log sqrt(3); equivalently the mixture entropy brackets 0.
void canopy_double_sum(Outcome& o) {
  const auto mix = canopy_mixture(40);
  SeriesEntropyOptions opt;
  opt.work_budget = 2e8;
  const EntropyEstimate e = entropy_series(mix, 5e-3, opt);
  expect(o, e.lo <= 0.0 && 0.0 <= e.hi, "mixture interval [" + num(e.lo) + ", " + num(e.hi) + "] misses 0");
  expect(o, std::abs(e.value) <= 5e-3, "mixture value " + num(e.value));

  double total = 0.0, mean_log_deg = 0.0;
  for (const auto& c : mix) total += c.weight;
  for (const auto& c : mix) mean_log_deg += (c.weight / total) * std::log(c.oracle->degree(c.oracle->root()));
  const double want = 0.5 * std::log(3.0);
  expect(o, std::abs(mean_log_deg - want) <= 1e-9, "mean log degree " + num(mean_log_deg) + " vs log sqrt(3)");
  const double p_lo = mean_log_deg - e.hi, p_hi = mean_log_deg - e.lo;
  expect(o, p_lo <= want && want <= p_hi,
         "double-sum bracket [" + num(p_lo) + ", " + num(p_hi) + "] misses log sqrt(3)");
}

// 11. Property suites: per-state decay bound on 10^3 random lazy chains up to
//     k = 10^3; strict edge monotonicity on 10^3 cases; loop invariance of the
//     count and the Laplacian bit-exact; certified series containment of the
//     exact count on every chain in the suite.
void property_suites(Outcome& o) {
  std::mt19937_64 rng(111);
  int decay_violations = 0, series_misses = 0;
  for (int t = 0; t < 1000; ++t) {
    const MultiGraph g = to_double(testutil::random_connected_multigraph(rng, 9, 10));
    const double alpha = 0.5 + 0.45 * rng_unit(rng);
    const auto op = make_walk_operator(g, alpha);
    const int n = g.vertex_count;
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
    for (int k = 1; k <= 1000; ++k) {
      M = (op.Q * M).eval();
      const double bound = decay_bound(true, op.a, op.c, k);
      for (int x = 0; x < n; ++x) {
        const double dev = M(x, x) - op.pi[x];
        if (dev < -1e-12 || dev > bound + 1e-12) ++decay_violations;
      }
    }
    if (g.vertex_count >= 2) {
      const double truth = count_spanning_trees(g).log();
      const SeriesLogTau s = series_log_tau(g, 1e-3);
      if (!(s.lo <= truth && truth <= s.hi)) ++series_misses;
    }
  }
  expect(o, decay_violations == 0, std::to_string(decay_violations) + " decay-bound violations");
  expect(o, series_misses == 0, std::to_string(series_misses) + " series intervals missed the count");

  int non_monotone = 0;
  for (int t = 0; t < 1000; ++t) {
    RationalGraph g = testutil::random_connected_multigraph(rng, 10, 8, t % 2 == 1, false);
    const Rational before = count_spanning_trees(g).value;
    const int u = int(rng_below(rng, g.vertex_count));
    int v = int(rng_below(rng, g.vertex_count));
    if (u == v) v = (v + 1) % g.vertex_count;
    g.edges.push_back({u, v, Rational(1)});
    if (!(count_spanning_trees(g).value > before)) ++non_monotone;
  }
  expect(o, non_monotone == 0, std::to_string(non_monotone) + " edge additions did not increase the count");

  int loop_count_diffs = 0, loop_laplacian_diffs = 0;
  for (int t = 0; t < 200; ++t) {
    const RationalGraph g = testutil::random_connected_multigraph(rng, 9, 8, t % 2 == 1, false);
    RationalGraph loopy = g;
    for (int j = 0; j < 3; ++j) {
      const int v = int(rng_below(rng, g.vertex_count));
      loopy.edges.push_back({v, v, Rational(1 + rng_below(rng, 3))});
    }
    if (count_spanning_trees(loopy).value != count_spanning_trees(g).value) ++loop_count_diffs;
    const Eigen::MatrixXd L1 = laplacian(to_double(g));
    const Eigen::MatrixXd L2 = laplacian(to_double(loopy));
    if (!(L1.array() == L2.array()).all()) ++loop_laplacian_diffs;
  }
  expect(o, loop_count_diffs == 0, std::to_string(loop_count_diffs) + " loop additions changed the count");
  expect(o, loop_laplacian_diffs == 0, std::to_string(loop_laplacian_diffs) + " loop additions changed the Laplacian");
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<void(Outcome&)> run;
    double limit_seconds;  // 0 = no stated limit
  };
  const std::vector<Criterion> criteria = {
      {"exact-count-oracles", exact_count_oracles, 30.0},
      {"series-interval-containment", series_interval_containment, 120.0},
      {"regular-tree-entropy", regular_tree_entropy, 0.0},
      {"square-lattice-catalan", square_lattice_catalan, 20.0},
      {"free-product-entropy", free_product_entropy, 0.0},
      {"torus-convergence", torus_convergence, 60.0},
      {"box-torus-stability", box_torus_stability, 0.0},
      {"random-regular-median", random_regular_median, 120.0},
      {"arborescence-identity", arborescence_identity, 0.0},
      {"canopy-double-sum", canopy_double_sum, 0.0},
      {"property-suites", property_suites, 0.0},
  };

  int passed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (criteria[i].limit_seconds > 0 && secs > criteria[i].limit_seconds) {
      o.pass = false;
      if (!o.detail.empty()) o.detail += "; ";
      o.detail += "runtime " + num(secs) + " s exceeds " + num(criteria[i].limit_seconds) + " s";
    }
    std::printf("[%s] %02zu %-30s %7.2f s%s%s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, secs,
                o.detail.empty() ? "" : "  ", o.detail.c_str());
    if (o.pass) ++passed;
  }
  std::printf("acceptance: %d/%zu criteria passed\n", passed, criteria.size());
  return passed == int(criteria.size()) ? 0 : 1;
}
