#pragma once

#include "arboreal/exact.hpp"
#include "arboreal/generators.hpp"
#include "arboreal/graph.hpp"
#include "arboreal/series.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace arboreal {

// How a report row turns a graph into log tau.
//  exact     rational Matrix-Tree, log taken at the end
//  eigen     float determinant of the reduced Laplacian
//  series    certified truncation of the return-probability series
//  automatic exact up to `exact_cutover` vertices, series beyond
enum class CountMode { automatic, exact, eigen, series };

struct HarnessOptions {
  CountMode mode = CountMode::automatic;
  int exact_cutover = 400;
  double tol = 1e-3;
  std::uint64_t seed = 1;
  int max_regen = 64;
  long series_K_max = 1'000'000;
};

struct ReportRow {
  std::string family;
  std::string params;  // semicolon-separated key=value pairs, never contains a comma
  int n_vertices = 0;
  long n_edges = 0;
  double log_tau = 0.0;
  double normalized = 0.0;  // log_tau / n_vertices
  double reference = 0.0;
  double gap = 0.0;  // normalized - reference
  double certified_lo = 0.0;
  double certified_hi = 0.0;
  std::uint64_t seed = 0;
  bool converged = true;
  std::string mode;
};

struct ConvergenceReport {
  std::vector<ReportRow> rows;  // sorted by n_vertices
  std::uint64_t seed = 0;
  double tolerance = 0.0;
  double wall_seconds = 0.0;
  bool all_converged = true;
};

// A graph family indexed by one integer size. Deterministic families ignore
// the seed; randomized ones must be a pure function of (size, seed).
struct SizedFamily {
  std::string name;
  std::string params;
  bool randomized = false;
  std::function<MultiGraph(int size, std::uint64_t seed)> make;
};

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct CountedLogTau {
  double log_tau = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool converged = true;
  const char* mode = "exact";
};

inline CountedLogTau count_log_tau(const MultiGraph& g, const HarnessOptions& opt) {
  CountMode mode = opt.mode;
  if (mode == CountMode::automatic)
    mode = g.vertex_count <= opt.exact_cutover ? CountMode::exact : CountMode::series;
  CountedLogTau out;
  switch (mode) {
    case CountMode::exact: {
      const double lt = count_spanning_trees(g).log();
      out = {lt, lt, lt, true, "exact"};
      break;
    }
    case CountMode::eigen: {
      const double lt = log_tau_float(g);
      out = {lt, lt, lt, true, "eigen"};
      break;
    }
    case CountMode::series: {
      SeriesOptions sopt;
      sopt.K_max = opt.series_K_max;
      const SeriesLogTau s = series_log_tau(g, opt.tol, sopt);
      out = {s.value, s.lo, s.hi, s.converged, "series"};
      break;
    }
    case CountMode::automatic:
      throw std::logic_error("unresolved count mode");
  }
  return out;
}

inline ReportRow finish_row(std::string family, std::string params, const MultiGraph& g, double reference,
                            std::uint64_t used_seed, const HarnessOptions& opt) {
  const CountedLogTau c = count_log_tau(g, opt);
  ReportRow r;
  r.family = std::move(family);
  r.params = std::move(params);
  r.n_vertices = g.vertex_count;
  r.n_edges = long(g.edges.size());
  r.log_tau = c.log_tau;
  r.normalized = c.log_tau / double(g.vertex_count);
  r.reference = reference;
  r.gap = r.normalized - reference;
  r.certified_lo = c.lo;
  r.certified_hi = c.hi;
  r.seed = used_seed;
  r.converged = c.converged;
  r.mode = c.mode;
  return r;
}

// Builds one connected instance, regenerating disconnected randomized draws
// with consecutive seeds.
inline MultiGraph connected_instance(const SizedFamily& fam, int size, std::uint64_t& seed, int max_regen) {
  for (int attempt = 0;; ++attempt) {
    MultiGraph g = fam.make(size, seed);
    if (g.vertex_count >= 1 && is_connected(g)) return g;
    if (!fam.randomized)
      throw std::runtime_error("family '" + fam.name + "' produced a disconnected graph at size " +
                               std::to_string(size));
    if (attempt + 1 >= max_regen)
      throw std::runtime_error("family '" + fam.name + "' stayed disconnected after " +
                               std::to_string(max_regen) + " seeds at size " + std::to_string(size));
    ++seed;
  }
}

inline void sort_rows(std::vector<ReportRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ReportRow& a, const ReportRow& b) { return a.n_vertices < b.n_vertices; });
}

inline void finish_report(ConvergenceReport& rep, std::chrono::steady_clock::time_point start) {
  sort_rows(rep.rows);
  rep.all_converged = std::all_of(rep.rows.begin(), rep.rows.end(), [](const ReportRow& r) { return r.converged; });
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline std::string format_param(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

}  // namespace detail

// Normalized log-complexity of a family along a size schedule, against a fixed
// reference entropy. Rows that fail series convergence are kept and flagged.
inline ConvergenceReport run_convergence(const SizedFamily& fam, const std::vector<int>& sizes, double reference,
                                         const HarnessOptions& opt = {}) {
  const auto start = std::chrono::steady_clock::now();
  ConvergenceReport rep;
  rep.seed = opt.seed;
  rep.tolerance = opt.tol;
  for (int size : sizes) {
    std::uint64_t seed = detail::mix_seed(opt.seed, std::uint64_t(size));
    const MultiGraph g = detail::connected_instance(fam, size, seed, opt.max_regen);
    rep.rows.push_back(detail::finish_row(fam.name, fam.params + ";size=" + std::to_string(size), g, reference,
                                          seed, opt));
  }
  detail::finish_report(rep, start);
  return rep;
}

enum class Perturbation { thin, hybrid };

struct StabilityOptions {
  Perturbation kind = Perturbation::thin;
  double fraction = 0.1;             // thin: edge-removal budget as a fraction of |V|
  int bridges = 1;                   // hybrid: number of joining edges
  const SizedFamily* partner = nullptr;  // hybrid: second family
  double partner_reference = 0.0;    // hybrid: its limit entropy
};

// Perturbed family against the prediction that the limit is stable: thinning
// keeps the base reference, a bridged hybrid gets the vertex-weighted mix of
// the two references.
inline ConvergenceReport run_stability(const SizedFamily& base, double base_reference,
                                       const std::vector<int>& sizes, const StabilityOptions& sopt,
                                       const HarnessOptions& opt = {}) {
  const auto start = std::chrono::steady_clock::now();
  ConvergenceReport rep;
  rep.seed = opt.seed;
  rep.tolerance = opt.tol;
  for (int size : sizes) {
    std::uint64_t seed = detail::mix_seed(opt.seed, (std::uint64_t(size) << 2) | 1);
    if (sopt.kind == Perturbation::thin) {
      const MultiGraph g = detail::connected_instance(base, size, seed, opt.max_regen);
      const MultiGraph thinned = thin_subgraph(g, sopt.fraction, detail::mix_seed(seed, 2));
      rep.rows.push_back(detail::finish_row(base.name + "-thin",
                                            base.params + ";f=" + detail::format_param(sopt.fraction) +
                                                ";size=" + std::to_string(size),
                                            thinned, base_reference, seed, opt));
    } else {
      if (sopt.partner == nullptr) throw std::invalid_argument("hybrid stability needs a partner family");
      std::uint64_t seed2 = detail::mix_seed(opt.seed, (std::uint64_t(size) << 2) | 2);
      const MultiGraph g1 = detail::connected_instance(base, size, seed, opt.max_regen);
      const MultiGraph g2 = detail::connected_instance(*sopt.partner, size, seed2, opt.max_regen);
      const MultiGraph joined = hybrid_join(g1, g2, sopt.bridges, detail::mix_seed(seed, 3));
      const double n1 = g1.vertex_count, n2 = g2.vertex_count;
      const double reference = (n1 * base_reference + n2 * sopt.partner_reference) / (n1 + n2);
      rep.rows.push_back(detail::finish_row(base.name + "+" + sopt.partner->name,
                                            base.params + ";k=" + std::to_string(sopt.bridges) +
                                                ";size=" + std::to_string(size),
                                            joined, reference, seed, opt));
    }
  }
  detail::finish_report(rep, start);
  return rep;
}

// Families whose degree grows with n: the complete graph against log(n-1) and
// the Erdos-Renyi giant at p_n = 2 log(n) / n against log(p_n n). The complete
// rows use the closed form log tau = (n-2) log n, which is exact.
inline ConvergenceReport run_unbounded_degree(const std::vector<int>& ns, const HarnessOptions& opt = {}) {
  const auto start = std::chrono::steady_clock::now();
  ConvergenceReport rep;
  rep.seed = opt.seed;
  rep.tolerance = opt.tol;
  for (int n : ns) {
    if (n < 3) throw std::invalid_argument("unbounded-degree schedule needs n >= 3");
    ReportRow r;
    r.family = "complete";
    r.params = "n=" + std::to_string(n);
    r.n_vertices = n;
    r.n_edges = long(n) * (n - 1) / 2;
    r.log_tau = double(n - 2) * std::log(double(n));
    r.normalized = r.log_tau / double(n);
    r.reference = std::log(double(n - 1));
    r.gap = r.normalized - r.reference;
    r.certified_lo = r.log_tau;
    r.certified_hi = r.log_tau;
    r.seed = opt.seed;
    r.mode = "exact";
    rep.rows.push_back(std::move(r));

    const double c = 2.0 * std::log(double(n));
    std::uint64_t seed = detail::mix_seed(opt.seed, std::uint64_t(n));
    SizedFamily er{"er-giant", "c=" + detail::format_param(c), true,
                   [c](int size, std::uint64_t s) { return er_giant(size, c, s); }};
    const MultiGraph g = detail::connected_instance(er, n, seed, opt.max_regen);
    rep.rows.push_back(detail::finish_row(er.name, er.params + ";size=" + std::to_string(n), g,
                                          std::log(c), seed, opt));
  }
  detail::finish_report(rep, start);
  return rep;
}

// Named family constructors.

inline SizedFamily torus_family(int d) {
  if (d < 1) throw std::invalid_argument("torus dimension must be at least 1");
  return {"torus", "d=" + std::to_string(d), false,
          [d](int size, std::uint64_t) { return torus(d, size); }};
}

inline SizedFamily box_family(int d) {
  if (d < 1) throw std::invalid_argument("box dimension must be at least 1");
  return {"box", "d=" + std::to_string(d), false,
          [d](int size, std::uint64_t) { return box(d, size); }};
}

inline SizedFamily random_regular_family(int d) {
  if (d < 3) throw std::invalid_argument("random regular family needs degree at least 3");
  return {"random-regular", "d=" + std::to_string(d), true,
          [d](int size, std::uint64_t seed) { return random_regular(size, d, seed); }};
}

inline SizedFamily er_giant_family(double c) {
  if (!(c > 0)) throw std::invalid_argument("mean degree must be positive");
  return {"er-giant", "c=" + detail::format_param(c), true,
          [c](int size, std::uint64_t seed) { return er_giant(size, c, seed); }};
}

inline SizedFamily tree_ball_family() {
  return {"tree-ball", "", false, [](int size, std::uint64_t) { return tree_ball_sequence(size); }};
}

inline SizedFamily complete_family() {
  return {"complete", "", false, [](int size, std::uint64_t) {
            if (size < 2 || size > 4000) throw std::invalid_argument("complete family supports 2..4000 vertices");
            std::vector<Edge<double>> edges;
            edges.reserve(std::size_t(size) * (size - 1) / 2);
            for (int u = 0; u < size; ++u)
              for (int v = u + 1; v < size; ++v) edges.push_back({u, v, 1.0});
            return build_graph(edges, size);
          }};
}

// "torus:2", "box:3", "random-regular:3", "er-giant:4", "tree-ball", "complete".
inline SizedFamily parse_family(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  auto int_arg = [&](const char* what) {
    if (arg.empty()) throw std::invalid_argument(std::string("family '") + what + "' needs an integer parameter");
    return std::stoi(arg);
  };
  if (name == "torus") return torus_family(int_arg("torus"));
  if (name == "box") return box_family(int_arg("box"));
  if (name == "random-regular") return random_regular_family(int_arg("random-regular"));
  if (name == "er-giant") {
    if (arg.empty()) throw std::invalid_argument("family 'er-giant' needs a mean degree parameter");
    return er_giant_family(std::stod(arg));
  }
  if (name == "tree-ball") return tree_ball_family();
  if (name == "complete") return complete_family();
  throw std::invalid_argument("unknown family '" + name + "'");
}

// CSV with a frozen header; %.12g throughout, so equal reports serialize to
// identical bytes.
inline std::string report_csv(const ConvergenceReport& rep) {
  std::string out = "family,params,n_vertices,n_edges,log_tau,normalized,reference,gap,certified_lo,certified_hi,seed\n";
  for (const ReportRow& r : rep.rows) {
    out += r.family;
    out += ',';
    out += r.params;
    out += ',';
    out += std::to_string(r.n_vertices);
    out += ',';
    out += std::to_string(r.n_edges);
    out += ',';
    out += detail::format_double(r.log_tau);
    out += ',';
    out += detail::format_double(r.normalized);
    out += ',';
    out += detail::format_double(r.reference);
    out += ',';
    out += detail::format_double(r.gap);
    out += ',';
    out += detail::format_double(r.certified_lo);
    out += ',';
    out += detail::format_double(r.certified_hi);
    out += ',';
    out += std::to_string(r.seed);
    out += '\n';
  }
  return out;
}

inline void write_report_csv(const std::string& path, const ConvergenceReport& rep) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << report_csv(rep);
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

// Companion gnuplot script plotting the normalized values and the reference
// against n_vertices.
inline std::string gnuplot_script(const std::string& csv_path, const std::string& title) {
  std::string s;
  s += "set datafile separator \",\"\n";
  s += "set title \"" + title + "\"\n";
  s += "set xlabel \"vertices\"\n";
  s += "set ylabel \"log tau / n\"\n";
  s += "set logscale x\n";
  s += "set key left bottom\n";
  s += "plot \"" + csv_path + "\" skip 1 using 3:6 with linespoints title \"normalized\", \\\n";
  s += "     \"" + csv_path + "\" skip 1 using 3:7 with lines dashtype 2 title \"reference\"\n";
  return s;
}

inline void write_gnuplot_script(const std::string& path, const std::string& csv_path, const std::string& title) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << gnuplot_script(csv_path, title);
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace arboreal
