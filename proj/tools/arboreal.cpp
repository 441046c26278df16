#include "arboreal/exact.hpp"
#include "arboreal/harness.hpp"
#include "arboreal/models.hpp"
#include "arboreal/oracle.hpp"
#include "arboreal/series.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace arboreal;
using nlohmann::json;

// Edge list format: '#' comments, one "n_vertices n_edges" line, then one
// "u v [w]" line per edge. Weights accept integers and a/b rationals.
struct EdgeFile {
  int n = 0;
  std::vector<std::tuple<int, int, std::string>> edges;
};

EdgeFile read_edge_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  EdgeFile out;
  std::string line;
  long declared = -1;
  while (std::getline(f, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream is(line);
    if (declared < 0) {
      if (is >> out.n >> declared) {
        if (out.n < 1 || declared < 0) throw std::runtime_error("bad header in '" + path + "'");
      }
      continue;
    }
    int u, v;
    if (!(is >> u >> v)) continue;
    std::string w;
    if (!(is >> w)) w = "1";
    out.edges.emplace_back(u, v, w);
  }
  if (declared < 0) throw std::runtime_error("'" + path + "' has no header line");
  if (long(out.edges.size()) != declared)
    throw std::runtime_error("'" + path + "' declares " + std::to_string(declared) + " edges but contains " +
                             std::to_string(out.edges.size()));
  return out;
}

Rational parse_weight(const std::string& t) {
  if (t.find('.') != std::string::npos)
    throw std::runtime_error("edge weights must be integers or a/b rationals, got '" + t + "'");
  return Rational(t);
}

RationalGraph to_rational_graph(const EdgeFile& ef) {
  std::vector<Edge<Rational>> edges;
  edges.reserve(ef.edges.size());
  for (const auto& [u, v, w] : ef.edges) edges.push_back({u, v, parse_weight(w)});
  return build_graph(std::move(edges), ef.n);
}

MultiGraph to_multigraph(const EdgeFile& ef) {
  std::vector<Edge<double>> edges;
  edges.reserve(ef.edges.size());
  for (const auto& [u, v, w] : ef.edges)
    edges.push_back({u, v, parse_weight(w).convert_to<double>()});
  return build_graph(std::move(edges), ef.n);
}

void write_edge_file(std::ostream& os, const MultiGraph& g) {
  os << "# arboreal edge list: n_vertices n_edges, then u v w per edge\n";
  os << g.vertex_count << ' ' << g.edges.size() << '\n';
  for (const auto& e : g.edges) os << e.u << ' ' << e.v << ' ' << detail::format_param(e.w) << '\n';
}

MultiGraph load_or_generate(const std::string& file, const std::string& family_spec, int size,
                            std::uint64_t seed) {
  if (!file.empty()) return to_multigraph(read_edge_file(file));
  if (family_spec.empty()) throw std::runtime_error("give either an edge list file or --family with --size");
  return parse_family(family_spec).make(size, seed);
}

std::vector<int> parse_int_list(const std::string& s, const char* what) {
  std::vector<int> out;
  std::istringstream is(s);
  for (std::string tok; std::getline(is, tok, ',');)
    if (!tok.empty()) out.push_back(std::stoi(tok));
  if (out.empty()) throw std::runtime_error(std::string("empty ") + what + " list");
  return out;
}

CountMode parse_mode(const std::string& s) {
  if (s == "auto") return CountMode::automatic;
  if (s == "exact") return CountMode::exact;
  if (s == "eigen") return CountMode::eigen;
  if (s == "series") return CountMode::series;
  throw std::runtime_error("unknown mode '" + s + "' (auto|exact|eigen|series)");
}

int lattice_grid(int d) {
  if (d == 1) return 8192;
  if (d == 2) return 2048;
  if (d == 3) return 256;
  int N = 4;
  while (d * std::log2(2.0 * N) <= 24.0) N *= 2;
  return N;
}

// Limit entropy for --reference auto; families without a closed-form limit
// fall back to zero, so their gap column reads as the raw normalized value.
double resolve_reference(const std::string& ref, const std::string& family_spec) {
  if (ref != "auto") return std::stod(ref);
  const auto colon = family_spec.find(':');
  const std::string name = family_spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : family_spec.substr(colon + 1);
  if (name == "torus" || name == "box") {
    const int d = std::stoi(arg);
    return entropy_hypercubic(d, lattice_grid(d)).value;
  }
  if (name == "random-regular") return entropy_regular_tree(std::stoi(arg)).value;
  return 0.0;
}

EntropyEstimate evaluate_model(const std::string& spec, double tol, int grid, bool force_series) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  std::vector<int> args;
  if (colon != std::string::npos)
    for (int v : parse_int_list(spec.substr(colon + 1), "model parameter")) args.push_back(v);
  auto one_arg = [&] {
    if (args.size() != 1) throw std::runtime_error("model '" + name + "' takes one integer parameter");
    return args[0];
  };
  if (name == "regular-tree") {
    const int d = one_arg();
    if (force_series) return entropy_series(std::make_shared<RegularTreeOracle>(d), tol);
    return entropy_regular_tree(d);
  }
  if (name == "free-product") {
    if (args.size() < 2) throw std::runtime_error("free-product needs at least two factor sizes");
    return entropy_free_product(args, std::min(tol, 1e-9));
  }
  if (name == "hypercubic") {
    const int d = one_arg();
    return entropy_hypercubic(d, grid > 0 ? grid : lattice_grid(d));
  }
  if (name == "lattice-series") return entropy_series(std::make_shared<ZdOracle>(one_arg()), tol);
  if (name == "canopy-mixture") return entropy_series(canopy_mixture(one_arg()), tol);
  throw std::runtime_error("unknown model '" + name +
                           "' (regular-tree|free-product|hypercubic|lattice-series|canopy-mixture)");
}

json row_json(const ReportRow& r) {
  return {{"family", r.family},   {"params", r.params},         {"n_vertices", r.n_vertices},
          {"n_edges", r.n_edges}, {"log_tau", r.log_tau},       {"normalized", r.normalized},
          {"reference", r.reference}, {"gap", r.gap},           {"certified_lo", r.certified_lo},
          {"certified_hi", r.certified_hi}, {"seed", r.seed},   {"converged", r.converged},
          {"mode", r.mode}};
}

json report_json(const ConvergenceReport& rep) {
  json rows = json::array();
  for (const auto& r : rep.rows) rows.push_back(row_json(r));
  return {{"seed", rep.seed},
          {"tolerance", rep.tolerance},
          {"wall_seconds", rep.wall_seconds},
          {"all_converged", rep.all_converged},
          {"rows", rows}};
}

void print_report(const ConvergenceReport& rep, bool as_json) {
  if (as_json) {
    std::cout << report_json(rep).dump(2) << '\n';
    return;
  }
  std::printf("%-24s %10s %10s %14s %12s %10s %5s\n", "family", "vertices", "edges", "log_tau", "normalized",
              "gap", "ok");
  for (const auto& r : rep.rows)
    std::printf("%-24s %10d %10ld %14.6f %12.8f %10.2e %5s\n", r.family.c_str(), r.n_vertices, r.n_edges,
                r.log_tau, r.normalized, r.gap, r.converged ? "yes" : "FLAG");
  std::printf("seed %llu, wall %.2fs, %s\n", (unsigned long long)rep.seed, rep.wall_seconds,
              rep.all_converged ? "all rows converged" : "some rows failed to certify");
}

int emit_report(const ConvergenceReport& rep, bool as_json, const std::string& csv, const std::string& plot,
                const std::string& title) {
  if (!csv.empty()) write_report_csv(csv, rep);
  if (!plot.empty()) {
    if (csv.empty()) throw std::runtime_error("--plot needs --csv so the script has data to read");
    write_gnuplot_script(plot, csv, title);
  }
  print_report(rep, as_json);
  return rep.all_converged ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"arboreal: exact, series, and limit-model spanning tree complexity"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  bool as_json = false;
  int threads = 1;
  std::string csv_path, plot_path;
  app.add_option("--seed", seed, "seed for randomized families");
  app.add_flag("--json", as_json, "machine-readable output");
  app.add_option("--csv", csv_path, "write the report rows as CSV (converge, stability)");
  app.add_option("--threads", threads, "worker threads; affects speed only, never results")
      ->check(CLI::PositiveNumber);

  std::string file, family_spec, sizes_str, mode_str = "auto", reference_str = "auto";
  std::string model_spec, out_path, perturb = "thin", partner_spec, partner_ref_str = "auto";
  int size = 0, grid = 0, cutover = 400, bridges = 1;
  double tol = 1e-4, fraction = 0.1;

  auto* count_cmd = app.add_subcommand("count", "exact spanning tree count of an edge list");
  count_cmd->add_option("file", file, "edge list path");
  count_cmd->add_option("--family", family_spec, "generate instead of reading a file");
  count_cmd->add_option("--size", size, "family size parameter");

  auto* series_cmd = app.add_subcommand("series", "certified series evaluation of log tau");
  series_cmd->add_option("file", file, "edge list path");
  series_cmd->add_option("--family", family_spec, "generate instead of reading a file");
  series_cmd->add_option("--size", size, "family size parameter");
  series_cmd->add_option("--tol", tol, "certified truncation tolerance");

  auto* entropy_cmd = app.add_subcommand("entropy", "tree entropy of an infinite limit model");
  entropy_cmd->add_option("--model", model_spec, "regular-tree:d, free-product:s1,s2,..., hypercubic:d, "
                                                 "lattice-series:d, canopy-mixture:M")
      ->required();
  entropy_cmd->add_option("--tol", tol, "certified tolerance for series models");
  entropy_cmd->add_option("--grid", grid, "quadrature grid per axis for hypercubic");
  bool force_series = false;
  entropy_cmd->add_flag("--series", force_series, "evaluate regular-tree by the local series instead of closed form");

  auto* gen_cmd = app.add_subcommand("gen", "generate a family instance as an edge list");
  gen_cmd->add_option("--family", family_spec, "family spec, e.g. torus:2 or random-regular:3")->required();
  gen_cmd->add_option("--size", size, "family size parameter")->required();
  gen_cmd->add_option("--out", out_path, "output path (default stdout)");

  auto* converge_cmd = app.add_subcommand("converge", "normalized log tau along a size schedule");
  converge_cmd->add_option("--family", family_spec, "family spec");
  converge_cmd->add_option("--sizes", sizes_str, "comma-separated size schedule")->required();
  bool unbounded = false;
  converge_cmd->add_flag("--unbounded", unbounded,
                         "unbounded-degree schedule: complete graphs vs log(n-1) and the "
                         "Erdos-Renyi giant at p = 2 log(n)/n vs log(p n)");
  converge_cmd->add_option("--mode", mode_str, "auto|exact|eigen|series");
  converge_cmd->add_option("--reference", reference_str, "limit entropy, or 'auto'");
  converge_cmd->add_option("--tol", tol, "series tolerance");
  converge_cmd->add_option("--cutover", cutover, "auto mode switches to series above this vertex count");
  converge_cmd->add_option("--plot", plot_path, "write a gnuplot script next to the CSV");

  auto* stability_cmd = app.add_subcommand("stability", "perturbed families against the stable limit");
  stability_cmd->add_option("--family", family_spec, "base family spec")->required();
  stability_cmd->add_option("--sizes", sizes_str, "comma-separated size schedule")->required();
  stability_cmd->add_option("--perturb", perturb, "thin|hybrid");
  stability_cmd->add_option("--fraction", fraction, "thin: removal budget as a fraction of |V|");
  stability_cmd->add_option("--partner", partner_spec, "hybrid: second family spec");
  stability_cmd->add_option("--partner-reference", partner_ref_str, "hybrid: partner limit entropy, or 'auto'");
  stability_cmd->add_option("--bridges", bridges, "hybrid: number of joining edges");
  stability_cmd->add_option("--mode", mode_str, "auto|exact|eigen|series");
  stability_cmd->add_option("--reference", reference_str, "base limit entropy, or 'auto'");
  stability_cmd->add_option("--tol", tol, "series tolerance");
  stability_cmd->add_option("--cutover", cutover, "auto mode switches to series above this vertex count");
  stability_cmd->add_option("--plot", plot_path, "write a gnuplot script next to the CSV");

  auto* arb_cmd = app.add_subcommand("arborescence", "exact arborescence weight of a rational chain");
  arb_cmd->add_option("file", file, "chain file: n, then n rows of n rational entries")->required();

  for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; })) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  Eigen::setNbThreads(threads);

  try {
    if (!csv_path.empty() && !converge_cmd->parsed() && !stability_cmd->parsed())
      throw std::runtime_error("--csv applies to converge and stability");

    if (count_cmd->parsed()) {
      TreeCount tc;
      int n_vertices;
      long n_edges;
      if (!file.empty()) {
        const RationalGraph g = to_rational_graph(read_edge_file(file));
        n_vertices = g.vertex_count;
        n_edges = long(g.edges.size());
        tc = count_spanning_trees(g);
      } else {
        const MultiGraph g = load_or_generate(file, family_spec, size, seed);
        n_vertices = g.vertex_count;
        n_edges = long(g.edges.size());
        tc = count_spanning_trees(g);
      }
      if (as_json)
        std::cout << json{{"tau", tc.str()}, {"log_tau", tc.log()}, {"n_vertices", n_vertices},
                          {"n_edges", n_edges}}.dump(2)
                  << '\n';
      else
        std::printf("tau = %s\nlog_tau = %.12g\n", tc.str().c_str(), tc.log());
      return 0;
    }

    if (series_cmd->parsed()) {
      const MultiGraph g = load_or_generate(file, family_spec, size, seed);
      const SeriesLogTau s = series_log_tau(g, tol);
      if (as_json)
        std::cout << json{{"log_tau", s.value}, {"certified_lo", s.lo},     {"certified_hi", s.hi},
                          {"K_used", s.K_used}, {"converged", s.converged}, {"n_vertices", g.vertex_count}}
                         .dump(2)
                  << '\n';
      else
        std::printf("log_tau = %.12g in [%.12g, %.12g], K = %ld, %s\n", s.value, s.lo, s.hi, s.K_used,
                    s.converged ? "converged" : "NOT CONVERGED");
      return s.converged ? 0 : 2;
    }

    if (entropy_cmd->parsed()) {
      const EntropyEstimate e = evaluate_model(model_spec, tol, grid, force_series);
      if (as_json)
        std::cout << json{{"value", e.value},   {"lo", e.lo},
                          {"hi", e.hi},         {"method", e.method},
                          {"converged", e.converged}, {"K_used", e.K_used}}
                         .dump(2)
                  << '\n';
      else
        std::printf("entropy = %.12g in [%.12g, %.12g] (%s%s)\n", e.value, e.lo, e.hi, e.method.c_str(),
                    e.converged ? "" : ", NOT CONVERGED");
      return e.converged ? 0 : 2;
    }

    if (gen_cmd->parsed()) {
      const MultiGraph g = parse_family(family_spec).make(size, seed);
      if (out_path.empty()) {
        write_edge_file(std::cout, g);
      } else {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open '" + out_path + "' for writing");
        write_edge_file(f, g);
      }
      return 0;
    }

    if (converge_cmd->parsed()) {
      HarnessOptions opt;
      opt.mode = parse_mode(mode_str);
      opt.exact_cutover = cutover;
      opt.tol = tol;
      opt.seed = seed;
      const std::vector<int> sizes = parse_int_list(sizes_str, "size");
      if (unbounded) {
        if (!family_spec.empty()) throw std::runtime_error("--unbounded uses its own families; drop --family");
        return emit_report(run_unbounded_degree(sizes, opt), as_json, csv_path, plot_path, "unbounded degree");
      }
      if (family_spec.empty()) throw std::runtime_error("converge needs --family or --unbounded");
      const SizedFamily fam = parse_family(family_spec);
      const double reference = resolve_reference(reference_str, family_spec);
      const ConvergenceReport rep = run_convergence(fam, sizes, reference, opt);
      return emit_report(rep, as_json, csv_path, plot_path, family_spec);
    }

    if (stability_cmd->parsed()) {
      HarnessOptions opt;
      opt.mode = parse_mode(mode_str);
      opt.exact_cutover = cutover;
      opt.tol = tol;
      opt.seed = seed;
      const SizedFamily fam = parse_family(family_spec);
      const double reference = resolve_reference(reference_str, family_spec);
      StabilityOptions sopt;
      SizedFamily partner;
      if (perturb == "thin") {
        sopt.kind = Perturbation::thin;
        sopt.fraction = fraction;
      } else if (perturb == "hybrid") {
        if (partner_spec.empty()) throw std::runtime_error("hybrid stability needs --partner");
        sopt.kind = Perturbation::hybrid;
        sopt.bridges = bridges;
        partner = parse_family(partner_spec);
        sopt.partner = &partner;
        sopt.partner_reference = resolve_reference(partner_ref_str, partner_spec);
      } else {
        throw std::runtime_error("unknown perturbation '" + perturb + "' (thin|hybrid)");
      }
      const ConvergenceReport rep =
          run_stability(fam, reference, parse_int_list(sizes_str, "size"), sopt, opt);
      return emit_report(rep, as_json, csv_path, plot_path, family_spec + " " + perturb);
    }

    if (arb_cmd->parsed()) {
      std::ifstream f(file);
      if (!f) throw std::runtime_error("cannot open '" + file + "'");
      int n;
      if (!(f >> n) || n < 1) throw std::runtime_error("chain file must start with the state count");
      DenseMatrix<Rational> P(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          std::string tok;
          if (!(f >> tok)) throw std::runtime_error("chain file ended early");
          P(i, j) = parse_weight(tok);
        }
      const ChainMatrix chain = make_chain(std::move(P));
      const Rational w = arborescence_weight_exact(chain);
      const double lw = arborescence_log_weight(chain);
      if (as_json)
        std::cout << json{{"weight", rational_to_string(w)}, {"log_weight", lw}, {"n_states", n}}.dump(2)
                  << '\n';
      else
        std::printf("weight = %s\nlog_weight = %.12g\n", rational_to_string(w).c_str(), lw);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
