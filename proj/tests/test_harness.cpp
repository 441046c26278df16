#include "arboreal/harness.hpp"

#include "arboreal/exact.hpp"
#include "helpers.hpp"

#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

using namespace arboreal;

namespace {

constexpr double kCatalan = 0.915965594177219015054603514932;
const double kSquareEntropy = 4.0 * kCatalan / std::numbers::pi;
const double kTree3Entropy = std::log(4.0 / std::sqrt(3.0));

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("torus convergence report approaches the square lattice entropy") {
  HarnessOptions opt;
  opt.mode = CountMode::eigen;
  ConvergenceReport rep = run_convergence(torus_family(2), {32, 4, 16, 8}, kSquareEntropy, opt);

  REQUIRE(rep.rows.size() == 4);
  CHECK(rep.all_converged);
  CHECK(rep.wall_seconds > 0.0);
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const ReportRow& r = rep.rows[i];
    CHECK(r.family == "torus");
    CHECK(r.mode == "eigen");
    CHECK(r.reference == kSquareEntropy);
    CHECK(r.normalized == r.log_tau / r.n_vertices);
    if (i > 0) {
      CHECK(rep.rows[i - 1].n_vertices < r.n_vertices);
      CHECK(std::abs(r.gap) < std::abs(rep.rows[i - 1].gap));
    }
  }
  CHECK(rep.rows.front().n_vertices == 16);
  CHECK(rep.rows.front().n_edges == 32);
  CHECK(std::abs(rep.rows.back().gap) < 0.05);

  const double exact4 = count_spanning_trees(torus(2, 4)).log();
  CHECK(rep.rows.front().log_tau == doctest::Approx(exact4).epsilon(1e-9));
}

TEST_CASE("tree ball rows have identically zero normalized complexity") {
  ConvergenceReport rep = run_convergence(tree_ball_family(), {1, 2, 3, 4}, 0.0);
  REQUIRE(rep.rows.size() == 4);
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const ReportRow& r = rep.rows[i];
    CHECK(r.mode == "exact");
    CHECK(r.n_vertices == 3 * (1 << (i + 1)) - 2);
    CHECK(r.log_tau == 0.0);
    CHECK(r.normalized == 0.0);
    CHECK(r.gap == 0.0);
    CHECK(r.certified_lo == 0.0);
    CHECK(r.certified_hi == 0.0);
  }
}

TEST_CASE("exact rows reproduce the rational count bit for bit") {
  HarnessOptions opt;
  opt.mode = CountMode::exact;
  opt.seed = 7;
  const SizedFamily fam = random_regular_family(3);
  ConvergenceReport rep = run_convergence(fam, {8, 10, 12}, kTree3Entropy, opt);
  REQUIRE(rep.rows.size() == 3);
  const int sizes[] = {8, 10, 12};
  for (int i = 0; i < 3; ++i) {
    const ReportRow& r = rep.rows[i];
    const MultiGraph g = fam.make(sizes[i], r.seed);
    const double recount = count_spanning_trees(g).log();
    CHECK(r.log_tau == recount);
    CHECK(r.normalized == recount / r.n_vertices);
    CHECK(r.certified_lo == r.log_tau);
    CHECK(r.certified_hi == r.log_tau);
  }
}

TEST_CASE("automatic mode switches from exact to series at the cutover") {
  HarnessOptions opt;
  opt.exact_cutover = 40;
  opt.seed = 11;
  ConvergenceReport rep = run_convergence(random_regular_family(3), {20, 60}, kTree3Entropy, opt);
  REQUIRE(rep.rows.size() == 2);
  CHECK(rep.rows[0].mode == "exact");
  CHECK(rep.rows[0].certified_lo == rep.rows[0].certified_hi);
  CHECK(rep.rows[1].mode == "series");
  CHECK(rep.rows[1].converged);
  CHECK(rep.rows[1].certified_lo < rep.rows[1].certified_hi);
  CHECK(rep.rows[1].certified_lo <= rep.rows[1].log_tau);
  CHECK(rep.rows[1].log_tau <= rep.rows[1].certified_hi);
}

TEST_CASE("series rows that fail to certify are flagged, not dropped") {
  HarnessOptions opt;
  opt.mode = CountMode::series;
  opt.tol = 1e-10;
  opt.series_K_max = 4;
  opt.seed = 3;
  ConvergenceReport rep = run_convergence(random_regular_family(3), {60}, kTree3Entropy, opt);
  REQUIRE(rep.rows.size() == 1);
  CHECK_FALSE(rep.rows[0].converged);
  CHECK_FALSE(rep.all_converged);
}

TEST_CASE("csv serialization is frozen and byte identical across runs") {
  HarnessOptions opt;
  opt.mode = CountMode::exact;
  opt.seed = 5;
  const SizedFamily fam = random_regular_family(3);
  const std::string a = report_csv(run_convergence(fam, {8, 12}, kTree3Entropy, opt));
  const std::string b = report_csv(run_convergence(fam, {8, 12}, kTree3Entropy, opt));
  CHECK(a == b);

  std::istringstream lines(a);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "family,params,n_vertices,n_edges,log_tau,normalized,reference,gap,certified_lo,certified_hi,seed");
  int data_lines = 0;
  for (std::string line; std::getline(lines, line);) {
    ++data_lines;
    CHECK(std::count(line.begin(), line.end(), ',') == 10);
    CHECK(line.rfind("random-regular,d=3;size=", 0) == 0);
  }
  CHECK(data_lines == 2);

  const std::string path = "harness_report_tmp.csv";
  write_report_csv(path, run_convergence(fam, {8, 12}, kTree3Entropy, opt));
  std::ifstream f(path, std::ios::binary);
  std::string from_disk((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  CHECK(from_disk == a);
  std::remove(path.c_str());

  const std::string plot = gnuplot_script("report.csv", "torus gaps");
  CHECK(plot.find("plot") != std::string::npos);
  CHECK(plot.find("report.csv") != std::string::npos);
  CHECK(plot.find("using 3:6") != std::string::npos);
}

TEST_CASE("thinning perturbs the count but keeps the reference reachable") {
  HarnessOptions opt;
  opt.mode = CountMode::eigen;
  opt.seed = 9;
  StabilityOptions sopt;
  sopt.kind = Perturbation::thin;
  sopt.fraction = 0.1;
  ConvergenceReport thin = run_stability(torus_family(2), kSquareEntropy, {8, 12}, sopt, opt);
  ConvergenceReport plain = run_convergence(torus_family(2), {8, 12}, kSquareEntropy, opt);
  REQUIRE(thin.rows.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(thin.rows[i].family == "torus-thin");
    CHECK(thin.rows[i].n_vertices == plain.rows[i].n_vertices);
    CHECK(thin.rows[i].n_edges < plain.rows[i].n_edges);
    CHECK(thin.rows[i].normalized < plain.rows[i].normalized);
    CHECK(std::abs(thin.rows[i].gap) < 0.2);
  }
}

TEST_CASE("hybrid join tracks the vertex weighted mix of the two references") {
  HarnessOptions opt;
  opt.mode = CountMode::eigen;
  opt.seed = 13;
  const SizedFamily partner = random_regular_family(3);
  StabilityOptions sopt;
  sopt.kind = Perturbation::hybrid;
  sopt.bridges = 1;
  sopt.partner = &partner;
  sopt.partner_reference = kTree3Entropy;
  ConvergenceReport rep = run_stability(torus_family(2), kSquareEntropy, {12, 16}, sopt, opt);
  REQUIRE(rep.rows.size() == 2);
  for (const ReportRow& r : rep.rows) {
    CHECK(r.family == "torus+random-regular");
    CHECK(std::abs(r.gap) < 0.1);
  }
  CHECK(rep.rows[0].n_vertices == 12 * 12 + 12);
  CHECK(rep.rows[1].n_vertices == 16 * 16 + 16);

  StabilityOptions missing;
  missing.kind = Perturbation::hybrid;
  CHECK_THROWS_AS(run_stability(torus_family(2), kSquareEntropy, {8}, missing, opt), std::invalid_argument);
}

TEST_CASE("unbounded degree schedule closes the gap to log(n-1) and log(p n)") {
  HarnessOptions opt;
  opt.mode = CountMode::eigen;
  opt.seed = 17;
  ConvergenceReport rep = run_unbounded_degree({10, 100, 1000}, opt);
  REQUIRE(rep.rows.size() == 6);

  std::vector<const ReportRow*> complete, giant;
  for (const ReportRow& r : rep.rows)
    (r.family == "complete" ? complete : giant).push_back(&r);
  REQUIRE(complete.size() == 3);
  REQUIRE(giant.size() == 3);

  CHECK(complete[0]->log_tau == doctest::Approx(8.0 * std::log(10.0)).epsilon(1e-14));
  const double recount = count_spanning_trees(complete_family().make(10, 0)).log();
  CHECK(complete[0]->log_tau == doctest::Approx(recount).epsilon(1e-12));
  for (int i = 0; i < 3; ++i) {
    CHECK(complete[i]->gap < 0.0);
    if (i > 0) CHECK(std::abs(complete[i]->gap) < std::abs(complete[i - 1]->gap));
  }
  CHECK(std::abs(complete[2]->gap) < 0.015);

  const int ns[] = {10, 100, 1000};
  for (int i = 0; i < 3; ++i) {
    CHECK(giant[i]->reference == std::log(2.0 * std::log(double(ns[i]))));
    CHECK(giant[i]->n_vertices <= ns[i]);
    if (i > 0) CHECK(std::abs(giant[i]->gap) < std::abs(giant[i - 1]->gap));
  }
}

TEST_CASE("disconnected random draws are retried with consecutive seeds") {
  SizedFamily flaky{"flaky", "", true, [](int, std::uint64_t seed) {
                      if (seed % 3 != 2) return build_graph<double>({{0, 1, 1.0}}, 4);
                      return build_graph<double>({{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}}, 4);
                    }};
  HarnessOptions opt;
  opt.seed = 21;
  ConvergenceReport rep = run_convergence(flaky, {4}, 0.0, opt);
  REQUIRE(rep.rows.size() == 1);
  CHECK(rep.rows[0].seed % 3 == 2);
  CHECK(rep.rows[0].log_tau == 0.0);

  SizedFamily broken{"broken", "", false, [](int, std::uint64_t) {
                       return build_graph<double>({{0, 1, 1.0}}, 4);
                     }};
  CHECK_THROWS_AS(run_convergence(broken, {4}, 0.0, opt), std::runtime_error);

  SizedFamily hopeless{"hopeless", "", true, [](int, std::uint64_t) {
                         return build_graph<double>({{0, 1, 1.0}}, 4);
                       }};
  HarnessOptions tight;
  tight.max_regen = 3;
  CHECK_THROWS_AS(run_convergence(hopeless, {4}, 0.0, tight), std::runtime_error);
}

TEST_CASE("family specs parse to the documented constructors") {
  CHECK(parse_family("torus:2").name == "torus");
  CHECK(parse_family("torus:2").params == "d=2");
  CHECK(parse_family("box:3").params == "d=3");
  CHECK(parse_family("random-regular:3").randomized);
  CHECK(parse_family("er-giant:4").params == "c=4");
  CHECK(parse_family("tree-ball").name == "tree-ball");
  CHECK(parse_family("complete").make(4, 0).edges.size() == 6);
  CHECK_THROWS_AS(parse_family("moebius:2"), std::invalid_argument);
  CHECK_THROWS_AS(parse_family("torus"), std::invalid_argument);
  CHECK_THROWS_AS(parse_family("random-regular:2"), std::invalid_argument);
}

}  // TEST_SUITE
