// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "test_support.hpp"

using namespace netapprox;
using namespace testing_support;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

int failures = 0;

void criterion(int id, const char* name, double time_limit, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (secs > time_limit) {
    out.pass = false;
    out.detail += fmt::format("{}runtime {:.2f}s exceeds {:.0f}s", out.detail.empty() ? "" : "; ", secs, time_limit);
  }
  if (!out.pass) ++failures;
  std::printf("criterion %2d: %s  %s (%.2fs)%s%s\n", id, out.pass ? "PASS" : "FAIL", name, secs,
              out.detail.empty() ? "" : " -- ", out.detail.c_str());
  std::fflush(stdout);
}

const std::vector<double> kNuGrid{1e-2, 1e-3, 1e-4, 1e-5, 1e-6};

// Criterion 1
constexpr double kClosedFormValue = 8.3300;
constexpr double kClosedFormDisplayTol = 1e-3;
constexpr double kClosedFormTol = 1e-12;
constexpr double kQuadratureRelTol = 1e-4;
constexpr double kSlopeRelTol = 1e-2;
// Criterion 2
constexpr double kWeightedSpreadTol = 0.05;
// Criterion 3
constexpr int kSolverGraphs = 50;
constexpr double kSolverRelTol = 1e-8;
constexpr double kGradientTol = 1e-8;
// Criterion 4
constexpr double kSingleEdgeTol = 1e-10;
// Criterion 5
constexpr int kH2Graphs = 20;
constexpr double kH2RelTol = 1e-6;
// Criterion 6 and 7
constexpr int kPropertyTrials = 100;
constexpr double kSuperadditiveTol = 1e-10;
constexpr double kMonotoneTol = 1e-12;
// Criterion 9
constexpr double kIsotropyTol = 1e-8;
// Criterion 10
constexpr double kDensityRelTol = 0.01;
constexpr double kDensityStderrRatio = 0.10;

InclusionGraph single_edge() {
  InclusionGraph g;
  g.N = 1.0;
  for (std::uint32_t i = 0; i < 2; ++i) {
    Node n;
    n.id = i;
    n.volume = 1.0;
    n.centroid = Vec3(i, 0, 0);
    g.nodes.push_back(n);
  }
  Edge e;
  e.b = 1;
  e.mu = 2.0;
  e.gap = std::exp(-2.0);
  g.edges.push_back(e);
  return g;
}

}  // namespace

int main() {
  criterion(1, "Keller closed form, quadrature and log(1/nu) slope", 2.0, [] {
    Outcome o;
    const KellerParams p{1.0, 1e-2, 1.0, 1.0};
    const auto e = keller_energy(p);
    const double exact = std::numbers::pi / 2.0 * std::log(201.0);
    o.check(std::abs(e.z_closed_form - exact) <= kClosedFormTol * exact, fmt::format("closed form {}", e.z_closed_form));
    o.check(std::abs(e.z_closed_form - kClosedFormValue) <= kClosedFormDisplayTol, "closed form far from 8.3300");
    o.check(std::abs(e.z_quadrature - e.z_closed_form) <= kQuadratureRelTol * e.z_closed_form,
            fmt::format("quadrature {}", e.z_quadrature));
    KellerTask task;
    task.nu = kNuGrid;
    const auto table = keller_table(task);
    o.check(std::abs(table.slope - std::numbers::pi / 2.0) <= kSlopeRelTol * std::numbers::pi / 2.0,
            fmt::format("slope {}", table.slope));
    if (o.pass) o.detail = fmt::format("z={:.6f} quad={:.6f} slope={:.6f}", e.z_closed_form, e.z_quadrature, table.slope);
    return o;
  });

  criterion(2, "weighted Keller energy bounded across nu", 5.0, [] {
    Outcome o;
    double lo = INFINITY, hi = 0.0;
    for (double nu : kNuGrid) {
      const double w = keller_energy({1.0, nu, 1.0, 1.0}).weighted_quadrature;
      lo = std::min(lo, w);
      hi = std::max(hi, w);
    }
    const double spread = (hi - lo) / lo;
    o.check(spread < kWeightedSpreadTol, fmt::format("spread {}", spread));
    if (o.pass) o.detail = fmt::format("spread={:.3e}", spread);
    return o;
  });

  criterion(3, "solver matches dense direct solve", 10.0, [] {
    Outcome o;
    std::mt19937_64 rng(3003);
    double worst = 0.0, worst_grad = 0.0;
    for (int t = 0; t < kSolverGraphs; ++t) {
      const auto g = random_graph(rng, 2 + rng() % 49, 1 + rng() % 150);
      const auto b = random_family(rng, g.edges.size());
      const auto oracle = dense_minimum_oracle(g, b);
      for (std::size_t threshold : {std::size_t{200}, std::size_t{0}}) {
        SolverOptions opts;
        opts.dense_threshold = threshold;
        const auto r = minimize_energy(g, b, opts);
        const double rel = std::abs(r.energy.total - oracle.energy) / oracle.energy;
        const double scale = assemble(g).rhs(b).norm();
        const double grad = energy_gradient(g, r.u, b).norm() / scale;
        worst = std::max(worst, rel);
        worst_grad = std::max(worst_grad, grad);
      }
    }
    o.check(worst <= kSolverRelTol, fmt::format("worst relative error {}", worst));
    o.check(worst_grad <= kGradientTol, fmt::format("worst scaled gradient {}", worst_grad));
    if (o.pass) o.detail = fmt::format("worst rel={:.2e} grad={:.2e}", worst, worst_grad);
    return o;
  });

  criterion(4, "analytic single edge", 1.0, [] {
    Outcome o;
    auto b = BoundaryFamily::zeros(1);
    b.forward[0] = 1.0;
    const double e = minimize_energy(single_edge(), b).energy.total;
    const double r = h2_ratio(single_edge(), b, 2.0);
    o.check(std::abs(e - 4.0 / 9.0) <= kSingleEdgeTol, fmt::format("E* = {}", e));
    o.check(std::abs(r - 2.0 / 9.0) <= kSingleEdgeTol, fmt::format("h2_ratio = {}", r));
    if (o.pass) o.detail = fmt::format("E*={:.15f} ratio={:.15f}", e, r);
    return o;
  });

  criterion(5, "h2 ascent matches generalized eigensolve (s = 2)", 30.0, [] {
    Outcome o;
    std::mt19937_64 rng(5005);
    double worst = 0.0;
    for (int t = 0; t < kH2Graphs; ++t) {
      const auto g = random_graph(rng, 2 + rng() % 19, 1 + rng() % 20);
      H2Options opts;
      opts.s = 2.0;
      opts.seed = static_cast<std::uint64_t>(t);
      const auto est = h2_statistic(g, opts);
      const double oracle = h2_s2_polarization_oracle(g);
      worst = std::max(worst, std::abs(est.ascent_value - oracle) / oracle);
      if (est.exact) worst = std::max(worst, std::abs(*est.exact - oracle) / oracle);
    }
    o.check(worst <= kH2RelTol, fmt::format("worst relative error {}", worst));
    if (o.pass) o.detail = fmt::format("worst rel={:.2e}", worst);
    return o;
  });

  criterion(6, "superadditivity over plane splits", 60.0, [] {
    Outcome o;
    std::mt19937_64 rng(6006);
    int violations = 0;
    for (int t = 0; t < kPropertyTrials; ++t) {
      const double N = uniform(rng, 3.0, 6.0);
      const auto g = box_graph(generate_hardcore(rng(), N, {0.3, 0.6, 0.0}), 0.4);
      const Vec3 normal = Vec3(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1)).normalized();
      const double offset = uniform(rng, -N / 2, N / 2);
      const Vec3 xi(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
      const auto side = [&](const Node& n) { return n.centroid.dot(normal) < offset; };
      const auto p1 = induced_subgraph(g, side).graph;
      const auto p2 = induced_subgraph(g, [&](const Node& n) { return !side(n); }).graph;
      const double h = minimize_energy(g, affine_boundary_family(g, xi)).energy.total;
      const double h1 = minimize_energy(p1, affine_boundary_family(p1, xi)).energy.total;
      const double h2 = minimize_energy(p2, affine_boundary_family(p2, xi)).energy.total;
      if (h < h1 + h2 - kSuperadditiveTol * (h + h1 + h2)) ++violations;
    }
    o.check(violations == 0, fmt::format("{} violations", violations));
    if (o.pass) o.detail = fmt::format("{} triples", kPropertyTrials);
    return o;
  });

  criterion(7, "monotonicity under graph extension", 60.0, [] {
    Outcome o;
    std::mt19937_64 rng(7007);
    int violations = 0;
    for (int t = 0; t < kPropertyTrials; ++t) {
      const auto small = random_graph(rng, 2 + rng() % 20, rng() % 40);
      InclusionGraph big = small;
      const auto extra_nodes = 1 + rng() % 5;
      for (std::size_t k = 0; k < extra_nodes; ++k) {
        Node n;
        n.id = static_cast<std::uint32_t>(big.nodes.size());
        n.volume = uniform(rng, 0.1, 2.0);
        big.nodes.push_back(n);
      }
      const auto extra_edges = rng() % 10;
      for (std::size_t k = 0; k < extra_edges; ++k) {
        std::uint32_t a = index_below(rng, big.nodes.size()), c = index_below(rng, big.nodes.size());
        if (a == c) continue;
        Edge e;
        e.id = static_cast<std::uint32_t>(big.edges.size());
        e.a = std::min(a, c);
        e.b = std::max(a, c);
        e.gap = uniform(rng, 1e-3, 0.5);
        e.mu = std::abs(std::log(e.gap));
        big.edges.push_back(e);
      }
      const auto b = random_family(rng, small.edges.size());
      const auto u = random_vector(rng, small.nodes.size());
      auto bb = random_family(rng, big.edges.size());
      bb.forward.head(b.size()) = b.forward;
      bb.backward.head(b.size()) = b.backward;
      Eigen::VectorXd ub = random_vector(rng, big.nodes.size());
      ub.head(u.size()) = u;
      const double e_small = energy(small, u, b).total;
      const double e_big = energy(big, ub, bb).total;
      if (e_small > e_big + kMonotoneTol * (1.0 + e_big)) ++violations;
    }
    o.check(violations == 0, fmt::format("{} violations", violations));
    if (o.pass) o.detail = fmt::format("{} pairs", kPropertyTrials);
    return o;
  });

  criterion(8, "cycle-free pipeline on chain forests", 300.0, [] {
    Outcome o;
    const ModelParams model = ChainForestParams{};
    const double delta = 0.2;
    const std::vector<double> grid{10.0, 20.0, 40.0};
    const std::uint32_t seeds = 4;
    for (double N : grid)
      for (std::uint32_t s = 0; s < seeds; ++s) {
        const auto g = box_graph(generate(model, cell_seed(0, N, s), N), delta);
        if (!is_cycle_free(g)) {
          o.check(false, fmt::format("cycle at N={} seed={}", N, s));
          continue;
        }
        for (int axis = 0; axis < 3; ++axis) {
          const Vec3 xi = Vec3::Unit(axis) + 0.5 * Vec3::Unit((axis + 1) % 3);
          for (const auto& b : {affine_boundary_family(g, xi), midpoint_boundary_family(g, xi)}) {
            const auto e = energy(g, cycle_free_potentials(g, b), b);
            const double best = minimize_energy(g, b).energy.total;
            o.check(e.gap == 0.0, fmt::format("gap term {} at N={} seed={}", e.gap, N, s));
            o.check(e.total >= best, fmt::format("explicit total below minimum at N={} seed={}", N, s));
          }
        }
      }
    StatisticParams params;
    params.h2.s = 4.0;  // s = 2p / (p - 2) with p = 4
    const auto series = scan_limsup(model, delta, grid, seeds, Statistic::h2, params);
    o.check(series.failed_cells() == 0, fmt::format("{} failed h2 cells", series.failed_cells()));
    o.check(series.plateau_ok, fmt::format("h2 means {} {} {} not on a plateau", series.means[0], series.means[1],
                                           series.means[2]));
    if (o.pass)
      o.detail = fmt::format("h2 means {:.4g} {:.4g} {:.4g}", series.means[0], series.means[1], series.means[2]);
    return o;
  });

  criterion(9, "cubic lattice isotropy and radius monotonicity", 60.0, [] {
    Outcome o;
    double prev = 0.0;
    std::string diag;
    for (double r : {0.3, 0.4, 0.45}) {
      const auto g = box_graph(generate_lattice_jitter(0, 10.0, {1.0, r, 0.0, false}), 0.5);
      const auto t = network_effective_tensor(g, 0.5);
      const double tr = t.A.trace();
      double off = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          if (i != j) off = std::max(off, std::abs(t.A(i, j)));
      const double spread = t.A.diagonal().maxCoeff() - t.A.diagonal().minCoeff();
      if (r == 0.3) {
        o.check(off <= kIsotropyTol * tr, fmt::format("off-diagonal {} vs trace {}", off, tr));
        o.check(spread <= kIsotropyTol, fmt::format("diagonal spread {}", spread));
      }
      o.check(t.A(0, 0) > prev, fmt::format("diagonal not increasing at radius {}", r));
      prev = t.A(0, 0);
      diag += fmt::format(" {:.6g}", t.A(0, 0));
    }
    if (o.pass) o.detail = "diagonal" + diag;
    return o;
  });

  criterion(10, "density estimates", 120.0, [] {
    Outcome o;
    const double r = 0.3;
    const double lattice = density_estimate(generate_lattice_jitter(0, 40.0, {1.0, r, 0.0, false}));
    const double expected = 4.0 / 3.0 * std::numbers::pi * r * r * r;
    o.check(std::abs(lattice - expected) <= kDensityRelTol * expected, fmt::format("lattice density {}", lattice));
    const auto series = scan_limsup(HardcoreParams{0.05, 1.0, 0.2}, 0.3, {5.0, 10.0, 20.0}, 8, Statistic::density);
    const double ratio = series.std_errors[2] / series.means[2];
    o.check(ratio < kDensityStderrRatio, fmt::format("hardcore stderr/mean {}", ratio));
    if (o.pass) o.detail = fmt::format("lattice={:.6f} expected={:.6f} hardcore stderr/mean={:.3e}", lattice, expected, ratio);
    return o;
  });

  criterion(11, "log-moment plateau on the hardcore model", 120.0, [] {
    Outcome o;
    StatisticParams params;
    params.k = 2.0;
    const auto series =
        scan_limsup(HardcoreParams{0.05, 1.0, 0.2}, 0.3, {10.0, 20.0, 40.0}, 8, Statistic::log_moment, params);
    o.check(series.failed_cells() == 0, fmt::format("{} failed cells", series.failed_cells()));
    o.check(series.plateau_ok, fmt::format("means {} {} {}", series.means[0], series.means[1], series.means[2]));
    if (o.pass)
      o.detail = fmt::format("means {:.5g} {:.5g} {:.5g}", series.means[0], series.means[1], series.means[2]);
    return o;
  });

  criterion(12, "short consistency", 60.0, [] {
    Outcome o;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto g = box_graph(generate_hardcore(seed, 8.0, {0.2, 0.7, 0.0}), 0.4);
      double min_gap = 1.0;
      for (const auto& e : g.edges) min_gap = std::min(min_gap, e.gap);
      const auto ident = short_kappa(g, {}, 0.5 * min_gap);
      o.check(ident.graph == g, fmt::format("kappa below all gaps changed the graph (seed {})", seed));
      const auto collapsed = short_kappa(g, {}, 1.0 - 1e-9);
      o.check(collapsed.graph.edges.empty(), fmt::format("kappa near 1 left {} edges", collapsed.graph.edges.size()));
      std::size_t prev_edges = g.edges.size();
      for (double kappa : {0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.6, 0.9}) {
        const auto r = short_kappa(g, {}, kappa);
        o.check(r.graph.edges.size() <= prev_edges, fmt::format("edge count grew at kappa {}", kappa));
        prev_edges = r.graph.edges.size();
        o.check(volume_conserved(g, r), fmt::format("volume {} vs {} at kappa {}", total_volume(r.graph), total_volume(g), kappa));
      }
      o.check(volume_conserved(g, collapsed), "volume changed in full collapse");
      o.check(total_volume(ident.graph) == total_volume(g), "volume changed in identity short");
    }
    if (o.pass) o.detail = "10 configurations, volume within per-merge rounding bound";
    return o;
  });

  std::printf("%s: %d criterion(s) failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
