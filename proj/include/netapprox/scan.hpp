#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "netapprox/cluster_moment.hpp"
#include "netapprox/criteria.hpp"
#include "netapprox/error.hpp"
#include "netapprox/models.hpp"

namespace netapprox {

enum class Statistic { h1, h2, log_moment, cluster_moment, density };

inline std::string statistic_name(Statistic s) {
  switch (s) {
    case Statistic::h1: return "h1";
    case Statistic::h2: return "h2";
    case Statistic::log_moment: return "logmoment";
    case Statistic::cluster_moment: return "clustermoment";
    case Statistic::density: return "density";
  }
  return "unknown";
}

struct StatisticParams {
  Vec3 xi = Vec3::UnitX();  // h1
  H2Options h2;             // h2 (s, starts, ...)
  double k = 2.0;           // log moment
  double p = 4.0;           // cluster moment
  ClusterMeasure measure = ClusterMeasure::diameter;
  std::size_t n_samples = 4096;
  std::optional<double> kappa;  // short every edge with gap < kappa before evaluating
  SolverOptions solver;
};

struct ScanCell {
  double N = 0.0;
  std::uint32_t seed_index = 0;
  std::uint64_t seed = 0;
  double value = std::numeric_limits<double>::quiet_NaN();
  std::string error;  // empty on success
  double seconds = 0.0;
};

/**
 * Statistic values over a grid of box half-widths and seeds. The plateau
 * estimate is the max of the per-N means over the largest half of the
 * grid; plateau_ok asks that the last-to-first mean ratio over that half
 * lie in [0.5, 2].
 */
struct CriterionSeries {
  std::string statistic;
  std::vector<double> N_grid;
  std::vector<std::vector<double>> values;  // [N index][seed index], NaN where the cell failed
  std::vector<double> means;
  std::vector<double> std_errors;
  double plateau_estimate = std::numeric_limits<double>::quiet_NaN();
  bool plateau_ok = false;
  std::vector<ScanCell> cells;  // sorted by (N, seed_index)

  std::size_t failed_cells() const {
    return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const ScanCell& c) { return !c.error.empty(); }));
  }
};

struct Plateau {
  double estimate = std::numeric_limits<double>::quiet_NaN();
  bool ok = false;
};

inline Plateau plateau(const std::vector<double>& means) {
  Plateau out;
  if (means.empty()) return out;
  const std::size_t half = (means.size() + 1) / 2;
  const std::size_t first = means.size() - half;
  out.estimate = -std::numeric_limits<double>::infinity();
  for (std::size_t i = first; i < means.size(); ++i) {
    if (!std::isfinite(means[i])) {
      out.estimate = std::numeric_limits<double>::quiet_NaN();
      return out;
    }
    out.estimate = std::max(out.estimate, means[i]);
  }
  const double lo = means[first], hi = means.back();
  if (lo == 0.0 && hi == 0.0) {
    out.ok = true;
  } else {
    const double ratio = hi / lo;
    out.ok = std::isfinite(ratio) && ratio >= 0.5 && ratio <= 2.0;
  }
  return out;
}

inline void check_scan_grid(const std::vector<double>& N_grid, std::uint32_t n_seeds) {
  if (N_grid.size() < 3) throw InvalidInput("scan: N_grid needs at least 3 entries");
  for (std::size_t i = 0; i < N_grid.size(); ++i) {
    if (!(N_grid[i] > 0.0)) throw InvalidInput("scan: N values must be > 0");
    if (i > 0 && !(N_grid[i] > N_grid[i - 1])) throw InvalidInput("scan: N_grid must be increasing");
  }
  if (n_seeds < 1) throw InvalidInput("scan: n_seeds must be >= 1");
}

/// Graph of a generated configuration in the box, optionally shorted at kappa.
inline InclusionGraph cell_graph(const SphereConfig& inside, double delta, std::optional<double> kappa) {
  InclusionGraph g = build_graph(components(inside), inside, delta);
  if (kappa) g = short_kappa(g, {}, *kappa).graph;
  return g;
}

inline double evaluate_statistic(const SphereConfig& config, double delta, Statistic stat,
                                 const StatisticParams& params, std::uint64_t seed) {
  if (stat == Statistic::density) return density_estimate(config);
  const SphereConfig inside = restrict_box(config, config.box_half_width);
  if (stat == Statistic::cluster_moment) {
    const InclusionGraph g = build_graph(components(inside), inside, delta);
    return cluster_moment_statistic(inside, g, params.p, params.n_samples, mix64(seed), params.measure).mean;
  }
  const InclusionGraph g = cell_graph(inside, delta, params.kappa);
  switch (stat) {
    case Statistic::h1: return h1_statistic(g, params.xi, params.solver);
    case Statistic::log_moment: return log_moment_statistic(g, params.k);
    case Statistic::h2: {
      if (g.edges.empty()) return 0.0;
      H2Options opts = params.h2;
      opts.seed = mix64(seed);
      opts.solver = params.solver;
      return h2_statistic(g, opts).value;
    }
    default: break;
  }
  throw InvalidInput("scan: unsupported statistic");
}

/**
 * Evaluates `fn(config, seed)` on an independent configuration for every
 * (N, seed index) cell. Failures are recorded in the cell and do not stop
 * the scan.
 */
template <class Fn>
std::vector<ScanCell> run_cells(const ModelParams& model, const std::vector<double>& N_grid, std::uint32_t n_seeds,
                                std::uint64_t base_seed, unsigned threads, Fn&& fn) {
  std::vector<ScanCell> cells;
  for (double N : N_grid)
    for (std::uint32_t s = 0; s < n_seeds; ++s) {
      ScanCell c;
      c.N = N;
      c.seed_index = s;
      c.seed = cell_seed(base_seed, N, s);
      cells.push_back(std::move(c));
    }
  parallel_for(cells.size(), threads, [&](std::size_t i) {
    ScanCell& c = cells[i];
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.value = fn(generate(model, c.seed, c.N), c.seed, i);
    } catch (const std::exception& e) {
      c.value = std::numeric_limits<double>::quiet_NaN();
      c.error = e.what();
    }
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  });
  return cells;
}

inline CriterionSeries aggregate(std::string statistic, const std::vector<double>& N_grid, std::uint32_t n_seeds,
                                 std::vector<ScanCell> cells) {
  std::sort(cells.begin(), cells.end(),
            [](const ScanCell& l, const ScanCell& r) { return std::tie(l.N, l.seed_index) < std::tie(r.N, r.seed_index); });
  CriterionSeries out;
  out.statistic = std::move(statistic);
  out.N_grid = N_grid;
  out.values.assign(N_grid.size(), std::vector<double>(n_seeds, std::numeric_limits<double>::quiet_NaN()));
  for (const auto& c : cells) {
    const auto i = static_cast<std::size_t>(std::find(N_grid.begin(), N_grid.end(), c.N) - N_grid.begin());
    out.values[i][c.seed_index] = c.value;
  }
  for (const auto& row : out.values) {
    const auto s = summarize(row);
    out.means.push_back(s.mean);
    out.std_errors.push_back(s.std_error);
  }
  const Plateau p = plateau(out.means);
  out.plateau_estimate = p.estimate;
  out.plateau_ok = p.ok;
  out.cells = std::move(cells);
  return out;
}

/// Empirical limsup over N of a criterion statistic.
inline CriterionSeries scan_limsup(const ModelParams& model, double delta, const std::vector<double>& N_grid,
                                   std::uint32_t n_seeds, Statistic stat, const StatisticParams& params = {},
                                   std::uint64_t base_seed = 0, unsigned threads = 1) {
  check_scan_grid(N_grid, n_seeds);
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidInput("scan: delta must lie in (0, 1)");
  auto cells = run_cells(model, N_grid, n_seeds, base_seed, threads, [&](const SphereConfig& config, std::uint64_t seed, std::size_t) {
    return evaluate_statistic(config, delta, stat, params, seed);
  });
  return aggregate(statistic_name(stat), N_grid, n_seeds, std::move(cells));
}

}  // namespace netapprox
