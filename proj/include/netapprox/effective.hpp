#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "netapprox/energy.hpp"
#include "netapprox/error.hpp"
#include "netapprox/multigraph.hpp"
#include "netapprox/scan.hpp"

namespace netapprox {

/// Nodes whose inclusion comes within `layer_width` of the box boundary.
inline std::vector<std::uint32_t> boundary_nodes(const InclusionGraph& g, double layer_width) {
  if (!(layer_width > 0.0)) throw InvalidInput("boundary_nodes: layer_width must be > 0");
  std::vector<std::uint32_t> out;
  for (const auto& node : g.nodes)
    if (detail::node_reach(g, node) >= g.N - layer_width) out.push_back(node.id);
  return out;
}

/// Axes then diagonals e1+e2, e1+e3, e2+e3.
inline std::array<Vec3, 6> effective_directions() {
  return {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1), Vec3(1, 1, 0), Vec3(1, 0, 1), Vec3(0, 1, 1)};
}

/**
 * Network surrogate of the effective conductivity. `energies[k]` is the
 * clamped Kirchhoff energy density along effective_directions()[k]; A is
 * the symmetric matrix with xi^T A xi = energy density for each direction.
 * Only the inclusion network contributes (no ambient conductance).
 */
struct EffectiveTensor {
  Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
  std::array<double, 6> energies{};
  double N = 0.0;
  double delta = 0.0;
  double layer_width = 0.0;
};

/// min over free nodes of sum_e 2 mu_e (u_a - u_b)^2 with u = xi . x on `clamped`.
inline double clamped_gap_energy(const InclusionGraph& g, const std::vector<char>& clamped, const Vec3& xi,
                                 const SolverOptions& opts) {
  const auto n = g.nodes.size();
  Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    if (clamped[i]) u[static_cast<Eigen::Index>(i)] = xi.dot(g.nodes[i].centroid);

  // Free nodes whose cluster holds no clamped node carry zero energy.
  const ClusterPartition cp = clusters(g);
  std::vector<char> anchored(cp.clusters.size(), 0);
  for (std::size_t i = 0; i < n; ++i)
    if (clamped[i]) anchored[cp.cluster_of[i]] = 1;
  std::vector<Eigen::Index> free_index(n, -1);
  Eigen::Index nf = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (!clamped[i] && anchored[cp.cluster_of[i]]) free_index[i] = nf++;

  if (nf > 0) {
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nf);
    for (const auto& e : g.edges) {
      const Eigen::Index ia = free_index[e.a], ib = free_index[e.b];
      if (ia >= 0) trip.emplace_back(ia, ia, e.mu);
      if (ib >= 0) trip.emplace_back(ib, ib, e.mu);
      if (ia >= 0 && ib >= 0) {
        trip.emplace_back(ia, ib, -e.mu);
        trip.emplace_back(ib, ia, -e.mu);
      } else if (ia >= 0 && clamped[e.b]) {
        rhs[ia] += e.mu * u[e.b];
      } else if (ib >= 0 && clamped[e.a]) {
        rhs[ib] += e.mu * u[e.a];
      }
    }
    Eigen::SparseMatrix<double> K(nf, nf);
    K.setFromTriplets(trip.begin(), trip.end());
    const Eigen::VectorXd x = solve_spd(K, rhs, opts);
    for (std::size_t i = 0; i < n; ++i)
      if (free_index[i] >= 0) u[static_cast<Eigen::Index>(i)] = x[free_index[i]];
  }
  double total = 0.0;
  for (const auto& e : g.edges) {
    const double d = u[e.a] - u[e.b];
    total += 2.0 * e.mu * d * d;
  }
  return total;
}

inline EffectiveTensor network_effective_tensor(const InclusionGraph& g, double layer_width, const SolverOptions& opts = {}) {
  EffectiveTensor out;
  out.N = g.N;
  out.delta = g.delta;
  out.layer_width = layer_width;
  std::vector<char> clamped(g.nodes.size(), 0);
  for (auto id : boundary_nodes(g, layer_width)) clamped[id] = 1;

  const auto dirs = effective_directions();
  const double vol = g.box_volume();
  for (std::size_t k = 0; k < dirs.size(); ++k) out.energies[k] = clamped_gap_energy(g, clamped, dirs[k], opts) / vol;

  for (int i = 0; i < 3; ++i) out.A(i, i) = out.energies[static_cast<std::size_t>(i)];
  const std::array<std::array<int, 2>, 3> pairs{{{0, 1}, {0, 2}, {1, 2}}};
  for (std::size_t k = 0; k < 3; ++k) {
    const int i = pairs[k][0], j = pairs[k][1];
    const double off = 0.5 * (out.energies[3 + k] - out.A(i, i) - out.A(j, j));
    out.A(i, j) = off;
    out.A(j, i) = off;
  }
  return out;
}

struct EffectiveCell {
  double N = 0.0;
  std::uint32_t seed_index = 0;
  std::uint64_t seed = 0;
  EffectiveTensor tensor;
  std::string error;
  double seconds = 0.0;
};

/**
 * Per-cell tensors and, per N, the entrywise mean, the entrywise standard
 * error and the Frobenius norm of the standard-error matrix.
 */
struct EffectiveSeries {
  std::vector<double> N_grid;
  std::vector<EffectiveCell> cells;  // sorted by (N, seed_index)
  std::vector<Eigen::Matrix3d> means;
  std::vector<Eigen::Matrix3d> std_errors;
  std::vector<double> frobenius_std_errors;

  std::size_t failed_cells() const {
    return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const EffectiveCell& c) { return !c.error.empty(); }));
  }
};

/// layer_width <= 0 means delta.
inline EffectiveSeries effective_scan(const ModelParams& model, double delta, const std::vector<double>& N_grid,
                                      std::uint32_t n_seeds, double layer_width = 0.0, std::uint64_t base_seed = 0,
                                      unsigned threads = 1, const SolverOptions& opts = {}) {
  check_scan_grid(N_grid, n_seeds);
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidInput("effective_scan: delta must lie in (0, 1)");
  const double w = layer_width > 0.0 ? layer_width : delta;

  std::vector<EffectiveTensor> tensors(N_grid.size() * n_seeds);
  auto raw = run_cells(model, N_grid, n_seeds, base_seed, threads,
                       [&](const SphereConfig& config, std::uint64_t, std::size_t i) {
                         tensors[i] = network_effective_tensor(box_graph(config, delta), w, opts);
                         return 0.0;
                       });
  EffectiveSeries out;
  out.N_grid = N_grid;
  for (std::size_t i = 0; i < raw.size(); ++i)
    out.cells.push_back({raw[i].N, raw[i].seed_index, raw[i].seed, tensors[i], raw[i].error, raw[i].seconds});
  // run_cells already orders cells by (N, seed_index).
  for (double N : N_grid) {
    Eigen::Matrix3d mean, se;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) {
        std::vector<double> vals;
        for (const auto& cell : out.cells)
          if (cell.N == N && cell.error.empty()) vals.push_back(cell.tensor.A(r, c));
        const auto s = summarize(vals);
        mean(r, c) = s.mean;
        se(r, c) = s.std_error;
      }
    out.means.push_back(mean);
    out.std_errors.push_back(se);
    out.frobenius_std_errors.push_back(se.norm());
  }
  return out;
}

}  // namespace netapprox
