#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "netapprox/error.hpp"
#include "netapprox/multigraph.hpp"

namespace netapprox {

/**
 * Oriented boundary values on the edges of a graph: for edge e = (a, b),
 * `forward[e]` is b_{a b e} and `backward[e]` is b_{b a e}.
 */
struct BoundaryFamily {
  Eigen::VectorXd forward;
  Eigen::VectorXd backward;

  static BoundaryFamily zeros(std::size_t edges) {
    return {Eigen::VectorXd::Zero(static_cast<Eigen::Index>(edges)),
            Eigen::VectorXd::Zero(static_cast<Eigen::Index>(edges))};
  }
  Eigen::Index size() const noexcept { return forward.size(); }
  Eigen::VectorXd antisymmetric() const { return forward - backward; }
  bool is_zero() const { return (forward.array() == 0.0).all() && (backward.array() == 0.0).all(); }
};

/// One potential per node, in node order.
using PotentialFamily = Eigen::VectorXd;

/// Which diagonal weights the mass term uses: |I| or 1.
enum class MassModel { volume, identity };

struct EnergyBreakdown {
  double gap = 0.0;
  double mass = 0.0;
  double total = 0.0;
};

inline double mass_weight(const Node& n, MassModel m) { return m == MassModel::volume ? n.volume : 1.0; }

inline void check_family(const InclusionGraph& g, const BoundaryFamily& b) {
  if (b.forward.size() != static_cast<Eigen::Index>(g.edges.size()) ||
      b.backward.size() != static_cast<Eigen::Index>(g.edges.size()))
    throw InvalidInput("boundary family is not indexed by the graph's edges");
}

inline void check_potentials(const InclusionGraph& g, const PotentialFamily& u) {
  if (u.size() != static_cast<Eigen::Index>(g.nodes.size()))
    throw InvalidInput("potential family is not indexed by the graph's nodes");
}

/**
 * Discrete energy with the ordered-pair double sum: each undirected edge
 * contributes 2 mu_e (b_abe - b_bae + u_a - u_b)^2, and each node
 * contributes |I| u_I^2.
 */
inline EnergyBreakdown energy(const InclusionGraph& g, const PotentialFamily& u, const BoundaryFamily& b,
                              MassModel mass = MassModel::volume) {
  check_family(g, b);
  check_potentials(g, u);
  EnergyBreakdown out;
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    const Edge& e = g.edges[k];
    const auto i = static_cast<Eigen::Index>(k);
    const double r = (b.forward[i] - b.backward[i]) + u[e.a] - u[e.b];
    out.gap += 2.0 * e.mu * r * r;
  }
  for (std::size_t k = 0; k < g.nodes.size(); ++k) {
    const double v = u[static_cast<Eigen::Index>(k)];
    out.mass += mass_weight(g.nodes[k], mass) * v * v;
  }
  out.total = out.gap + out.mass;
  return out;
}

/// Gradient of the energy with respect to u.
inline Eigen::VectorXd energy_gradient(const InclusionGraph& g, const PotentialFamily& u, const BoundaryFamily& b,
                                       MassModel mass = MassModel::volume) {
  check_family(g, b);
  check_potentials(g, u);
  Eigen::VectorXd grad(u.size());
  for (std::size_t k = 0; k < g.nodes.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    grad[i] = 2.0 * mass_weight(g.nodes[k], mass) * u[i];
  }
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    const Edge& e = g.edges[k];
    const auto i = static_cast<Eigen::Index>(k);
    const double r = (b.forward[i] - b.backward[i]) + u[e.a] - u[e.b];
    grad[e.a] += 4.0 * e.mu * r;
    grad[e.b] -= 4.0 * e.mu * r;
  }
  return grad;
}

// ---------------------------------------------------------------------------
// Laplacian assembly
// ---------------------------------------------------------------------------

/**
 * Weighted graph Laplacian L (weights mu_IJ = sum of mu_e over parallel
 * edges) and the diagonal mass D. Setting the u-gradient of the energy to
 * zero gives (D + 2L) u = rhs(b) with rhs = -2 sum_e mu_e beta_e (1_a - 1_b)
 * and beta_e the antisymmetric part of b on e.
 */
struct LaplacianAssembly {
  Eigen::SparseMatrix<double> laplacian;
  Eigen::VectorXd mass;
  std::vector<std::uint32_t> tail, head;
  std::vector<double> weight;

  Eigen::Index size() const noexcept { return mass.size(); }

  Eigen::SparseMatrix<double> system() const {
    Eigen::SparseMatrix<double> k = 2.0 * laplacian;
    for (Eigen::Index i = 0; i < mass.size(); ++i) k.coeffRef(i, i) += mass[i];
    return k;
  }

  Eigen::VectorXd rhs_from_antisymmetric(const Eigen::VectorXd& beta) const {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(mass.size());
    for (std::size_t k = 0; k < weight.size(); ++k) {
      const double f = 2.0 * weight[k] * beta[static_cast<Eigen::Index>(k)];
      r[tail[k]] -= f;
      r[head[k]] += f;
    }
    return r;
  }

  Eigen::VectorXd rhs(const BoundaryFamily& b) const { return rhs_from_antisymmetric(b.antisymmetric()); }
};

inline LaplacianAssembly assemble(const InclusionGraph& g, MassModel mass = MassModel::volume) {
  const auto n = static_cast<Eigen::Index>(g.nodes.size());
  LaplacianAssembly out;
  out.mass.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) out.mass[i] = mass_weight(g.nodes[static_cast<std::size_t>(i)], mass);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(4 * g.edges.size());
  for (const auto& e : g.edges) {
    trip.emplace_back(e.a, e.a, e.mu);
    trip.emplace_back(e.b, e.b, e.mu);
    trip.emplace_back(e.a, e.b, -e.mu);
    trip.emplace_back(e.b, e.a, -e.mu);
    out.tail.push_back(e.a);
    out.head.push_back(e.b);
    out.weight.push_back(e.mu);
  }
  out.laplacian.resize(n, n);
  out.laplacian.setFromTriplets(trip.begin(), trip.end());
  return out;
}

// ---------------------------------------------------------------------------
// Minimization
// ---------------------------------------------------------------------------

struct SolverOptions {
  double tol = 1e-10;
  long max_iter = 0;                // 0 means 10 * number of unknowns
  std::size_t dense_threshold = 200;  // direct dense Cholesky below this many unknowns
  MassModel mass = MassModel::volume;
};

struct SolveStats {
  long iterations = 0;
  double residual = 0.0;  // relative residual |K x - rhs| / |rhs|
};

/**
 * Solves K x = rhs for symmetric positive definite K: dense Cholesky for
 * small systems, Jacobi-preconditioned conjugate gradients otherwise.
 */
inline Eigen::VectorXd solve_spd(const Eigen::SparseMatrix<double>& K, const Eigen::VectorXd& rhs,
                                 const SolverOptions& opts, SolveStats* stats = nullptr) {
  const Eigen::Index n = K.rows();
  SolveStats st;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  const double rhs_norm = rhs.norm();
  if (n == 0 || rhs_norm == 0.0) {
    if (stats) *stats = st;
    return x;
  }
  if (static_cast<std::size_t>(n) < opts.dense_threshold) {
    Eigen::LLT<Eigen::MatrixXd> llt{Eigen::MatrixXd(K)};
    if (llt.info() != Eigen::Success) throw SolverError("dense Cholesky failed: matrix not SPD", 0.0, 0);
    x = llt.solve(rhs);
    st.residual = (K * x - rhs).norm() / rhs_norm;
  } else {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg;
    cg.setTolerance(opts.tol);
    cg.setMaxIterations(opts.max_iter > 0 ? opts.max_iter : 10 * static_cast<long>(n));
    cg.compute(K);
    x = cg.solve(rhs);
    st.iterations = static_cast<long>(cg.iterations());
    st.residual = (K * x - rhs).norm() / rhs_norm;
    if (cg.info() != Eigen::Success && st.residual > opts.tol)
      throw SolverError("conjugate gradients did not converge", st.residual, st.iterations);
  }
  if (stats) *stats = st;
  return x;
}

struct MinimizeResult {
  PotentialFamily u;
  EnergyBreakdown energy;
  SolveStats stats;
};

/// Minimizes the energy over u for fixed b; the minimizer is unique since D is positive definite.
inline MinimizeResult minimize_energy(const InclusionGraph& g, const BoundaryFamily& b, const SolverOptions& opts = {}) {
  check_family(g, b);
  const LaplacianAssembly lap = assemble(g, opts.mass);
  MinimizeResult out;
  out.u = solve_spd(lap.system(), lap.rhs(b), opts, &out.stats);
  out.energy = energy(g, out.u, b, opts.mass);
  return out;
}

// ---------------------------------------------------------------------------
// Canonical families and explicit potentials
// ---------------------------------------------------------------------------

/// b_IJe = xi . x_I, with x_I the centroid of inclusion I.
inline BoundaryFamily affine_boundary_family(const InclusionGraph& g, const Vec3& xi) {
  auto b = BoundaryFamily::zeros(g.edges.size());
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    const Edge& e = g.edges[k];
    const auto i = static_cast<Eigen::Index>(k);
    b.forward[i] = xi.dot(g.nodes[e.a].centroid);
    b.backward[i] = xi.dot(g.nodes[e.b].centroid);
  }
  return b;
}

/// b_IJe = xi . (x_I - m_e), with m_e the midpoint of the gap's contact points.
inline BoundaryFamily midpoint_boundary_family(const InclusionGraph& g, const Vec3& xi) {
  auto b = BoundaryFamily::zeros(g.edges.size());
  const double xn = xi.norm();
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    const Edge& e = g.edges[k];
    const auto i = static_cast<Eigen::Index>(k);
    const Vec3 mid = 0.5 * (e.xa + e.xb);
    b.forward[i] = xi.dot(g.nodes[e.a].centroid - mid);
    b.backward[i] = xi.dot(g.nodes[e.b].centroid - mid);
    const double slack = 1e-12 * (1.0 + xn * (g.nodes[e.a].diameter + g.nodes[e.b].diameter + g.delta));
    if (std::abs(b.forward[i]) > xn * (g.nodes[e.a].diameter + g.delta) + slack ||
        std::abs(b.backward[i]) > xn * (g.nodes[e.b].diameter + g.delta) + slack)
      throw InvalidInput("midpoint_boundary_family: contact midpoint too far from inclusion centroid");
  }
  return b;
}

namespace detail {

// Returns x with fl(beta + x) == target when such a neighbor of target - beta exists.
inline double solve_rounded_sum(double beta, double target) {
  double x = target - beta;
  for (int step = 0; step < 8 && beta + x != target; ++step) {
    x = std::nextafter(x, beta + x < target ? std::numeric_limits<double>::infinity()
                                            : -std::numeric_limits<double>::infinity());
  }
  return beta + x == target ? x : target - beta;
}

}  // namespace detail

/**
 * Potentials that cancel every gap residual on a cycle-free graph: u is 0
 * at the root of each cluster and accumulates b_{I_j I_j+1} - b_{I_j+1 I_j}
 * along the unique branch from the root. `roots` holds one node per
 * cluster; empty means the smallest node of each cluster.
 */
inline PotentialFamily cycle_free_potentials(const InclusionGraph& g, const BoundaryFamily& b,
                                             std::span<const std::uint32_t> roots = {}) {
  check_family(g, b);
  if (!is_cycle_free(g)) throw InvalidInput("cycle_free_potentials: graph has a cycle");
  const auto n = g.nodes.size();
  const ClusterPartition cp = clusters(g);

  std::vector<std::uint32_t> start;
  if (roots.empty()) {
    for (const auto& c : cp.clusters) start.push_back(c.nodes.front());
  } else {
    if (roots.size() != cp.clusters.size()) throw InvalidInput("cycle_free_potentials: need one root per cluster");
    std::vector<bool> seen(cp.clusters.size(), false);
    for (auto r : roots) {
      if (r >= n || seen[cp.cluster_of[r]]) throw InvalidInput("cycle_free_potentials: invalid root set");
      seen[cp.cluster_of[r]] = true;
    }
    start.assign(roots.begin(), roots.end());
  }

  std::vector<std::vector<std::uint32_t>> incident(n);
  for (std::uint32_t k = 0; k < g.edges.size(); ++k) {
    incident[g.edges[k].a].push_back(k);
    incident[g.edges[k].b].push_back(k);
  }
  PotentialFamily u = PotentialFamily::Zero(static_cast<Eigen::Index>(n));
  std::vector<bool> visited(n, false);
  std::queue<std::uint32_t> frontier;
  for (auto r : start) {
    visited[r] = true;
    frontier.push(r);
  }
  while (!frontier.empty()) {
    const auto parent = frontier.front();
    frontier.pop();
    for (auto k : incident[parent]) {
      const Edge& e = g.edges[k];
      const auto child = e.a == parent ? e.b : e.a;
      if (visited[child]) continue;
      visited[child] = true;
      const double beta = b.forward[k] - b.backward[k];
      if (e.a == parent) {
        u[child] = beta + u[parent];
      } else {
        u[child] = detail::solve_rounded_sum(beta, u[parent]);
      }
      frontier.push(child);
    }
  }
  return u;
}

/// u_I = xi . x_I + u'_{I'} - xi . x_{I'} for I inside I' = node_map[I].
inline PotentialFamily lift_short_potentials(const InclusionGraph& fine, const InclusionGraph& coarse,
                                             std::span<const std::uint32_t> node_map, const PotentialFamily& u_prime,
                                             const Vec3& xi) {
  check_potentials(coarse, u_prime);
  if (node_map.size() != fine.nodes.size()) throw InvalidInput("lift_short_potentials: merge map size mismatch");
  PotentialFamily u(static_cast<Eigen::Index>(fine.nodes.size()));
  for (std::size_t i = 0; i < fine.nodes.size(); ++i) {
    const auto p = node_map[i];
    if (p >= coarse.nodes.size()) throw InvalidInput("lift_short_potentials: merge map out of range");
    u[static_cast<Eigen::Index>(i)] =
        xi.dot(fine.nodes[i].centroid) + u_prime[p] - xi.dot(coarse.nodes[p].centroid);
  }
  return u;
}

/// Same, recovering the merge map from the sphere membership of nodes.
inline PotentialFamily lift_short_potentials(const InclusionGraph& fine, const InclusionGraph& coarse,
                                             const PotentialFamily& u_prime, const Vec3& xi) {
  constexpr auto none = static_cast<std::uint32_t>(-1);
  std::size_t sphere_count = fine.spheres.size();
  std::vector<std::uint32_t> owner(sphere_count, none);
  for (const auto& node : coarse.nodes)
    for (auto s : node.members)
      if (s < sphere_count) owner[s] = node.id;

  std::vector<std::uint32_t> map(fine.nodes.size(), none);
  for (std::size_t i = 0; i < fine.nodes.size(); ++i) {
    const auto& members = fine.nodes[i].members;
    if (members.empty()) throw InvalidInput("lift_short_potentials: missing merge map (no member data)");
    for (auto s : members) {
      const auto o = s < sphere_count ? owner[s] : none;
      if (o == none || (map[i] != none && map[i] != o))
        throw InvalidInput("lift_short_potentials: missing merge map (coarse graph is not a short of fine graph)");
      map[i] = o;
    }
  }
  return lift_short_potentials(fine, coarse, map, u_prime, xi);
}

}  // namespace netapprox
