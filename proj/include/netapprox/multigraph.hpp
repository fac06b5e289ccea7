#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "netapprox/error.hpp"
#include "netapprox/geometry.hpp"
#include "netapprox/union_find.hpp"

namespace netapprox {

/// An inclusion: one connected component of the sphere union.
struct Node {
  std::uint32_t id = 0;
  std::vector<std::uint32_t> members;  // sphere indices into InclusionGraph::spheres
  double volume = 0.0;
  Vec3 centroid = Vec3::Zero();
  double diameter = 0.0;
  bool boundary = false;

  friend bool operator==(const Node&, const Node&) = default;
};

/**
 * A gap between two inclusions. Endpoints satisfy a < b; `xa` lies on
 * sphere `sphere_a` of node a and `xb` on sphere `sphere_b` of node b.
 * `id` is a stable label: it survives shorts and subgraph extraction.
 */
struct Edge {
  std::uint32_t id = 0;
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  Vec3 xa = Vec3::Zero();
  Vec3 xb = Vec3::Zero();
  double gap = 0.0;
  double mu = 0.0;
  std::uint32_t sphere_a = 0;
  std::uint32_t sphere_b = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/**
 * The delta-multigraph of inclusions in the box (-N, N)^3.
 *
 * Parallel edges are allowed, self-loops are not. Nodes are indexed by
 * position (node.id == position); families over edges are indexed by
 * position in `edges`. `spheres` holds the geometry the nodes refer to
 * and may be empty for purely combinatorial graphs.
 */
struct InclusionGraph {
  double delta = 0.5;
  double N = 1.0;
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  std::vector<Sphere> spheres;
  bool g2_violation = false;

  double box_volume() const {
    const double side = 2.0 * N;
    return side * side * side;
  }
  std::size_t node_count() const noexcept { return nodes.size(); }
  std::size_t edge_count() const noexcept { return edges.size(); }

  friend bool operator==(const InclusionGraph&, const InclusionGraph&) = default;
};

/// Edge weight for a gap of width d in (0, 1).
inline double gap_weight(double d) { return std::abs(std::log(d)); }

struct ContactPair {
  Vec3 xa = Vec3::Zero();
  Vec3 xb = Vec3::Zero();
  double gap = 0.0;
};

/// Closest points of two disjoint balls, on the line of centers.
inline ContactPair closest_points(const Sphere& a, const Sphere& b) {
  const Vec3 delta = b.center - a.center;
  const double dist = delta.norm();
  const double gap = dist - a.radius - b.radius;
  if (!(gap > 0.0)) throw InvalidInput("closest_points: spheres overlap or touch");
  const Vec3 u = delta / dist;
  return {a.center + a.radius * u, b.center - b.radius * u, gap};
}

namespace detail {

inline void sort_edges(std::vector<Edge>& edges) {
  std::sort(edges.begin(), edges.end(), [](const Edge& l, const Edge& r) {
    return std::tie(l.a, l.b, l.gap, l.sphere_a, l.sphere_b, l.id) <
           std::tie(r.a, r.b, r.gap, r.sphere_a, r.sphere_b, r.id);
  });
}

inline void orient(Edge& e) {
  if (e.a > e.b) {
    std::swap(e.a, e.b);
    std::swap(e.xa, e.xb);
    std::swap(e.sphere_a, e.sphere_b);
  }
}

inline double node_reach(const InclusionGraph& g, const Node& node) {
  if (node.members.empty() || g.spheres.empty())
    return node.centroid.cwiseAbs().maxCoeff() + node.diameter;
  double reach = 0.0;
  for (auto s : node.members) reach = std::max(reach, sup_reach(g.spheres[s]));
  return reach;
}

inline double group_diameter(const InclusionGraph& g, std::span<const std::uint32_t> node_ids) {
  if (node_ids.empty()) return 0.0;
  bool have_geometry = !g.spheres.empty();
  for (auto id : node_ids) have_geometry = have_geometry && !g.nodes[id].members.empty();
  if (have_geometry) {
    std::vector<std::uint32_t> all;
    for (auto id : node_ids) all.insert(all.end(), g.nodes[id].members.begin(), g.nodes[id].members.end());
    return union_diameter(g.spheres, all);
  }
  // Without geometry: every point of node i is within diam_i of its centroid.
  double best = 0.0;
  for (std::size_t i = 0; i < node_ids.size(); ++i) {
    const Node& p = g.nodes[node_ids[i]];
    best = std::max(best, p.diameter);
    for (std::size_t j = i + 1; j < node_ids.size(); ++j) {
      const Node& q = g.nodes[node_ids[j]];
      best = std::max(best, (p.centroid - q.centroid).norm() + p.diameter + q.diameter);
    }
  }
  return best;
}

/// Flags two gaps sharing a sphere whose contact points are within 2 delta.
inline bool detect_g2_violation(const std::vector<Edge>& edges, std::size_t sphere_count, double delta) {
  std::vector<std::vector<Vec3>> contacts(sphere_count);
  for (const auto& e : edges) {
    if (e.sphere_a >= sphere_count || e.sphere_b >= sphere_count) continue;
    contacts[e.sphere_a].push_back(e.xa);
    contacts[e.sphere_b].push_back(e.xb);
  }
  for (const auto& pts : contacts)
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j)
        if ((pts[i] - pts[j]).norm() <= 2.0 * delta) return true;
  return false;
}

}  // namespace detail

/**
 * Builds the delta-multigraph: one edge per pair of spheres in distinct
 * components whose gap is at most delta, weighted by |ln gap|.
 */
inline InclusionGraph build_graph(const ComponentSet& cs, const SphereConfig& config, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidInput("build_graph: delta must lie in (0, 1)");
  if (cs.component_of.size() != config.spheres.size())
    throw InvalidInput("build_graph: component set does not match configuration");

  InclusionGraph g;
  g.delta = delta;
  g.N = config.box_half_width;
  g.spheres = config.spheres;
  g.nodes.reserve(cs.components.size());
  for (std::size_t c = 0; c < cs.components.size(); ++c) {
    const Component& comp = cs.components[c];
    g.nodes.push_back({static_cast<std::uint32_t>(c), comp.spheres, comp.volume, comp.centroid, comp.diameter,
                       comp.reach >= config.box_half_width - delta});
  }

  const auto& sp = config.spheres;
  double rmax = 0.0;
  for (const auto& s : sp) rmax = std::max(rmax, s.radius);
  SpatialHash grid(2.0 * rmax + delta);
  for (std::uint32_t i = 0; i < sp.size(); ++i) grid.insert(sp[i].center, i);

  for (std::uint32_t i = 0; i < sp.size(); ++i) {
    grid.for_each_near(sp[i].center, [&](std::uint32_t j) {
      if (j <= i) return;
      const auto ci = cs.component_of[i], cj = cs.component_of[j];
      if (ci == cj) return;
      if (!(sphere_gap(sp[i], sp[j]) <= delta)) return;
      const ContactPair cp = closest_points(sp[i], sp[j]);
      Edge e{0, ci, cj, cp.xa, cp.xb, cp.gap, gap_weight(cp.gap), i, j};
      detail::orient(e);
      g.edges.push_back(e);
    });
  }
  detail::sort_edges(g.edges);
  for (std::uint32_t k = 0; k < g.edges.size(); ++k) g.edges[k].id = k;
  g.g2_violation = detail::detect_g2_violation(g.edges, sp.size(), delta);
  return g;
}

/// Convenience: components + graph for a configuration.
inline InclusionGraph build_graph(const SphereConfig& config, double delta) {
  return build_graph(components(config), config, delta);
}

// ---------------------------------------------------------------------------
// Clusters and cycles
// ---------------------------------------------------------------------------

struct Cluster {
  std::vector<std::uint32_t> nodes;
  double diameter = 0.0;
  double volume = 0.0;
  std::size_t cardinality() const noexcept { return nodes.size(); }
};

struct ClusterPartition {
  std::vector<std::uint32_t> cluster_of;  // node -> cluster, clusters numbered by smallest node
  std::vector<Cluster> clusters;
};

inline ClusterPartition clusters(const InclusionGraph& g) {
  const auto n = static_cast<std::uint32_t>(g.nodes.size());
  UnionFind<std::uint32_t> uf(n);
  for (const auto& e : g.edges) uf.unite(e.a, e.b);
  ClusterPartition out;
  out.cluster_of = uf.labels();
  out.clusters.resize(uf.set_count());
  for (std::uint32_t i = 0; i < n; ++i) {
    auto& c = out.clusters[out.cluster_of[i]];
    c.nodes.push_back(i);
    c.volume += g.nodes[i].volume;
  }
  for (auto& c : out.clusters) c.diameter = detail::group_diameter(g, c.nodes);
  return out;
}

/// True iff the multigraph has no cycle; parallel edges form a cycle.
inline bool is_cycle_free(const InclusionGraph& g) {
  UnionFind<std::uint32_t> uf(static_cast<std::uint32_t>(g.nodes.size()));
  for (const auto& e : g.edges)
    if (!uf.unite(e.a, e.b)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Shorts
// ---------------------------------------------------------------------------

struct ShortResult {
  InclusionGraph graph;
  std::vector<std::uint32_t> node_map;  // input node -> output node
};

/**
 * Identifies the nodes of every pair (transitively) and suppresses the
 * edges joining identified nodes. Merged nodes carry summed volume,
 * volume-weighted centroid, and the exact diameter of the union.
 */
inline ShortResult short_at(const InclusionGraph& g,
                            std::span<const std::pair<std::uint32_t, std::uint32_t>> pairs) {
  const auto n = static_cast<std::uint32_t>(g.nodes.size());
  UnionFind<std::uint32_t> uf(n);
  for (auto [a, b] : pairs) {
    if (a >= n || b >= n) throw InvalidInput("short_at: pair references a missing node");
    if (a == b) throw InvalidInput("short_at: pair must join distinct nodes");
    uf.unite(a, b);
  }

  ShortResult out;
  out.node_map = uf.labels();  // numbered by smallest old node, which preserves node order
  out.graph.delta = g.delta;
  out.graph.N = g.N;
  out.graph.spheres = g.spheres;
  out.graph.g2_violation = g.g2_violation;

  std::vector<std::vector<std::uint32_t>> groups(uf.set_count());
  for (std::uint32_t i = 0; i < n; ++i) groups[out.node_map[i]].push_back(i);
  out.graph.nodes.reserve(groups.size());
  for (std::uint32_t k = 0; k < groups.size(); ++k) {
    const auto& grp = groups[k];
    if (grp.size() == 1) {
      Node node = g.nodes[grp.front()];
      node.id = k;
      out.graph.nodes.push_back(std::move(node));
      continue;
    }
    Node merged;
    merged.id = k;
    Vec3 moment = Vec3::Zero();
    for (auto i : grp) {
      const Node& src = g.nodes[i];
      merged.members.insert(merged.members.end(), src.members.begin(), src.members.end());
      merged.volume += src.volume;
      moment += src.volume * src.centroid;
      merged.boundary = merged.boundary || src.boundary;
    }
    std::sort(merged.members.begin(), merged.members.end());
    merged.centroid = moment / merged.volume;
    merged.diameter = detail::group_diameter(g, grp);
    out.graph.nodes.push_back(std::move(merged));
  }

  for (const auto& e : g.edges) {
    const auto a = out.node_map[e.a], b = out.node_map[e.b];
    if (a == b) continue;
    Edge kept = e;
    kept.a = a;
    kept.b = b;
    detail::orient(kept);
    out.graph.edges.push_back(kept);
  }
  detail::sort_edges(out.graph.edges);
  return out;
}

inline ShortResult short_at(const InclusionGraph& g,
                            std::initializer_list<std::pair<std::uint32_t, std::uint32_t>> pairs) {
  return short_at(g, std::span<const std::pair<std::uint32_t, std::uint32_t>>(pairs.begin(), pairs.size()));
}

/**
 * The kappa-short relative to a sub-family of kept edges: every edge not
 * in `kept_edge_ids` with gap < kappa is shorted.
 */
inline ShortResult short_kappa(const InclusionGraph& g, const std::set<std::uint32_t>& kept_edge_ids, double kappa) {
  if (!(kappa > 0.0 && kappa < 1.0)) throw InvalidInput("short_kappa: kappa must lie in (0, 1)");
  std::set<std::uint32_t> known;
  for (const auto& e : g.edges) known.insert(e.id);
  for (auto id : kept_edge_ids)
    if (!known.contains(id)) throw InvalidInput("short_kappa: kept edge id not in graph");

  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  for (const auto& e : g.edges)
    if (!kept_edge_ids.contains(e.id) && e.gap < kappa) pairs.emplace_back(e.a, e.b);
  return short_at(g, pairs);
}

/// Subgraph on the nodes selected by `keep`, with the edges among them.
template <class Pred>
ShortResult induced_subgraph(const InclusionGraph& g, Pred&& keep) {
  constexpr auto dropped = static_cast<std::uint32_t>(-1);
  ShortResult out;
  out.graph.delta = g.delta;
  out.graph.N = g.N;
  out.graph.spheres = g.spheres;
  out.node_map.assign(g.nodes.size(), dropped);
  for (const auto& node : g.nodes) {
    if (!keep(node)) continue;
    out.node_map[node.id] = static_cast<std::uint32_t>(out.graph.nodes.size());
    Node copy = node;
    copy.id = out.node_map[node.id];
    out.graph.nodes.push_back(std::move(copy));
  }
  for (const auto& e : g.edges) {
    if (out.node_map[e.a] == dropped || out.node_map[e.b] == dropped) continue;
    Edge copy = e;
    copy.a = out.node_map[e.a];
    copy.b = out.node_map[e.b];
    out.graph.edges.push_back(copy);
  }
  out.graph.g2_violation = detail::detect_g2_violation(out.graph.edges, out.graph.spheres.size(), g.delta);
  return out;
}

}  // namespace netapprox
