#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "netapprox/error.hpp"
#include "netapprox/geometry.hpp"
#include "netapprox/multigraph.hpp"

namespace netapprox {

enum class ClusterMeasure { diameter, cardinality };

struct MomentEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/**
 * Monte-Carlo estimate of the box average of diam(C_y)^p (or #C_y^p),
 * where C_y is the cluster containing y and the value is 0 off the
 * inclusions. `graph` must have been built from `config`.
 */
inline MomentEstimate cluster_moment_statistic(const SphereConfig& config, const InclusionGraph& graph, double p,
                                               std::size_t n_samples, std::uint64_t seed,
                                               ClusterMeasure measure = ClusterMeasure::diameter) {
  if (!(p > 0.0)) throw InvalidInput("cluster_moment_statistic: p must be > 0");
  if (n_samples < 1) throw InvalidInput("cluster_moment_statistic: need at least one sample");
  if (graph.spheres != config.spheres) throw InvalidInput("cluster_moment_statistic: graph not built from config");
  if (config.spheres.empty()) return {};

  const ClusterPartition cp = clusters(graph);
  std::vector<double> cluster_value(cp.clusters.size());
  for (std::size_t c = 0; c < cp.clusters.size(); ++c) {
    const auto& cl = cp.clusters[c];
    const double base = measure == ClusterMeasure::diameter ? cl.diameter : static_cast<double>(cl.cardinality());
    cluster_value[c] = std::pow(base, p);
  }
  constexpr auto none = static_cast<std::uint32_t>(-1);
  std::vector<std::uint32_t> sphere_cluster(config.spheres.size(), none);
  for (const auto& node : graph.nodes)
    for (auto s : node.members) sphere_cluster[s] = cp.cluster_of[node.id];

  double rmax = 0.0;
  for (const auto& s : config.spheres) rmax = std::max(rmax, s.radius);
  SpatialHash grid(rmax);
  for (std::uint32_t i = 0; i < config.spheres.size(); ++i) grid.insert(config.spheres[i].center, i);

  const double N = config.box_half_width;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-N, N);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t k = 0; k < n_samples; ++k) {
    const Vec3 y(coord(rng), coord(rng), coord(rng));
    double v = 0.0;
    grid.for_each_near(y, [&](std::uint32_t i) {
      if (v == 0.0 && sphere_cluster[i] != none &&
          (y - config.spheres[i].center).norm() <= config.spheres[i].radius)
        v = cluster_value[sphere_cluster[i]];
    });
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(n_samples);
  const double mean = sum / n;
  const double var = n > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)) : 0.0;
  return {mean, std::sqrt(var / n)};
}

}  // namespace netapprox
