#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "netapprox/error.hpp"
#include "netapprox/spatial_hash.hpp"
#include "netapprox/union_find.hpp"

namespace netapprox {

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;

  friend bool operator==(const Sphere&, const Sphere&) = default;
};

inline double ball_volume(double r) { return 4.0 / 3.0 * std::numbers::pi * r * r * r; }

/// Largest sup-norm |x|_inf reached by a point of the ball.
inline double sup_reach(const Sphere& s) { return s.center.cwiseAbs().maxCoeff() + s.radius; }

/// Surface-to-surface gap between two balls (negative when they overlap).
inline double sphere_gap(const Sphere& a, const Sphere& b) {
  return (b.center - a.center).norm() - a.radius - b.radius;
}

/**
 * A finite realization of the inclusion set inside the box (-N, N)^3.
 *
 * `saturated` is a generation warning: the generator gave up before
 * reaching its target count and the sphere list is partial.
 */
struct SphereConfig {
  std::vector<Sphere> spheres;
  double box_half_width = 1.0;
  std::string model = "manual";
  std::uint64_t seed = 0;
  double contact_tol = 1e-12;
  bool saturated = false;

  double box_volume() const {
    const double side = 2.0 * box_half_width;
    return side * side * side;
  }

  friend bool operator==(const SphereConfig&, const SphereConfig&) = default;
};

/// Checks radius/center/box invariants; throws InvalidInput on violation.
inline void validate(const SphereConfig& config) {
  if (!(config.box_half_width > 0.0) || !std::isfinite(config.box_half_width))
    throw InvalidInput("box_half_width must be positive and finite");
  if (!(config.contact_tol >= 0.0)) throw InvalidInput("contact_tol must be non-negative");
  const double n = config.box_half_width;
  for (const auto& s : config.spheres) {
    if (!(s.radius > 0.0) || !std::isfinite(s.radius)) throw InvalidInput("sphere radius must be positive");
    if (!s.center.allFinite()) throw InvalidInput("sphere center must be finite");
    // distance from center to the closed box
    const Vec3 excess = (s.center.cwiseAbs().array() - n).max(0.0).matrix();
    if (excess.norm() > s.radius) throw InvalidInput("sphere does not intersect the box");
  }
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// Random sequential adsorption retry budget per target sphere.
inline constexpr int kPlacementAttempts = 200;

struct HardcoreParams {
  double intensity = 0.05;  // target spheres per unit volume
  double radius = 1.0;
  double min_gap = 0.0;
};

/**
 * Random sequential placement of equal balls with centers in the box.
 *
 * Accepts a candidate only if its gap to every accepted ball is at least
 * `min_gap`. Sets `saturated` and returns the partial list when a target
 * ball cannot be placed within kPlacementAttempts draws.
 */
inline SphereConfig generate_hardcore(std::uint64_t seed, double N, const HardcoreParams& p) {
  if (!(p.intensity >= 0.0)) throw InvalidInput("hardcore: intensity must be >= 0");
  if (!(p.radius > 0.0)) throw InvalidInput("hardcore: radius must be > 0");
  if (!(p.min_gap >= 0.0)) throw InvalidInput("hardcore: min_gap must be >= 0");
  if (!(N > p.radius)) throw InvalidInput("hardcore: N must exceed radius");

  SphereConfig out;
  out.model = "hardcore";
  out.seed = seed;
  out.box_half_width = N;

  const auto target = static_cast<std::size_t>(std::llround(p.intensity * out.box_volume()));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-N, N);
  SpatialHash grid(2.0 * p.radius + p.min_gap);

  out.spheres.reserve(target);
  for (std::size_t placed = 0; placed < target; ++placed) {
    bool ok = false;
    for (int attempt = 0; attempt < kPlacementAttempts && !ok; ++attempt) {
      Sphere cand{Vec3(coord(rng), coord(rng), coord(rng)), p.radius};
      ok = true;
      grid.for_each_near(cand.center, [&](std::uint32_t j) {
        if (ok && sphere_gap(cand, out.spheres[j]) < p.min_gap) ok = false;
      });
      if (ok) {
        grid.insert(cand.center, static_cast<std::uint32_t>(out.spheres.size()));
        out.spheres.push_back(cand);
      }
    }
    if (!ok) {
      out.saturated = true;
      break;
    }
  }
  return out;
}

struct LatticeParams {
  double spacing = 1.0;
  double radius = 0.3;
  double jitter = 0.0;
  bool allow_overlap = false;
};

/**
 * One ball per cubic lattice cell meeting the box, centered in the cell
 * and displaced uniformly in [-jitter, jitter]^3. Cells are aligned so
 * that the origin is a lattice vertex, which makes jitter-free lattices
 * symmetric under the cube's symmetry group.
 */
inline SphereConfig generate_lattice_jitter(std::uint64_t seed, double N, const LatticeParams& p) {
  if (!(p.spacing > 0.0)) throw InvalidInput("lattice: spacing must be > 0");
  if (!(p.radius > 0.0)) throw InvalidInput("lattice: radius must be > 0");
  if (!(p.jitter >= 0.0)) throw InvalidInput("lattice: jitter must be >= 0");
  if (!(N > 0.0)) throw InvalidInput("lattice: N must be > 0");
  if (!p.allow_overlap) {
    if (!(p.radius < p.spacing / 2.0))
      throw InvalidInput("lattice: radius >= spacing/2 forces overlaps");
    if (!(p.jitter < p.spacing / 2.0 - p.radius))
      throw InvalidInput("lattice: jitter too large for non-overlapping balls");
  }

  SphereConfig out;
  out.model = "lattice_jitter";
  out.seed = seed;
  out.box_half_width = N;

  const auto kmin = static_cast<long>(std::floor(-N / p.spacing));
  const auto kmax = static_cast<long>(std::ceil(N / p.spacing)) - 1;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> shake(-p.jitter, p.jitter);

  for (long i = kmin; i <= kmax; ++i)
    for (long j = kmin; j <= kmax; ++j)
      for (long k = kmin; k <= kmax; ++k) {
        Vec3 c((static_cast<double>(i) + 0.5) * p.spacing, (static_cast<double>(j) + 0.5) * p.spacing,
               (static_cast<double>(k) + 0.5) * p.spacing);
        if (p.jitter > 0.0) c += Vec3(shake(rng), shake(rng), shake(rng));
        const Vec3 excess = (c.cwiseAbs().array() - N).max(0.0).matrix();
        if (excess.norm() > p.radius) continue;
        out.spheres.push_back({c, p.radius});
      }
  return out;
}

struct ChainForestParams {
  double radius = 1.0;
  int chain_len_max = 8;
  double gap_min = 0.01;
  double gap_max = 0.1;
  double chain_intensity = 0.005;  // target chains per unit volume
  double clearance = 0.0;          // min gap between chains; 0 means 2 * gap_max
};

/**
 * Disjoint straight chains of equal balls with random lengths in
 * [1, chain_len_max], random consecutive gaps in [gap_min, gap_max] and
 * uniformly random directions. Balls of different chains are separated
 * by a gap strictly larger than the clearance, so the delta-multigraph is
 * a forest of paths for gap_max <= delta <= clearance (and delta < 2r).
 */
inline SphereConfig generate_chain_forest(std::uint64_t seed, double N, const ChainForestParams& p) {
  if (!(p.radius > 0.0)) throw InvalidInput("chain_forest: radius must be > 0");
  if (p.chain_len_max < 1) throw InvalidInput("chain_forest: chain_len_max must be >= 1");
  if (!(p.gap_min > 0.0 && p.gap_min <= p.gap_max)) throw InvalidInput("chain_forest: need 0 < gap_min <= gap_max");
  if (!(p.chain_intensity >= 0.0)) throw InvalidInput("chain_forest: chain_intensity must be >= 0");
  if (!(N > p.radius)) throw InvalidInput("chain_forest: N must exceed radius");
  const double clearance = p.clearance > 0.0 ? p.clearance : 2.0 * p.gap_max;

  SphereConfig out;
  out.model = "chain_forest";
  out.seed = seed;
  out.box_half_width = N;

  const auto target = static_cast<std::size_t>(std::llround(p.chain_intensity * out.box_volume()));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-N, N);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> gap(p.gap_min, p.gap_max);
  std::uniform_int_distribution<int> length(1, p.chain_len_max);
  SpatialHash grid(2.0 * p.radius + std::max(clearance, p.gap_max));

  std::vector<Sphere> chain;
  for (std::size_t placed = 0; placed < target; ++placed) {
    bool ok = false;
    for (int attempt = 0; attempt < kPlacementAttempts && !ok; ++attempt) {
      const int len = length(rng);
      const double cos_t = 2.0 * unit(rng) - 1.0;
      const double phi = 2.0 * std::numbers::pi * unit(rng);
      const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
      const Vec3 dir(sin_t * std::cos(phi), sin_t * std::sin(phi), cos_t);
      Vec3 c(coord(rng), coord(rng), coord(rng));

      chain.clear();
      for (int k = 0; k < len; ++k) {
        if (k > 0) c += (2.0 * p.radius + gap(rng)) * dir;
        chain.push_back({c, p.radius});
      }
      ok = std::all_of(chain.begin(), chain.end(), [&](const Sphere& s) {
        return (s.center.cwiseAbs().array() <= N).all();
      });
      for (const auto& s : chain) {
        if (!ok) break;
        grid.for_each_near(s.center, [&](std::uint32_t j) {
          if (ok && !(sphere_gap(s, out.spheres[j]) > clearance)) ok = false;
        });
      }
      if (ok) {
        for (const auto& s : chain) {
          grid.insert(s.center, static_cast<std::uint32_t>(out.spheres.size()));
          out.spheres.push_back(s);
        }
      }
    }
    if (!ok) {
      out.saturated = true;
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Connected components
// ---------------------------------------------------------------------------

struct Overlap {
  double volume = 0.0;
  Vec3 centroid = Vec3::Zero();
};

/// Volume and centroid of the intersection of two balls.
inline Overlap lens_overlap(const Sphere& s1, const Sphere& s2) {
  const Vec3 delta = s2.center - s1.center;
  const double d = delta.norm();
  const double R = s1.radius, r = s2.radius;
  if (d >= R + r) return {};
  if (d <= std::abs(R - r)) {
    const Sphere& small = R <= r ? s1 : s2;
    return {ball_volume(small.radius), small.center};
  }
  const Vec3 u = delta / d;
  const double a = (d * d + R * R - r * r) / (2.0 * d);  // plane offset from s1
  const double h1 = R - a;
  const double h2 = r - (d - a);
  auto cap_volume = [](double rad, double h) { return std::numbers::pi * h * h * (3.0 * rad - h) / 3.0; };
  auto cap_offset = [](double rad, double h) { return 3.0 * (2.0 * rad - h) * (2.0 * rad - h) / (4.0 * (3.0 * rad - h)); };
  const double v1 = cap_volume(R, h1), v2 = cap_volume(r, h2);
  const Vec3 g1 = s1.center + cap_offset(R, h1) * u;
  const Vec3 g2 = s2.center - cap_offset(r, h2) * u;
  return {v1 + v2, (v1 * g1 + v2 * g2) / (v1 + v2)};
}

struct Component {
  std::vector<std::uint32_t> spheres;  // ascending
  double volume = 0.0;
  Vec3 centroid = Vec3::Zero();
  double diameter = 0.0;
  double reach = 0.0;     // max sup-norm of a point of the component
  bool boundary = false;  // meets the layer of width `layer_width` at the box boundary
};

struct ComponentSet {
  std::vector<Component> components;        // ordered by smallest sphere index
  std::vector<std::uint32_t> component_of;  // sphere index -> component
  bool triple_overlap = false;              // pairwise volume correction is inexact
};

/// Max surface-to-surface extent of a union of balls.
inline double union_diameter(const std::vector<Sphere>& spheres, const std::vector<std::uint32_t>& ids) {
  double best = 0.0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const Sphere& a = spheres[ids[i]];
    best = std::max(best, 2.0 * a.radius);
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      const Sphere& b = spheres[ids[j]];
      best = std::max(best, (a.center - b.center).norm() + a.radius + b.radius);
    }
  }
  return best;
}

/**
 * Connected components of the union of balls. Two balls are joined when
 * their center distance is at most r_i + r_j + contact_tol.
 *
 * Volume is the sum of ball volumes minus pairwise lens volumes (triple
 * intersections are ignored and flagged). `boundary` marks components
 * whose sup-norm reach is at least N - layer_width.
 */
inline ComponentSet components(const SphereConfig& config, double layer_width = 0.0) {
  const auto& sp = config.spheres;
  const auto n = static_cast<std::uint32_t>(sp.size());
  ComponentSet out;
  if (n == 0) return out;

  double rmax = 0.0;
  for (const auto& s : sp) rmax = std::max(rmax, s.radius);
  SpatialHash grid(2.0 * rmax + config.contact_tol);
  for (std::uint32_t i = 0; i < n; ++i) grid.insert(sp[i].center, i);

  UnionFind<std::uint32_t> uf(n);
  std::vector<std::vector<std::uint32_t>> overlapping(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    grid.for_each_near(sp[i].center, [&](std::uint32_t j) {
      if (j <= i) return;
      const double dist = (sp[i].center - sp[j].center).norm();
      if (dist <= sp[i].radius + sp[j].radius + config.contact_tol) {
        uf.unite(i, j);
        if (dist < sp[i].radius + sp[j].radius) {
          overlapping[i].push_back(j);
          overlapping[j].push_back(i);
        }
      }
    });
  }

  out.component_of = uf.labels();
  const auto ncomp = uf.set_count();
  out.components.resize(ncomp);
  for (std::uint32_t i = 0; i < n; ++i) out.components[out.component_of[i]].spheres.push_back(i);

  for (auto& comp : out.components) {
    double vol = 0.0;
    Vec3 moment = Vec3::Zero();
    double reach = 0.0;
    for (std::uint32_t i : comp.spheres) {
      const double v = ball_volume(sp[i].radius);
      vol += v;
      moment += v * sp[i].center;
      reach = std::max(reach, sup_reach(sp[i]));
      for (std::uint32_t j : overlapping[i]) {
        if (j <= i) continue;
        const Overlap lens = lens_overlap(sp[i], sp[j]);
        vol -= lens.volume;
        moment -= lens.volume * lens.centroid;
      }
    }
    comp.volume = vol;
    comp.centroid = moment / vol;
    comp.reach = reach;
    comp.diameter = union_diameter(sp, comp.spheres);
    comp.boundary = reach >= config.box_half_width - layer_width;
  }

  for (std::uint32_t i = 0; i < n && !out.triple_overlap; ++i) {
    const auto& nb = overlapping[i];
    for (std::size_t a = 0; a < nb.size() && !out.triple_overlap; ++a)
      for (std::size_t b = a + 1; b < nb.size(); ++b)
        if (sphere_gap(sp[nb[a]], sp[nb[b]]) < 0.0) {
          out.triple_overlap = true;
          break;
        }
  }
  return out;
}

/**
 * Keeps the spheres whose whole component lies inside the open box
 * (-M, M)^3; components crossing the boundary are dropped entirely.
 */
inline SphereConfig restrict_box(const SphereConfig& config, double M) {
  if (!(M > 0.0 && M <= config.box_half_width)) throw InvalidInput("restrict_box: need 0 < M <= N");
  const ComponentSet cs = components(config);
  SphereConfig out = config;
  out.box_half_width = M;
  out.spheres.clear();
  for (std::size_t i = 0; i < config.spheres.size(); ++i) {
    if (cs.components[cs.component_of[i]].reach < M) out.spheres.push_back(config.spheres[i]);
  }
  return out;
}

}  // namespace netapprox
