#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace netapprox {

using Vec3 = Eigen::Vector3d;

/**
 * Uniform-grid bucket index over points in R^3.
 *
 * Any two points closer than the cell size land in the same or in
 * face/edge/corner-adjacent cells, so a 27-cell sweep never misses a
 * pair within that range.
 */
class SpatialHash {
 public:
  explicit SpatialHash(double cell_size) : cell_(cell_size) {}

  double cell_size() const noexcept { return cell_; }

  void insert(const Vec3& p, std::uint32_t id) { buckets_[key(cell_of(p))].push_back(id); }

  /// Calls fn(id) for every stored id in the 27 cells around p.
  template <class Fn>
  void for_each_near(const Vec3& p, Fn&& fn) const {
    const auto c = cell_of(p);
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          auto it = buckets_.find(key({c[0] + dx, c[1] + dy, c[2] + dz}));
          if (it == buckets_.end()) continue;
          for (std::uint32_t id : it->second) fn(id);
        }
  }

 private:
  using Cell = std::array<std::int64_t, 3>;

  Cell cell_of(const Vec3& p) const {
    return {static_cast<std::int64_t>(std::floor(p.x() / cell_)),
            static_cast<std::int64_t>(std::floor(p.y() / cell_)),
            static_cast<std::int64_t>(std::floor(p.z() / cell_))};
  }

  static std::uint64_t key(const Cell& c) {
    // 21 bits per axis, offset to keep indices non-negative.
    constexpr std::int64_t off = 1 << 20;
    constexpr std::uint64_t mask = (1u << 21) - 1;
    return (static_cast<std::uint64_t>(c[0] + off) & mask) |
           ((static_cast<std::uint64_t>(c[1] + off) & mask) << 21) |
           ((static_cast<std::uint64_t>(c[2] + off) & mask) << 42);
  }

  double cell_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets_;
};

}  // namespace netapprox
