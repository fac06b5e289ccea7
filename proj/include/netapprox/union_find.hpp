#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

namespace netapprox {

/**
 * Disjoint-set forest with union by size and path halving.
 *
 * Amortized O(alpha(n)) per operation. The representative of a set is
 * an arbitrary member; use labels() for a canonical numbering.
 */
template <class Index = std::uint32_t>
class UnionFind {
 public:
  explicit UnionFind(Index n = 0) : parent_(n), size_(n, 1), sets_(n) {
    std::iota(parent_.begin(), parent_.end(), Index{0});
  }

  Index size() const noexcept { return static_cast<Index>(parent_.size()); }
  Index set_count() const noexcept { return sets_; }

  Index find(Index x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  /// Returns false if a and b were already in the same set.
  bool unite(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    --sets_;
    return true;
  }

  bool connected(Index a, Index b) { return find(a) == find(b); }

  /// Dense set labels 0..set_count()-1, numbered by smallest member.
  std::vector<Index> labels() {
    constexpr Index unset = static_cast<Index>(-1);
    std::vector<Index> root_label(parent_.size(), unset);
    std::vector<Index> out(parent_.size());
    Index next = 0;
    for (Index i = 0; i < size(); ++i) {
      Index r = find(i);
      if (root_label[r] == unset) root_label[r] = next++;
      out[i] = root_label[r];
    }
    return out;
  }

 private:
  std::vector<Index> parent_;
  std::vector<Index> size_;
  Index sets_;
};

}  // namespace netapprox
