#pragma once

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <thread>
#include <type_traits>
#include <variant>
#include <vector>

#include "netapprox/geometry.hpp"

namespace netapprox {

using ModelParams = std::variant<HardcoreParams, LatticeParams, ChainForestParams>;

inline std::string model_name(const ModelParams& m) {
  return std::visit(
      [](const auto& p) -> std::string {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, HardcoreParams>) return "hardcore";
        else if constexpr (std::is_same_v<T, LatticeParams>) return "lattice_jitter";
        else return "chain_forest";
      },
      m);
}

inline SphereConfig generate(const ModelParams& m, std::uint64_t seed, double N) {
  return std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, HardcoreParams>) return generate_hardcore(seed, N, p);
        else if constexpr (std::is_same_v<T, LatticeParams>) return generate_lattice_jitter(seed, N, p);
        else return generate_chain_forest(seed, N, p);
      },
      m);
}

/// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of cell (N, seed_index); independent of which other cells exist.
inline std::uint64_t cell_seed(std::uint64_t base_seed, double N, std::uint32_t seed_index) {
  std::uint64_t h = mix64(base_seed);
  h = mix64(h ^ std::bit_cast<std::uint64_t>(N));
  return mix64(h ^ seed_index);
}

/// Runs fn(i) for i in [0, n) on up to `threads` workers; fn must not throw.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  const auto workers = std::min<std::size_t>(threads, n);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
}

struct SampleSummary {
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(n); 0 for a single sample
  std::size_t count = 0;
};

/// Mean and standard error of the finite entries of `values`.
inline SampleSummary summarize(const std::vector<double>& values) {
  SampleSummary out;
  double sum = 0.0;
  for (double v : values)
    if (std::isfinite(v)) {
      sum += v;
      ++out.count;
    }
  if (out.count == 0) {
    out.mean = std::numeric_limits<double>::quiet_NaN();
    out.std_error = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  const double n = static_cast<double>(out.count);
  out.mean = sum / n;
  if (out.count > 1) {
    double ss = 0.0;
    for (double v : values)
      if (std::isfinite(v)) ss += (v - out.mean) * (v - out.mean);
    out.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return out;
}

}  // namespace netapprox
