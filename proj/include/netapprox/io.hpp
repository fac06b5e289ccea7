#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "netapprox/effective.hpp"
#include "netapprox/energy.hpp"
#include "netapprox/error.hpp"
#include "netapprox/geometry.hpp"
#include "netapprox/multigraph.hpp"
#include "netapprox/scan.hpp"

namespace netapprox {

inline constexpr int kSchemaVersion = 1;

namespace detail {

/// 17 significant digits round-trip every double; non-finite values become null.
inline std::string num(double v) { return std::isfinite(v) ? fmt::format("{:.17g}", v) : std::string("null"); }

inline std::string vec3(const Vec3& v) { return fmt::format("[{},{},{}]", num(v.x()), num(v.y()), num(v.z())); }

inline std::string quoted(const std::string& s) { return nlohmann::json(s).dump(); }

template <class T, class Fn>
std::string array(const std::vector<T>& items, Fn&& fn) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += fn(items[i]);
  }
  return out + ']';
}

inline std::string sphere_json(const Sphere& s) { return fmt::format("{{\"c\":{},\"r\":{}}}", vec3(s.center), num(s.radius)); }

inline nlohmann::json parse(const std::string& text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed JSON: ") + e.what());
  }
}

inline void check_version(const nlohmann::json& j) {
  if (j.contains("schema_version") && j.at("schema_version").get<int>() != kSchemaVersion)
    throw SchemaError(fmt::format("unsupported schema_version {}", j.at("schema_version").dump()));
}

inline double get_num(const nlohmann::json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!j.is_number()) throw SchemaError("expected a number");
  return j.get<double>();
}

inline Vec3 get_vec3(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw SchemaError("expected a 3-vector");
  return {get_num(j[0]), get_num(j[1]), get_num(j[2])};
}

inline Sphere get_sphere(const nlohmann::json& j) { return {get_vec3(j.at("c")), get_num(j.at("r"))}; }

/// Converts any JSON access failure into SchemaError.
template <class Fn>
auto guarded(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("schema mismatch: ") + e.what());
  } catch (const InvalidInput& e) {
    throw SchemaError(std::string("invalid content: ") + e.what());
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// SphereConfig
// ---------------------------------------------------------------------------

inline std::string to_json(const SphereConfig& c) {
  std::string out = fmt::format("{{\"model\":{},\"seed\":{},\"box_half_width\":{},\"contact_tol\":{},\"spheres\":{}",
                                detail::quoted(c.model), c.seed, detail::num(c.box_half_width), detail::num(c.contact_tol),
                                detail::array(c.spheres, detail::sphere_json));
  if (c.saturated) out += ",\"saturated\":true";
  return out + fmt::format(",\"schema_version\":{}}}\n", kSchemaVersion);
}

inline SphereConfig config_from_json(const std::string& text) {
  const auto j = detail::parse(text);
  return detail::guarded([&] {
    detail::check_version(j);
    SphereConfig c;
    c.model = j.at("model").get<std::string>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.box_half_width = detail::get_num(j.at("box_half_width"));
    c.contact_tol = detail::get_num(j.at("contact_tol"));
    for (const auto& s : j.at("spheres")) c.spheres.push_back(detail::get_sphere(s));
    c.saturated = j.value("saturated", false);
    validate(c);
    return c;
  });
}

// ---------------------------------------------------------------------------
// InclusionGraph
// ---------------------------------------------------------------------------

inline std::string to_json(const InclusionGraph& g) {
  const auto node_json = [](const Node& n) {
    return fmt::format("{{\"id\":{},\"vol\":{},\"x\":{},\"diam\":{},\"boundary\":{},\"members\":{}}}", n.id,
                       detail::num(n.volume), detail::vec3(n.centroid), detail::num(n.diameter), n.boundary,
                       detail::array(n.members, [](std::uint32_t m) { return std::to_string(m); }));
  };
  const auto edge_json = [](const Edge& e) {
    return fmt::format("{{\"id\":{},\"a\":{},\"b\":{},\"xa\":{},\"xb\":{},\"d\":{},\"mu\":{},\"sa\":{},\"sb\":{}}}", e.id,
                       e.a, e.b, detail::vec3(e.xa), detail::vec3(e.xb), detail::num(e.gap), detail::num(e.mu),
                       e.sphere_a, e.sphere_b);
  };
  return fmt::format(
      "{{\"delta\":{},\"N\":{},\"nodes\":{},\"edges\":{},\"spheres\":{},\"g2_violation\":{},\"schema_version\":{}}}\n",
      detail::num(g.delta), detail::num(g.N), detail::array(g.nodes, node_json), detail::array(g.edges, edge_json),
      detail::array(g.spheres, detail::sphere_json), g.g2_violation, kSchemaVersion);
}

inline InclusionGraph graph_from_json(const std::string& text) {
  const auto j = detail::parse(text);
  return detail::guarded([&] {
    detail::check_version(j);
    InclusionGraph g;
    g.delta = detail::get_num(j.at("delta"));
    g.N = detail::get_num(j.at("N"));
    for (const auto& s : j.value("spheres", nlohmann::json::array())) g.spheres.push_back(detail::get_sphere(s));
    for (const auto& jn : j.at("nodes")) {
      Node n;
      n.id = jn.at("id").get<std::uint32_t>();
      n.volume = detail::get_num(jn.at("vol"));
      n.centroid = detail::get_vec3(jn.at("x"));
      n.diameter = detail::get_num(jn.at("diam"));
      n.boundary = jn.at("boundary").get<bool>();
      n.members = jn.value("members", std::vector<std::uint32_t>{});
      if (n.id != g.nodes.size()) throw SchemaError("node ids must equal their positions");
      for (auto m : n.members)
        if (m >= g.spheres.size()) throw SchemaError("node member out of range");
      g.nodes.push_back(std::move(n));
    }
    for (const auto& je : j.at("edges")) {
      Edge e;
      e.id = je.at("id").get<std::uint32_t>();
      e.a = je.at("a").get<std::uint32_t>();
      e.b = je.at("b").get<std::uint32_t>();
      e.xa = detail::get_vec3(je.at("xa"));
      e.xb = detail::get_vec3(je.at("xb"));
      e.gap = detail::get_num(je.at("d"));
      e.mu = detail::get_num(je.at("mu"));
      e.sphere_a = je.value("sa", 0u);
      e.sphere_b = je.value("sb", 0u);
      if (e.a >= e.b || e.b >= g.nodes.size()) throw SchemaError("edge endpoints out of range");
      g.edges.push_back(e);
    }
    g.g2_violation = j.value("g2_violation", false);
    return g;
  });
}

// ---------------------------------------------------------------------------
// Families, energies, tensors
// ---------------------------------------------------------------------------

/// [[b_ab, b_ba], ...] in edge order.
inline std::string to_json(const BoundaryFamily& b) {
  std::string out = "[";
  for (Eigen::Index k = 0; k < b.size(); ++k) {
    if (k) out += ',';
    out += fmt::format("[{},{}]", detail::num(b.forward[k]), detail::num(b.backward[k]));
  }
  return out + "]\n";
}

inline BoundaryFamily family_from_json(const std::string& text) {
  const auto j = detail::parse(text);
  return detail::guarded([&] {
    if (!j.is_array()) throw SchemaError("family must be an array");
    auto b = BoundaryFamily::zeros(j.size());
    for (std::size_t k = 0; k < j.size(); ++k) {
      if (!j[k].is_array() || j[k].size() != 2) throw SchemaError("family entries must be pairs");
      b.forward[static_cast<Eigen::Index>(k)] = detail::get_num(j[k][0]);
      b.backward[static_cast<Eigen::Index>(k)] = detail::get_num(j[k][1]);
    }
    return b;
  });
}

inline std::string potentials_to_json(const PotentialFamily& u) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (i) out += ',';
    out += detail::num(u[i]);
  }
  return out + "]\n";
}

inline PotentialFamily potentials_from_json(const std::string& text) {
  const auto j = detail::parse(text);
  return detail::guarded([&] {
    if (!j.is_array()) throw SchemaError("potentials must be an array");
    PotentialFamily u(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) u[static_cast<Eigen::Index>(i)] = detail::get_num(j[i]);
    return u;
  });
}

inline std::string to_json(const EnergyBreakdown& e) {
  return fmt::format("{{\"gap\":{},\"mass\":{},\"total\":{}}}\n", detail::num(e.gap), detail::num(e.mass),
                     detail::num(e.total));
}

inline std::string matrix_json(const Eigen::Matrix3d& A) {
  std::string out = "[";
  for (int r = 0; r < 3; ++r)
    out += fmt::format("{}[{},{},{}]", r ? "," : "", detail::num(A(r, 0)), detail::num(A(r, 1)), detail::num(A(r, 2)));
  return out + ']';
}

inline std::string to_json(const EffectiveTensor& t) {
  const auto dirs = effective_directions();
  std::string energies = "[";
  for (std::size_t k = 0; k < dirs.size(); ++k)
    energies += fmt::format("{}{{\"xi\":{},\"energy\":{}}}", k ? "," : "", detail::vec3(dirs[k]), detail::num(t.energies[k]));
  energies += ']';
  return fmt::format("{{\"A\":{},\"energies\":{},\"N\":{},\"delta\":{},\"layer_width\":{}}}\n", matrix_json(t.A), energies,
                     detail::num(t.N), detail::num(t.delta), detail::num(t.layer_width));
}

// ---------------------------------------------------------------------------
// Scan results
// ---------------------------------------------------------------------------

/// One row per cell: N, derived seed, value (empty when the cell failed).
inline std::string series_csv(const CriterionSeries& s) {
  std::string out = "N,seed,value\n";
  for (const auto& c : s.cells)
    out += fmt::format("{},{},{}\n", detail::num(c.N), c.seed, c.error.empty() ? detail::num(c.value) : std::string());
  return out;
}

inline std::string series_summary_json(const CriterionSeries& s, bool with_timings = true) {
  std::string out = fmt::format("{{\"statistic\":{},\"series\":[", detail::quoted(s.statistic));
  for (std::size_t i = 0; i < s.N_grid.size(); ++i) {
    out += fmt::format("{}{{\"N\":{},\"values\":{},\"mean\":{},\"stderr\":{}}}", i ? "," : "", detail::num(s.N_grid[i]),
                       detail::array(s.values[i], detail::num), detail::num(s.means[i]), detail::num(s.std_errors[i]));
  }
  out += fmt::format("],\"plateau_estimate\":{},\"plateau_ok\":{},\"cells\":[", detail::num(s.plateau_estimate), s.plateau_ok);
  for (std::size_t i = 0; i < s.cells.size(); ++i) {
    const auto& c = s.cells[i];
    out += fmt::format("{}{{\"N\":{},\"seed_index\":{},\"seed\":{}", i ? "," : "", detail::num(c.N), c.seed_index, c.seed);
    if (with_timings) out += fmt::format(",\"seconds\":{}", detail::num(c.seconds));
    if (!c.error.empty()) out += fmt::format(",\"error\":{}", detail::quoted(c.error));
    out += '}';
  }
  return out + "]}";
}

inline std::string effective_csv(const EffectiveSeries& s) {
  std::string out = "N,seed,A11,A12,A13,A22,A23,A33\n";
  for (const auto& c : s.cells) {
    if (!c.error.empty()) {
      out += fmt::format("{},{},,,,,,\n", detail::num(c.N), c.seed);
      continue;
    }
    const auto& A = c.tensor.A;
    out += fmt::format("{},{},{},{},{},{},{},{}\n", detail::num(c.N), c.seed, detail::num(A(0, 0)), detail::num(A(0, 1)),
                       detail::num(A(0, 2)), detail::num(A(1, 1)), detail::num(A(1, 2)), detail::num(A(2, 2)));
  }
  return out;
}

inline std::string effective_summary_json(const EffectiveSeries& s, bool with_timings = true) {
  std::string out = "{\"series\":[";
  for (std::size_t i = 0; i < s.N_grid.size(); ++i)
    out += fmt::format("{}{{\"N\":{},\"mean\":{},\"stderr\":{},\"frobenius_stderr\":{}}}", i ? "," : "",
                       detail::num(s.N_grid[i]), matrix_json(s.means[i]), matrix_json(s.std_errors[i]),
                       detail::num(s.frobenius_std_errors[i]));
  out += "],\"cells\":[";
  for (std::size_t i = 0; i < s.cells.size(); ++i) {
    const auto& c = s.cells[i];
    out += fmt::format("{}{{\"N\":{},\"seed_index\":{},\"seed\":{}", i ? "," : "", detail::num(c.N), c.seed_index, c.seed);
    if (with_timings) out += fmt::format(",\"seconds\":{}", detail::num(c.seconds));
    if (!c.error.empty()) out += fmt::format(",\"error\":{}", detail::quoted(c.error));
    out += '}';
  }
  return out + "]}";
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

inline void save_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

inline std::string load_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline void save(const SphereConfig& c, const std::filesystem::path& path) { save_text(path, to_json(c)); }
inline void save(const InclusionGraph& g, const std::filesystem::path& path) { save_text(path, to_json(g)); }
inline SphereConfig load_config(const std::filesystem::path& path) { return config_from_json(load_text(path)); }
inline InclusionGraph load_graph(const std::filesystem::path& path) { return graph_from_json(load_text(path)); }

/// Saves and reloads; the result compares equal to the input.
template <class T>
T roundtrip(const T& object, const std::filesystem::path& path) {
  save(object, path);
  if constexpr (std::is_same_v<T, SphereConfig>) return load_config(path);
  else return load_graph(path);
}

}  // namespace netapprox
