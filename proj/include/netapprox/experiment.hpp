#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "netapprox/effective.hpp"
#include "netapprox/error.hpp"
#include "netapprox/io.hpp"
#include "netapprox/keller.hpp"
#include "netapprox/models.hpp"
#include "netapprox/scan.hpp"

#ifndef NETAPPROX_VERSION
#define NETAPPROX_VERSION "0.1.0"
#endif

namespace netapprox {

inline constexpr const char* kToolVersion = NETAPPROX_VERSION;
inline constexpr int kExperimentVersion = 1;

struct KellerTask {
  double a = 1.0;
  double d = 1.0;
  double gamma = 1.0;
  std::vector<double> nu{1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  QuadratureGrid grid;
};

struct ExperimentSpec {
  ModelParams model = HardcoreParams{};
  double delta = 0.3;
  std::vector<double> N_grid{10, 20, 40};
  std::uint32_t n_seeds = 4;
  std::uint64_t base_seed = 0;
  std::vector<std::string> tasks;
  std::vector<Vec3> xi{Vec3::UnitX()};
  double s = 4.0;
  int n_starts = 16;
  double k = 2.0;
  double p = 4.0;
  std::size_t n_samples = 4096;
  std::optional<double> kappa;
  double layer_width = 0.0;  // 0 means delta
  KellerTask keller;
  std::string output_dir = "out";
  std::uint64_t hash = 0;  // of the canonical spec text
};

inline const std::set<std::string>& known_tasks() {
  static const std::set<std::string> tasks{"h1", "h2", "logmoment", "clustermoment", "effective", "keller"};
  return tasks;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Throws InvalidInput when the spec cannot be executed.
inline void validate(const ExperimentSpec& spec) {
  if (spec.tasks.empty()) throw InvalidInput("spec: tasks must not be empty");
  for (const auto& t : spec.tasks)
    if (!known_tasks().count(t)) throw InvalidInput("spec: unknown task '" + t + "'");
  const bool needs_scan = std::any_of(spec.tasks.begin(), spec.tasks.end(), [](const std::string& t) { return t != "keller"; });
  if (needs_scan) {
    check_scan_grid(spec.N_grid, spec.n_seeds);
    if (!(spec.delta > 0.0 && spec.delta < 1.0)) throw InvalidInput("spec: delta must lie in (0, 1)");
  }
  if (spec.xi.empty()) throw InvalidInput("spec: xi list must not be empty");
  for (const auto& x : spec.xi)
    if (!(x.norm() > 0.0)) throw InvalidInput("spec: xi must be nonzero");
  if (!(spec.s >= 2.0)) throw InvalidInput("spec: s must be >= 2");
  if (spec.n_starts < 0) throw InvalidInput("spec: n_starts must be >= 0");
  if (!(spec.k >= 1.0)) throw InvalidInput("spec: k must be >= 1");
  if (!(spec.p > 0.0)) throw InvalidInput("spec: p must be > 0");
  if (spec.n_samples < 1) throw InvalidInput("spec: n_samples must be >= 1");
  if (spec.kappa && !(*spec.kappa > 0.0 && *spec.kappa < 1.0)) throw InvalidInput("spec: kappa must lie in (0, 1)");
  if (spec.layer_width < 0.0) throw InvalidInput("spec: layer_width must be >= 0");
  if (spec.keller.nu.empty()) throw InvalidInput("spec: keller nu list must not be empty");
  for (double nu : spec.keller.nu) validate(KellerParams{spec.keller.a, nu, spec.keller.d, spec.keller.gamma});
  if (spec.output_dir.empty()) throw InvalidInput("spec: output_dir must not be empty");
}

inline ModelParams model_from_json(const nlohmann::json& m) {
  const auto type = m.at("type").get<std::string>();
  if (type == "hardcore") {
    HardcoreParams p;
    p.intensity = m.value("intensity", p.intensity);
    p.radius = m.value("radius", p.radius);
    p.min_gap = m.value("min_gap", p.min_gap);
    return p;
  }
  if (type == "lattice_jitter") {
    LatticeParams p;
    p.spacing = m.value("spacing", p.spacing);
    p.radius = m.value("radius", p.radius);
    p.jitter = m.value("jitter", p.jitter);
    p.allow_overlap = m.value("allow_overlap", p.allow_overlap);
    return p;
  }
  if (type == "chain_forest") {
    ChainForestParams p;
    p.radius = m.value("radius", p.radius);
    p.chain_len_max = m.value("chain_len_max", p.chain_len_max);
    p.gap_min = m.value("gap_min", p.gap_min);
    p.gap_max = m.value("gap_max", p.gap_max);
    p.chain_intensity = m.value("chain_intensity", p.chain_intensity);
    p.clearance = m.value("clearance", p.clearance);
    return p;
  }
  throw InvalidInput("spec: unknown model type '" + type + "'");
}

/**
 * Parses an experiment spec. Malformed JSON or mistyped fields raise
 * SchemaError; well-formed but unusable values raise InvalidInput.
 */
inline ExperimentSpec parse_experiment(const std::string& text) {
  const auto j = detail::parse(text);
  ExperimentSpec spec;
  try {
    if (!j.is_object()) throw SchemaError("spec must be a JSON object");
    if (!j.contains("version")) throw SchemaError("spec: missing \"version\"");
    if (j.at("version").get<int>() != kExperimentVersion)
      throw SchemaError(fmt::format("spec: unsupported version {}", j.at("version").dump()));
    spec.hash = fnv1a(j.dump());
    spec.model = model_from_json(j.at("model"));
    spec.delta = j.value("delta", spec.delta);
    spec.N_grid = j.value("N_grid", spec.N_grid);
    spec.n_seeds = j.value("n_seeds", spec.n_seeds);
    spec.base_seed = j.value("base_seed", spec.base_seed);
    spec.tasks = j.at("tasks").get<std::vector<std::string>>();
    spec.output_dir = j.value("output_dir", spec.output_dir);
    if (j.contains("params")) {
      const auto& p = j.at("params");
      if (p.contains("xi")) {
        spec.xi.clear();
        for (const auto& x : p.at("xi")) spec.xi.push_back(detail::get_vec3(x));
      }
      spec.s = p.value("s", spec.s);
      spec.n_starts = p.value("n_starts", spec.n_starts);
      spec.k = p.value("k", spec.k);
      spec.p = p.value("p", spec.p);
      spec.n_samples = p.value("n_samples", spec.n_samples);
      if (p.contains("kappa") && !p.at("kappa").is_null()) spec.kappa = p.at("kappa").get<double>();
      if (p.contains("layer_width") && !p.at("layer_width").is_null()) spec.layer_width = p.at("layer_width").get<double>();
      if (p.contains("keller")) {
        const auto& kj = p.at("keller");
        spec.keller.a = kj.value("a", spec.keller.a);
        spec.keller.d = kj.value("d", spec.keller.d);
        spec.keller.gamma = kj.value("gamma", spec.keller.gamma);
        spec.keller.nu = kj.value("nu", spec.keller.nu);
        spec.keller.grid.radial = kj.value("radial", spec.keller.grid.radial);
        spec.keller.grid.axial = kj.value("axial", spec.keller.grid.axial);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("spec: ") + e.what());
  }
  return spec;
}

struct KellerRow {
  double nu = 0.0;
  KellerEnergies energies;
};

struct KellerTable {
  KellerParams params;
  std::vector<KellerRow> rows;
  double slope = 0.0;             // least-squares slope of z_closed_form against ln(1/nu)
  double quadrature_slope = 0.0;  // same for z_quadrature
};

/// Least-squares slope of y against x.
inline double regression_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

inline KellerTable keller_table(const KellerTask& task) {
  KellerTable out;
  out.params = {task.a, 0.0, task.d, task.gamma};
  std::vector<double> x, yc, yq;
  for (double nu : task.nu) {
    KellerParams p = out.params;
    p.nu = nu;
    out.rows.push_back({nu, keller_energy(p, task.grid)});
    x.push_back(std::log(1.0 / nu));
    yc.push_back(out.rows.back().energies.z_closed_form);
    yq.push_back(out.rows.back().energies.z_quadrature);
  }
  out.slope = regression_slope(x, yc);
  out.quadrature_slope = regression_slope(x, yq);
  return out;
}

inline std::string keller_csv(const KellerTable& t) {
  std::string out = "nu,z_closed_form,z_quadrature,full_quadrature,weighted_quadrature,richardson_error\n";
  for (const auto& r : t.rows)
    out += fmt::format("{},{},{},{},{},{}\n", detail::num(r.nu), detail::num(r.energies.z_closed_form),
                       detail::num(r.energies.z_quadrature), detail::num(r.energies.full_quadrature),
                       detail::num(r.energies.weighted_quadrature), detail::num(r.energies.richardson_error));
  return out;
}

struct ResultRecord {
  std::uint64_t spec_hash = 0;
  std::string tool_version = kToolVersion;
  std::map<std::string, CriterionSeries> series;  // keyed by output name
  std::optional<EffectiveSeries> effective;
  std::optional<KellerTable> keller;
  std::vector<std::filesystem::path> files;
  std::size_t failed_cells = 0;
  double seconds = 0.0;
};

/**
 * Runs every task of the spec and writes per-task CSV files plus
 * summary.json into the output directory. CSV output depends only on the
 * spec and tool version; timings appear in summary.json only.
 */
inline ResultRecord run_experiment(const ExperimentSpec& spec, unsigned threads = 1) {
  validate(spec);
  const auto t0 = std::chrono::steady_clock::now();
  const std::filesystem::path dir(spec.output_dir);
  ResultRecord rec;
  rec.spec_hash = spec.hash;

  StatisticParams params;
  params.k = spec.k;
  params.p = spec.p;
  params.n_samples = spec.n_samples;
  params.kappa = spec.kappa;
  params.h2.s = spec.s;
  params.h2.n_starts = spec.n_starts;

  const auto write = [&](const std::string& name, const std::string& text) {
    save_text(dir / name, text);
    rec.files.push_back(dir / name);
  };

  for (const auto& task : spec.tasks) {
    if (task == "h1") {
      for (std::size_t i = 0; i < spec.xi.size(); ++i) {
        params.xi = spec.xi[i];
        const std::string name = spec.xi.size() == 1 ? "h1" : fmt::format("h1_xi{}", i);
        rec.series[name] = scan_limsup(spec.model, spec.delta, spec.N_grid, spec.n_seeds, Statistic::h1, params,
                                       spec.base_seed, threads);
      }
    } else if (task == "h2") {
      rec.series["h2"] = scan_limsup(spec.model, spec.delta, spec.N_grid, spec.n_seeds, Statistic::h2, params,
                                     spec.base_seed, threads);
    } else if (task == "logmoment") {
      rec.series["logmoment"] = scan_limsup(spec.model, spec.delta, spec.N_grid, spec.n_seeds, Statistic::log_moment,
                                            params, spec.base_seed, threads);
    } else if (task == "clustermoment") {
      rec.series["clustermoment"] = scan_limsup(spec.model, spec.delta, spec.N_grid, spec.n_seeds,
                                                Statistic::cluster_moment, params, spec.base_seed, threads);
    } else if (task == "effective") {
      rec.effective = effective_scan(spec.model, spec.delta, spec.N_grid, spec.n_seeds, spec.layer_width,
                                     spec.base_seed, threads);
      rec.failed_cells += rec.effective->failed_cells();
      write("effective.csv", effective_csv(*rec.effective));
    } else if (task == "keller") {
      rec.keller = keller_table(spec.keller);
      write("keller.csv", keller_csv(*rec.keller));
    }
  }
  for (const auto& [name, series] : rec.series) {
    rec.failed_cells += series.failed_cells();
    write(name + ".csv", series_csv(series));
  }
  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::string summary = fmt::format("{{\"spec_hash\":\"{:016x}\",\"tool_version\":{},\"base_seed\":{},\"model\":{},\"tasks\":{{",
                                    rec.spec_hash, detail::quoted(rec.tool_version), spec.base_seed,
                                    detail::quoted(model_name(spec.model)));
  bool first = true;
  for (const auto& [name, series] : rec.series) {
    summary += fmt::format("{}{}:{}", first ? "" : ",", detail::quoted(name), series_summary_json(series));
    first = false;
  }
  if (rec.effective) {
    summary += fmt::format("{}\"effective\":{}", first ? "" : ",", effective_summary_json(*rec.effective));
    first = false;
  }
  if (rec.keller) {
    summary += fmt::format("{}\"keller\":{{\"slope\":{},\"quadrature_slope\":{},\"expected_slope\":{}}}", first ? "" : ",",
                           detail::num(rec.keller->slope), detail::num(rec.keller->quadrature_slope),
                           detail::num(std::numbers::pi / (2.0 * spec.keller.a)));
  }
  summary += fmt::format("}},\"failed_cells\":{},\"seconds\":{}}}\n", rec.failed_cells, detail::num(rec.seconds));
  write("summary.json", summary);
  return rec;
}

inline ResultRecord run_experiment(const std::filesystem::path& spec_file, unsigned threads = 1) {
  return run_experiment(parse_experiment(load_text(spec_file)), threads);
}

}  // namespace netapprox
