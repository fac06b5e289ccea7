#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "netapprox/netapprox.hpp"

namespace na = netapprox;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  std::string out;
  unsigned threads = 1;
  std::string format = "json";
};

void emit(const Globals& g, const std::string& text) {
  if (g.out.empty()) std::cout << text;
  else na::save_text(g.out, text);
}

na::Vec3 parse_vec3(const std::vector<double>& v) {
  if (v.size() != 3) throw na::InvalidInput("expected three components");
  return {v[0], v[1], v[2]};
}

struct ModelOptions {
  std::string type = "hardcore";
  double N = 10.0;
  na::HardcoreParams hardcore;
  na::LatticeParams lattice;
  na::ChainForestParams chain;
  double radius = 0.0;

  na::ModelParams params() const {
    if (type == "hardcore") {
      auto p = hardcore;
      if (radius > 0.0) p.radius = radius;
      return p;
    }
    if (type == "lattice_jitter") {
      auto p = lattice;
      if (radius > 0.0) p.radius = radius;
      return p;
    }
    if (type == "chain_forest") {
      auto p = chain;
      if (radius > 0.0) p.radius = radius;
      return p;
    }
    throw na::InvalidInput("unknown model '" + type + "'");
  }
};

std::string graph_csv(const na::InclusionGraph& g) {
  std::string out = "id,a,b,d,mu\n";
  for (const auto& e : g.edges)
    out += fmt::format("{},{},{},{},{}\n", e.id, e.a, e.b, na::detail::num(e.gap), na::detail::num(e.mu));
  return out;
}

std::string tensor_csv(const na::EffectiveTensor& t) {
  std::string out = "N,A11,A12,A13,A22,A23,A33\n";
  const auto& A = t.A;
  out += fmt::format("{},{},{},{},{},{},{}\n", na::detail::num(t.N), na::detail::num(A(0, 0)), na::detail::num(A(0, 1)),
                     na::detail::num(A(0, 2)), na::detail::num(A(1, 1)), na::detail::num(A(1, 2)), na::detail::num(A(2, 2)));
  return out;
}

/// Graph from --graph, or from --config and --delta.
na::InclusionGraph load_input_graph(const std::string& graph_path, const std::string& config_path, double delta) {
  if (!graph_path.empty()) return na::load_graph(graph_path);
  if (config_path.empty()) throw na::InvalidInput("need --graph or --config");
  return na::box_graph(na::load_config(config_path), delta);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Network approximation of stiff-inclusion composites"};
  app.set_version_flag("--version", std::string(na::kToolVersion));
  app.require_subcommand(1);

  Globals glob;
  app.add_option("--seed", glob.seed, "Random seed");
  app.add_option("--out", glob.out, "Output file (run: output directory)");
  app.add_option("--threads", glob.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--format", glob.format, "Output format")->check(CLI::IsMember({"json", "csv"}));

  // generate
  ModelOptions model;
  auto* gen = app.add_subcommand("generate", "Sample a sphere configuration");
  gen->add_option("--model", model.type, "hardcore | lattice_jitter | chain_forest")
      ->check(CLI::IsMember({"hardcore", "lattice_jitter", "chain_forest"}));
  gen->add_option("-N,--half-width", model.N, "Box half-width");
  gen->add_option("--radius", model.radius, "Sphere radius");
  gen->add_option("--intensity", model.hardcore.intensity, "hardcore: spheres per unit volume");
  gen->add_option("--min-gap", model.hardcore.min_gap, "hardcore: minimum gap");
  gen->add_option("--spacing", model.lattice.spacing, "lattice: spacing");
  gen->add_option("--jitter", model.lattice.jitter, "lattice: jitter amplitude");
  gen->add_option("--chain-len-max", model.chain.chain_len_max, "chain_forest: maximum chain length");
  gen->add_option("--gap-min", model.chain.gap_min, "chain_forest: minimum gap in a chain");
  gen->add_option("--gap-max", model.chain.gap_max, "chain_forest: maximum gap in a chain");
  gen->add_option("--chain-intensity", model.chain.chain_intensity, "chain_forest: chains per unit volume");

  // graph
  std::string config_path, graph_path;
  double delta = 0.3;
  auto* graph = app.add_subcommand("graph", "Build the delta-multigraph of a configuration");
  graph->add_option("--config", config_path, "Configuration JSON")->required();
  graph->add_option("--delta", delta, "Gap threshold in (0, 1)");

  // energy
  std::string family = "affine", family_path;
  std::vector<double> xi_arg{1.0, 0.0, 0.0};
  bool identity_mass = false, cycle_free = false;
  auto* en = app.add_subcommand("energy", "Minimize the discrete energy for a boundary family");
  en->add_option("--graph", graph_path, "Graph JSON");
  en->add_option("--config", config_path, "Configuration JSON (with --delta)");
  en->add_option("--delta", delta, "Gap threshold");
  en->add_option("--family", family, "affine | midpoint | file")->check(CLI::IsMember({"affine", "midpoint", "file"}));
  en->add_option("--family-file", family_path, "Family JSON for --family file");
  en->add_option("--xi", xi_arg, "Direction for canonical families")->expected(3);
  en->add_flag("--identity-mass", identity_mass, "Use unit mass weights");
  en->add_flag("--cycle-free", cycle_free, "Evaluate the explicit potentials of a forest instead of minimizing");

  // criteria
  std::string stat = "h1";
  double s = 4.0, k = 2.0, p = 4.0;
  std::size_t n_samples = 4096;
  int n_starts = 16;
  auto* cr = app.add_subcommand("criteria", "Evaluate a criterion statistic on one configuration");
  cr->add_option("--config", config_path, "Configuration JSON")->required();
  cr->add_option("--delta", delta, "Gap threshold");
  cr->add_option("--stat", stat, "h1 | h2 | logmoment | clustermoment | density")
      ->check(CLI::IsMember({"h1", "h2", "logmoment", "clustermoment", "density"}));
  cr->add_option("--xi", xi_arg, "h1 direction")->expected(3);
  cr->add_option("-s", s, "h2 exponent (>= 2)");
  cr->add_option("--starts", n_starts, "h2 random starts");
  cr->add_option("-k", k, "log-moment exponent");
  cr->add_option("-p", p, "cluster-moment exponent");
  cr->add_option("--samples", n_samples, "cluster-moment samples");

  // effective
  double layer_width = 0.0;
  auto* ef = app.add_subcommand("effective", "Network effective conductivity tensor");
  ef->add_option("--graph", graph_path, "Graph JSON");
  ef->add_option("--config", config_path, "Configuration JSON (with --delta)");
  ef->add_option("--delta", delta, "Gap threshold");
  ef->add_option("--layer-width", layer_width, "Clamped boundary layer width (default: delta)");

  // keller
  na::KellerTask keller;
  auto* ke = app.add_subcommand("keller", "Gap energies of the Keller profile");
  ke->add_option("-a", keller.a, "Paraboloid curvature");
  ke->add_option("-d", keller.d, "Cut-off radius");
  ke->add_option("--gamma", keller.gamma, "Weight exponent");
  ke->add_option("--nu", keller.nu, "Gap widths");
  ke->add_option("--radial", keller.grid.radial, "Radial quadrature points");
  ke->add_option("--axial", keller.grid.axial, "Axial quadrature points");

  // run
  std::string spec_path;
  auto* run = app.add_subcommand("run", "Execute an experiment spec");
  run->add_option("spec", spec_path, "Experiment spec JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      emit(glob, na::to_json(na::generate(model.params(), glob.seed, model.N)));
    } else if (*graph) {
      const auto g = na::box_graph(na::load_config(config_path), delta);
      emit(glob, glob.format == "csv" ? graph_csv(g) : na::to_json(g));
    } else if (*en) {
      const auto g = load_input_graph(graph_path, config_path, delta);
      const na::Vec3 xi = parse_vec3(xi_arg);
      const na::BoundaryFamily b = family == "file"       ? na::family_from_json(na::load_text(family_path))
                                   : family == "midpoint" ? na::midpoint_boundary_family(g, xi)
                                                          : na::affine_boundary_family(g, xi);
      const auto mass = identity_mass ? na::MassModel::identity : na::MassModel::volume;
      na::PotentialFamily u;
      na::EnergyBreakdown e;
      if (cycle_free) {
        u = na::cycle_free_potentials(g, b, {});
        e = na::energy(g, u, b, mass);
      } else {
        na::SolverOptions opts;
        opts.mass = mass;
        auto r = na::minimize_energy(g, b, opts);
        u = std::move(r.u);
        e = r.energy;
      }
      if (glob.format == "csv") {
        std::string text = "node,u\n";
        for (Eigen::Index i = 0; i < u.size(); ++i) text += fmt::format("{},{}\n", i, na::detail::num(u[i]));
        emit(glob, text);
      } else {
        std::string energy = na::to_json(e);
        energy.pop_back();
        std::string pot = na::potentials_to_json(u);
        pot.pop_back();
        emit(glob, fmt::format("{{\"energy\":{},\"u\":{}}}\n", energy, pot));
      }
    } else if (*cr) {
      const auto config = na::load_config(config_path);
      na::StatisticParams params;
      params.xi = parse_vec3(xi_arg);
      params.h2.s = s;
      params.h2.n_starts = n_starts;
      params.k = k;
      params.p = p;
      params.n_samples = n_samples;
      const std::map<std::string, na::Statistic> stats{{"h1", na::Statistic::h1},
                                                       {"h2", na::Statistic::h2},
                                                       {"logmoment", na::Statistic::log_moment},
                                                       {"clustermoment", na::Statistic::cluster_moment},
                                                       {"density", na::Statistic::density}};
      const double v = na::evaluate_statistic(config, delta, stats.at(stat), params, glob.seed);
      emit(glob, glob.format == "csv" ? fmt::format("statistic,value\n{},{}\n", stat, na::detail::num(v))
                                      : fmt::format("{{\"statistic\":\"{}\",\"value\":{}}}\n", stat, na::detail::num(v)));
    } else if (*ef) {
      const auto g = load_input_graph(graph_path, config_path, delta);
      const auto t = na::network_effective_tensor(g, layer_width > 0.0 ? layer_width : g.delta);
      emit(glob, glob.format == "csv" ? tensor_csv(t) : na::to_json(t));
    } else if (*ke) {
      const auto table = na::keller_table(keller);
      if (glob.format == "csv") {
        emit(glob, na::keller_csv(table));
      } else {
        std::string rows;
        for (const auto& r : table.rows)
          rows += fmt::format("{}{{\"nu\":{},\"z_closed_form\":{},\"z_quadrature\":{},\"full_quadrature\":{},"
                              "\"weighted_quadrature\":{},\"richardson_error\":{}}}",
                              rows.empty() ? "" : ",", na::detail::num(r.nu), na::detail::num(r.energies.z_closed_form),
                              na::detail::num(r.energies.z_quadrature), na::detail::num(r.energies.full_quadrature),
                              na::detail::num(r.energies.weighted_quadrature), na::detail::num(r.energies.richardson_error));
        emit(glob, fmt::format("{{\"rows\":[{}],\"slope\":{}}}\n", rows, na::detail::num(table.slope)));
      }
    } else if (*run) {
      na::ExperimentSpec spec;
      try {
        spec = na::parse_experiment(na::load_text(spec_path));
      } catch (const na::SchemaError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 2;
      } catch (const std::runtime_error& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 2;
      } catch (const na::InvalidInput& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 3;
      }
      if (!glob.out.empty()) spec.output_dir = glob.out;
      try {
        na::validate(spec);
      } catch (const na::InvalidInput& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 3;
      }
      const auto rec = na::run_experiment(spec, glob.threads);
      for (const auto& f : rec.files) std::cout << f.string() << '\n';
      if (rec.failed_cells > 0) {
        std::cerr << rec.failed_cells << " cell(s) failed; see summary.json\n";
        return 1;
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
