#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "test_support.hpp"

using namespace netapprox;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "netapprox_experiment_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_spec(const fs::path& dir, const std::string& text) {
  const auto path = dir / "spec.json";
  std::ofstream(path) << text;
  return path;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(NETAPPROX_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string small_spec(const fs::path& out, const std::string& tasks, const std::string& grid = "[3, 4, 5]") {
  return R"({"version": 1,
    "model": {"type": "hardcore", "intensity": 0.2, "radius": 0.6, "min_gap": 0.05},
    "delta": 0.3, "N_grid": )" +
         grid + R"(, "n_seeds": 2, "base_seed": 17,
    "tasks": )" +
         tasks + R"(,
    "params": {"xi": [[1, 0, 0], [0, 0, 1]], "n_starts": 2, "n_samples": 256},
    "output_dir": ")" +
         out.string() + "\"}";
}

}  // namespace

TEST(ParseExperiment, DefaultsAndNesting) {
  const auto spec = parse_experiment(small_spec("x", R"(["h1", "keller"])"));
  EXPECT_EQ(spec.tasks, (std::vector<std::string>{"h1", "keller"}));
  EXPECT_EQ(spec.N_grid, (std::vector<double>{3, 4, 5}));
  EXPECT_EQ(spec.xi.size(), 2u);
  EXPECT_EQ(spec.n_starts, 2);
  EXPECT_EQ(spec.base_seed, 17u);
  EXPECT_EQ(std::get<HardcoreParams>(spec.model).radius, 0.6);
  EXPECT_EQ(spec.keller.nu.size(), 5u);
  EXPECT_NE(spec.hash, 0u);
  EXPECT_EQ(spec.hash, parse_experiment(small_spec("x", R"(["h1", "keller"])")).hash);
  EXPECT_NE(spec.hash, parse_experiment(small_spec("y", R"(["h1", "keller"])")).hash);
}

TEST(ParseExperiment, SchemaErrors) {
  EXPECT_THROW(parse_experiment("{"), SchemaError);
  EXPECT_THROW(parse_experiment(R"({"model": {"type": "hardcore"}, "tasks": ["h1"]})"), SchemaError);
  EXPECT_THROW(parse_experiment(R"({"version": 2, "model": {"type": "hardcore"}, "tasks": ["h1"]})"), SchemaError);
  EXPECT_THROW(parse_experiment(R"({"version": 1, "model": {"type": "hardcore"}, "tasks": "h1"})"), SchemaError);
  EXPECT_THROW(parse_experiment(R"({"version": 1, "model": {"type": "hardcore", "radius": "big"}, "tasks": ["h1"]})"),
               SchemaError);
}

TEST(ParseExperiment, ValidationErrors) {
  EXPECT_THROW(validate(parse_experiment(small_spec("x", "[]"))), InvalidInput);
  EXPECT_THROW(validate(parse_experiment(small_spec("x", R"(["h3"])"))), InvalidInput);
  EXPECT_THROW(validate(parse_experiment(small_spec("x", R"(["h1"])", "[3, 4]"))), InvalidInput);
  EXPECT_THROW(parse_experiment(R"({"version": 1, "model": {"type": "poisson"}, "tasks": ["h1"]})"), InvalidInput);
  // Keller-only specs need no scan grid.
  auto keller_only = parse_experiment(small_spec("x", R"(["keller"])", "[3]"));
  EXPECT_NO_THROW(validate(keller_only));
}

TEST(Keller, TableSlopeMatchesTheory) {
  KellerTask task;
  task.a = 2.0;
  const auto t = keller_table(task);
  ASSERT_EQ(t.rows.size(), 5u);
  EXPECT_NEAR(t.slope, std::numbers::pi / 4.0, 1e-2 * std::numbers::pi / 4.0);
  EXPECT_NEAR(t.quadrature_slope, t.slope, 1e-3 * t.slope);
  EXPECT_NEAR(regression_slope({0, 1, 2}, {1, 3, 5}), 2.0, 1e-15);
}

TEST(RunExperiment, WritesFilesAndIsReproducible) {
  const auto dir = scratch_dir("repro");
  const auto tasks = R"(["h1", "h2", "logmoment", "clustermoment", "effective", "keller"])";
  auto spec = parse_experiment(small_spec(dir / "a", tasks));
  const auto rec_a = run_experiment(spec, 1);
  spec.output_dir = (dir / "b").string();
  const auto rec_b = run_experiment(spec, 3);
  EXPECT_EQ(rec_a.failed_cells, 0u);
  for (const std::string name :
       {"h1_xi0.csv", "h1_xi1.csv", "h2.csv", "logmoment.csv", "clustermoment.csv", "effective.csv", "keller.csv"}) {
    ASSERT_TRUE(fs::exists(dir / "a" / name)) << name;
    EXPECT_EQ(load_text(dir / "a" / name), load_text(dir / "b" / name)) << name;
  }
  const auto summary = nlohmann::json::parse(load_text(dir / "a" / "summary.json"));
  EXPECT_EQ(summary.at("tool_version"), kToolVersion);
  EXPECT_EQ(summary.at("base_seed"), 17);
  EXPECT_EQ(summary.at("failed_cells"), 0);
  EXPECT_EQ(summary.at("spec_hash").get<std::string>().size(), 16u);
  EXPECT_TRUE(summary.at("tasks").contains("h2"));
  EXPECT_TRUE(summary.at("tasks").contains("effective"));
  EXPECT_EQ(rec_a.series.at("h1_xi0").cells.size(), 6u);
}

TEST(RunExperiment, FailingCellsAreIsolated) {
  const auto dir = scratch_dir("isolated");
  const auto spec = parse_experiment(small_spec(dir, R"(["logmoment"])", "[0.5, 3, 4]"));
  const auto rec = run_experiment(spec, 1);
  EXPECT_EQ(rec.failed_cells, 2u);
  const auto& s = rec.series.at("logmoment");
  EXPECT_TRUE(std::isfinite(s.means[1]));
  EXPECT_TRUE(std::isfinite(s.means[2]));
  const auto summary = nlohmann::json::parse(load_text(dir / "summary.json"));
  EXPECT_EQ(summary.at("failed_cells"), 2);
}

TEST(Cli, RunExitCodes) {
  const auto dir = scratch_dir("cli");
  EXPECT_EQ(run_cli("run " + write_spec(dir, small_spec(dir / "out", R"(["keller"])")).string()), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "keller.csv"));
  EXPECT_EQ(run_cli("run " + write_spec(dir, "{ nope").string()), 2);
  EXPECT_EQ(run_cli("run " + write_spec(dir, small_spec(dir / "out", "[]")).string()), 3);
  EXPECT_EQ(run_cli("run " + write_spec(dir, small_spec(dir / "out", R"(["logmoment"])", "[0.5, 3, 4]")).string()), 1);
  EXPECT_EQ(run_cli("run " + (dir / "missing.json").string()), 2);
}

TEST(Cli, GenerateGraphEnergyPipeline) {
  const auto dir = scratch_dir("pipeline");
  const auto config = (dir / "config.json").string();
  const auto graph = (dir / "graph.json").string();
  ASSERT_EQ(run_cli("--seed 3 --out " + config + " generate --model hardcore -N 4 --intensity 0.2 --radius 0.6"), 0);
  ASSERT_EQ(run_cli("--out " + graph + " graph --config " + config + " --delta 0.3"), 0);
  const auto c = load_config(config);
  EXPECT_EQ(c, generate_hardcore(3, 4.0, {0.2, 0.6, 0.0}));
  EXPECT_EQ(load_graph(graph), box_graph(c, 0.3));
  const auto energy = (dir / "energy.json").string();
  ASSERT_EQ(run_cli("--out " + energy + " energy --graph " + graph + " --xi 1 0 0"), 0);
  const auto j = nlohmann::json::parse(load_text(energy));
  const auto g = load_graph(graph);
  const double expected = minimize_energy(g, affine_boundary_family(g, Vec3::UnitX())).energy.total;
  EXPECT_NEAR(j.at("energy").at("total").get<double>(), expected, 1e-12 * (1.0 + expected));
  EXPECT_NE(run_cli("graph --config " + (dir / "nothing.json").string() + " --delta 0.3"), 0);
}

TEST(Samples, SpecsParseAndValidate) {
  for (const char* name : {"keller_experiment.json", "hardcore_experiment.json"}) {
    const auto spec = parse_experiment(load_text(fs::path(NETAPPROX_SAMPLES) / name));
    EXPECT_NO_THROW(validate(spec)) << name;
  }
}
