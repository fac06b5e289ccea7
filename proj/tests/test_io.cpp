#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "test_support.hpp"

using namespace netapprox;
using namespace testing_support;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "netapprox_io_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(ConfigJson, RoundTripIsExact) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto c = generate_hardcore(seed, 5.0, {0.3, 0.6, 0.1});
    c.contact_tol = 1e-9;
    EXPECT_EQ(roundtrip(c, scratch("config.json")), c);
    EXPECT_EQ(config_from_json(to_json(c)), c);
  }
  auto sat = generate_hardcore(4, 3.0, {10.0, 1.0, 0.0});
  ASSERT_TRUE(sat.saturated);
  EXPECT_EQ(config_from_json(to_json(sat)), sat);
}

TEST(ConfigJson, ExactBitsSurvive) {
  auto c = manual_config({{Vec3(0.1, 1.0 / 3.0, -2.0 / 7.0), std::nextafter(1.0, 2.0)}}, 4.0);
  c.seed = 0xffffffffffffffffULL;
  EXPECT_EQ(config_from_json(to_json(c)), c);
}

TEST(GraphJson, RoundTripIsExact) {
  const auto c = generate_hardcore(5, 5.0, {0.4, 0.6, 0.0});
  const auto g = build_graph(c, 0.4);
  ASSERT_GT(g.edges.size(), 0u);
  EXPECT_EQ(roundtrip(g, scratch("graph.json")), g);
  const auto shorted = short_kappa(g, {}, 0.2).graph;
  EXPECT_EQ(graph_from_json(to_json(shorted)), shorted);
}

TEST(GraphJson, CombinatorialGraphRoundTrips) {
  std::mt19937_64 rng(1);
  const auto g = random_graph(rng, 8, 12);
  EXPECT_EQ(graph_from_json(to_json(g)), g);
}

TEST(Schema, CorruptedInputRaisesSchemaError) {
  const std::string good = to_json(generate_hardcore(1, 3.0, {0.1, 0.6, 0.0}));
  EXPECT_THROW(config_from_json(good.substr(0, good.size() / 2)), SchemaError);
  EXPECT_THROW(config_from_json("{}"), SchemaError);
  EXPECT_THROW(config_from_json("[1,2,3]"), SchemaError);
  EXPECT_THROW(graph_from_json("not json"), SchemaError);
  std::string bad_type = good;
  bad_type.replace(bad_type.find("\"seed\":1"), 8, "\"seed\":\"x\"");
  EXPECT_THROW(config_from_json(bad_type), SchemaError);
}

TEST(Schema, VersionMismatchRaisesSchemaError) {
  std::string text = to_json(manual_config({{Vec3::Zero(), 1.0}}, 2.0));
  const auto pos = text.find("\"schema_version\":1");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 18, "\"schema_version\":2");
  EXPECT_THROW(config_from_json(text), SchemaError);
  text.replace(pos, 18, "\"schema_version\":0");
  EXPECT_THROW(config_from_json(text), SchemaError);
}

TEST(Schema, InvalidContentRaisesSchemaError) {
  // A sphere outside the box parses but fails validation.
  const std::string text =
      R"({"model":"manual","seed":0,"box_half_width":1,"contact_tol":1e-12,"spheres":[{"c":[5,0,0],"r":1}],"schema_version":1})";
  EXPECT_THROW(config_from_json(text), SchemaError);
  const std::string edge_oob =
      R"({"delta":0.5,"N":1,"nodes":[],"edges":[{"id":0,"a":0,"b":1,"xa":[0,0,0],"xb":[0,0,0],"d":0.1,"mu":2}],"schema_version":1})";
  EXPECT_THROW(graph_from_json(edge_oob), SchemaError);
}

TEST(Files, MissingFileAndTruncatedFile) {
  EXPECT_ANY_THROW(load_config(scratch("does_not_exist.json")));
  const auto path = scratch("truncated.json");
  save(generate_hardcore(2, 3.0, {0.1, 0.6, 0.0}), path);
  const auto full = load_text(path);
  std::ofstream(path, std::ios::trunc) << full.substr(0, full.size() - 5);
  EXPECT_THROW(load_config(path), SchemaError);
}

TEST(FamilyJson, RoundTrip) {
  std::mt19937_64 rng(2);
  const auto b = random_family(rng, 7);
  const auto back = family_from_json(to_json(b));
  EXPECT_EQ(back.forward, b.forward);
  EXPECT_EQ(back.backward, b.backward);
  EXPECT_THROW(family_from_json("[[1,2,3]]"), SchemaError);
  EXPECT_THROW(family_from_json("{\"a\":1}"), SchemaError);
  const auto u = random_vector(rng, 9);
  EXPECT_EQ(potentials_from_json(potentials_to_json(u)), u);
}

TEST(Output, NonFiniteWritesNull) {
  EnergyBreakdown e;
  e.total = std::numeric_limits<double>::quiet_NaN();
  EXPECT_NE(to_json(e).find("\"total\":null"), std::string::npos);
}

TEST(Output, SeriesCsvLayout) {
  const ModelParams m = HardcoreParams{0.05, 1.0, 0.2};
  const auto s = scan_limsup(m, 0.3, {0.5, 4.0, 6.0}, 2, Statistic::density);
  const auto csv = series_csv(s);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "N,seed,value");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
  // Failed cells leave the value column empty.
  const auto second = csv.substr(csv.find('\n') + 1);
  const auto row = second.substr(0, second.find('\n'));
  EXPECT_EQ(row.back(), ',');
  const auto summary = nlohmann::json::parse(series_summary_json(s));
  EXPECT_TRUE(summary.contains("plateau_estimate"));
}
