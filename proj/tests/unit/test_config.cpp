#include "clab/config.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <fstream>
#include <set>

using namespace clab;

namespace {

const std::string kMinimal = R"({
  "geometry": {"nx_prime": 9, "nx_n": 9, "nt": 9},
  "weight": {"D0": [0.5, 1.0], "delta0": 0.7},
  "instance": {"recipe": "worked", "noise_levels": [0.1, 0.01, 0.001, 0.0], "seed": 3},
  "solver": {"mu": 1e-8},
  "output": "out"
})";

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string patched(const std::string& pointer, const nlohmann::json& value) {
  nlohmann::json j = nlohmann::json::parse(kMinimal);
  j[nlohmann::json::json_pointer(pointer)] = value;
  return j.dump();
}

// object paths of the schema, "" for the top level, joined with '.'
void collect(const nlohmann::json& node, const nlohmann::json& defs, const std::string& path,
             std::map<std::string, std::set<std::string>>& out) {
  const nlohmann::json* n = &node;
  if (n->contains("$ref")) {
    const std::string ref = n->at("$ref");
    n = &defs.at(ref.substr(ref.rfind('/') + 1));
  }
  if (!n->contains("properties")) return;
  auto& keys = out[path];
  for (const auto& [k, v] : n->at("properties").items()) {
    keys.insert(k);
    collect(v, defs, path.empty() ? k : path + "." + k, out);
  }
}

}  // namespace

TEST(Config, ParsesWorkedFile) {
  const ExperimentConfig c = load_config(std::string(CLAB_SOURCE_DIR) + "/config/worked.json");
  ASSERT_TRUE(c.geometry && c.weight && c.instance && c.solver && c.verify);
  EXPECT_EQ(c.geometry->nx_prime, 17);
  EXPECT_EQ(c.geometry->gamma_side, GammaSide::Hi);
  EXPECT_DOUBLE_EQ(c.weight->D0->lo, 0.5);
  EXPECT_DOUBLE_EQ(*c.weight->delta0, 0.7);
  EXPECT_EQ(c.instance->noise_levels.size(), 6u);
  EXPECT_EQ(c.instance->seed, 7u);
  EXPECT_DOUBLE_EQ(c.solver->mu, 1e-8);
  EXPECT_EQ(c.verify->s_grid.size(), 5u);
  for (Command cmd : {Command::Plan, Command::Verify, Command::MakeInstance, Command::Reconstruct,
                      Command::Sweep, Command::All}) {
    EXPECT_NO_THROW(c.require(cmd));
  }
}

TEST(Config, UnknownKeysRejectedWithPath) {
  EXPECT_NE(error_of(patched("/geometry/nx", 9)).find("geometry.nx"), std::string::npos);
  EXPECT_NE(error_of(patched("/solver/tolerance", 1)).find("solver.tolerance"), std::string::npos);
  EXPECT_NE(error_of(patched("/extra", 1)).find("extra"), std::string::npos);
  EXPECT_NE(error_of(patched("/instance/b/freq", 1)).find("instance.b.freq"), std::string::npos);
}

TEST(Config, RangeAndTypeErrors) {
  EXPECT_FALSE(error_of(patched("/geometry/dimension", 3)).empty());
  EXPECT_NO_THROW(parse_config(patched("/geometry/dimension", 2)));
  EXPECT_FALSE(error_of(patched("/geometry/nt", 3)).empty());
  EXPECT_FALSE(error_of(patched("/geometry/nt", 9.5)).empty());
  EXPECT_FALSE(error_of(patched("/geometry/gamma_side", "left")).empty());
  EXPECT_FALSE(error_of(patched("/weight/margin", 1.0)).empty());
  EXPECT_FALSE(error_of(patched("/weight/D0", nlohmann::json::array({0.5, 2.0}))).empty());
  EXPECT_FALSE(error_of(patched("/solver/mu", 0.0)).empty());
  EXPECT_FALSE(error_of(patched("/solver/cg_maxit", 0)).empty());
  EXPECT_FALSE(error_of(patched("/instance/noise_levels", nlohmann::json::array({0.1, -0.1}))).empty());
  EXPECT_FALSE(error_of(patched("/instance/recipe", "cubic")).empty());
  EXPECT_FALSE(error_of(patched("/instance/seed", -1)).empty());
  EXPECT_FALSE(error_of("{").empty());
  EXPECT_FALSE(error_of("[]").empty());
}

TEST(Config, WeightNeedsExactlyOneRegionChoice) {
  nlohmann::json j = nlohmann::json::parse(kMinimal);
  j["weight"]["region_family"] = {{"delta1", 0.5}, {"x0_prime", 1.0}};
  EXPECT_FALSE(error_of(j.dump()).empty());
  j["weight"].erase("D0");
  EXPECT_FALSE(error_of(j.dump()).empty());  // delta0 conflicts with delta1
  j["weight"].erase("delta0");
  const ExperimentConfig c = parse_config(j.dump());
  ASSERT_TRUE(c.weight->region_family);
  EXPECT_DOUBLE_EQ(c.weight->region_family->delta1, 0.5);
  j["weight"]["region_family"]["delta1"] = 1.0;
  EXPECT_FALSE(error_of(j.dump()).empty());
}

TEST(Config, MissingBlocksReportedPerCommand) {
  nlohmann::json j = nlohmann::json::parse(kMinimal);
  j.erase("solver");
  const ExperimentConfig c = parse_config(j.dump());
  EXPECT_NO_THROW(c.require(Command::Plan));
  EXPECT_NO_THROW(c.require(Command::MakeInstance));
  EXPECT_THROW(c.require(Command::Reconstruct), ConfigError);
  j.erase("weight");
  const ExperimentConfig d = parse_config(j.dump());
  EXPECT_NO_THROW(d.require(Command::MakeInstance));
  EXPECT_THROW(d.require(Command::Plan), ConfigError);
  j = nlohmann::json::parse(kMinimal);
  j["instance"].erase("noise_levels");
  EXPECT_THROW(parse_config(j.dump()).require(Command::Sweep), ConfigError);
}

TEST(Config, CustomRecipe) {
  nlohmann::json j = nlohmann::json::parse(kMinimal);
  j["instance"] = {{"recipe", "custom"}, {"a", {0, 0, 2}}, {"b", {{"c", 1.0}}}, {"p0", {{"c", 0.5}}}};
  const ExperimentConfig c = parse_config(j.dump());
  EXPECT_EQ(c.instance->recipe.a.coeffs, (std::vector<double>{0, 0, 2}));
  EXPECT_DOUBLE_EQ(c.instance->recipe.b.c, 1.0);
  EXPECT_DOUBLE_EQ(c.instance->recipe.p0.value(0.3, 0.1), 0.5);
}

TEST(Config, HashIgnoresFormattingAndTracksContent) {
  const ExperimentConfig a = parse_config(kMinimal);
  nlohmann::json j = nlohmann::json::parse(kMinimal);
  const ExperimentConfig b = parse_config(j.dump(4));
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.hash().size(), 16u);
  EXPECT_NE(a.hash(), parse_config(patched("/instance/seed", 4)).hash());
}

TEST(Config, SeedOverride) {
  ExperimentConfig a = parse_config(kMinimal);
  a.override_seed(99);
  EXPECT_EQ(a.instance->seed, 99u);
  EXPECT_EQ(a.hash(), parse_config(patched("/instance/seed", 99)).hash());
}

TEST(Config, CommandNames) {
  for (Command c : {Command::Plan, Command::Verify, Command::MakeInstance, Command::Reconstruct, Command::Sweep,
                    Command::All}) {
    EXPECT_EQ(parse_command(to_string(c)), c);
  }
  EXPECT_THROW(parse_command("solve"), ConfigError);
}

TEST(Config, SchemaListsParserKeys) {
  std::ifstream is(std::string(CLAB_SOURCE_DIR) + "/config/schema.json");
  ASSERT_TRUE(is);
  const nlohmann::json schema = nlohmann::json::parse(is);
  std::map<std::string, std::set<std::string>> from_schema;
  collect(schema, schema.at("$defs"), "", from_schema);
  std::map<std::string, std::set<std::string>> from_parser;
  for (const auto& [path, keys] : config_keys()) from_parser[path] = {keys.begin(), keys.end()};
  EXPECT_EQ(from_schema, from_parser);
}

TEST(Config, MissingFileIsIoError) {
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigIoError);
}
