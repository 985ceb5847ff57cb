#pragma once

#include "clab/grid.hpp"
#include "clab/problems.hpp"
#include "clab/reconstruction.hpp"
#include "clab/weight.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace clab {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The config file could not be read.
class ConfigIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WeightConfig {
  std::optional<Interval> D0;                         // either D0 ...
  std::optional<RegionFamilyRequest> region_family;  // ... or a region family
  std::optional<double> delta0;
  double lambda = 1.0;
  double margin = 1.1;
};

struct InstanceConfig {
  std::string recipe_name = "worked";  // quadratic | worked | quartic | custom
  Recipe recipe;
  std::vector<double> noise_levels;
  std::uint64_t seed = 0;
};

struct VerifyConfig {
  int corpus_size = 20;
  std::uint64_t corpus_seed = 1;
  std::vector<double> s_grid{2.0, 5.0, 10.0, 20.0, 50.0};
  double C_cap = 10.0;
  bool time_dependent = true;
};

enum class Command { Plan, Verify, MakeInstance, Reconstruct, Sweep, All };

Command parse_command(const std::string& name);
std::string to_string(Command c);

/// One experiment. Blocks absent from the file stay empty; `require` checks the
/// ones a command needs.
struct ExperimentConfig {
  std::optional<CylinderGeometry> geometry;
  std::optional<WeightConfig> weight;
  std::optional<InstanceConfig> instance;
  std::optional<RegularizationParams> solver;
  std::optional<VerifyConfig> verify;
  std::string output;
  std::string canonical;  // canonical JSON text the hash is taken of

  void require(Command c) const;
  /// Replace the instance seed and refresh `canonical`.
  void override_seed(std::uint64_t seed);
  /// 16 hex digits of the FNV-1a hash of `canonical`.
  std::string hash() const;
};

/// Parse JSON text. Unknown keys, wrong types and out-of-range values throw
/// ConfigError naming the offending key path.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Allowed keys per object path ("" for the top level, "geometry", "weight",
/// "weight.region_family", "instance", "instance.b", ... ). The schema file
/// in config/ lists the same keys.
const std::map<std::string, std::vector<std::string>>& config_keys();

Recipe named_recipe(const std::string& name);

}  // namespace clab
