#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dynrcm/environment.hpp"
#include "dynrcm/walk.hpp"

namespace dynrcm {

/// Raised for any schema violation; the message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Experiment { Simulate, Verify, Kernel, Collide, Voter };

std::string experiment_name(Experiment e);
Experiment experiment_from_name(const std::string& name);

struct Tolerances {
  double kernel = 1e-12;
  std::size_t jump_cap = kDefaultJumpCap;
  double chi_square_alpha = 1e-3;

  friend bool operator==(const Tolerances&, const Tolerances&) = default;
};

/// One entry of a verify suite. `params` holds the kind-specific fields and
/// has been checked against that kind's schema.
struct CheckConfig {
  std::string kind;
  std::string name;
  std::optional<Lattice> lattice;
  std::optional<EnvironmentKind> environment;
  std::optional<int> replicas;
  bool control = false;
  nlohmann::json params = nlohmann::json::object();

  friend bool operator==(const CheckConfig&, const CheckConfig&) = default;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::Simulate;
  Lattice lattice = Lattice::torus(2, 4);
  EnvironmentKind environment = StaticEnv{};
  std::optional<TimeWindow> window;
  std::vector<double> horizons;
  int replicas = 1;
  std::uint64_t master_seed = 0;
  std::string output_dir = "out";
  Tolerances tolerances;
  int threads = 0;  // 0: DYN_RCM_THREADS or 1
  nlohmann::json params = nlohmann::json::object();
  std::vector<CheckConfig> checks;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Strict parse: unknown fields, wrong types and out-of-range values throw ConfigError.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& config);

nlohmann::json environment_to_json(const EnvironmentKind& kind);
EnvironmentKind environment_from_json(const nlohmann::json& j);

/// Verify-suite check kinds understood by the runner.
const std::vector<std::string>& check_kinds();

}  // namespace dynrcm
