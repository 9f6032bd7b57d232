#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dynrcm/config.hpp"
#include "dynrcm/verify.hpp"

namespace dynrcm {

inline constexpr const char* kVersion = "0.1.0";

struct RunOutcome {
  std::vector<TestReport> reports;
  std::vector<std::string> artifacts;  // file names relative to the output directory
  nlohmann::json manifest;
  bool passed = false;
};

/// Runs the configured experiment. With `write_outputs` the manifest,
/// reports (JSON and table) and the experiment's CSV/JSON artifacts are
/// written under config.output_dir.
RunOutcome run_experiment(const ExperimentConfig& config, bool write_outputs = true);

/// The reports array as written to reports.json.
nlohmann::json reports_to_json(const std::vector<TestReport>& reports);

}  // namespace dynrcm
