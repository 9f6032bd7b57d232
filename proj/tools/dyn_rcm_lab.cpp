#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>

#include "dynrcm/config.hpp"
#include "dynrcm/runner.hpp"

namespace {

enum Exit { kPass = 0, kTestFailure = 1, kConfigError = 2, kRuntimeError = 3 };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic random conductance laboratory"};
  app.set_version_flag("--version", std::string(dynrcm::kVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> replicas;
  std::optional<int> threads;

  for (const char* name : {"simulate", "verify", "kernel", "collide", "voter"}) {
    CLI::App* sub = app.add_subcommand(name, std::string("run a '") + name + "' experiment");
    sub->add_option("--config", config_path, "experiment configuration (JSON)")->required();
    sub->add_option("--seed", seed, "override master_seed");
    sub->add_option("--out", out_dir, "override output_dir");
    sub->add_option("--replicas", replicas, "override replicas")->check(CLI::PositiveNumber);
    sub->add_option("--threads", threads, "worker threads (default: DYN_RCM_THREADS or 1)")
        ->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfigError;
  }
  const std::string subcommand = app.get_subcommands().front()->get_name();

  dynrcm::ExperimentConfig config;
  try {
    config = dynrcm::load_config(config_path);
    if (dynrcm::experiment_name(config.experiment) != subcommand) {
      throw dynrcm::ConfigError("experiment: config declares '" + dynrcm::experiment_name(config.experiment) +
                                "' but the subcommand is '" + subcommand + "'");
    }
    if (seed) config.master_seed = *seed;
    if (out_dir) config.output_dir = *out_dir;
    if (replicas) config.replicas = *replicas;
    if (threads) config.threads = *threads;
  } catch (const dynrcm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    const dynrcm::RunOutcome outcome = dynrcm::run_experiment(config);
    std::cout << dynrcm::format_reports(outcome.reports);
    std::cout << (outcome.passed ? "PASS" : "FAIL") << " (" << outcome.reports.size() << " reports, output in "
              << config.output_dir << ")\n";
    return outcome.passed ? kPass : kTestFailure;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kRuntimeError;
  }
}
