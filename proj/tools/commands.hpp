#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"

namespace sbs::cli {

struct CommandOptions {
  std::filesystem::path out_dir = ".";
  std::size_t jobs = 1;
  bool dry_run = false;
};

struct CommandResult {
  std::vector<std::filesystem::path> files;  // written, or planned on a dry run
  nlohmann::json plan;
};

CommandResult cmd_simulate(const ExperimentConfig& cfg, const CommandOptions& opts);
CommandResult cmd_meanfield(const ExperimentConfig& cfg, const CommandOptions& opts);
CommandResult cmd_compare(const ExperimentConfig& cfg, const CommandOptions& opts);
CommandResult cmd_learnability(const ExperimentConfig& cfg, const CommandOptions& opts);
CommandResult cmd_coupling(const ExperimentConfig& cfg, const CommandOptions& opts);
/// `name` overrides scenario.name when non-empty: example1 | example2.
CommandResult cmd_scenario(const std::string& name, const ExperimentConfig& cfg, const CommandOptions& opts);

/// Dispatch by subcommand name.
CommandResult run_command(const std::string& command, const std::string& scenario_name, const ExperimentConfig& cfg,
                          const CommandOptions& opts);

}  // namespace sbs::cli
