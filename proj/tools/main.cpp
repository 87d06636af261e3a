#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "sbs/error.hpp"
#include "sbs/log.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

}  // namespace

int main(int argc, char** argv) {
  sbs::configure_logging_from_env();

  CLI::App app{"Social bandit learning on graphs: simulation, mean-field and coupling experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  std::string out_dir = ".";
  bool dry_run = false;
  std::string scenario_name;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "TOML experiment file")->required();
    sub->add_option("--seed", seed, "Override the config seed");
    sub->add_option("--jobs", jobs, "Worker threads for replications")->check(CLI::PositiveNumber);
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_flag("--dry-run", dry_run, "Validate and print the plan without running");
  };
  const std::pair<const char*, const char*> commands[] = {
      {"simulate", "Simulate one run; writes trajectory.csv (and jumps.csv)"},
      {"meanfield", "Integrate the mean-field ODE; writes meanfield.csv and bounds.csv"},
      {"compare", "Simulate and integrate side by side; writes compare.csv"},
      {"learnability", "Estimate the probability that every agent learns the best arm"},
      {"coupling", "Measure the finite-system / limit-process coupling error"},
  };
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help));
  CLI::App* scenario = app.add_subcommand("scenario", "Run a named scenario (example1 | example2)");
  add_common(scenario);
  scenario->add_option("name", scenario_name, "Scenario name; defaults to scenario.name");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    sbs::cli::ExperimentConfig cfg = sbs::cli::load_config(config_path);
    if (seed) cfg.seed = *seed;
    sbs::cli::CommandOptions opts;
    opts.out_dir = out_dir;
    opts.jobs = jobs;
    opts.dry_run = dry_run;
    const auto result = sbs::cli::run_command(command, scenario_name, cfg, opts);
    if (dry_run) {
      std::cout << result.plan.dump(2) << '\n';
    } else {
      for (const auto& f : result.files) std::cout << f.string() << '\n';
    }
    return EXIT_SUCCESS;
  } catch (const sbs::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
