#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sbs/dynamics.hpp"
#include "sbs/graph.hpp"
#include "sbs/model.hpp"

namespace sbs::cli {

struct GraphSpec {
  std::string kind;  // complete | cycle | random_regular | disjoint_cliques | edge_list
  std::size_t n = 0;
  std::size_t degree = 0;
  std::size_t components = 0;
  std::size_t component_size = 0;
  bool require_connected = false;
  std::optional<std::uint64_t> seed;
  std::filesystem::path path;
};

struct MeanfieldSpec {
  std::optional<double> t_end;
  double h = 1e-3;
  double c = 0.5;
  double output_dt = 0.1;
  std::optional<std::vector<double>> y0;
};

struct LearnabilitySpec {
  std::size_t replications = 100;
  std::optional<double> t_max;
};

struct CouplingSpec {
  double horizon = 2.0;
  std::size_t replications = 100;
  std::optional<std::vector<double>> q;
};

struct ScenarioSpec {
  std::string name;
  std::size_t n = 0;
  std::size_t replications = 100;
  double t_max = 200.0;
};

/// Parsed TOML experiment description. Every table is optional at parse time;
/// commands call the require_* accessors for what they need.
struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::optional<ModelParams> model;
  std::optional<GraphSpec> graph;
  std::optional<InitialCondition> init;
  RunConfig run;
  bool has_run = false;
  MeanfieldSpec meanfield;
  bool has_meanfield = false;
  LearnabilitySpec learnability;
  CouplingSpec coupling;
  bool has_coupling = false;
  ScenarioSpec scenario;
  bool has_scenario = false;
  std::filesystem::path base_dir;  // edge-list paths resolve against this

  const ModelParams& require_model() const;
  const InitialCondition& require_init() const;
  GraphTopology build_graph() const;
};

/// Throws ValidationError with a field path (e.g. `model.p: missing required field`).
ExperimentConfig parse_config(const std::string& toml_text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace sbs::cli
