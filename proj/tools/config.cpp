#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string_view>

#include <fmt/format.h>
#include <toml.hpp>

#include "sbs/error.hpp"

namespace sbs::cli {

namespace {

[[noreturn]] void fail(std::string_view path, std::string_view what) {
  throw ValidationError(fmt::format("{}: {}", path, what));
}

std::string join(std::string_view table, std::string_view key) {
  return table.empty() ? std::string(key) : fmt::format("{}.{}", table, key);
}

void check_keys(const toml::table& table, std::string_view path, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, node] : table) {
    if (std::find(allowed.begin(), allowed.end(), key.str()) == allowed.end())
      fail(join(path, key.str()), "unknown key");
  }
}

const toml::table* get_table(const toml::table& root, std::string_view key) {
  const toml::node* node = root.get(key);
  if (!node) return nullptr;
  if (!node->is_table()) fail(key, "expected a table");
  return node->as_table();
}

std::optional<double> get_real(const toml::table& t, std::string_view table, std::string_view key) {
  const toml::node* node = t.get(key);
  if (!node) return std::nullopt;
  if (auto v = node->value<double>(); v && (node->is_floating_point() || node->is_integer())) return *v;
  fail(join(table, key), "expected a number");
}

std::optional<std::int64_t> get_int(const toml::table& t, std::string_view table, std::string_view key) {
  const toml::node* node = t.get(key);
  if (!node) return std::nullopt;
  if (!node->is_integer()) fail(join(table, key), "expected an integer");
  return node->value<std::int64_t>();
}

std::optional<std::size_t> get_count(const toml::table& t, std::string_view table, std::string_view key) {
  auto v = get_int(t, table, key);
  if (!v) return std::nullopt;
  if (*v < 0) fail(join(table, key), "must be non-negative");
  return static_cast<std::size_t>(*v);
}

std::optional<bool> get_bool(const toml::table& t, std::string_view table, std::string_view key) {
  const toml::node* node = t.get(key);
  if (!node) return std::nullopt;
  if (!node->is_boolean()) fail(join(table, key), "expected true or false");
  return node->value<bool>();
}

std::optional<std::string> get_string(const toml::table& t, std::string_view table, std::string_view key) {
  const toml::node* node = t.get(key);
  if (!node) return std::nullopt;
  if (!node->is_string()) fail(join(table, key), "expected a string");
  return node->value<std::string>();
}

std::optional<std::vector<double>> get_reals(const toml::table& t, std::string_view table, std::string_view key) {
  const toml::node* node = t.get(key);
  if (!node) return std::nullopt;
  const toml::array* arr = node->as_array();
  if (!arr) fail(join(table, key), "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < arr->size(); ++i) {
    const toml::node& item = *arr->get(i);
    if (!(item.is_floating_point() || item.is_integer())) fail(fmt::format("{}[{}]", join(table, key), i), "expected a number");
    out.push_back(*item.value<double>());
  }
  return out;
}

std::optional<std::vector<std::int64_t>> get_ints(const toml::table& t, std::string_view table, std::string_view key) {
  const toml::node* node = t.get(key);
  if (!node) return std::nullopt;
  const toml::array* arr = node->as_array();
  if (!arr) fail(join(table, key), "expected an array of integers");
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < arr->size(); ++i) {
    const toml::node& item = *arr->get(i);
    if (!item.is_integer() || *item.value<std::int64_t>() < 0)
      fail(fmt::format("{}[{}]", join(table, key), i), "expected a non-negative integer");
    out.push_back(*item.value<std::int64_t>());
  }
  return out;
}

template <class T>
T required(std::optional<T> v, std::string_view table, std::string_view key) {
  if (!v) fail(join(table, key), "missing required field");
  return std::move(*v);
}

ModelParams parse_model(const toml::table& t) {
  check_keys(t, "model", {"p", "mu", "lambda"});
  ModelParams m;
  m.rewards = required(get_reals(t, "model", "p"), "model", "p");
  m.exploration = get_real(t, "model", "mu").value_or(0.0);
  m.clock_rate = get_real(t, "model", "lambda").value_or(1.0);
  try {
    m.validate();
  } catch (const ValidationError& e) {
    fail("model", e.what());
  }
  return m;
}

GraphSpec parse_graph(const toml::table& t) {
  check_keys(t, "graph", {"kind", "n", "degree", "components", "component_size", "require_connected", "seed", "path"});
  GraphSpec g;
  g.kind = required(get_string(t, "graph", "kind"), "graph", "kind");
  if (g.kind == "complete" || g.kind == "cycle") {
    g.n = required(get_count(t, "graph", "n"), "graph", "n");
  } else if (g.kind == "random_regular") {
    g.n = required(get_count(t, "graph", "n"), "graph", "n");
    g.degree = required(get_count(t, "graph", "degree"), "graph", "degree");
    g.require_connected = get_bool(t, "graph", "require_connected").value_or(false);
    if (auto s = get_int(t, "graph", "seed")) g.seed = static_cast<std::uint64_t>(*s);
  } else if (g.kind == "disjoint_cliques") {
    g.components = required(get_count(t, "graph", "components"), "graph", "components");
    g.component_size = required(get_count(t, "graph", "component_size"), "graph", "component_size");
  } else if (g.kind == "edge_list") {
    g.path = required(get_string(t, "graph", "path"), "graph", "path");
  } else {
    fail("graph.kind", fmt::format("unknown graph kind `{}`", g.kind));
  }
  return g;
}

InitialCondition parse_init(const toml::table& t) {
  check_keys(t, "init", {"kind", "q", "counts", "memories"});
  const std::string kind = required(get_string(t, "init", "kind"), "init", "kind");
  if (kind == "iid") return IidInit{required(get_reals(t, "init", "q"), "init", "q")};
  if (kind == "counts") {
    const auto raw = required(get_ints(t, "init", "counts"), "init", "counts");
    return CountsInit{{raw.begin(), raw.end()}};
  }
  if (kind == "explicit") {
    const auto raw = required(get_ints(t, "init", "memories"), "init", "memories");
    return ExplicitInit{{raw.begin(), raw.end()}};
  }
  fail("init.kind", fmt::format("unknown initial condition `{}`", kind));
}

RunConfig parse_run(const toml::table& t) {
  check_keys(t, "run", {"t_max", "dt", "backend", "record_jumps", "stop_on_absorption"});
  RunConfig r;
  r.t_max = required(get_real(t, "run", "t_max"), "run", "t_max");
  r.record_grid = get_real(t, "run", "dt").value_or(0.1);
  const std::string backend = get_string(t, "run", "backend").value_or("behavioral");
  if (backend == "behavioral") {
    r.backend = Backend::Behavioral;
  } else if (backend == "pathwise") {
    r.backend = Backend::Pathwise;
  } else {
    fail("run.backend", fmt::format("unknown backend `{}`", backend));
  }
  r.record_jumps = get_bool(t, "run", "record_jumps").value_or(false);
  r.stop_on_absorption = get_bool(t, "run", "stop_on_absorption").value_or(false);
  if (!(r.t_max > 0.0)) fail("run.t_max", "must be positive");
  if (!(r.record_grid > 0.0)) fail("run.dt", "must be positive");
  return r;
}

}  // namespace

const ModelParams& ExperimentConfig::require_model() const {
  if (!model) fail("model", "missing required table");
  return *model;
}

const InitialCondition& ExperimentConfig::require_init() const {
  if (!init) fail("init", "missing required table");
  return *init;
}

GraphTopology ExperimentConfig::build_graph() const {
  if (!graph) fail("graph", "missing required table");
  const GraphSpec& g = *graph;
  try {
    if (g.kind == "complete") return build_complete(g.n);
    if (g.kind == "cycle") return build_cycle(g.n);
    if (g.kind == "random_regular") return build_random_regular(g.n, g.degree, g.seed.value_or(seed), g.require_connected);
    if (g.kind == "disjoint_cliques") return build_disjoint_cliques(g.components, g.component_size);
    return read_edge_list(g.path.is_absolute() ? g.path : base_dir / g.path);
  } catch (const ValidationError& e) {
    fail("graph", e.what());
  }
}

ExperimentConfig parse_config(const std::string& toml_text, const std::filesystem::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    const auto& where = e.source().begin;
    throw ValidationError(fmt::format("config:{}:{}: {}", where.line, where.column, e.description()));
  }
  check_keys(root, "", {"seed", "model", "graph", "init", "run", "meanfield", "learnability", "coupling", "scenario"});

  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  if (auto s = get_int(root, "", "seed")) cfg.seed = static_cast<std::uint64_t>(*s);
  if (const auto* t = get_table(root, "model")) cfg.model = parse_model(*t);
  if (const auto* t = get_table(root, "graph")) cfg.graph = parse_graph(*t);
  if (const auto* t = get_table(root, "init")) cfg.init = parse_init(*t);
  if (const auto* t = get_table(root, "run")) {
    cfg.run = parse_run(*t);
    cfg.has_run = true;
  }
  if (const auto* t = get_table(root, "meanfield")) {
    check_keys(*t, "meanfield", {"t_end", "h", "c", "output_dt", "y0"});
    cfg.meanfield.t_end = get_real(*t, "meanfield", "t_end");
    cfg.meanfield.h = get_real(*t, "meanfield", "h").value_or(cfg.meanfield.h);
    cfg.meanfield.c = get_real(*t, "meanfield", "c").value_or(cfg.meanfield.c);
    cfg.meanfield.output_dt = get_real(*t, "meanfield", "output_dt").value_or(cfg.meanfield.output_dt);
    cfg.meanfield.y0 = get_reals(*t, "meanfield", "y0");
    cfg.has_meanfield = true;
  }
  if (const auto* t = get_table(root, "learnability")) {
    check_keys(*t, "learnability", {"replications", "t_max"});
    cfg.learnability.replications = get_count(*t, "learnability", "replications").value_or(cfg.learnability.replications);
    cfg.learnability.t_max = get_real(*t, "learnability", "t_max");
  }
  if (const auto* t = get_table(root, "coupling")) {
    check_keys(*t, "coupling", {"horizon", "replications", "q"});
    cfg.coupling.horizon = get_real(*t, "coupling", "horizon").value_or(cfg.coupling.horizon);
    cfg.coupling.replications = get_count(*t, "coupling", "replications").value_or(cfg.coupling.replications);
    cfg.coupling.q = get_reals(*t, "coupling", "q");
    cfg.has_coupling = true;
  }
  if (const auto* t = get_table(root, "scenario")) {
    check_keys(*t, "scenario", {"name", "n", "replications", "t_max"});
    cfg.scenario.name = get_string(*t, "scenario", "name").value_or("");
    cfg.scenario.n = get_count(*t, "scenario", "n").value_or(0);
    cfg.scenario.replications = get_count(*t, "scenario", "replications").value_or(cfg.scenario.replications);
    cfg.scenario.t_max = get_real(*t, "scenario", "t_max").value_or(cfg.scenario.t_max);
    cfg.has_scenario = true;
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot open config {}", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.parent_path());
}

}  // namespace sbs::cli
