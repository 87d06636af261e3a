#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <functional>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "sbs/analysis.hpp"
#include "sbs/coupling.hpp"
#include "sbs/csv.hpp"
#include "sbs/dynamics.hpp"
#include "sbs/error.hpp"
#include "sbs/meanfield.hpp"
#include "sbs/parallel.hpp"

namespace sbs::cli {

namespace {

using Rows = std::vector<std::pair<std::string, std::string>>;

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  body(out);
  if (!out) throw std::runtime_error(fmt::format("write failed for {}", path.string()));
  spdlog::info("wrote {}", path.string());
}

nlohmann::json model_json(const ModelParams& m) {
  return {{"p", m.rewards}, {"mu", m.exploration}, {"lambda", m.clock_rate}, {"K", m.num_arms()}};
}

nlohmann::json graph_json(const ExperimentConfig& cfg, const GraphTopology& g) {
  nlohmann::json j{{"kind", cfg.graph->kind},
                   {"agents", g.num_agents()},
                   {"edges", g.num_edges()},
                   {"min_degree", g.min_degree()},
                   {"connected", is_connected(g)},
                   {"doubly_stochastic", is_doubly_stochastic(g)}};
  if (auto d = is_regular(g)) j["regular_degree"] = *d;
  return j;
}

nlohmann::json init_json(const InitialCondition& init) {
  if (const auto* ex = std::get_if<ExplicitInit>(&init)) return {{"kind", "explicit"}, {"agents", ex->memories.size()}};
  if (const auto* c = std::get_if<CountsInit>(&init)) return {{"kind", "counts"}, {"counts", c->counts}};
  return {{"kind", "iid"}, {"q", std::get<IidInit>(init).q}};
}

nlohmann::json run_json(const RunConfig& r) {
  return {{"t_max", r.t_max},
          {"dt", r.record_grid},
          {"backend", std::string(to_string(r.backend))},
          {"record_jumps", r.record_jumps},
          {"stop_on_absorption", r.stop_on_absorption},
          {"seed", r.seed}};
}

RunConfig require_run(const ExperimentConfig& cfg) {
  if (!cfg.has_run) throw ValidationError("run: missing required table");
  RunConfig run = cfg.run;
  run.seed = cfg.seed;
  return run;
}

CommandResult finish(std::string command, const ExperimentConfig& cfg, nlohmann::json plan,
                     std::vector<std::filesystem::path> files) {
  plan["command"] = std::move(command);
  plan["seed"] = cfg.seed;
  std::vector<std::string> names;
  for (const auto& f : files) names.push_back(f.string());
  plan["outputs"] = names;
  return {std::move(files), std::move(plan)};
}

OdeState initial_fractions(const SystemState& s) {
  OdeState y(s.num_arms() + 1);
  for (std::size_t k = 0; k < y.size(); ++k)
    y[k] = static_cast<double>(s.count(static_cast<Memory>(k))) / static_cast<double>(s.num_agents());
  return y;
}

}  // namespace

CommandResult cmd_simulate(const ExperimentConfig& cfg, const CommandOptions& opts) {
  const ModelParams& model = cfg.require_model();
  const GraphTopology g = cfg.build_graph();
  const InitialCondition& init = cfg.require_init();
  const RunConfig run = require_run(cfg);

  std::vector<std::filesystem::path> files{opts.out_dir / "trajectory.csv"};
  if (run.record_jumps) files.push_back(opts.out_dir / "jumps.csv");
  nlohmann::json plan{{"model", model_json(model)}, {"graph", graph_json(cfg, g)}, {"init", init_json(init)},
                      {"run", run_json(run)}};
  // Validate the initial condition even on a dry run.
  init_state(g.num_agents(), model.num_arms(), init, run.seed);
  if (opts.dry_run) return finish("simulate", cfg, std::move(plan), std::move(files));

  const SimOutput out = simulate(g, model, init, run);
  write_file(files[0], [&](std::ostream& os) { write_trajectory_csv(os, out); });
  if (run.record_jumps) write_file(files[1], [&](std::ostream& os) { write_jump_chain_csv(os, out); });
  return finish("simulate", cfg, std::move(plan), std::move(files));
}

CommandResult cmd_meanfield(const ExperimentConfig& cfg, const CommandOptions& opts) {
  const ModelParams& model = cfg.require_model();
  OdeState y0;
  if (cfg.meanfield.y0) {
    y0 = *cfg.meanfield.y0;
  } else if (cfg.init && std::holds_alternative<IidInit>(*cfg.init)) {
    y0 = std::get<IidInit>(*cfg.init).q;
  } else {
    throw ValidationError("meanfield.y0: missing required field");
  }
  double t_end = 0.0;
  if (cfg.meanfield.t_end) {
    t_end = *cfg.meanfield.t_end;
  } else if (cfg.has_run) {
    t_end = cfg.run.t_max;
  } else {
    throw ValidationError("meanfield.t_end: missing required field");
  }
  const double spacing = cfg.meanfield.output_dt;
  if (!(spacing > 0.0)) throw ValidationError("meanfield.output_dt: must be positive");

  std::vector<std::filesystem::path> files{opts.out_dir / "meanfield.csv", opts.out_dir / "bounds.csv"};
  nlohmann::json plan{{"model", model_json(model)},
                      {"y0", y0},
                      {"t_end", t_end},
                      {"h", cfg.meanfield.h},
                      {"c", cfg.meanfield.c},
                      {"output_dt", spacing}};
  if (cfg.meanfield.h > kMaxOdeStep || !(cfg.meanfield.h > 0.0))
    throw ValidationError(fmt::format("meanfield.h: must be in (0, {}]", kMaxOdeStep));
  drift(y0, model);  // validates y0
  if (opts.dry_run) return finish("meanfield", cfg, std::move(plan), std::move(files));

  const OdeTrajectory traj = integrate(y0, model, t_end, cfg.meanfield.h);
  write_file(files[0], [&](std::ostream& os) { write_ode_csv(os, traj, spacing); });

  std::optional<ConvergenceBound> bound;
  std::string unavailable;
  try {
    bound = convergence_bound(model, y0, cfg.meanfield.c);
  } catch (const ValidationError& e) {
    unavailable = e.what();
  }
  write_file(files[1], [&](std::ostream& os) {
    os << "t,y0,y1,lower_bound_y1,upper_bound_y0\n";
    const auto rows = static_cast<std::size_t>(std::floor(t_end / spacing + 1e-9));
    for (std::size_t s = 0; s <= rows; ++s) {
      const double t = std::min(static_cast<double>(s) * spacing, t_end);
      os << format_real(t) << ',' << format_real(traj.eta_at(t, 0)) << ',' << format_real(traj.eta_at(t, 1)) << ',';
      if (bound && t >= bound->delay) os << format_real(bound->lower_bound_y1(t));
      os << ',';
      if (bound) os << format_real(bound->upper_bound_y0(t));
      os << '\n';
    }
    if (bound) {
      os << "# R=" << format_real(bound->rate) << " t_bar_c=" << format_real(bound->delay)
         << " c=" << format_real(bound->c)
         << " branch=" << (bound->branch == BoundBranch::PositiveStart ? "PositiveStart" : "ZeroStart") << '\n';
    } else {
      os << "# bound unavailable: " << unavailable << '\n';
    }
  });
  return finish("meanfield", cfg, std::move(plan), std::move(files));
}

CommandResult cmd_compare(const ExperimentConfig& cfg, const CommandOptions& opts) {
  const ModelParams& model = cfg.require_model();
  const GraphTopology g = cfg.build_graph();
  const InitialCondition& init = cfg.require_init();
  const RunConfig run = require_run(cfg);
  const double h = cfg.meanfield.h;

  std::vector<std::filesystem::path> files{opts.out_dir / "compare.csv"};
  nlohmann::json plan{{"model", model_json(model)}, {"graph", graph_json(cfg, g)}, {"init", init_json(init)},
                      {"run", run_json(run)}, {"h", h}};
  const SystemState start = init_state(g.num_agents(), model.num_arms(), init, run.seed);
  if (opts.dry_run) return finish("compare", cfg, std::move(plan), std::move(files));

  const SimOutput sim = simulate(g, model, init, run);
  const OdeTrajectory traj = integrate(initial_fractions(start), model, run.t_max, h);
  const std::size_t width = model.num_arms() + 1;
  const double n = static_cast<double>(g.num_agents());

  std::vector<double> max_diff(width, 0.0);
  write_file(files[0], [&](std::ostream& os) {
    os << 't';
    for (std::size_t k = 0; k < width; ++k) os << ",Y" << k;
    for (std::size_t k = 0; k < width; ++k) os << ",y" << k;
    for (std::size_t k = 0; k < width; ++k) os << ",absdiff" << k;
    os << '\n';
    for (const auto& point : sim.trajectory) {
      const OdeState y = traj.eta_at(point.time);
      os << format_real(point.time);
      for (std::size_t k = 0; k < width; ++k) os << ',' << format_real(static_cast<double>(point.occupancy[k]) / n);
      for (std::size_t k = 0; k < width; ++k) os << ',' << format_real(y[k]);
      for (std::size_t k = 0; k < width; ++k) {
        const double d = std::abs(static_cast<double>(point.occupancy[k]) / n - y[k]);
        max_diff[k] = std::max(max_diff[k], d);
        os << ',' << format_real(d);
      }
      os << '\n';
    }
    os << '#';
    for (std::size_t k = 0; k < width; ++k) os << " max_absdiff" << k << '=' << format_real(max_diff[k]);
    os << '\n';
  });
  plan["max_absdiff"] = max_diff;
  return finish("compare", cfg, std::move(plan), std::move(files));
}

CommandResult cmd_learnability(const ExperimentConfig& cfg, const CommandOptions& opts) {
  const ModelParams& model = cfg.require_model();
  const GraphTopology g = cfg.build_graph();
  const InitialCondition& init = cfg.require_init();
  const std::size_t reps = cfg.learnability.replications;
  if (reps < 1) throw ValidationError("learnability.replications: must be >= 1");
  const double t_max = cfg.learnability.t_max.value_or(default_learnability_horizon(g.num_agents(), model.clock_rate));
  if (!(t_max > 0.0)) throw ValidationError("learnability.t_max: must be positive");

  LearnabilityOptions options;
  options.jobs = opts.jobs;
  if (cfg.has_run) {
    options.backend = cfg.run.backend;
    options.record_jumps = cfg.run.record_jumps;
  }
  options.keep_outputs = options.record_jumps;

  std::vector<std::filesystem::path> files{opts.out_dir / "learnability.csv"};
  nlohmann::json plan{{"model", model_json(model)}, {"graph", graph_json(cfg, g)}, {"init", init_json(init)},
                      {"replications", reps}, {"t_max", t_max}, {"jobs", opts.jobs},
                      {"backend", std::string(to_string(options.backend))}};
  init_state(g.num_agents(), model.num_arms(), init, cfg.seed);
  if (opts.dry_run) return finish("learnability", cfg, std::move(plan), std::move(files));

  const LearnabilityEstimate est = estimate_learnability(g, model, init, reps, t_max, cfg.seed, options);
  Rows rows = summary_rows(est, reps);
  if (options.record_jumps) {
    try {
      const JumpChainStats jumps = jump_chain_stats(est.outputs, g, model);
      rows.emplace_back("num_jumps", std::to_string(jumps.num_jumps));
      rows.emplace_back("jump_up_fraction", format_real(jumps.up_fraction));
      rows.emplace_back("jump_ci_lo", format_real(jumps.wilson_ci_95.lo));
      rows.emplace_back("jump_ci_hi", format_real(jumps.wilson_ci_95.hi));
      rows.emplace_back("jump_p_star_bound", jumps.p_star_bound ? format_real(*jumps.p_star_bound) : "none");
    } catch (const ValidationError&) {
      rows.emplace_back("num_jumps", "0");
    }
  }
  write_file(files[0], [&](std::ostream& os) { write_summary_csv(os, rows); });
  return finish("learnability", cfg, std::move(plan), std::move(files));
}

CommandResult cmd_coupling(const ExperimentConfig& cfg, const CommandOptions& opts) {
  const ModelParams& model = cfg.require_model();
  const GraphTopology g = cfg.build_graph();
  std::vector<double> q;
  if (cfg.coupling.q) {
    q = *cfg.coupling.q;
  } else if (cfg.init && std::holds_alternative<IidInit>(*cfg.init)) {
    q = std::get<IidInit>(*cfg.init).q;
  } else {
    throw ValidationError("coupling.q: missing required field (coupling needs an i.i.d. initial condition)");
  }
  validate_distribution(q, model.num_arms());
  const auto& spec = cfg.coupling;
  if (!(spec.horizon > 0.0)) throw ValidationError("coupling.horizon: must be positive");
  if (spec.replications < 1) throw ValidationError("coupling.replications: must be >= 1");

  std::vector<std::filesystem::path> files{opts.out_dir / "coupling.csv"};
  nlohmann::json plan{{"model", model_json(model)}, {"graph", graph_json(cfg, g)}, {"q", q},
                      {"horizon", spec.horizon}, {"replications", spec.replications}, {"jobs", opts.jobs}};
  if (opts.dry_run) return finish("coupling", cfg, std::move(plan), std::move(files));

  const CouplingReport report = coupling_error(g, model, q, spec.horizon, spec.replications, cfg.seed, opts.jobs);
  write_file(files[0], [&](std::ostream& os) { write_coupling_csv(os, report); });
  return finish("coupling", cfg, std::move(plan), std::move(files));
}

CommandResult cmd_scenario(const std::string& name_arg, const ExperimentConfig& cfg, const CommandOptions& opts) {
  const std::string name = name_arg.empty() ? cfg.scenario.name : name_arg;
  const ModelParams& model = cfg.require_model();
  const auto& spec = cfg.scenario;
  if (spec.replications < 1) throw ValidationError("scenario.replications: must be >= 1");
  if (!(spec.t_max > 0.0)) throw ValidationError("scenario.t_max: must be positive");

  if (name == "example1") {
    if (model.num_arms() != 2) throw ValidationError("model.p: example1 needs exactly two arms");
    const std::size_t n = spec.n == 0 ? 100 : spec.n;
    const Scenario1 scen = scenario_example1(n);
    const auto& memories = std::get<ExplicitInit>(scen.init).memories;
    std::vector<std::filesystem::path> files{opts.out_dir / "scenario_example1.csv"};
    nlohmann::json plan{{"scenario", name}, {"model", model_json(model)}, {"agents", n},
                        {"replications", spec.replications}, {"t_max", spec.t_max}};
    if (opts.dry_run) return finish("scenario", cfg, std::move(plan), std::move(files));

    const auto outputs = parallel_map(spec.replications, opts.jobs, [&](std::size_t r) {
      RunConfig run;
      run.t_max = spec.t_max;
      run.record_grid = spec.t_max;
      run.record_jumps = true;
      run.stop_on_absorption = true;
      run.seed = split_seed(cfg.seed, r);
      return simulate(scen.graph, model, scen.init, run);
    });
    const JumpChainStats stats = jump_chain_stats(outputs, scen.graph, model);
    const double exact = model.rewards[0] / (model.rewards[0] + model.rewards[1]);
    const double se = std::sqrt(exact * (1.0 - exact) / static_cast<double>(stats.num_jumps));
    const Rows rows{{"up_fraction", format_real(stats.up_fraction)},
                    {"exact_ratio", format_real(exact)},
                    {"standard_error", format_real(se)},
                    {"num_jumps", std::to_string(stats.num_jumps)},
                    {"within_3se", std::abs(stats.up_fraction - exact) <= 3.0 * se ? "true" : "false"},
                    {"boundary_agents", std::to_string(count_boundary_agents(scen.graph, memories))},
                    {"replications", std::to_string(spec.replications)}};
    write_file(files[0], [&](std::ostream& os) { write_summary_csv(os, rows); });
    return finish("scenario", cfg, std::move(plan), std::move(files));
  }

  if (name == "example2") {
    const std::size_t n = spec.n == 0 ? 2000 : spec.n;
    const Scenario2 scen = scenario_example2(n);
    if (model.num_arms() + 1 != scen.q.size()) throw ValidationError("model.p: example2 needs exactly two arms");
    std::vector<std::filesystem::path> files{opts.out_dir / "scenario_example2.csv"};
    nlohmann::json plan{{"scenario", name},
                        {"model", model_json(model)},
                        {"agents", n},
                        {"component_size", scen.component_size},
                        {"components", scen.num_components},
                        {"dropped_agents", scen.dropped_agents},
                        {"q", scen.q},
                        {"replications", spec.replications},
                        {"t_max", spec.t_max}};
    if (opts.dry_run) return finish("scenario", cfg, std::move(plan), std::move(files));

    const Example2Result res = example2_check(scen, model, spec.replications, spec.t_max, cfg.seed, opts.jobs);
    const Rows rows{{"fraction_with_inferior_component", format_real(res.fraction)},
                    {"replications", std::to_string(res.replications)},
                    {"component_size", std::to_string(scen.component_size)},
                    {"components", std::to_string(scen.num_components)},
                    {"dropped_agents", std::to_string(scen.dropped_agents)}};
    write_file(files[0], [&](std::ostream& os) { write_summary_csv(os, rows); });
    return finish("scenario", cfg, std::move(plan), std::move(files));
  }
  throw ValidationError(fmt::format("scenario.name: unknown scenario `{}` (expected example1 or example2)", name));
}

CommandResult run_command(const std::string& command, const std::string& scenario_name, const ExperimentConfig& cfg,
                          const CommandOptions& opts) {
  if (command == "simulate") return cmd_simulate(cfg, opts);
  if (command == "meanfield") return cmd_meanfield(cfg, opts);
  if (command == "compare") return cmd_compare(cfg, opts);
  if (command == "learnability") return cmd_learnability(cfg, opts);
  if (command == "coupling") return cmd_coupling(cfg, opts);
  if (command == "scenario") return cmd_scenario(scenario_name, cfg, opts);
  throw ValidationError(fmt::format("unknown command `{}`", command));
}

}  // namespace sbs::cli
