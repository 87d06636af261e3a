#include "sbs/analysis.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "sbs/error.hpp"
#include "sbs/parallel.hpp"

namespace sbs {

Interval wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (successes > trials)
    throw ValidationError(fmt::format("wilson interval: {} successes in {} trials", successes, trials));
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

RuinProbability gambler_ruin_success(double p, std::size_t z0, std::size_t n) {
  if (!(p > 0.0 && p < 1.0)) throw ValidationError(fmt::format("gambler's ruin: p = {} outside (0, 1)", p));
  if (n < 1) throw ValidationError("gambler's ruin: n must be >= 1");
  if (z0 > n) throw ValidationError(fmt::format("gambler's ruin: z0 = {} exceeds n = {}", z0, n));

  const double log_r = std::log1p(-p) - std::log(p);  // log((1-p)/p)
  const double z = static_cast<double>(z0);
  const double top = static_cast<double>(n);
  RuinProbability out;
  if (log_r == 0.0) {
    out.exact = z / top;
  } else if (log_r < 0.0) {
    // (1 - r^z0) / (1 - r^n)
    out.exact = std::expm1(z * log_r) / std::expm1(top * log_r);
  } else {
    // r > 1: divide through by r^n to stay finite.
    out.exact = std::exp((z - top) * log_r) * (-std::expm1(-z * log_r)) / (-std::expm1(-top * log_r));
  }
  out.paper_bound = -std::expm1(z * log_r);
  return out;
}

namespace {

double best_ratio_base(const GraphTopology& g, const ModelParams& params, bool& applicable) {
  // Returns the effective p_1 weight in the up-move probability.
  const double p1 = params.rewards[0];
  applicable = true;
  if (is_regular(g)) return p1;
  const double mu = params.exploration;
  const double p2 = params.num_arms() >= 2 ? params.rewards[1] : 0.0;
  if (is_doubly_stochastic(g) && mu <= 1.0 - p2 / p1) {
    return (1.0 - mu + mu / static_cast<double>(params.num_arms())) * p1;
  }
  applicable = false;
  return p1;
}

}  // namespace

std::optional<double> learnability_bound(const GraphTopology& g, const ModelParams& params, std::size_t z0) {
  if (!is_connected(g) || z0 == 0) return std::nullopt;
  bool applicable = false;
  const double weight = best_ratio_base(g, params, applicable);
  if (!applicable) return std::nullopt;
  const double p2 = params.num_arms() >= 2 ? params.rewards[1] : 0.0;
  if (p2 == 0.0) return 1.0;
  return -std::expm1(static_cast<double>(z0) * std::log(p2 / weight));
}

std::optional<double> jump_up_bound(const GraphTopology& g, const ModelParams& params) {
  const double p1 = params.rewards[0];
  const double p2 = params.num_arms() >= 2 ? params.rewards[1] : 0.0;
  if (is_regular(g)) return p1 / (p1 + p2);
  if (is_doubly_stochastic(g)) {
    const double mu = params.exploration;
    const double w = (1.0 - mu + mu / static_cast<double>(params.num_arms())) * p1;
    return w / (w + p2);
  }
  return std::nullopt;
}

double default_learnability_horizon(std::size_t n, double clock_rate) {
  return 50.0 * std::log(static_cast<double>(std::max<std::size_t>(n, 2))) / clock_rate;
}

LearnabilityEstimate estimate_learnability(const GraphTopology& g, const ModelParams& params,
                                           const InitialCondition& init, std::size_t replications, double t_max,
                                           std::uint64_t base_seed, const LearnabilityOptions& options) {
  params.validate();
  if (replications < 1) throw ValidationError("learnability: replications must be >= 1");

  LearnabilityEstimate est;
  const bool regular = is_regular(g).has_value();
  const bool doubly = is_doubly_stochastic(g);
  if (!is_connected(g)) est.warnings.emplace_back("graph is disconnected; the learnability bound does not apply");
  if (!regular && !doubly) {
    est.warnings.emplace_back("graph is neither regular nor doubly-stochastic; no learnability guarantee");
  } else if (!regular) {
    const double p2 = params.num_arms() >= 2 ? params.rewards[1] : 0.0;
    if (params.exploration > 1.0 - p2 / params.rewards[0])
      est.warnings.emplace_back("mu exceeds 1 - p_2/p_1 on a doubly-stochastic graph; no learnability guarantee");
  }
  for (const auto& w : est.warnings) spdlog::warn("learnability: {}", w);

  std::optional<std::size_t> z0;
  if (const auto* ex = std::get_if<ExplicitInit>(&init)) {
    z0 = static_cast<std::size_t>(std::count(ex->memories.begin(), ex->memories.end(), Memory{1}));
  } else if (const auto* counts = std::get_if<CountsInit>(&init)) {
    if (counts->counts.size() >= 2) z0 = counts->counts[1];
  }
  if (z0) est.paper_lower_bound = learnability_bound(g, params, *z0);

  auto outputs = parallel_map(replications, options.jobs, [&](std::size_t r) {
    RunConfig cfg;
    cfg.t_max = t_max;
    cfg.seed = split_seed(base_seed, r);
    cfg.backend = options.backend;
    cfg.record_grid = t_max;
    cfg.record_jumps = options.record_jumps;
    cfg.stop_on_absorption = true;
    return simulate(g, params, init, cfg);
  });

  for (const auto& out : outputs) {
    switch (out.absorption.status) {
      case AbsorptionStatus::AbsorbedSuccess: ++est.successes; break;
      case AbsorptionStatus::AbsorbedOther:
      case AbsorptionStatus::Frozen: ++est.failures; break;
      case AbsorptionStatus::TimedOut: ++est.timeouts; break;
    }
  }
  const std::size_t decided = est.successes + est.failures;
  est.point_estimate = decided == 0 ? 0.0 : static_cast<double>(est.successes) / static_cast<double>(decided);
  est.wilson_ci_95 = wilson_interval(est.successes, decided);
  if (options.keep_outputs) est.outputs = std::move(outputs);
  return est;
}

JumpChainStats jump_chain_stats(std::span<const SimOutput> outputs, const GraphTopology& g,
                                const ModelParams& params) {
  JumpChainStats stats;
  for (const auto& out : outputs) {
    for (const auto& jump : out.jump_chain) {
      ++stats.num_jumps;
      stats.up_moves += jump.direction > 0;
    }
  }
  if (stats.num_jumps == 0) throw ValidationError("jump chain: no jumps recorded");
  stats.up_fraction = static_cast<double>(stats.up_moves) / static_cast<double>(stats.num_jumps);
  stats.wilson_ci_95 = wilson_interval(stats.up_moves, stats.num_jumps);
  stats.p_star_bound = jump_up_bound(g, params);
  return stats;
}

WealthCheck initial_wealth_check(const GraphTopology& g, const ModelParams& params, double c0, double C,
                                 std::size_t replications, std::uint64_t base_seed, std::size_t jobs) {
  params.validate();
  if (!(params.exploration > 0.0)) throw ValidationError("initial wealth: requires mu > 0");
  if (!(c0 > 0.0 && c0 <= 1.0)) throw ValidationError("initial wealth: c0 outside (0, 1]");
  if (!(C > 0.0 && C < 1.0)) throw ValidationError("initial wealth: C outside (0, 1)");
  if (replications < 1) throw ValidationError("initial wealth: replications must be >= 1");

  const std::size_t n = g.num_agents();
  const std::size_t num_arms = params.num_arms();
  const auto zeros = std::min(n, static_cast<std::size_t>(std::ceil(c0 * static_cast<double>(n) - 1e-9)));
  CountsInit init{std::vector<std::size_t>(num_arms + 1, 0)};
  init.counts[0] = zeros;
  init.counts[num_arms] += n - zeros;

  const double scale = params.exploration * c0 * params.rewards[0] / (std::numbers::e * static_cast<double>(num_arms));
  WealthCheck check;
  check.replications = replications;
  check.threshold = (1.0 - C) * scale * static_cast<double>(n);
  check.paper_bound = -std::expm1(-2.0 * (C * scale) * (C * scale) * static_cast<double>(n));

  const double horizon = 1.0 / params.clock_rate;
  const auto hits = parallel_map(replications, jobs, [&](std::size_t r) {
    RunConfig cfg;
    cfg.t_max = horizon;
    cfg.record_grid = horizon;
    cfg.seed = split_seed(base_seed, r);
    const SimOutput out = simulate(g, params, init, cfg);
    return static_cast<double>(out.final_state.count(1)) >= check.threshold;
  });
  check.empirical = static_cast<double>(std::count(hits.begin(), hits.end(), true)) / static_cast<double>(replications);
  return check;
}

WealthCheck iid_mass_check(std::size_t n, std::span<const double> q, double C, std::size_t draws,
                           std::uint64_t base_seed) {
  if (q.size() < 2) throw ValidationError("iid mass: q needs at least two entries");
  const std::size_t num_arms = q.size() - 1;
  validate_distribution(q, num_arms);
  if (!(C > 0.0 && C < 1.0)) throw ValidationError("iid mass: C outside (0, 1)");
  if (draws < 1) throw ValidationError("iid mass: draws must be >= 1");

  const double mass = q[0] + q[1];
  WealthCheck check;
  check.replications = draws;
  check.threshold = (1.0 - C) * mass * static_cast<double>(n);
  check.paper_bound = -std::expm1(-2.0 * C * C * mass * mass * static_cast<double>(n));

  const IidInit init{{q.begin(), q.end()}};
  std::size_t hits = 0;
  for (std::size_t d = 0; d < draws; ++d) {
    const SystemState s = init_state(n, num_arms, init, split_seed(base_seed, d));
    hits += static_cast<double>(s.count(0) + s.count(1)) >= check.threshold;
  }
  check.empirical = static_cast<double>(hits) / static_cast<double>(draws);
  return check;
}

Scenario1 scenario_example1(std::size_t n) {
  if (n < 4 || n % 2 != 0) throw ValidationError(fmt::format("example 1 needs an even n >= 4, got {}", n));
  std::vector<Memory> memories(n, 2);
  std::fill(memories.begin(), memories.begin() + static_cast<std::ptrdiff_t>(n / 2), 1);
  return {build_cycle(n), ExplicitInit{std::move(memories)}};
}

std::size_t count_boundary_agents(const GraphTopology& g, std::span<const Memory> memories) {
  std::size_t count = 0;
  for (AgentId i = 0; i < g.num_agents(); ++i) {
    for (AgentId j : g.neighbors(i)) {
      if (memories[j] != memories[i]) {
        ++count;
        break;
      }
    }
  }
  return count;
}

Scenario2 scenario_example2(std::size_t n) {
  if (n < 3) throw ValidationError(fmt::format("example 2: n = {} too small", n));
  const double loglog = std::log(std::log(static_cast<double>(n)));
  const auto size = loglog >= 2.0 ? static_cast<std::size_t>(std::floor(loglog)) : std::size_t{0};
  if (size < 2)
    throw ValidationError(fmt::format("example 2: floor(ln ln {}) = {} < 2", n, loglog > 0 ? std::floor(loglog) : 0.0));
  const std::size_t components = n / size;
  return {build_disjoint_cliques(components, size), {0.2, 0.4, 0.4}, size, components, n - components * size};
}

bool has_component_stuck_on_inferior_arm(const GraphTopology& g, const SystemState& state) {
  for (const auto& comp : connected_components(g)) {
    const Memory m = state.memory(comp.front());
    if (m < 2) continue;
    bool unanimous = true;
    for (AgentId i : comp) unanimous = unanimous && state.memory(i) == m;
    if (unanimous) return true;
  }
  return false;
}

Example2Result example2_check(const Scenario2& scenario, const ModelParams& params, std::size_t replications,
                              double t_max, std::uint64_t base_seed, std::size_t jobs) {
  params.validate();
  if (replications < 1) throw ValidationError("example 2: replications must be >= 1");
  const IidInit init{scenario.q};
  const auto hits = parallel_map(replications, jobs, [&](std::size_t r) {
    RunConfig cfg;
    cfg.t_max = t_max;
    cfg.record_grid = t_max;
    cfg.seed = split_seed(base_seed, r);
    cfg.stop_on_absorption = true;
    const SimOutput out = simulate(scenario.graph, params, init, cfg);
    return has_component_stuck_on_inferior_arm(scenario.graph, out.final_state);
  });
  Example2Result res;
  res.replications = replications;
  res.with_inferior_component = static_cast<std::size_t>(std::count(hits.begin(), hits.end(), true));
  res.fraction = static_cast<double>(res.with_inferior_component) / static_cast<double>(replications);
  return res;
}

}  // namespace sbs
