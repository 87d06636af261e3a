#include "sbs/dynamics.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <functional>
#include <numeric>
#include <queue>

#include <fmt/format.h>

#include "sbs/error.hpp"

namespace sbs {

SystemState::SystemState(std::size_t num_arms, std::vector<Memory> memories, double time)
    : time_(time), memories_(std::move(memories)), occupancy_(num_arms + 1, 0) {
  for (std::size_t i = 0; i < memories_.size(); ++i) {
    if (memories_[i] > num_arms)
      throw ValidationError(fmt::format("state: memory {} of agent {} exceeds K = {}", memories_[i], i, num_arms));
    ++occupancy_[memories_[i]];
  }
}

void SystemState::set_memory(AgentId i, Memory m) {
  --occupancy_[memories_[i]];
  memories_[i] = m;
  ++occupancy_[m];
}

bool SystemState::recount_matches() const {
  std::vector<std::size_t> fresh(occupancy_.size(), 0);
  for (Memory m : memories_) ++fresh[m];
  return fresh == occupancy_;
}

void validate_distribution(std::span<const double> q, std::size_t num_arms) {
  if (q.size() != num_arms + 1)
    throw ValidationError(fmt::format("init: q has {} entries, expected K + 1 = {}", q.size(), num_arms + 1));
  double total = 0.0;
  for (double v : q) {
    if (!std::isfinite(v) || v < 0.0) throw ValidationError("init: q has a negative or non-finite entry");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw ValidationError(fmt::format("init: q sums to {}, not 1", total));
}

SystemState init_state(std::size_t n, std::size_t num_arms, const InitialCondition& init, std::uint64_t seed) {
  if (n == 0) throw ValidationError("init: n must be positive");
  Rng rng = init_stream(seed);
  std::vector<Memory> memories;
  memories.reserve(n);

  if (const auto* ex = std::get_if<ExplicitInit>(&init)) {
    if (ex->memories.size() != n)
      throw ValidationError(fmt::format("init: {} memories given for {} agents", ex->memories.size(), n));
    memories = ex->memories;
  } else if (const auto* counts = std::get_if<CountsInit>(&init)) {
    if (counts->counts.size() != num_arms + 1)
      throw ValidationError(fmt::format("init: {} counts given, expected K + 1 = {}", counts->counts.size(), num_arms + 1));
    const std::size_t total = std::accumulate(counts->counts.begin(), counts->counts.end(), std::size_t{0});
    if (total != n) throw ValidationError(fmt::format("init: counts sum to {}, expected {}", total, n));
    for (Memory k = 0; k <= num_arms; ++k) memories.insert(memories.end(), counts->counts[k], k);
    for (std::size_t s = n - 1; s > 0; --s) std::swap(memories[s], memories[rng.uniform_index(s + 1)]);
  } else {
    const auto& q = std::get<IidInit>(init).q;
    validate_distribution(q, num_arms);
    Memory last_support = 0;
    for (Memory k = 0; k <= num_arms; ++k)
      if (q[k] > 0.0) last_support = k;
    for (std::size_t i = 0; i < n; ++i) {
      const double u = rng.uniform01();
      double cumulative = 0.0;
      Memory pick = last_support;
      for (Memory k = 0; k <= num_arms; ++k) {
        cumulative += q[k];
        if (u < cumulative && q[k] > 0.0) {
          pick = k;
          break;
        }
      }
      memories.push_back(pick);
    }
  }
  return SystemState(num_arms, std::move(memories));
}

void RunConfig::validate() const {
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw ValidationError("run: t_max must be positive");
  if (!(record_grid > 0.0) || !std::isfinite(record_grid)) throw ValidationError("run: record_grid must be positive");
}

std::string_view to_string(AbsorptionStatus s) {
  switch (s) {
    case AbsorptionStatus::AbsorbedSuccess: return "AbsorbedSuccess";
    case AbsorptionStatus::AbsorbedOther: return "AbsorbedOther";
    case AbsorptionStatus::Frozen: return "Frozen";
    case AbsorptionStatus::TimedOut: return "TimedOut";
  }
  return "?";
}

std::string_view to_string(Backend b) { return b == Backend::Behavioral ? "behavioral" : "pathwise"; }

namespace detail {

double neighbor_fraction(const SystemState& state, const GraphTopology& g, AgentId i, Memory arm) {
  const auto nb = g.neighbors(i);
  std::size_t hits = 0;
  for (AgentId j : nb) hits += state.memory(j) == arm;
  return static_cast<double>(hits) / static_cast<double>(nb.size());
}

}  // namespace detail

std::optional<Transition> agent_update(AgentId i, const SystemState& state, const GraphTopology& g,
                                       const ModelParams& params, Rng& rng) {
  const Memory current = state.memory(i);
  const auto recommend = [&] {
    const auto nb = g.neighbors(i);
    return state.memory(nb[rng.uniform_index(nb.size())]);
  };

  Memory choice = 0;
  if (current == 0 && rng.uniform01() < params.exploration) {
    choice = static_cast<Memory>(1 + rng.uniform_index(params.num_arms()));
  } else {
    choice = recommend();
  }
  if (choice == 0) return std::nullopt;  // pull no arm
  if (!rng.bernoulli(params.reward(choice))) return std::nullopt;
  if (choice == current) return std::nullopt;
  return Transition{current, choice};
}

std::vector<double> transition_rates(const SystemState& state, const GraphTopology& g,
                                     const ModelParams& params, AgentId i) {
  const std::size_t num_arms = params.num_arms();
  std::vector<double> fraction(num_arms + 1, 0.0);
  const auto nb = g.neighbors(i);
  for (AgentId j : nb) fraction[state.memory(j)] += 1.0;
  for (double& f : fraction) f /= static_cast<double>(nb.size());

  const Memory current = state.memory(i);
  const double lambda = params.clock_rate;
  const double mu = params.exploration;
  std::vector<double> rates(num_arms, 0.0);
  for (Memory k = 1; k <= num_arms; ++k) {
    const double p = params.reward(k);
    if (current == 0) {
      rates[k - 1] = lambda * p * (mu / static_cast<double>(num_arms) + (1.0 - mu) * fraction[k]);
    } else if (k != current) {
      rates[k - 1] = lambda * p * fraction[k];
    }
  }
  return rates;
}

namespace {

bool agent_is_stuck(const SystemState& state, const GraphTopology& g, const ModelParams& params, AgentId i) {
  const Memory current = state.memory(i);
  if (current == 0 && params.exploration > 0.0) {
    for (double p : params.rewards)
      if (p > 0.0) return false;
  }
  // With mu = 1 an uncommitted agent never follows a neighbor.
  if (current == 0 && params.exploration >= 1.0) return true;
  for (AgentId j : g.neighbors(i)) {
    const Memory k = state.memory(j);
    if (k != 0 && k != current && params.reward(k) > 0.0) return false;
  }
  return true;
}

}  // namespace

bool is_absorbing(const SystemState& state, const GraphTopology& g, const ModelParams& params) {
  for (AgentId i = 0; i < state.num_agents(); ++i)
    if (!agent_is_stuck(state, g, params, i)) return false;
  return true;
}

namespace {

/// Incremental absorption detection. On a connected graph with every p_k > 0
/// the state is absorbing iff it is unanimous (on an arm, or on 0 when
/// mu = 0); otherwise fall back to the full rate scan when it can matter.
class AbsorptionMonitor {
 public:
  AbsorptionMonitor(const GraphTopology& g, const ModelParams& params)
      : g_(g), params_(params), connected_(is_connected(g)) {
    all_positive_ = std::all_of(params.rewards.begin(), params.rewards.end(), [](double p) { return p > 0.0; });
  }

  bool check(const SystemState& state) const {
    const std::size_t n = state.num_agents();
    const bool mu_zero = params_.exploration == 0.0;
    if (connected_ && all_positive_) {
      if (state.count(0) == n) return mu_zero;
      for (Memory k = 1; k <= state.num_arms(); ++k)
        if (state.count(k) == n) return true;
      return false;
    }
    if (state.count(0) > 0 && !mu_zero && params_.rewards.front() > 0.0) return false;
    return is_absorbing(state, g_, params_);
  }

  AbsorptionReport report(const SystemState& state, double time) const {
    AbsorptionReport r;
    r.absorption_time = time;
    if (state.count(1) == state.num_agents()) {
      r.status = AbsorptionStatus::AbsorbedSuccess;
    } else if (state.count(0) > 0) {
      r.status = AbsorptionStatus::Frozen;
    } else {
      r.status = AbsorptionStatus::AbsorbedOther;
    }
    std::vector<Memory> consensus;
    for (const auto& comp : connected_components(g_)) {
      const Memory m = state.memory(comp.front());
      for (AgentId i : comp)
        if (state.memory(i) != m) return r;
      consensus.push_back(m);
    }
    r.per_component_consensus = std::move(consensus);
    return r;
  }

 private:
  const GraphTopology& g_;
  const ModelParams& params_;
  bool connected_ = true;
  bool all_positive_ = true;
};

/// Occupancy on the grid 0, dt, 2dt, ..., t_max, last value carried forward.
class GridRecorder {
 public:
  GridRecorder(double t_max, double dt) {
    const auto steps = static_cast<std::size_t>(std::floor(t_max / dt + 1e-9));
    times_.reserve(steps + 2);
    for (std::size_t s = 0; s <= steps; ++s) times_.push_back(static_cast<double>(s) * dt);
    const double tol = 1e-9 * std::max(1.0, t_max);
    if (std::abs(times_.back() - t_max) <= tol) {
      times_.back() = t_max;
    } else if (times_.back() < t_max) {
      times_.push_back(t_max);
    } else {
      times_.back() = t_max;
    }
  }

  void flush_before(double t, const SystemState& state, std::vector<TrajectoryPoint>& out) {
    while (next_ < times_.size() && times_[next_] < t) emit(state, out);
  }

  void flush_all(const SystemState& state, std::vector<TrajectoryPoint>& out) {
    while (next_ < times_.size()) emit(state, out);
  }

 private:
  void emit(const SystemState& state, std::vector<TrajectoryPoint>& out) {
    out.push_back({times_[next_++], {state.occupancy().begin(), state.occupancy().end()}});
  }

  std::vector<double> times_;
  std::size_t next_ = 0;
};

using EventQueue =
    std::priority_queue<std::pair<double, AgentId>, std::vector<std::pair<double, AgentId>>, std::greater<>>;

template <class Handler>
SimOutput run_events(const GraphTopology& g, const ModelParams& params, SystemState state, const RunConfig& cfg,
                     double stream_rate, Handler&& handle) {
  const std::size_t n = state.num_agents();
  std::vector<Rng> streams;
  streams.reserve(n);
  EventQueue queue;
  for (AgentId i = 0; i < n; ++i) {
    streams.push_back(agent_stream(cfg.seed, i));
    queue.emplace(streams[i].exponential(stream_rate), i);
  }

  SimOutput out{.trajectory = {},
                .jump_chain = {},
                .absorption = {},
                .final_state = state,
                .initial_best_count = state.count(1),
                .event_count = 0};
  AbsorptionMonitor monitor(g, params);
  GridRecorder recorder(cfg.t_max, cfg.record_grid);

  std::optional<AbsorptionReport> absorbed;
  if (monitor.check(state)) absorbed = monitor.report(state, 0.0);

  bool stopped = absorbed && cfg.stop_on_absorption;
  while (!stopped && !queue.empty()) {
    const auto [t, i] = queue.top();
    if (t > cfg.t_max) break;
    queue.pop();
    recorder.flush_before(t, state, out.trajectory);
    ++out.event_count;

    const std::optional<Memory> target = handle(i, state, streams[i]);
    if (target && *target != state.memory(i)) {
      const Memory from = state.memory(i);
      state.set_memory(i, *target);
      state.set_time(t);
      if (cfg.record_jumps && (from == 1 || *target == 1))
        out.jump_chain.push_back({t, *target == 1 ? +1 : -1});
      if (!absorbed && monitor.check(state)) {
        absorbed = monitor.report(state, t);
        stopped = cfg.stop_on_absorption;
      }
    }
#ifndef NDEBUG
    if (out.event_count % 10'000 == 0) assert(state.recount_matches());
#endif
    queue.emplace(t + streams[i].exponential(stream_rate), i);
  }

  if (!stopped) state.set_time(cfg.t_max);
  recorder.flush_all(state, out.trajectory);
  if (absorbed) {
    out.absorption = std::move(*absorbed);
  } else {
    out.absorption.status = AbsorptionStatus::TimedOut;
  }
  out.final_state = std::move(state);
  return out;
}

void check_inputs(const GraphTopology& g, const ModelParams& params, const SystemState& state, const RunConfig& cfg) {
  params.validate();
  cfg.validate();
  if (state.num_agents() != g.num_agents())
    throw ValidationError(fmt::format("state has {} agents, graph has {}", state.num_agents(), g.num_agents()));
  if (state.num_arms() != params.num_arms())
    throw ValidationError(fmt::format("state has {} arms, model has {}", state.num_arms(), params.num_arms()));
}

}  // namespace

SimOutput simulate_from(const GraphTopology& g, const ModelParams& params, SystemState state, const RunConfig& cfg) {
  check_inputs(g, params, state, cfg);
  if (cfg.backend == Backend::Behavioral) {
    return run_events(g, params, std::move(state), cfg, params.clock_rate,
                      [&](AgentId i, const SystemState& s, Rng& rng) -> std::optional<Memory> {
                        if (auto tr = agent_update(i, s, g, params, rng)) return tr->to;
                        return std::nullopt;
                      });
  }
  const double num_arms = static_cast<double>(params.num_arms());
  return run_events(g, params, std::move(state), cfg, params.clock_rate * num_arms,
                    [&](AgentId i, const SystemState& s, Rng& rng) {
                      const double mark = num_arms * rng.uniform01();
                      return detail::pathwise_target(s.memory(i), mark, params, [&](Memory arm) {
                        return detail::neighbor_fraction(s, g, i, arm);
                      });
                    });
}

SimOutput simulate(const GraphTopology& g, const ModelParams& params, const InitialCondition& init,
                   const RunConfig& cfg) {
  params.validate();
  return simulate_from(g, params, init_state(g.num_agents(), params.num_arms(), init, cfg.seed), cfg);
}

std::size_t reconstruct_best_count(const SimOutput& out) {
  long long z = static_cast<long long>(out.initial_best_count);
  for (const auto& jump : out.jump_chain) z += jump.direction;
  return static_cast<std::size_t>(z);
}

}  // namespace sbs
