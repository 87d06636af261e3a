#include "sbs/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>

#include <fmt/format.h>

#include "sbs/error.hpp"
#include "sbs/parallel.hpp"
#include "sbs/rng.hpp"

namespace sbs {

CoupledRun simulate_coupled(const GraphTopology& g, const ModelParams& params, std::span<const double> q,
                            double horizon, std::uint64_t seed, const OdeTrajectory& eta) {
  params.validate();
  validate_distribution(q, params.num_arms());
  if (!(horizon > 0.0)) throw ValidationError("coupling: horizon must be positive");
  if (eta.t_end() < horizon - 1e-9) throw ValidationError("coupling: eta trajectory shorter than the horizon");

  const std::size_t n = g.num_agents();
  const IidInit init{{q.begin(), q.end()}};
  SystemState finite = init_state(n, params.num_arms(), init, seed);
  std::vector<Memory> limit(finite.memories().begin(), finite.memories().end());
  std::vector<bool> differed(n, false);

  const double num_arms = static_cast<double>(params.num_arms());
  const double stream_rate = params.clock_rate * num_arms;
  std::vector<Rng> streams;
  streams.reserve(n);
  std::priority_queue<std::pair<double, AgentId>, std::vector<std::pair<double, AgentId>>, std::greater<>> queue;
  for (AgentId i = 0; i < n; ++i) {
    streams.push_back(agent_stream(seed, i));
    queue.emplace(streams[i].exponential(stream_rate), i);
  }

  while (!queue.empty()) {
    const auto [t, i] = queue.top();
    if (t > horizon) break;
    queue.pop();

    const double mark = num_arms * streams[i].uniform01();
    const auto finite_target = detail::pathwise_target(finite.memory(i), mark, params, [&](Memory arm) {
      return detail::neighbor_fraction(finite, g, i, arm);
    });
    const auto limit_target =
        detail::pathwise_target(limit[i], mark, params, [&](Memory arm) { return eta.eta_at(t, arm); });
    if (finite_target) {
      finite.set_memory(i, *finite_target);
      finite.set_time(t);
    }
    if (limit_target) limit[i] = *limit_target;
    if (finite.memory(i) != limit[i]) differed[i] = true;

    queue.emplace(t + streams[i].exponential(stream_rate), i);
  }
  finite.set_time(horizon);

  CoupledRun run{.sup_distance = std::vector<double>(n, 0.0), .finite_state = std::move(finite),
                 .limit_memories = std::move(limit)};
  for (std::size_t i = 0; i < n; ++i) run.sup_distance[i] = differed[i] ? 2.0 : 0.0;
  return run;
}

CoupledRun simulate_coupled(const GraphTopology& g, const ModelParams& params, std::span<const double> q,
                            double horizon, std::uint64_t seed) {
  const OdeTrajectory eta = integrate({q.begin(), q.end()}, params, horizon, kCouplingOdeStep);
  return simulate_coupled(g, params, q, horizon, seed, eta);
}

double log_coupling_bound(double lambda, std::size_t num_arms, double horizon, std::size_t min_degree) {
  const double k = static_cast<double>(num_arms);
  return std::log(16.0 * (4.0 + lambda) * lambda * k * horizon * (k + 1.0)) -
         0.5 * std::log(static_cast<double>(min_degree)) + 48.0 * (4.0 + lambda) * lambda * (k + 1.0) * horizon;
}

CouplingReport coupling_error(const GraphTopology& g, const ModelParams& params, std::span<const double> q,
                              double horizon, std::size_t replications, std::uint64_t base_seed, std::size_t jobs) {
  if (replications < 1) throw ValidationError("coupling: replications must be >= 1");
  params.validate();
  validate_distribution(q, params.num_arms());
  const OdeTrajectory eta = integrate({q.begin(), q.end()}, params, horizon, kCouplingOdeStep);

  const auto runs = parallel_map(replications, jobs, [&](std::size_t r) {
    return simulate_coupled(g, params, q, horizon, split_seed(base_seed, r), eta).sup_distance;
  });

  const std::size_t n = g.num_agents();
  CouplingReport report;
  report.replications = replications;
  report.horizon = horizon;
  report.per_agent_error.assign(n, 0.0);
  for (const auto& run : runs)
    for (std::size_t i = 0; i < n; ++i) report.per_agent_error[i] += run[i];
  for (double& e : report.per_agent_error) e /= static_cast<double>(replications);

  const auto it = std::max_element(report.per_agent_error.begin(), report.per_agent_error.end());
  report.argmax_agent = static_cast<std::size_t>(it - report.per_agent_error.begin());
  report.max_error = *it;
  const double frac = report.max_error / 2.0;
  report.max_error_se = 2.0 * std::sqrt(frac * (1.0 - frac) / static_cast<double>(replications));

  report.log_theoretical_bound = log_coupling_bound(params.clock_rate, params.num_arms(), horizon, g.min_degree());
  report.theoretical_bound = std::exp(report.log_theoretical_bound);
  report.vacuous = report.log_theoretical_bound > std::log(2.0);
  return report;
}

}  // namespace sbs
