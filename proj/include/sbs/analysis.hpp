#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sbs/dynamics.hpp"
#include "sbs/graph.hpp"
#include "sbs/model.hpp"

namespace sbs {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double half_width() const { return 0.5 * (hi - lo); }
  bool contains(double x) const { return lo <= x && x <= hi; }
};

inline constexpr double kZ95 = 1.959963984540054;

/// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::size_t successes, std::size_t trials, double z = kZ95);

/// Absorbing biased walk on {0..n}: up with probability p_star.
struct RandomWalkModel {
  double p_star = 0.5;
  std::size_t n = 1;
  std::size_t z0 = 0;
};

struct RuinProbability {
  double exact = 0.0;        // P(hit n before 0)
  double paper_bound = 0.0;  // 1 - ((1-p)/p)^{z0}
};

RuinProbability gambler_ruin_success(double p, std::size_t z0, std::size_t n);
inline RuinProbability gambler_ruin_success(const RandomWalkModel& walk) {
  return gambler_ruin_success(walk.p_star, walk.z0, walk.n);
}

/// Lower bound on P(every agent learns) given Z_1(0) = z0 on a connected
/// graph: 1 - (p_2/p_1)^{z0} on regular graphs, 1 - (p_2/((1-mu+mu/K) p_1))^{z0}
/// on doubly-stochastic graphs when mu <= 1 - p_2/p_1. Nothing otherwise.
std::optional<double> learnability_bound(const GraphTopology& g, const ModelParams& params, std::size_t z0);

/// Lower bound on the up-move probability of the Z_1 jump chain: p_1/(p_1+p_2)
/// on regular graphs, ((1-mu+mu/K)p_1)/((1-mu+mu/K)p_1+p_2) on doubly-stochastic ones.
std::optional<double> jump_up_bound(const GraphTopology& g, const ModelParams& params);

struct LearnabilityEstimate {
  std::size_t successes = 0;
  std::size_t failures = 0;
  std::size_t timeouts = 0;
  double point_estimate = 0.0;  // successes / (successes + failures)
  Interval wilson_ci_95;
  std::optional<double> paper_lower_bound;
  std::vector<std::string> warnings;
  std::vector<SimOutput> outputs;  // kept only when requested
};

/// Default horizon 50 ln(N) / lambda.
double default_learnability_horizon(std::size_t n, double clock_rate);

struct LearnabilityOptions {
  Backend backend = Backend::Behavioral;
  bool record_jumps = false;
  bool keep_outputs = false;
  std::size_t jobs = 1;
};

/// Runs `replications` absorbing simulations (seed split_seed(base_seed, r)).
/// Timeouts are excluded from the estimate's denominator.
LearnabilityEstimate estimate_learnability(const GraphTopology& g, const ModelParams& params,
                                           const InitialCondition& init, std::size_t replications, double t_max,
                                           std::uint64_t base_seed, const LearnabilityOptions& options = {});

struct JumpChainStats {
  std::size_t num_jumps = 0;
  std::size_t up_moves = 0;
  double up_fraction = 0.0;
  Interval wilson_ci_95;
  std::optional<double> p_star_bound;
};

/// Pools every recorded Z_1 jump. Throws ValidationError when none were recorded.
JumpChainStats jump_chain_stats(std::span<const SimOutput> outputs, const GraphTopology& g,
                                const ModelParams& params);

struct WealthCheck {
  double empirical = 0.0;  // fraction of replications meeting the threshold
  double threshold = 0.0;
  double paper_bound = 0.0;
  std::size_t replications = 0;
};

/// Simulates to t = 1/lambda from Z_0(0) = ceil(c0 N), Z_1(0) = 0 (remaining
/// agents on arm K) and measures P(Z_1(1/lambda) >= (1-C) mu c0 p_1 N/(eK)),
/// against 1 - exp(-2 (C mu c0 p_1/(eK))^2 N).
WealthCheck initial_wealth_check(const GraphTopology& g, const ModelParams& params, double c0, double C,
                                 std::size_t replications, std::uint64_t base_seed, std::size_t jobs = 1);

/// Draws i.i.d. initial conditions and measures P(Z_0 + Z_1 >= (1-C)(q_0+q_1)N)
/// against 1 - exp(-2 C^2 (q_0+q_1)^2 N).
WealthCheck iid_mass_check(std::size_t n, std::span<const double> q, double C, std::size_t draws,
                           std::uint64_t base_seed);

struct Scenario1 {
  GraphTopology graph;
  InitialCondition init;
};

/// Cycle of n agents: 0..n/2-1 on arm 1, the rest on arm 2.
Scenario1 scenario_example1(std::size_t n);

/// Agents with at least one neighbor holding a different memory.
std::size_t count_boundary_agents(const GraphTopology& g, std::span<const Memory> memories);

struct Scenario2 {
  GraphTopology graph;
  std::vector<double> q;  // recommended i.i.d. initial distribution (K = 2)
  std::size_t component_size = 0;
  std::size_t num_components = 0;
  std::size_t dropped_agents = 0;
};

/// floor(n / s) disjoint cliques of size s = floor(ln ln n).
Scenario2 scenario_example2(std::size_t n);

/// Component unanimous on some arm k >= 2 in the given state; such a
/// component can never change again.
bool has_component_stuck_on_inferior_arm(const GraphTopology& g, const SystemState& state);

struct Example2Result {
  std::size_t replications = 0;
  std::size_t with_inferior_component = 0;
  double fraction = 0.0;
};

Example2Result example2_check(const Scenario2& scenario, const ModelParams& params, std::size_t replications,
                              double t_max, std::uint64_t base_seed, std::size_t jobs = 1);

}  // namespace sbs
