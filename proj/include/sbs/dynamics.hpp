#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "sbs/graph.hpp"
#include "sbs/model.hpp"
#include "sbs/rng.hpp"

namespace sbs {

/// Per-agent memories plus occupancy counts Z_0..Z_K, kept in sync.
class SystemState {
 public:
  SystemState(std::size_t num_arms, std::vector<Memory> memories, double time = 0.0);

  double time() const { return time_; }
  void set_time(double t) { time_ = t; }

  std::size_t num_agents() const { return memories_.size(); }
  std::size_t num_arms() const { return occupancy_.size() - 1; }
  Memory memory(AgentId i) const { return memories_[i]; }
  std::span<const Memory> memories() const { return memories_; }
  std::span<const std::size_t> occupancy() const { return occupancy_; }
  std::size_t count(Memory k) const { return occupancy_[k]; }

  void set_memory(AgentId i, Memory m);

  /// Z recomputed from scratch equals the incremental counts.
  bool recount_matches() const;

  bool operator==(const SystemState&) const = default;

 private:
  double time_ = 0.0;
  std::vector<Memory> memories_;
  std::vector<std::size_t> occupancy_;
};

struct ExplicitInit {
  std::vector<Memory> memories;
};
/// Z_0..Z_K agents assigned in index order, then shuffled.
struct CountsInit {
  std::vector<std::size_t> counts;
};
/// Each memory drawn independently from q = (q_0..q_K).
struct IidInit {
  std::vector<double> q;
};
using InitialCondition = std::variant<ExplicitInit, CountsInit, IidInit>;

/// Validates q on the simplex (|sum - 1| <= 1e-9, entries >= 0).
void validate_distribution(std::span<const double> q, std::size_t num_arms);

/// Deterministic in seed; draws come from init_stream(seed).
SystemState init_state(std::size_t n, std::size_t num_arms, const InitialCondition& init,
                       std::uint64_t seed);

enum class Backend { Behavioral, Pathwise };

struct RunConfig {
  double t_max = 1.0;
  std::uint64_t seed = 0;
  Backend backend = Backend::Behavioral;
  double record_grid = 0.1;
  bool record_jumps = false;
  bool stop_on_absorption = false;

  void validate() const;
};

enum class AbsorptionStatus { AbsorbedSuccess, AbsorbedOther, Frozen, TimedOut };

std::string_view to_string(AbsorptionStatus s);
std::string_view to_string(Backend b);

struct AbsorptionReport {
  AbsorptionStatus status = AbsorptionStatus::TimedOut;
  std::optional<double> absorption_time;
  /// Unanimous memory of each connected component (component order as in
  /// connected_components), when every component is unanimous.
  std::optional<std::vector<Memory>> per_component_consensus;
};

struct TrajectoryPoint {
  double time = 0.0;
  std::vector<std::size_t> occupancy;
};

struct Jump {
  double time = 0.0;
  int direction = 0;  // +1 or -1
};

struct SimOutput {
  std::vector<TrajectoryPoint> trajectory;
  std::vector<Jump> jump_chain;
  AbsorptionReport absorption;
  SystemState final_state;
  std::size_t initial_best_count = 0;  // Z_1(0)
  std::uint64_t event_count = 0;
};

struct Transition {
  Memory from = 0;
  Memory to = 0;
  bool operator==(const Transition&) const = default;
};

/// One clock tick of agent i under the learning rule, without mutating state.
///
/// Draw order from rng: if M_i = 0 one uniform for the exploration coin, then
/// either an arm index or a neighbor index; otherwise a neighbor index. Then
/// one uniform for the Bernoulli reward if an arm was pulled. Returns the
/// memory change, or nothing when no arm was pulled, the reward was 0, or the
/// pulled arm is already held.
std::optional<Transition> agent_update(AgentId i, const SystemState& state, const GraphTopology& g,
                                       const ModelParams& params, Rng& rng);

/// Rates (index k-1 for arm k) at which agent i moves to arm k.
std::vector<double> transition_rates(const SystemState& state, const GraphTopology& g,
                                     const ModelParams& params, AgentId i);

/// Total transition rate out of the state is zero.
bool is_absorbing(const SystemState& state, const GraphTopology& g, const ModelParams& params);

SimOutput simulate(const GraphTopology& g, const ModelParams& params, const InitialCondition& init,
                   const RunConfig& cfg);

/// Simulation from an already materialized state (time must be 0).
SimOutput simulate_from(const GraphTopology& g, const ModelParams& params, SystemState state,
                        const RunConfig& cfg);

/// Z_1(0) plus the signed jump chain.
std::size_t reconstruct_best_count(const SimOutput& out);

namespace detail {

/// Target memory selected by a point with mark y in [0, K) of agent i's
/// rate-lambda*K Poisson stream, given neighbor fraction lookup
/// `fraction(j)` for arm j. Returns nothing when y misses every interval.
template <class Fraction>
std::optional<Memory> pathwise_target(Memory current, double y, const ModelParams& params,
                                      Fraction&& fraction) {
  const std::size_t num_arms = params.num_arms();
  std::size_t slot = static_cast<std::size_t>(y);
  if (slot >= num_arms) slot = num_arms - 1;
  const Memory arm = static_cast<Memory>(slot + 1);
  if (arm == current) return std::nullopt;
  const double offset = y - static_cast<double>(slot);
  const double p = params.reward(arm);
  double length = 0.0;
  if (current == 0) {
    const double mu = params.exploration;
    length = mu * p / static_cast<double>(num_arms) + (1.0 - mu) * p * fraction(arm);
  } else {
    length = p * fraction(arm);
  }
  if (offset < length) return arm;
  return std::nullopt;
}

double neighbor_fraction(const SystemState& state, const GraphTopology& g, AgentId i, Memory arm);

}  // namespace detail

}  // namespace sbs
