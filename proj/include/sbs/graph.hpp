#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sbs {

using AgentId = std::uint32_t;
using Edge = std::pair<AgentId, AgentId>;

/// Undirected simple communication graph with sorted adjacency lists.
///
/// Every constructor validates symmetry, the absence of self-loops and that
/// every agent has at least one neighbor; an accepted topology is immutable.
class GraphTopology {
 public:
  /// Builds from adjacency lists; lists are sorted and checked.
  explicit GraphTopology(std::vector<std::vector<AgentId>> neighbors);

  std::size_t num_agents() const { return neighbors_.size(); }
  std::span<const AgentId> neighbors(AgentId i) const { return neighbors_[i]; }
  std::size_t degree(AgentId i) const { return neighbors_[i].size(); }
  std::size_t min_degree() const { return min_degree_; }
  std::size_t num_edges() const { return num_edges_; }

  /// Canonical edge list: pairs (i, j) with i < j, lexicographically sorted.
  std::vector<Edge> edges() const;

  bool operator==(const GraphTopology& other) const { return neighbors_ == other.neighbors_; }

 private:
  std::vector<std::vector<AgentId>> neighbors_;
  std::size_t min_degree_ = 0;
  std::size_t num_edges_ = 0;
};

GraphTopology build_complete(std::size_t n);
GraphTopology build_cycle(std::size_t n);

/// Pairing-model d-regular graph, restarting from scratch on any self-loop or
/// multi-edge (at most 10^4 restarts). With require_connected, disconnected
/// simple graphs are rejected too and count against the same budget.
GraphTopology build_random_regular(std::size_t n, std::size_t d, std::uint64_t seed,
                                   bool require_connected = false);

GraphTopology build_disjoint_cliques(std::size_t num_components, std::size_t component_size);

/// Deduplicates and symmetrizes. Rejects out-of-range indices, self-loops and
/// isolated agents.
GraphTopology from_edge_list(std::size_t n, std::span<const Edge> edges);

inline constexpr std::size_t kMaxRegularRestarts = 10'000;
inline constexpr double kDoublyStochasticTol = 1e-9;

/// |sum_{j in V_i} 1/deg(j) - 1| <= tol for every agent.
bool is_doubly_stochastic(const GraphTopology& g, double tol = kDoublyStochasticTol);

/// Same test in exact rational arithmetic (tolerance zero).
bool is_doubly_stochastic_exact(const GraphTopology& g);

std::optional<std::size_t> is_regular(const GraphTopology& g);
bool is_connected(const GraphTopology& g);

/// Components in order of their smallest agent; agents sorted within each.
std::vector<std::vector<AgentId>> connected_components(const GraphTopology& g);

struct Flow {
  double outflow = 0.0;
  double inflow = 0.0;
};

/// outflow = sum_{i in S} (1/deg i) #{j in V_i : j not in S},
/// inflow  = sum_{i not in S} (1/deg i) #{j in V_i : j in S}.
Flow flow_balance(const GraphTopology& g, std::span<const AgentId> subset);

// Edge-list text format: first non-comment line `N <num_agents>`, then one
// `i j` pair per line; `#` starts a comment.

GraphTopology read_edge_list(std::istream& in);
GraphTopology read_edge_list(const std::filesystem::path& path);
void write_edge_list(std::ostream& out, const GraphTopology& g);
void write_edge_list(const std::filesystem::path& path, const GraphTopology& g);

}  // namespace sbs
