#include "sbs/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <queue>

#include <boost/multiprecision/cpp_int.hpp>
#include <fmt/format.h>

#include "sbs/error.hpp"
#include "sbs/rng.hpp"

namespace sbs {

namespace {
constexpr int kPartnerDraws = 64;
}  // namespace

GraphTopology::GraphTopology(std::vector<std::vector<AgentId>> neighbors)
    : neighbors_(std::move(neighbors)) {
  const std::size_t n = neighbors_.size();
  if (n == 0) throw ValidationError("graph: at least one agent required");
  for (auto& list : neighbors_) std::sort(list.begin(), list.end());

  std::size_t half_edges = 0;
  min_degree_ = n;
  for (AgentId i = 0; i < n; ++i) {
    const auto& list = neighbors_[i];
    if (list.empty()) throw ValidationError(fmt::format("graph: agent {} is isolated", i));
    if (std::adjacent_find(list.begin(), list.end()) != list.end())
      throw ValidationError(fmt::format("graph: duplicate neighbor of agent {}", i));
    for (AgentId j : list) {
      if (j >= n) throw ValidationError(fmt::format("graph: neighbor {} of agent {} out of range", j, i));
      if (j == i) throw ValidationError(fmt::format("graph: self-loop at agent {}", i));
      const auto& back = neighbors_[j];
      if (!std::binary_search(back.begin(), back.end(), i))
        throw ValidationError(fmt::format("graph: edge {}-{} is not symmetric", i, j));
    }
    half_edges += list.size();
    min_degree_ = std::min(min_degree_, list.size());
  }
  num_edges_ = half_edges / 2;
}

std::vector<Edge> GraphTopology::edges() const {
  std::vector<Edge> out;
  out.reserve(num_edges_);
  for (AgentId i = 0; i < neighbors_.size(); ++i)
    for (AgentId j : neighbors_[i])
      if (i < j) out.emplace_back(i, j);
  return out;
}

GraphTopology build_complete(std::size_t n) {
  if (n < 2) throw ValidationError(fmt::format("complete graph needs n >= 2, got {}", n));
  std::vector<std::vector<AgentId>> adj(n);
  for (AgentId i = 0; i < n; ++i) {
    adj[i].reserve(n - 1);
    for (AgentId j = 0; j < n; ++j)
      if (j != i) adj[i].push_back(j);
  }
  return GraphTopology(std::move(adj));
}

GraphTopology build_cycle(std::size_t n) {
  if (n < 3) throw ValidationError(fmt::format("cycle needs n >= 3, got {}", n));
  std::vector<std::vector<AgentId>> adj(n);
  for (AgentId i = 0; i < n; ++i) {
    adj[i] = {static_cast<AgentId>((i + n - 1) % n), static_cast<AgentId>((i + 1) % n)};
  }
  return GraphTopology(std::move(adj));
}

GraphTopology build_random_regular(std::size_t n, std::size_t d, std::uint64_t seed,
                                   bool require_connected) {
  if (d == 0 || d >= n || (n * d) % 2 != 0)
    throw ValidationError(fmt::format("no simple {}-regular graph on {} agents", d, n));

  Rng rng(seed);
  std::vector<AgentId> stubs;
  std::vector<std::vector<AgentId>> adj(n);
  const auto valid = [&](AgentId a, AgentId b) {
    return a != b && std::find(adj[a].begin(), adj[a].end(), b) == adj[a].end();
  };
  // Stubs are paired one at a time; a partner that would create a self-loop or
  // multi-edge is rejected and redrawn. A dead end restarts the whole pairing.
  for (std::size_t attempt = 0; attempt < kMaxRegularRestarts; ++attempt) {
    stubs.resize(n * d);
    for (std::size_t s = 0; s < stubs.size(); ++s) stubs[s] = static_cast<AgentId>(s / d);
    for (auto& list : adj) list.clear();
    bool stuck = false;
    while (!stubs.empty() && !stuck) {
      const std::size_t first = rng.uniform_index(stubs.size());
      const AgentId a = stubs[first];
      stubs[first] = stubs.back();
      stubs.pop_back();
      std::optional<std::size_t> partner;
      for (int tries = 0; tries < kPartnerDraws && !partner; ++tries) {
        const std::size_t k = rng.uniform_index(stubs.size());
        if (valid(a, stubs[k])) partner = k;
      }
      if (!partner) {
        std::vector<std::size_t> options;
        for (std::size_t k = 0; k < stubs.size(); ++k)
          if (valid(a, stubs[k])) options.push_back(k);
        if (options.empty()) {
          stuck = true;
          break;
        }
        partner = options[rng.uniform_index(options.size())];
      }
      const AgentId b = stubs[*partner];
      stubs[*partner] = stubs.back();
      stubs.pop_back();
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
    if (stuck) continue;

    GraphTopology g(adj);
    if (require_connected && !is_connected(g)) continue;
    return g;
  }
  throw GenerationError(fmt::format("random {}-regular graph on {} agents: {} restarts exhausted", d,
                                    n, kMaxRegularRestarts));
}

GraphTopology build_disjoint_cliques(std::size_t num_components, std::size_t component_size) {
  if (num_components < 1) throw ValidationError("disjoint cliques: need at least one component");
  if (component_size < 2)
    throw ValidationError(fmt::format("disjoint cliques: component size must be >= 2, got {}", component_size));
  std::vector<std::vector<AgentId>> adj(num_components * component_size);
  for (std::size_t c = 0; c < num_components; ++c) {
    const auto base = static_cast<AgentId>(c * component_size);
    for (AgentId a = 0; a < component_size; ++a)
      for (AgentId b = 0; b < component_size; ++b)
        if (a != b) adj[base + a].push_back(base + b);
  }
  return GraphTopology(std::move(adj));
}

GraphTopology from_edge_list(std::size_t n, std::span<const Edge> edges) {
  std::vector<std::vector<AgentId>> adj(n);
  for (const auto& [a, b] : edges) {
    if (a >= n || b >= n)
      throw ValidationError(fmt::format("edge ({}, {}) out of range for {} agents", a, b, n));
    if (a == b) throw ValidationError(fmt::format("self-loop at agent {}", a));
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return GraphTopology(std::move(adj));
}

bool is_doubly_stochastic(const GraphTopology& g, double tol) {
  for (AgentId i = 0; i < g.num_agents(); ++i) {
    double sum = 0.0;
    for (AgentId j : g.neighbors(i)) sum += 1.0 / static_cast<double>(g.degree(j));
    if (std::abs(sum - 1.0) > tol) return false;
  }
  return true;
}

bool is_doubly_stochastic_exact(const GraphTopology& g) {
  using boost::multiprecision::cpp_rational;
  for (AgentId i = 0; i < g.num_agents(); ++i) {
    // Group by degree so each distinct denominator enters once.
    std::map<std::size_t, std::size_t> by_degree;
    for (AgentId j : g.neighbors(i)) ++by_degree[g.degree(j)];
    cpp_rational sum = 0;
    for (const auto& [deg, count] : by_degree) sum += cpp_rational(count, deg);
    if (sum != 1) return false;
  }
  return true;
}

std::optional<std::size_t> is_regular(const GraphTopology& g) {
  const std::size_t d = g.degree(0);
  for (AgentId i = 1; i < g.num_agents(); ++i)
    if (g.degree(i) != d) return std::nullopt;
  return d;
}

std::vector<std::vector<AgentId>> connected_components(const GraphTopology& g) {
  const std::size_t n = g.num_agents();
  std::vector<bool> seen(n, false);
  std::vector<std::vector<AgentId>> components;
  std::queue<AgentId> frontier;
  for (AgentId start = 0; start < n; ++start) {
    if (seen[start]) continue;
    auto& comp = components.emplace_back();
    seen[start] = true;
    frontier.push(start);
    while (!frontier.empty()) {
      const AgentId u = frontier.front();
      frontier.pop();
      comp.push_back(u);
      for (AgentId v : g.neighbors(u)) {
        if (!seen[v]) {
          seen[v] = true;
          frontier.push(v);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
  }
  return components;
}

bool is_connected(const GraphTopology& g) { return connected_components(g).size() == 1; }

Flow flow_balance(const GraphTopology& g, std::span<const AgentId> subset) {
  std::vector<bool> in_set(g.num_agents(), false);
  for (AgentId i : subset) {
    if (i >= g.num_agents()) throw ValidationError(fmt::format("flow_balance: agent {} out of range", i));
    in_set[i] = true;
  }
  Flow flow;
  for (AgentId i = 0; i < g.num_agents(); ++i) {
    std::size_t crossing = 0;
    for (AgentId j : g.neighbors(i))
      if (in_set[j] != in_set[i]) ++crossing;
    const double share = static_cast<double>(crossing) / static_cast<double>(g.degree(i));
    (in_set[i] ? flow.outflow : flow.inflow) += share;
  }
  return flow;
}

}  // namespace sbs
