#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sbs/dynamics.hpp"
#include "sbs/graph.hpp"
#include "sbs/meanfield.hpp"
#include "sbs/model.hpp"

namespace sbs {

/// ODE step used for the eta(t) that drives the limit process.
inline constexpr double kCouplingOdeStep = 1e-4;

/// One joint run of the finite system and the i.i.d. limit process.
struct CoupledRun {
  /// Per agent: 2 if the two memories differed at some time in [0, T], else 0.
  std::vector<double> sup_distance;
  SystemState finite_state;
  std::vector<Memory> limit_memories;
};

/// Both processes start from the same i.i.d. draw from q and consume the same
/// per-agent marked Poisson stream (rate lambda*K, marks uniform on [0, K)).
/// The finite half reads neighbor fractions; the limit half reads eta(t).
/// The finite half is bit-identical to simulate() with the Pathwise backend,
/// IidInit{q}, t_max = horizon and the same seed.
CoupledRun simulate_coupled(const GraphTopology& g, const ModelParams& params, std::span<const double> q,
                            double horizon, std::uint64_t seed, const OdeTrajectory& eta);

/// Convenience overload integrating eta with kCouplingOdeStep.
CoupledRun simulate_coupled(const GraphTopology& g, const ModelParams& params, std::span<const double> q,
                            double horizon, std::uint64_t seed);

struct CouplingReport {
  std::vector<double> per_agent_error;
  double max_error = 0.0;
  std::size_t argmax_agent = 0;
  /// Monte Carlo standard error of max_error's agent estimate.
  double max_error_se = 0.0;
  /// Natural log of the theoretical bound; the bound itself overflows to inf
  /// at ordinary parameters.
  double log_theoretical_bound = 0.0;
  double theoretical_bound = 0.0;
  bool vacuous = true;
  std::size_t replications = 0;
  double horizon = 0.0;
};

/// log of 16(4+lambda) lambda K T (K+1) / sqrt(D_min) * exp(48(4+lambda) lambda (K+1) T).
double log_coupling_bound(double lambda, std::size_t num_arms, double horizon, std::size_t min_degree);

/// Replication r uses seed split_seed(base_seed, r).
CouplingReport coupling_error(const GraphTopology& g, const ModelParams& params, std::span<const double> q,
                              double horizon, std::size_t replications, std::uint64_t base_seed,
                              std::size_t jobs = 1);

}  // namespace sbs
