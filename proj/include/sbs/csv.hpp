#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "sbs/analysis.hpp"
#include "sbs/coupling.hpp"
#include "sbs/dynamics.hpp"
#include "sbs/meanfield.hpp"

namespace sbs {

/// 17 significant digits, shortest exponent form ("%.17g").
std::string format_real(double x);

/// `t,Y0,...,YK` with occupancy fractions, then `# status=<...> time=<...>`.
void write_trajectory_csv(std::ostream& out, const SimOutput& sim);

/// `t,direction` with direction in {+1,-1}.
void write_jump_chain_csv(std::ostream& out, const SimOutput& sim);

/// `t,y0,...,yK` sampled every `spacing` (every step when spacing <= 0).
void write_ode_csv(std::ostream& out, const OdeTrajectory& traj, double spacing = 0.0);

/// `agent,empirical_error` rows plus a `# max_error=... bound=... vacuous=...` trailer.
void write_coupling_csv(std::ostream& out, const CouplingReport& report);

/// `metric,value` rows.
void write_summary_csv(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& rows);

std::vector<std::pair<std::string, std::string>> summary_rows(const LearnabilityEstimate& est,
                                                              std::size_t replications);

}  // namespace sbs
