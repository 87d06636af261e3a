#include "sbs/csv.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>

namespace sbs {

std::string format_real(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  return fmt::format("{:.17g}", x);
}

void write_trajectory_csv(std::ostream& out, const SimOutput& sim) {
  const std::size_t width = sim.final_state.num_arms() + 1;
  const double n = static_cast<double>(sim.final_state.num_agents());
  out << 't';
  for (std::size_t k = 0; k < width; ++k) out << ",Y" << k;
  out << '\n';
  for (const auto& point : sim.trajectory) {
    out << format_real(point.time);
    for (std::size_t count : point.occupancy) out << ',' << format_real(static_cast<double>(count) / n);
    out << '\n';
  }
  out << "# status=" << to_string(sim.absorption.status)
      << " time=" << (sim.absorption.absorption_time ? format_real(*sim.absorption.absorption_time) : "none") << '\n';
  out << "# events=" << sim.event_count << '\n';
}

void write_jump_chain_csv(std::ostream& out, const SimOutput& sim) {
  out << "t,direction\n";
  for (const auto& jump : sim.jump_chain) out << format_real(jump.time) << ',' << (jump.direction > 0 ? "+1" : "-1") << '\n';
}

void write_ode_csv(std::ostream& out, const OdeTrajectory& traj, double spacing) {
  const std::size_t width = traj.value(0).size();
  out << 't';
  for (std::size_t k = 0; k < width; ++k) out << ",y" << k;
  out << '\n';
  const auto row = [&](double t, const OdeState& y) {
    out << format_real(t);
    for (double v : y) out << ',' << format_real(v);
    out << '\n';
  };
  if (spacing <= 0.0) {
    for (std::size_t i = 0; i < traj.size(); ++i) row(traj.time(i), traj.value(i));
    return;
  }
  const auto rows = static_cast<std::size_t>(std::floor(traj.t_end() / spacing + 1e-9));
  for (std::size_t s = 0; s <= rows; ++s) {
    const double t = std::min(static_cast<double>(s) * spacing, traj.t_end());
    row(t, traj.eta_at(t));
  }
}

void write_coupling_csv(std::ostream& out, const CouplingReport& report) {
  out << "agent,empirical_error\n";
  for (std::size_t i = 0; i < report.per_agent_error.size(); ++i)
    out << i << ',' << format_real(report.per_agent_error[i]) << '\n';
  out << "# max_error=" << format_real(report.max_error) << " bound=" << format_real(report.theoretical_bound)
      << " vacuous=" << (report.vacuous ? "true" : "false") << '\n';
  out << "# log_bound=" << format_real(report.log_theoretical_bound) << " replications=" << report.replications
      << " horizon=" << format_real(report.horizon) << '\n';
}

void write_summary_csv(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& rows) {
  out << "metric,value\n";
  for (const auto& [metric, value] : rows) out << metric << ',' << value << '\n';
}

std::vector<std::pair<std::string, std::string>> summary_rows(const LearnabilityEstimate& est,
                                                              std::size_t replications) {
  return {
      {"estimate", format_real(est.point_estimate)},
      {"ci_lo", format_real(est.wilson_ci_95.lo)},
      {"ci_hi", format_real(est.wilson_ci_95.hi)},
      {"paper_bound", est.paper_lower_bound ? format_real(*est.paper_lower_bound) : "none"},
      {"replications", std::to_string(replications)},
      {"timeouts", std::to_string(est.timeouts)},
      {"successes", std::to_string(est.successes)},
      {"failures", std::to_string(est.failures)},
  };
}

}  // namespace sbs
