#include <doctest.h>

#include <cmath>

#include "sbs/coupling.hpp"
#include "sbs/dynamics.hpp"
#include "sbs/error.hpp"
#include "sbs/graph.hpp"
#include "sbs/meanfield.hpp"

using namespace sbs;

namespace {

const ModelParams kFigure{{0.8, 0.4}, 0.2, 1.0};

}  // namespace

TEST_CASE("absorbing profile couples perfectly") {
  const auto g = build_complete(10);
  const std::vector<double> q{0.0, 1.0, 0.0};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto run = simulate_coupled(g, kFigure, q, 2.0, seed);
    for (double e : run.sup_distance) CHECK(e == 0.0);
  }
}

TEST_CASE("zero rewards keep both processes constant") {
  const ModelParams dead{{0.0}, 0.5, 1.0};
  const auto g = build_cycle(8);
  const std::vector<double> q{0.5, 0.5};
  const auto report = coupling_error(g, dead, q, 3.0, 20, 4);
  CHECK(report.max_error == 0.0);
}

TEST_CASE("finite half reproduces the pathwise backend") {
  const auto g = build_random_regular(30, 4, 6);
  const std::vector<double> q{0.5, 0.25, 0.25};
  const auto eta = integrate(q, kFigure, 3.0, kCouplingOdeStep);
  for (std::uint64_t seed : {1ULL, 2ULL, 99ULL}) {
    const auto run = simulate_coupled(g, kFigure, q, 3.0, seed, eta);
    RunConfig cfg;
    cfg.t_max = 3.0;
    cfg.seed = seed;
    cfg.backend = Backend::Pathwise;
    cfg.record_grid = 3.0;
    const auto sim = simulate(g, kFigure, IidInit{q}, cfg);
    for (AgentId i = 0; i < 30; ++i) CHECK(run.finite_state.memory(i) == sim.final_state.memory(i));
  }
}

TEST_CASE("per replication errors are indicators") {
  const auto g = build_complete(2);
  const std::vector<double> q{1.0, 0.0, 0.0};
  const auto one = coupling_error(g, kFigure, q, 2.0, 1, 3);
  for (double e : one.per_agent_error) CHECK((e == 0.0 || e == 2.0));

  const auto many = coupling_error(g, kFigure, q, 2.0, 500, 3);
  CHECK(many.max_error > 0.0);
  CHECK(many.max_error <= 2.0);
  CHECK(many.vacuous);
  CHECK(many.max_error <= many.theoretical_bound);
  CHECK(many.replications == 500);
  CHECK(many.horizon == 2.0);
  const auto it = std::max_element(many.per_agent_error.begin(), many.per_agent_error.end());
  CHECK(many.max_error == *it);
  CHECK(many.argmax_agent == static_cast<std::size_t>(it - many.per_agent_error.begin()));
}

TEST_CASE("parallel replication is order independent") {
  const auto g = build_complete(12);
  const std::vector<double> q{0.6, 0.2, 0.2};
  const auto serial = coupling_error(g, kFigure, q, 1.0, 40, 8, 1);
  const auto threaded = coupling_error(g, kFigure, q, 1.0, 40, 8, 3);
  CHECK(serial.per_agent_error == threaded.per_agent_error);
}

TEST_CASE("theoretical bound arithmetic") {
  // 16*5*1*2*1*3/3 * exp(48*5*1*3*1) = 160 e^720.
  CHECK(log_coupling_bound(1.0, 2, 1.0, 9) == doctest::Approx(std::log(160.0) + 720.0).epsilon(1e-14));
  CHECK(log_coupling_bound(1.0, 2, 1.0, 16) < log_coupling_bound(1.0, 2, 1.0, 9));
  CHECK(log_coupling_bound(0.5, 1, 0.01, 4) == doctest::Approx(std::log(16 * 4.5 * 0.5 * 0.01 * 2 / 2.0) + 48 * 4.5 * 0.5 * 2 * 0.01));
}

TEST_CASE("coupling input validation") {
  const auto g = build_complete(4);
  CHECK_THROWS_AS(simulate_coupled(g, kFigure, std::vector<double>{0.5, 0.5}, 1.0, 0), ValidationError);
  CHECK_THROWS_AS(simulate_coupled(g, kFigure, std::vector<double>{1.0, 0.0, 0.0}, 0.0, 0), ValidationError);
  CHECK_THROWS_AS(coupling_error(g, kFigure, std::vector<double>{1.0, 0.0, 0.0}, 1.0, 0, 0), ValidationError);
}
