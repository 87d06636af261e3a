#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "sbs/analysis.hpp"
#include "sbs/error.hpp"
#include "sbs/graph.hpp"
#include "sbs/rng.hpp"

using namespace sbs;

namespace {

// Absorption probability at n by a dense solve of the (n+1)-state chain.
Eigen::VectorXd ruin_by_linear_solve(double p, std::size_t n) {
  const auto size = static_cast<Eigen::Index>(n + 1);
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(size, size);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(size);
  b(size - 1) = 1.0;
  for (Eigen::Index z = 1; z < size - 1; ++z) {
    A(z, z + 1) = -p;
    A(z, z - 1) = -(1.0 - p);
  }
  return A.partialPivLu().solve(b);
}

}  // namespace

TEST_CASE("wilson interval") {
  const auto ci = wilson_interval(50, 100);
  CHECK(ci.contains(0.5));
  CHECK(ci.lo == doctest::Approx(0.4038315).epsilon(1e-6));
  CHECK(ci.hi == doctest::Approx(0.5961685).epsilon(1e-6));
  const auto all = wilson_interval(20, 20);
  CHECK(all.hi == doctest::Approx(1.0));
  CHECK(all.lo < 1.0);
  CHECK_THROWS_AS(wilson_interval(3, 2), ValidationError);
  const auto empty = wilson_interval(0, 0);
  CHECK(empty.lo == 0.0);
  CHECK(empty.hi == 1.0);
}

TEST_CASE("gambler's ruin examples") {
  CHECK(gambler_ruin_success(0.5, 5, 10).exact == doctest::Approx(0.5));
  CHECK(gambler_ruin_success(2.0 / 3.0, 1, 2).exact == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(gambler_ruin_success(2.0 / 3.0, 10, 20).paper_bound == doctest::Approx(0.9990234375).epsilon(1e-14));
  CHECK(gambler_ruin_success(RandomWalkModel{0.7, 4, 0}).exact == 0.0);
  CHECK(gambler_ruin_success(0.7, 4, 4).exact == 1.0);
  CHECK_THROWS_AS(gambler_ruin_success(0.0, 1, 2), ValidationError);
  CHECK_THROWS_AS(gambler_ruin_success(1.0, 1, 2), ValidationError);
  CHECK_THROWS_AS(gambler_ruin_success(0.6, 3, 2), ValidationError);
  CHECK_THROWS_AS(gambler_ruin_success(0.6, 0, 0), ValidationError);
}

TEST_CASE("property: closed form agrees with the linear solve") {
  for (double p = 0.05; p < 0.96; p += 0.05) {
    for (std::size_t n = 1; n <= 50; ++n) {
      const auto oracle = ruin_by_linear_solve(p, n);
      for (std::size_t z0 = 0; z0 <= n; ++z0) {
        const auto r = gambler_ruin_success(p, z0, n);
        REQUIRE(std::abs(r.exact - oracle(static_cast<Eigen::Index>(z0))) <= 1e-12);
      }
    }
  }
}

TEST_CASE("property: exact success dominates the paper bound") {
  Rng rng(41);
  for (int trial = 0; trial < 1000; ++trial) {
    const double p = 0.5 + 0.4999 * rng.uniform01() + 1e-6;
    const std::size_t n = 1 + rng.uniform_index(200);
    const std::size_t z0 = rng.uniform_index(n + 1);
    const auto r = gambler_ruin_success(p, z0, n);
    REQUIRE(r.exact >= r.paper_bound - 1e-15);
    REQUIRE(r.exact >= 0.0);
    REQUIRE(r.exact <= 1.0);
  }
}

TEST_CASE("learnability bounds") {
  const ModelParams p{{0.8, 0.4}, 0.0, 1.0};
  CHECK(*learnability_bound(build_complete(20), p, 10) == doctest::Approx(1.0 - std::pow(0.5, 10)));
  CHECK(*jump_up_bound(build_cycle(10), p) == doctest::Approx(2.0 / 3.0));

  // A graph that is neither regular nor doubly stochastic gets no bound.
  const std::vector<Edge> path{{0, 1}, {1, 2}};
  CHECK_FALSE(learnability_bound(from_edge_list(3, path), p, 1).has_value());
  CHECK_FALSE(jump_up_bound(from_edge_list(3, path), p).has_value());

  // Disconnected graphs and an empty start carry no guarantee.
  CHECK_FALSE(learnability_bound(build_disjoint_cliques(2, 3), p, 1).has_value());
  CHECK_FALSE(learnability_bound(build_complete(5), p, 0).has_value());
  const ModelParams single{{0.8, 0.0}, 0.0, 1.0};
  CHECK(learnability_bound(build_complete(5), single, 1) == std::optional<double>(1.0));
}

TEST_CASE("learnability estimation") {
  const ModelParams p{{0.8, 0.4}, 0.0, 1.0};
  const auto trivial = estimate_learnability(build_complete(2), p, ExplicitInit{{1, 1}}, 10, 5.0, 1);
  CHECK(trivial.point_estimate == 1.0);
  CHECK(trivial.successes == 10);

  const auto est = estimate_learnability(build_complete(10), p, CountsInit{{0, 5, 5}}, 200, 200.0, 2);
  CHECK(est.successes + est.failures + est.timeouts == 200);
  CHECK(est.wilson_ci_95.contains(est.point_estimate));
  CHECK(est.paper_lower_bound.has_value());

  // Interval width scales like 1/sqrt(replications).
  const auto small = estimate_learnability(build_complete(6), p, CountsInit{{0, 2, 4}}, 100, 200.0, 3);
  const auto large = estimate_learnability(build_complete(6), p, CountsInit{{0, 2, 4}}, 1600, 200.0, 3);
  const double ratio = small.wilson_ci_95.half_width() / large.wilson_ci_95.half_width();
  CHECK(ratio > 2.5);
  CHECK(ratio < 6.0);

  const ModelParams explore{{0.8, 0.4}, 0.2, 1.0};
  const auto split =
      estimate_learnability(build_disjoint_cliques(3, 4), explore, IidInit{{0.2, 0.4, 0.4}}, 50, 200.0, 4);
  CHECK(split.failures > 0);
  CHECK_FALSE(split.warnings.empty());
}

TEST_CASE("jump chain statistics") {
  const ModelParams p{{0.8, 0.4}, 0.0, 1.0};
  LearnabilityOptions opts;
  opts.record_jumps = true;
  opts.keep_outputs = true;
  const auto g = build_complete(20);
  const auto est = estimate_learnability(g, p, CountsInit{{0, 10, 10}}, 100, 200.0, 5, opts);
  const auto stats = jump_chain_stats(est.outputs, g, p);
  CHECK(stats.num_jumps > 1000);
  REQUIRE(stats.p_star_bound.has_value());
  CHECK(*stats.p_star_bound == doctest::Approx(2.0 / 3.0));
  CHECK(stats.up_fraction >= 2.0 / 3.0 - stats.wilson_ci_95.half_width());
  for (const auto& out : est.outputs)
    if (out.absorption.status == AbsorptionStatus::AbsorbedSuccess) CHECK(reconstruct_best_count(out) == 20);

  std::vector<SimOutput> none;
  CHECK_THROWS_AS(jump_chain_stats(none, g, p), ValidationError);
}

TEST_CASE("concentration checks") {
  const ModelParams p{{0.8, 0.4}, 0.2, 1.0};
  const auto near_one = initial_wealth_check(build_complete(50), p, 1.0, 0.999, 50, 1);
  CHECK(near_one.empirical == 1.0);
  const auto wealth = initial_wealth_check(build_complete(100), p, 1.0, 0.5, 100, 2);
  CHECK(wealth.threshold == doctest::Approx(0.5 * 0.2 * 0.8 * 100 / (2 * std::exp(1.0))));
  CHECK(wealth.empirical >= wealth.paper_bound);
  const ModelParams still{{0.8, 0.4}, 0.0, 1.0};
  CHECK_THROWS_AS(initial_wealth_check(build_complete(10), still, 1.0, 0.5, 10, 1), ValidationError);

  const std::vector<double> q{0.5, 0.5, 0.0};
  const auto mass = iid_mass_check(100, q, 0.2, 500, 3);
  CHECK(mass.threshold == doctest::Approx(80.0));
  CHECK(mass.paper_bound == doctest::Approx(1.0 - std::exp(-8.0)));
  CHECK(mass.empirical == 1.0);
}

TEST_CASE("example scenarios") {
  const auto four = scenario_example1(4);
  CHECK(std::get<ExplicitInit>(four.init).memories == std::vector<Memory>{1, 1, 2, 2});
  for (std::size_t n : {6, 8, 100, 250}) {
    const auto s = scenario_example1(n);
    CHECK(count_boundary_agents(s.graph, std::get<ExplicitInit>(s.init).memories) == 4);
    CHECK(s.graph == build_cycle(n));
  }
  CHECK_THROWS_AS(scenario_example1(7), ValidationError);
  CHECK_THROWS_AS(scenario_example1(2), ValidationError);

  const auto big = scenario_example2(10000);
  CHECK(big.component_size == 2);
  CHECK(big.num_components == 5000);
  CHECK(big.num_components * big.component_size + big.dropped_agents == 10000);
  const auto odd = scenario_example2(2001);
  CHECK(odd.dropped_agents == 1);
  CHECK(odd.graph.num_agents() == 2000);
  CHECK_THROWS_AS(scenario_example2(100), ValidationError);

  const auto cliques = build_disjoint_cliques(2, 2);
  CHECK(has_component_stuck_on_inferior_arm(cliques, SystemState(2, {1, 1, 2, 2})));
  CHECK_FALSE(has_component_stuck_on_inferior_arm(cliques, SystemState(2, {1, 1, 2, 0})));
}
