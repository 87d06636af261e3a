#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sbs/analysis.hpp"
#include "sbs/coupling.hpp"
#include "sbs/dynamics.hpp"
#include "sbs/error.hpp"
#include "sbs/graph.hpp"
#include "sbs/meanfield.hpp"

namespace py = pybind11;
using namespace sbs;

namespace {

InitialCondition make_init(const std::string& kind, const std::vector<double>& values) {
  if (kind == "iid") return IidInit{values};
  std::vector<std::size_t> ints;
  for (double v : values) {
    if (v < 0.0 || v != std::floor(v)) throw ValidationError("init: expected non-negative integers");
    ints.push_back(static_cast<std::size_t>(v));
  }
  if (kind == "counts") return CountsInit{ints};
  if (kind == "explicit") return ExplicitInit{{ints.begin(), ints.end()}};
  throw ValidationError("init: kind must be iid, counts or explicit");
}

py::dict sim_to_dict(const SimOutput& out) {
  const std::size_t rows = out.trajectory.size();
  const std::size_t cols = out.final_state.num_arms() + 1;
  py::array_t<double> times(static_cast<py::ssize_t>(rows));
  py::array_t<double> fractions({static_cast<py::ssize_t>(rows), static_cast<py::ssize_t>(cols)});
  auto t = times.mutable_unchecked<1>();
  auto y = fractions.mutable_unchecked<2>();
  const double n = static_cast<double>(out.final_state.num_agents());
  for (std::size_t r = 0; r < rows; ++r) {
    t(r) = out.trajectory[r].time;
    for (std::size_t k = 0; k < cols; ++k) y(r, k) = static_cast<double>(out.trajectory[r].occupancy[k]) / n;
  }
  std::vector<double> jump_times;
  std::vector<int> directions;
  for (const auto& j : out.jump_chain) {
    jump_times.push_back(j.time);
    directions.push_back(j.direction);
  }
  py::dict d;
  d["t"] = times;
  d["Y"] = fractions;
  d["jump_times"] = jump_times;
  d["jump_directions"] = directions;
  d["status"] = std::string(to_string(out.absorption.status));
  d["absorption_time"] = out.absorption.absorption_time;
  d["final_memories"] = std::vector<Memory>(out.final_state.memories().begin(), out.final_state.memories().end());
  d["event_count"] = out.event_count;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bandit learning dynamics on graphs: simulator, mean-field ODE and analysis helpers";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<GenerationError>(m, "GenerationError", PyExc_RuntimeError);

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init([](std::vector<double> p, double mu, double lam) {
             ModelParams params{std::move(p), mu, lam};
             params.validate();
             return params;
           }),
           py::arg("p"), py::arg("mu") = 0.0, py::arg("lam") = 1.0)
      .def_readonly("p", &ModelParams::rewards)
      .def_readonly("mu", &ModelParams::exploration)
      .def_readonly("lam", &ModelParams::clock_rate)
      .def_property_readonly("num_arms", &ModelParams::num_arms);

  py::class_<GraphTopology>(m, "Graph")
      .def_property_readonly("num_agents", &GraphTopology::num_agents)
      .def_property_readonly("num_edges", &GraphTopology::num_edges)
      .def_property_readonly("min_degree", &GraphTopology::min_degree)
      .def("neighbors",
           [](const GraphTopology& g, AgentId i) {
             if (i >= g.num_agents()) throw py::index_error("agent out of range");
             return std::vector<AgentId>(g.neighbors(i).begin(), g.neighbors(i).end());
           })
      .def("edges", &GraphTopology::edges)
      .def("is_connected", [](const GraphTopology& g) { return is_connected(g); })
      .def("is_regular", [](const GraphTopology& g) { return is_regular(g); })
      .def("is_doubly_stochastic", [](const GraphTopology& g, double tol) { return is_doubly_stochastic(g, tol); },
           py::arg("tol") = kDoublyStochasticTol)
      .def("__eq__", [](const GraphTopology& a, const GraphTopology& b) { return a == b; });

  m.def("complete", &build_complete, py::arg("n"));
  m.def("cycle", &build_cycle, py::arg("n"));
  m.def("random_regular", &build_random_regular, py::arg("n"), py::arg("d"), py::arg("seed"),
        py::arg("require_connected") = false);
  m.def("disjoint_cliques", &build_disjoint_cliques, py::arg("components"), py::arg("size"));
  m.def("from_edges", [](std::size_t n, const std::vector<Edge>& edges) { return from_edge_list(n, edges); },
        py::arg("n"), py::arg("edges"));

  m.def(
      "simulate",
      [](const GraphTopology& g, const ModelParams& params, const std::string& init_kind,
         const std::vector<double>& init_values, double t_max, std::uint64_t seed, const std::string& backend,
         double dt, bool record_jumps, bool stop_on_absorption) {
        RunConfig cfg;
        cfg.t_max = t_max;
        cfg.seed = seed;
        if (backend == "behavioral") {
          cfg.backend = Backend::Behavioral;
        } else if (backend == "pathwise") {
          cfg.backend = Backend::Pathwise;
        } else {
          throw ValidationError("backend must be behavioral or pathwise");
        }
        cfg.record_grid = dt;
        cfg.record_jumps = record_jumps;
        cfg.stop_on_absorption = stop_on_absorption;
        const InitialCondition init = make_init(init_kind, init_values);
        const SimOutput out = [&] {
          py::gil_scoped_release release;
          return simulate(g, params, init, cfg);
        }();
        return sim_to_dict(out);
      },
      py::arg("graph"), py::arg("params"), py::arg("init_kind"), py::arg("init"), py::arg("t_max"), py::arg("seed"),
      py::arg("backend") = "behavioral", py::arg("dt") = 0.1, py::arg("record_jumps") = false,
      py::arg("stop_on_absorption") = false);

  m.def(
      "integrate",
      [](const std::vector<double>& y0, const ModelParams& params, double t_end, double h) {
        const OdeTrajectory traj = integrate(y0, params, t_end, h);
        py::array_t<double> times(static_cast<py::ssize_t>(traj.size()));
        py::array_t<double> values({static_cast<py::ssize_t>(traj.size()), static_cast<py::ssize_t>(y0.size())});
        auto t = times.mutable_unchecked<1>();
        auto v = values.mutable_unchecked<2>();
        for (std::size_t i = 0; i < traj.size(); ++i) {
          t(i) = traj.time(i);
          for (std::size_t k = 0; k < y0.size(); ++k) v(i, k) = traj.value(i)[k];
        }
        return py::make_tuple(times, values);
      },
      py::arg("y0"), py::arg("params"), py::arg("t_end"), py::arg("h") = kDefaultOdeStep);

  m.def("drift", [](const std::vector<double>& y, const ModelParams& p) { return drift(y, p); }, py::arg("y"),
        py::arg("params"));

  m.def(
      "convergence_bound",
      [](const ModelParams& params, const std::vector<double>& y0, double c) {
        const ConvergenceBound b = convergence_bound(params, y0, c);
        py::dict d;
        d["R"] = b.rate;
        d["t_bar_c"] = b.delay;
        d["branch"] = b.branch == BoundBranch::PositiveStart ? "PositiveStart" : "ZeroStart";
        d["lower_bound_y1"] = py::cpp_function([b](double t) { return b.lower_bound_y1(t); });
        d["upper_bound_y0"] = py::cpp_function([b](double t) { return b.upper_bound_y0(t); });
        return d;
      },
      py::arg("params"), py::arg("y0"), py::arg("c") = 0.5);

  m.def(
      "gambler_ruin",
      [](double p, std::size_t z0, std::size_t n) {
        const auto r = gambler_ruin_success(p, z0, n);
        return py::make_tuple(r.exact, r.paper_bound);
      },
      py::arg("p"), py::arg("z0"), py::arg("n"));

  m.def(
      "wilson_interval",
      [](std::size_t successes, std::size_t trials) {
        const auto ci = wilson_interval(successes, trials);
        return py::make_tuple(ci.lo, ci.hi);
      },
      py::arg("successes"), py::arg("trials"));

  m.def(
      "estimate_learnability",
      [](const GraphTopology& g, const ModelParams& params, const std::vector<std::size_t>& counts,
         std::size_t replications, double t_max, std::uint64_t seed, std::size_t jobs) {
        LearnabilityOptions opts;
        opts.jobs = jobs;
        LearnabilityEstimate est;
        {
          py::gil_scoped_release release;
          est = estimate_learnability(g, params, CountsInit{counts}, replications, t_max, seed, opts);
        }
        py::dict d;
        d["estimate"] = est.point_estimate;
        d["ci"] = py::make_tuple(est.wilson_ci_95.lo, est.wilson_ci_95.hi);
        d["successes"] = est.successes;
        d["failures"] = est.failures;
        d["timeouts"] = est.timeouts;
        d["paper_bound"] = est.paper_lower_bound;
        return d;
      },
      py::arg("graph"), py::arg("params"), py::arg("counts"), py::arg("replications"), py::arg("t_max"),
      py::arg("seed"), py::arg("jobs") = 1);

  m.def(
      "coupling_error",
      [](const GraphTopology& g, const ModelParams& params, const std::vector<double>& q, double horizon,
         std::size_t replications, std::uint64_t seed, std::size_t jobs) {
        CouplingReport r;
        {
          py::gil_scoped_release release;
          r = coupling_error(g, params, q, horizon, replications, seed, jobs);
        }
        py::dict d;
        d["per_agent_error"] = r.per_agent_error;
        d["max_error"] = r.max_error;
        d["max_error_se"] = r.max_error_se;
        d["log_bound"] = r.log_theoretical_bound;
        d["vacuous"] = r.vacuous;
        return d;
      },
      py::arg("graph"), py::arg("params"), py::arg("q"), py::arg("horizon"), py::arg("replications"),
      py::arg("seed"), py::arg("jobs") = 1);
}
