#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dynrcm/config.hpp"
#include "dynrcm/kernel.hpp"
#include "dynrcm/runner.hpp"
#include "dynrcm/verify.hpp"
#include "dynrcm/voter.hpp"

namespace py = pybind11;
using namespace dynrcm;
using nlohmann::json;

namespace {

// Python objects cross the boundary as JSON text; the module is small enough
// that the round trip does not matter.
py::object to_py(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

json from_py(const py::handle& o) {
  return json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

Vertex to_vertex(const std::vector<int>& c) {
  if (c.empty() || c.size() > 2) throw std::domain_error("vertex needs one or two coordinates");
  return c.size() == 1 ? Vertex{c[0]} : Vertex{c[0], c[1]};
}

std::vector<int> from_vertex(const Lattice& lat, const Vertex& v) {
  return std::vector<int>(v.coords.begin(), v.coords.begin() + lat.dimension());
}

RandomSeed seed_of(std::uint64_t master) { return RandomSeed{master, {}}; }

EnvironmentSpec spec_of(const py::dict& env, const Lattice& lat, std::pair<double, double> window) {
  EnvironmentSpec spec{environment_from_json(from_py(env)), lat, TimeWindow{window.first, window.second}};
  spec.validate();
  return spec;
}

VerifyOptions options_of(int threads) {
  VerifyOptions o;
  o.threads = threads;
  return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Walks in dynamic random conductance environments";
  m.attr("__version__") = kVersion;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<Lattice>(m, "Lattice")
      .def_static("torus", &Lattice::torus, py::arg("dimension"), py::arg("side"))
      .def_static("box", &Lattice::box, py::arg("dimension"), py::arg("radius"))
      .def_property_readonly("dimension", &Lattice::dimension)
      .def_property_readonly("side_length", &Lattice::side_length)
      .def_property_readonly("is_torus", &Lattice::is_torus)
      .def_property_readonly("num_vertices", &Lattice::num_vertices)
      .def_property_readonly("num_edges", &Lattice::num_edges)
      .def("vertex", [](const Lattice& l, VertexId id) { return from_vertex(l, l.vertex(id)); })
      .def("vertex_id", [](const Lattice& l, const std::vector<int>& c) { return l.vertex_id(to_vertex(c)); })
      .def("edge", [](const Lattice& l, EdgeId e) {
        return std::make_pair(from_vertex(l, l.edge(e).from), from_vertex(l, l.edge(e).to));
      })
      .def("__eq__", [](const Lattice& a, const Lattice& b) { return a == b; })
      .def("__repr__", &Lattice::describe);

  py::class_<ConductanceTrajectory>(m, "Trajectory")
      .def_property_readonly("lattice", &ConductanceTrajectory::lattice)
      .def_property_readonly("window",
                             [](const ConductanceTrajectory& t) {
                               return std::make_pair(t.window().start, t.window().end);
                             })
      .def("value", &ConductanceTrajectory::value, py::arg("edge"), py::arg("t"))
      .def("total_conductance", &ConductanceTrajectory::total_conductance, py::arg("vertex"), py::arg("t"))
      .def("breakpoint_count", &ConductanceTrajectory::breakpoint_count)
      .def("reversed", [](const ConductanceTrajectory& t) { return reverse_environment(t); })
      .def("to_dict", [](const ConductanceTrajectory& t) { return to_py(to_json(t)); })
      .def_static("from_dict", [](const py::dict& d) { return trajectory_from_json(from_py(d)); });

  m.def(
      "sample_environment",
      [](const py::dict& env, const Lattice& lat, std::pair<double, double> window, std::uint64_t seed) {
        return sample_environment(spec_of(env, lat, window), seed_of(seed));
      },
      py::arg("environment"), py::arg("lattice"), py::arg("window"), py::arg("seed"));

  m.def(
      "transition_kernel",
      [](const ConductanceTrajectory& traj, double s, double t, double tol) {
        KernelMatrix k = transition_kernel(traj, s, t, tol);
        return std::make_pair(std::move(k.entries), k.tolerance);
      },
      py::arg("trajectory"), py::arg("s"), py::arg("t"), py::arg("tol") = kDefaultKernelTolerance,
      "Returns (matrix, truncation bound).");

  m.def(
      "backward_collision_sum",
      [](const ConductanceTrajectory& traj, const std::vector<int>& origin, int max_m, double tol) {
        return backward_collision_sum(traj, to_vertex(origin), max_m, tol);
      },
      py::arg("trajectory"), py::arg("origin"), py::arg("max_m"), py::arg("tol") = kDefaultKernelTolerance);

  m.def(
      "sample_walk",
      [](const ConductanceTrajectory& traj, const std::vector<int>& start, double start_time, std::uint64_t seed) {
        TrajectorySource source(traj);
        return to_py(to_json(sample_walk(source, to_vertex(start), start_time, seed_of(seed))));
      },
      py::arg("trajectory"), py::arg("start"), py::arg("start_time"), py::arg("seed"));

  m.def(
      "infinitesimal_norm",
      [](const py::dict& env, int dimension, int p) {
        return infinitesimal_norm(environment_from_json(from_py(env)), dimension, p).value;
      },
      py::arg("environment"), py::arg("dimension"), py::arg("p"));

  m.def("stirling2", &stirling2, py::arg("p"), py::arg("l"));

  m.def(
      "moment_bound",
      [](int p, double length, const py::dict& env, int dimension) {
        const EnvironmentKind kind = environment_from_json(from_py(env));
        std::vector<EnvNorm> norms;
        for (int l = 1; l <= p; ++l) norms.push_back(infinitesimal_norm(kind, dimension, l));
        return moment_bound(p, length, norms);
      },
      py::arg("p"), py::arg("length"), py::arg("environment"), py::arg("dimension"));

  m.def(
      "check_moment_bound",
      [](const py::dict& env, const Lattice& lat, int p, double b, int replicas, std::uint64_t seed, int threads) {
        return to_py(to_json(
            check_moment_bound(spec_of(env, lat, {0.0, b}), p, b, replicas, seed_of(seed), options_of(threads))));
      },
      py::arg("environment"), py::arg("lattice"), py::arg("p"), py::arg("b"), py::arg("replicas"), py::arg("seed"),
      py::arg("threads") = 1);

  m.def(
      "check_markov_type",
      [](const py::dict& env, const Lattice& lat, double t, int replicas, std::uint64_t seed, int threads,
         double constant) {
        return to_py(to_json(check_markov_type(spec_of(env, lat, {-t, t}), t, replicas, seed_of(seed),
                                               options_of(threads), constant)));
      },
      py::arg("environment"), py::arg("lattice"), py::arg("t"), py::arg("replicas"), py::arg("seed"),
      py::arg("threads") = 1, py::arg("constant") = 25.0);

  m.def(
      "check_censored_stationarity",
      [](const py::dict& env, int dimension, int k, const std::vector<double>& times, int replicas,
         std::uint64_t seed, bool origin_start, int threads) {
        return to_py(to_json(check_censored_stationarity(spec_of(env, Lattice::box(dimension, k), {0.0, 1.0}), k,
                                                         times, replicas, seed_of(seed), options_of(threads),
                                                         origin_start ? StartLaw::Origin : StartLaw::Uniform)));
      },
      py::arg("environment"), py::arg("dimension"), py::arg("k"), py::arg("times"), py::arg("replicas"),
      py::arg("seed"), py::arg("origin_start") = false, py::arg("threads") = 1);

  m.def(
      "collision_growth",
      [](const py::dict& env, const Lattice& lat, const std::vector<int>& x, const std::vector<int>& y,
         const std::vector<double>& horizons, int replicas, std::uint64_t seed, int threads) {
        return to_py(to_json(collision_growth(spec_of(env, lat, {0.0, 1.0}), {to_vertex(x), to_vertex(y)}, horizons,
                                              replicas, seed_of(seed), options_of(threads))));
      },
      py::arg("environment"), py::arg("lattice"), py::arg("x"), py::arg("y"), py::arg("horizons"),
      py::arg("replicas"), py::arg("seed"), py::arg("threads") = 1);

  m.def(
      "backward_sum_divergence",
      [](const py::dict& env, const Lattice& lat, const std::vector<int>& m_list, int env_replicas,
         std::uint64_t seed, int fit_from, int fit_to, int threads) {
        return to_py(to_json(backward_sum_divergence(spec_of(env, lat, {0.0, 1.0}), m_list, env_replicas,
                                                     seed_of(seed), options_of(threads), fit_from, fit_to)));
      },
      py::arg("environment"), py::arg("lattice"), py::arg("m_list"), py::arg("env_replicas"), py::arg("seed"),
      py::arg("fit_from") = 10, py::arg("fit_to") = 0, py::arg("threads") = 1);

  m.def(
      "duality_check",
      [](const py::dict& env, const Lattice& lat, const std::vector<int>& site, double t, int replicas,
         std::uint64_t seed, int threads) {
        return to_py(to_json(duality_check(spec_of(env, lat, {0.0, t}), OpinionField::half_half(lat),
                                           to_vertex(site), t, replicas, seed_of(seed), options_of(threads))));
      },
      py::arg("environment"), py::arg("lattice"), py::arg("site"), py::arg("t"), py::arg("replicas"),
      py::arg("seed"), py::arg("threads") = 1, "Half/half initial labels.");

  m.def(
      "consensus_fraction",
      [](const py::dict& env, const Lattice& lat, double horizon, int replicas, std::uint64_t seed, int threads) {
        return to_py(
            to_json(consensus_fraction(spec_of(env, lat, {0.0, horizon}), horizon, replicas, seed_of(seed), threads)));
      },
      py::arg("environment"), py::arg("lattice"), py::arg("horizon"), py::arg("replicas"), py::arg("seed"),
      py::arg("threads") = 1);

  m.def(
      "validate_config", [](const py::dict& config) { return to_py(to_json(parse_config(from_py(config)))); },
      py::arg("config"), "Strict parse; returns the normalized config or raises ConfigError.");

  m.def(
      "run_experiment",
      [](const py::dict& config, bool write_outputs) {
        const RunOutcome out = [&] {
          const ExperimentConfig c = parse_config(from_py(config));
          py::gil_scoped_release release;
          return run_experiment(c, write_outputs);
        }();
        py::dict d;
        d["reports"] = to_py(reports_to_json(out.reports));
        d["artifacts"] = out.artifacts;
        d["passed"] = out.passed;
        d["manifest"] = to_py(out.manifest);
        return d;
      },
      py::arg("config"), py::arg("write_outputs") = false);
}
