#include "dynrcm/config.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

namespace dynrcm {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) { throw ConfigError(where + ": " + what); }

void expect_object(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
}

/// Rejects keys outside `allowed` and reports missing `required` keys.
void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed,
                const std::set<std::string>& required) {
  expect_object(j, where);
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) fail(where, "unknown field '" + key + "'");
  }
  for (const std::string& key : required) {
    if (!j.contains(key)) fail(where, "missing required field '" + key + "'");
  }
}

double get_number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(where, "expected a finite number");
  return v;
}

long long get_integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<long long>();
}

int get_int(const json& j, const std::string& where, long long lo, long long hi) {
  const long long v = get_integer(j, where);
  if (v < lo || v > hi) fail(where, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(v);
}

std::string get_string(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

bool get_bool(const json& j, const std::string& where) {
  if (!j.is_boolean()) fail(where, "expected a boolean");
  return j.get<bool>();
}

std::vector<double> get_numbers(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a non-empty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_number(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

void check_increasing(const std::vector<double>& v, const std::string& where, bool positive) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (positive && !(v[i] > 0.0)) fail(where, "values must be > 0");
    if (i > 0 && !(v[i] > v[i - 1])) fail(where, "values must increase strictly");
  }
}

void check_vertex(const json& j, const std::string& where, int dimension) {
  if (!j.is_array() || static_cast<int>(j.size()) != dimension) {
    fail(where, "expected an array of " + std::to_string(dimension) + " integers");
  }
  for (std::size_t i = 0; i < j.size(); ++i) get_integer(j[i], where + "[" + std::to_string(i) + "]");
}

Lattice parse_lattice(const json& j, const std::string& where) {
  check_keys(j, where, {"dimension", "mode", "side_length"}, {"dimension", "mode", "side_length"});
  const int d = get_int(j["dimension"], where + ".dimension", 1, 2);
  const std::string mode = get_string(j["mode"], where + ".mode");
  if (mode != "torus" && mode != "box") fail(where + ".mode", "expected 'torus' or 'box'");
  const int side = get_int(j["side_length"], where + ".side_length", 0, 1 << 20);
  try {
    return Lattice(d, mode == "torus" ? LatticeMode::Torus : LatticeMode::CensoredBox, side);
  } catch (const std::exception& e) {
    fail(where, e.what());
  }
}

TimeWindow parse_window(const json& j, const std::string& where) {
  check_keys(j, where, {"start", "end"}, {"start", "end"});
  const TimeWindow w{get_number(j["start"], where + ".start"), get_number(j["end"], where + ".end")};
  if (!(w.start < w.end)) fail(where, "start must be < end");
  return w;
}

Tolerances parse_tolerances(const json& j, const std::string& where) {
  check_keys(j, where, {"kernel", "jump_cap", "chi_square_alpha"}, {});
  Tolerances t;
  if (j.contains("kernel")) {
    t.kernel = get_number(j["kernel"], where + ".kernel");
    if (!(t.kernel > 0.0)) fail(where + ".kernel", "must be > 0");
  }
  if (j.contains("jump_cap")) {
    const long long cap = get_integer(j["jump_cap"], where + ".jump_cap");
    if (cap < 1) fail(where + ".jump_cap", "must be >= 1");
    t.jump_cap = static_cast<std::size_t>(cap);
  }
  if (j.contains("chi_square_alpha")) {
    t.chi_square_alpha = get_number(j["chi_square_alpha"], where + ".chi_square_alpha");
    if (!(t.chi_square_alpha > 0.0 && t.chi_square_alpha < 1.0)) fail(where + ".chi_square_alpha", "must lie in (0, 1)");
  }
  return t;
}

struct Field {
  enum Type { Number, Integer, Bool, String, Numbers, Integers, VertexArray, VertexPair } type;
  bool required = false;
};

using Schema = std::map<std::string, Field>;

void check_params(const json& j, const std::string& where, const Schema& schema, int dimension) {
  std::set<std::string> allowed;
  std::set<std::string> required;
  for (const auto& [key, field] : schema) {
    allowed.insert(key);
    if (field.required) required.insert(key);
  }
  check_keys(j, where, allowed, required);
  for (const auto& [key, value] : j.items()) {
    const std::string at = where + "." + key;
    switch (schema.at(key).type) {
      case Field::Number: get_number(value, at); break;
      case Field::Integer: get_integer(value, at); break;
      case Field::Bool: get_bool(value, at); break;
      case Field::String: get_string(value, at); break;
      case Field::Numbers: get_numbers(value, at); break;
      case Field::Integers:
        if (!value.is_array() || value.empty()) fail(at, "expected a non-empty array of integers");
        for (std::size_t i = 0; i < value.size(); ++i) get_integer(value[i], at + "[" + std::to_string(i) + "]");
        break;
      case Field::VertexArray: check_vertex(value, at, dimension); break;
      case Field::VertexPair:
        if (!value.is_array() || value.size() != 2) fail(at, "expected two vertices");
        check_vertex(value[0], at + "[0]", dimension);
        check_vertex(value[1], at + "[1]", dimension);
        break;
    }
  }
}

const std::map<std::string, Schema>& check_schemas() {
  static const std::map<std::string, Schema> schemas{
      {"moment_bound", {{"p", {Field::Integer, true}}, {"b", {Field::Number, true}}}},
      {"markov_type", {{"t", {Field::Number, true}}, {"constant", {Field::Number}}}},
      {"censored_stationarity",
       {{"k", {Field::Integer, true}}, {"times", {Field::Numbers, true}}, {"start", {Field::String}}}},
      {"collision_growth", {{"horizons", {Field::Numbers, true}}, {"starts", {Field::VertexPair}}}},
      {"backward_sum",
       {{"m_list", {Field::Integers, true}}, {"fit_from", {Field::Integer}}, {"fit_to", {Field::Integer}}}},
      {"localization_proxy", {{"n", {Field::Integer, true}}, {"K", {Field::Number, true}}}},
  };
  return schemas;
}

const std::map<Experiment, Schema>& experiment_schemas() {
  static const std::map<Experiment, Schema> schemas{
      {Experiment::Simulate,
       {{"start", {Field::VertexArray}},
        {"start_time", {Field::Number}},
        {"forward", {Field::Bool}},
        {"backward", {Field::Bool}}}},
      {Experiment::Kernel,
       {{"s", {Field::Number}},
        {"t", {Field::Number}},
        {"m_list", {Field::Integers}},
        {"mass_transport_m", {Field::Integer}}}},
      {Experiment::Collide, {{"starts", {Field::VertexPair}}}},
      {Experiment::Voter,
       {{"site", {Field::VertexArray}},
        {"t", {Field::Number}},
        {"initial", {Field::String}},
        {"consensus_horizon", {Field::Number}},
        {"consensus_fraction", {Field::Number}},
        {"consensus_replicas", {Field::Integer}}}},
      {Experiment::Verify, {}},
  };
  return schemas;
}

void check_semantics(const std::string& kind, const json& p, const std::string& where) {
  if (kind == "moment_bound") {
    const long long order = p["p"].get<long long>();
    if (order != 1 && order != 2) fail(where + ".p", "must be 1 or 2");
    if (!(p["b"].get<double>() > 0.0)) fail(where + ".b", "must be > 0");
  } else if (kind == "markov_type") {
    if (!(p["t"].get<double>() > 0.0)) fail(where + ".t", "must be > 0");
    if (p.contains("constant") && !(p["constant"].get<double>() > 0.0)) fail(where + ".constant", "must be > 0");
  } else if (kind == "censored_stationarity") {
    if (p["k"].get<long long>() < 1) fail(where + ".k", "must be >= 1");
    for (double t : p["times"].get<std::vector<double>>()) {
      if (!(t >= 0.0)) fail(where + ".times", "times must be >= 0");
    }
    if (p.contains("start")) {
      const std::string s = p["start"].get<std::string>();
      if (s != "uniform" && s != "origin") fail(where + ".start", "expected 'uniform' or 'origin'");
    }
  } else if (kind == "collision_growth") {
    check_increasing(p["horizons"].get<std::vector<double>>(), where + ".horizons", true);
  } else if (kind == "backward_sum") {
    std::vector<double> m;
    for (long long v : p["m_list"].get<std::vector<long long>>()) m.push_back(static_cast<double>(v));
    check_increasing(m, where + ".m_list", true);
  } else if (kind == "localization_proxy") {
    if (p["n"].get<long long>() < 1) fail(where + ".n", "must be >= 1");
    if (!(p["K"].get<double>() > 0.0)) fail(where + ".K", "must be > 0");
  }
}

}  // namespace

std::string experiment_name(Experiment e) {
  switch (e) {
    case Experiment::Simulate: return "simulate";
    case Experiment::Verify: return "verify";
    case Experiment::Kernel: return "kernel";
    case Experiment::Collide: return "collide";
    case Experiment::Voter: return "voter";
  }
  return "simulate";
}

Experiment experiment_from_name(const std::string& name) {
  for (Experiment e : {Experiment::Simulate, Experiment::Verify, Experiment::Kernel, Experiment::Collide,
                       Experiment::Voter}) {
    if (experiment_name(e) == name) return e;
  }
  throw ConfigError("experiment: unknown kind '" + name + "'");
}

const std::vector<std::string>& check_kinds() {
  static const std::vector<std::string> kinds = [] {
    std::vector<std::string> out;
    for (const auto& [k, s] : check_schemas()) out.push_back(k);
    return out;
  }();
  return kinds;
}

nlohmann::json environment_to_json(const EnvironmentKind& kind) {
  struct Visitor {
    json operator()(const StaticEnv& s) const { return {{"kind", "static"}, {"conductance", s.conductance}}; }
    json operator()(const DynamicalPercolation& d) const {
      return {{"kind", "dynamical_percolation"}, {"p", d.p}, {"mu", d.mu}};
    }
    json operator()(const Exclusion& e) const {
      return {{"kind", "exclusion"}, {"density", e.density}, {"hop_rate", e.hop_rate}, {"low", e.low}, {"high", e.high}};
    }
    json operator()(const DeterministicPhase& p) const {
      return {{"kind", "deterministic_phase"}, {"amplitude", p.amplitude}, {"step", p.step}};
    }
  };
  return std::visit(Visitor{}, kind);
}

EnvironmentKind environment_from_json(const nlohmann::json& j) {
  const std::string where = "environment";
  expect_object(j, where);
  if (!j.contains("kind")) fail(where, "missing required field 'kind'");
  const std::string kind = get_string(j["kind"], where + ".kind");
  auto num = [&](const char* key, double fallback) {
    return j.contains(key) ? get_number(j[key], where + "." + key) : fallback;
  };
  EnvironmentKind out;
  if (kind == "static") {
    check_keys(j, where, {"kind", "conductance"}, {});
    out = StaticEnv{num("conductance", 1.0)};
  } else if (kind == "dynamical_percolation") {
    check_keys(j, where, {"kind", "p", "mu"}, {});
    out = DynamicalPercolation{num("p", 0.5), num("mu", 1.0)};
  } else if (kind == "exclusion") {
    check_keys(j, where, {"kind", "density", "hop_rate", "low", "high"}, {});
    out = Exclusion{num("density", 0.5), num("hop_rate", 1.0), num("low", 0.0), num("high", 1.0)};
  } else if (kind == "deterministic_phase") {
    check_keys(j, where, {"kind", "amplitude", "step"}, {});
    out = DeterministicPhase{num("amplitude", 1.0), num("step", 0.01)};
  } else {
    fail(where + ".kind", "unknown environment kind '" + kind + "'");
  }
  try {
    EnvironmentSpec{out, Lattice::torus(1, 2), TimeWindow{0.0, 1.0}}.validate();
  } catch (const std::domain_error& e) {
    fail(where, e.what());
  }
  return out;
}

ExperimentConfig parse_config(const nlohmann::json& j) {
  check_keys(j, "config",
             {"experiment", "lattice", "environment", "window", "horizons", "replicas", "master_seed", "output_dir",
              "tolerances", "threads", "params", "checks"},
             {"experiment", "lattice", "environment", "replicas", "master_seed"});
  ExperimentConfig c;
  c.experiment = experiment_from_name(get_string(j["experiment"], "experiment"));
  c.lattice = parse_lattice(j["lattice"], "lattice");
  c.environment = environment_from_json(j["environment"]);
  if (j.contains("window")) c.window = parse_window(j["window"], "window");
  if (j.contains("horizons")) {
    c.horizons = get_numbers(j["horizons"], "horizons");
    check_increasing(c.horizons, "horizons", true);
  }
  c.replicas = get_int(j["replicas"], "replicas", 1, 1LL << 30);
  if (!j["master_seed"].is_number_unsigned()) fail("master_seed", "expected a non-negative 64-bit integer");
  c.master_seed = j["master_seed"].get<std::uint64_t>();
  if (j.contains("output_dir")) {
    c.output_dir = get_string(j["output_dir"], "output_dir");
    if (c.output_dir.empty()) fail("output_dir", "must not be empty");
  }
  if (j.contains("tolerances")) c.tolerances = parse_tolerances(j["tolerances"], "tolerances");
  if (j.contains("threads")) c.threads = get_int(j["threads"], "threads", 0, 1024);
  const int dim = c.lattice.dimension();
  if (j.contains("params")) c.params = j["params"];
  check_params(c.params, "params", experiment_schemas().at(c.experiment), dim);
  if (c.experiment == Experiment::Collide && c.horizons.empty()) fail("horizons", "collide needs horizons");
  if (c.experiment == Experiment::Voter && !c.lattice.is_torus()) fail("lattice", "the voter model needs a torus");
  if (c.experiment == Experiment::Voter && c.params.contains("initial")) {
    const std::string init = c.params["initial"].get<std::string>();
    if (init != "half" && init != "random" && init != "constant") {
      fail("params.initial", "expected 'half', 'random' or 'constant'");
    }
  }

  if (c.experiment == Experiment::Verify) {
    if (!j.contains("checks") || !j["checks"].is_array() || j["checks"].empty()) {
      fail("checks", "verify needs a non-empty array of checks");
    }
    for (std::size_t i = 0; i < j["checks"].size(); ++i) {
      const json& cj = j["checks"][i];
      const std::string where = "checks[" + std::to_string(i) + "]";
      expect_object(cj, where);
      if (!cj.contains("kind")) fail(where, "missing required field 'kind'");
      CheckConfig check;
      check.kind = get_string(cj["kind"], where + ".kind");
      auto schema = check_schemas().find(check.kind);
      if (schema == check_schemas().end()) fail(where + ".kind", "unknown check kind '" + check.kind + "'");
      json params = json::object();
      for (const auto& [key, value] : cj.items()) {
        if (key == "kind") continue;
        if (key == "name") {
          check.name = get_string(value, where + ".name");
        } else if (key == "lattice") {
          check.lattice = parse_lattice(value, where + ".lattice");
        } else if (key == "environment") {
          check.environment = environment_from_json(value);
        } else if (key == "replicas") {
          check.replicas = get_int(value, where + ".replicas", 1, 1LL << 30);
        } else if (key == "control") {
          check.control = get_bool(value, where + ".control");
        } else {
          params[key] = value;
        }
      }
      const int check_dim = check.lattice ? check.lattice->dimension() : dim;
      check_params(params, where, schema->second, check_dim);
      check_semantics(check.kind, params, where);
      check.params = std::move(params);
      if (check.name.empty()) check.name = check.kind;
      c.checks.push_back(std::move(check));
    }
  } else if (j.contains("checks")) {
    fail("checks", "only the verify experiment takes checks");
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

nlohmann::json to_json(const ExperimentConfig& c) {
  json out{{"experiment", experiment_name(c.experiment)},
           {"lattice", lattice_to_json(c.lattice)},
           {"environment", environment_to_json(c.environment)},
           {"replicas", c.replicas},
           {"master_seed", c.master_seed},
           {"output_dir", c.output_dir},
           {"tolerances",
            {{"kernel", c.tolerances.kernel},
             {"jump_cap", c.tolerances.jump_cap},
             {"chi_square_alpha", c.tolerances.chi_square_alpha}}},
           {"threads", c.threads},
           {"params", c.params}};
  if (c.window) out["window"] = {{"start", c.window->start}, {"end", c.window->end}};
  if (!c.horizons.empty()) out["horizons"] = c.horizons;
  if (c.experiment == Experiment::Verify) {
    json checks = json::array();
    for (const CheckConfig& check : c.checks) {
      json cj = check.params;
      cj["kind"] = check.kind;
      cj["name"] = check.name;
      if (check.lattice) cj["lattice"] = lattice_to_json(*check.lattice);
      if (check.environment) cj["environment"] = environment_to_json(*check.environment);
      if (check.replicas) cj["replicas"] = *check.replicas;
      if (check.control) cj["control"] = true;
      checks.push_back(std::move(cj));
    }
    out["checks"] = std::move(checks);
  }
  return out;
}

}  // namespace dynrcm
