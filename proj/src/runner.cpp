#include "dynrcm/runner.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

#include "dynrcm/collision.hpp"
#include "dynrcm/kernel.hpp"
#include "dynrcm/stats.hpp"
#include "dynrcm/voter.hpp"

namespace dynrcm {

namespace {

using json = nlohmann::json;

/// Collects artifact names and writes them when enabled.
class Sink {
 public:
  Sink(std::filesystem::path dir, bool enabled) : dir_(std::move(dir)), enabled_(enabled) {
    if (enabled_) std::filesystem::create_directories(dir_);
  }

  void text(const std::string& name, const std::string& content) {
    names_.push_back(name);
    if (!enabled_) return;
    std::ofstream out(dir_ / name);
    if (!out) throw std::runtime_error("cannot write " + (dir_ / name).string());
    out << content;
  }

  void json_file(const std::string& name, const json& j) { text(name, j.dump(2) + "\n"); }

  /// For writers that take a path.
  void file(const std::string& name, const std::function<void(const std::string&)>& writer) {
    names_.push_back(name);
    if (enabled_) writer((dir_ / name).string());
  }

  const std::vector<std::string>& names() const { return names_; }

 private:
  std::filesystem::path dir_;
  bool enabled_;
  std::vector<std::string> names_;
};

Vertex vertex_param(const json& params, const char* key, const Vertex& fallback) {
  if (!params.contains(key)) return fallback;
  const auto& v = params[key];
  return v.size() == 1 ? Vertex{v[0].get<int>()} : Vertex{v[0].get<int>(), v[1].get<int>()};
}

std::pair<Vertex, Vertex> starts_param(const json& params, const Lattice& lat) {
  if (!params.contains("starts")) return {lat.origin(), lat.origin()};
  const json& s = params["starts"];
  auto one = [](const json& v) { return v.size() == 1 ? Vertex{v[0].get<int>()} : Vertex{v[0].get<int>(), v[1].get<int>()}; };
  return {one(s[0]), one(s[1])};
}

VerifyOptions verify_options(const ExperimentConfig& c, int threads) {
  return VerifyOptions{threads, c.tolerances.jump_cap, c.tolerances.kernel, c.tolerances.chi_square_alpha};
}

TestReport simple_report(const std::string& name, ReportKind kind, double empirical, double bound, double se,
                         long replicas, json metadata) {
  TestReport r;
  r.name = name;
  r.kind = kind;
  r.empirical_value = empirical;
  r.bound_or_target = bound;
  r.standard_error = se;
  r.replicas = replicas;
  r.metadata = std::move(metadata);
  r.decide();
  return r;
}

json seed_json(const RandomSeed& seed) { return {{"master", seed.master}, {"path", seed.path}}; }

std::string vertex_text(const Lattice& lat, VertexId v) { return "\"" + to_string(lat.vertex(v)) + "\""; }

std::vector<TestReport> run_simulate(const ExperimentConfig& c, const RandomSeed& root, int threads, Sink& sink) {
  const TimeWindow window = c.window.value_or(TimeWindow{0.0, 1.0});
  const EnvironmentSpec spec{c.environment, c.lattice, window};
  spec.validate();
  const Vertex start = vertex_param(c.params, "start", c.lattice.origin());
  const double start_time = c.params.value("start_time", window.start);
  if (!window.contains(start_time)) throw std::domain_error("params.start_time lies outside the window");
  const WalkSampling sampling{c.params.value("forward", true), c.params.value("backward", start_time > window.start),
                              c.tolerances.jump_cap};
  struct Slot {
    std::size_t forward = 0;
    std::size_t backward = 0;
    VertexId initial = 0;
    VertexId final = 0;
    bool boundary = false;
    bool exploded = false;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(c.replicas));
  WalkPath first;
  parallel_for(slots.size(), threads, [&](std::size_t i) {
    LazyEnvironment env(spec, derive_seed(root, {i, 0}));
    WalkPath path = sample_walk(env, start, start_time, derive_seed(root, {i, 1}), sampling);
    Slot& s = slots[i];
    for (const Jump& j : path.jumps) (j.time > start_time ? s.forward : s.backward) += 1;
    s.initial = path.initial;
    s.final = path.final_position();
    s.boundary = path.boundary_hit;
    s.exploded = path.exploded_forward || path.exploded_backward;
    if (i == 0) first = std::move(path);
  });

  std::ostringstream csv;
  csv << "replica,forward_jumps,backward_jumps,initial,final,boundary_hit,exploded\n";
  std::vector<double> forward_counts;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const Slot& s = slots[i];
    csv << i << ',' << s.forward << ',' << s.backward << ',' << vertex_text(c.lattice, s.initial) << ','
        << vertex_text(c.lattice, s.final) << ',' << (s.boundary ? 1 : 0) << ',' << (s.exploded ? 1 : 0) << '\n';
    forward_counts.push_back(static_cast<double>(s.forward));
  }
  sink.text("walks.csv", csv.str());
  sink.json_file("path_0.json", to_json(first));
  if (c.lattice.num_edges() <= kMaxKernelVertices) {
    sink.json_file("environment_0.json", to_json(sample_environment(spec, derive_seed(root, {0, 0}))));
  }

  std::vector<TestReport> reports;
  if (sampling.forward && c.replicas >= 2) {
    const double norm1 = infinitesimal_norm(c.environment, c.lattice.dimension(), 1).value;
    const Summary s = summarize(forward_counts);
    reports.push_back(simple_report("forward_jump_count", ReportKind::Bound, s.mean,
                                    norm1 * (window.end - start_time), s.standard_error, c.replicas,
                                    {{"environment", kind_name(c.environment)},
                                     {"lattice", lattice_to_json(c.lattice)},
                                     {"interval", {start_time, window.end}},
                                     {"norm1", norm1},
                                     {"seed", seed_json(root)}}));
  }
  return reports;
}

std::vector<TestReport> run_kernel(const ExperimentConfig& c, const RandomSeed& root, int threads, Sink& sink) {
  const TimeWindow window = c.window.value_or(TimeWindow{0.0, 1.0});
  const EnvironmentSpec spec{c.environment, c.lattice, window};
  spec.validate();
  if (c.lattice.num_vertices() > kMaxKernelVertices) throw std::domain_error("lattice exceeds the kernel size cap");
  const double s = c.params.value("s", window.start);
  const double t = c.params.value("t", window.end);
  std::vector<double> balance(static_cast<std::size_t>(c.replicas));
  std::vector<double> stochastic(balance.size());
  Eigen::MatrixXd first;
  parallel_for(balance.size(), threads, [&](std::size_t i) {
    const ConductanceTrajectory traj = sample_environment(spec, derive_seed(root, {0, i}));
    const KernelMatrix forward = transition_kernel(traj, s, t, c.tolerances.kernel);
    const KernelMatrix backward = transition_kernel(traj, t, s, c.tolerances.kernel);
    balance[i] = (forward.entries - backward.entries.transpose()).cwiseAbs().maxCoeff();
    stochastic[i] = (forward.entries.rowwise().sum().array() - 1.0).abs().maxCoeff();
    if (i == 0) first = forward.entries;
  });
  KernelMatrix k{c.lattice, s, t, first, 0.0};
  sink.file("kernel_0.csv", [&](const std::string& path) { write_kernel_csv(k, path); });

  const json meta{{"environment", kind_name(c.environment)},
                  {"lattice", lattice_to_json(c.lattice)},
                  {"s", s},
                  {"t", t},
                  {"tolerance", c.tolerances.kernel},
                  {"seed", seed_json(root)}};
  std::vector<TestReport> reports;
  reports.push_back(simple_report("detailed_balance", ReportKind::Bound,
                                  *std::max_element(balance.begin(), balance.end()), 1e-9, 0.0, c.replicas, meta));
  reports.push_back(simple_report("row_stochastic", ReportKind::Bound,
                                  *std::max_element(stochastic.begin(), stochastic.end()), 1e-9, 0.0, c.replicas,
                                  meta));
  const VerifyOptions opts = verify_options(c, threads);
  if (c.params.contains("m_list")) {
    const auto m_list = c.params["m_list"].get<std::vector<int>>();
    const int fit_from = std::min(10, std::max(1, m_list.front()));
    const GrowthCurve curve = backward_sum_divergence(spec, m_list, c.replicas, derive_seed(root, 1), opts, fit_from,
                                                      m_list.back());
    sink.file("backward_sums.csv", [&](const std::string& path) { write_curve_csv(curve, path); });
    reports.push_back(backward_sum_report("backward_sum_divergence", curve));
  }
  if (c.params.contains("mass_transport_m")) {
    const MassTransport mt = mass_transport_check(c.environment, c.lattice, c.params["mass_transport_m"].get<int>(),
                                                  c.replicas, derive_seed(root, 2), c.tolerances.kernel, threads);
    reports.push_back(simple_report("mass_transport", ReportKind::Identity, mt.lhs, mt.rhs,
                                    mt.difference_standard_error, c.replicas,
                                    {{"lhs_standard_error", mt.lhs_standard_error},
                                     {"rhs_standard_error", mt.rhs_standard_error},
                                     {"m", c.params["mass_transport_m"]},
                                     {"seed", seed_json(derive_seed(root, 2))}}));
  }
  return reports;
}

std::vector<TestReport> run_collide(const ExperimentConfig& c, const RandomSeed& root, int threads, Sink& sink) {
  if (c.horizons.empty()) throw std::domain_error("collide needs horizons");
  const EnvironmentSpec spec{c.environment, c.lattice, TimeWindow{0.0, c.horizons.back()}};
  const GrowthCurve curve = collision_growth(spec, starts_param(c.params, c.lattice), c.horizons, c.replicas, root,
                                             verify_options(c, threads));
  sink.file("collision_curve.csv", [&](const std::string& path) { write_curve_csv(curve, path); });
  sink.json_file("collision_curve.json", to_json(curve));
  std::vector<TestReport> reports;
  reports.push_back(collision_growth_report("collision_growth", curve));
  reports.push_back(simple_report("collision_measure_identity", ReportKind::Bound,
                                  curve.metadata["max_folded_relative_error"].get<double>(), 1e-12, 0.0,
                                  curve.metadata["kept_replicas"].get<long>(), {{"seed", seed_json(root)}}));
  return reports;
}

OpinionField initial_field(const ExperimentConfig& c, const RandomSeed& seed) {
  const std::string kind = c.params.value("initial", std::string("half"));
  if (kind == "half") return OpinionField::half_half(c.lattice);
  if (kind == "random") return OpinionField::random(c.lattice, 2, seed);
  if (kind == "constant") return OpinionField::constant(c.lattice, 0);
  throw std::domain_error("params.initial must be 'half', 'random' or 'constant'");
}

std::vector<TestReport> run_voter_experiment(const ExperimentConfig& c, const RandomSeed& root, int threads,
                                             Sink& sink) {
  const double t = c.params.value("t", 1.0);
  const Vertex site = vertex_param(c.params, "site", c.lattice.origin());
  const OpinionField initial = initial_field(c, derive_seed(root, 3));
  const EnvironmentSpec spec{c.environment, c.lattice, TimeWindow{0.0, std::max(t, 1.0)}};
  std::vector<TestReport> reports;
  reports.push_back(duality_check(spec, initial, site, t, c.replicas, derive_seed(root, 0), verify_options(c, threads)));
  double trace_end = std::max(t, 1e-9);
  if (c.params.contains("consensus_horizon")) {
    const double horizon = c.params["consensus_horizon"].get<double>();
    trace_end = std::max(trace_end, horizon);
    const int replicas = c.params.value("consensus_replicas", c.replicas);
    const EnvironmentSpec cspec{c.environment, c.lattice, TimeWindow{0.0, horizon}};
    const ConsensusStats stats = consensus_fraction(cspec, horizon, replicas, derive_seed(root, 1), threads);
    reports.push_back(consensus_report(stats, c.params.value("consensus_fraction", 0.95)));
    sink.json_file("consensus.json", to_json(stats));
  }
  const EnvironmentSpec tspec{c.environment, c.lattice, TimeWindow{0.0, trace_end}};
  const VoterTrace trace = run_voter(tspec, initial, tspec.window, derive_seed(root, 2));
  sink.file("trace_0.csv", [&](const std::string& path) { write_trace_csv(trace, path); });
  return reports;
}

std::vector<TestReport> run_verify(const ExperimentConfig& c, const RandomSeed& root, int threads, Sink& sink) {
  const VerifyOptions opts = verify_options(c, threads);
  std::vector<TestReport> reports;
  for (std::size_t i = 0; i < c.checks.size(); ++i) {
    const CheckConfig& check = c.checks[i];
    const RandomSeed seed = derive_seed(root, i);
    const Lattice lat = check.lattice.value_or(c.lattice);
    const EnvironmentSpec spec{check.environment.value_or(c.environment), lat,
                               c.window.value_or(TimeWindow{0.0, 1.0})};
    const int replicas = check.replicas.value_or(c.replicas);
    const json& p = check.params;
    TestReport r;
    if (check.kind == "moment_bound") {
      r = check_moment_bound(spec, p["p"].get<int>(), p["b"].get<double>(), replicas, seed, opts);
    } else if (check.kind == "markov_type") {
      r = check_markov_type(spec, p["t"].get<double>(), replicas, seed, opts, p.value("constant", 25.0));
    } else if (check.kind == "censored_stationarity") {
      const StartLaw start = p.value("start", std::string("uniform")) == "origin" ? StartLaw::Origin : StartLaw::Uniform;
      r = check_censored_stationarity(spec, p["k"].get<int>(), p["times"].get<std::vector<double>>(), replicas, seed,
                                      opts, start);
    } else if (check.kind == "collision_growth") {
      const GrowthCurve curve = collision_growth(spec, starts_param(p, lat), p["horizons"].get<std::vector<double>>(),
                                                 replicas, seed, opts);
      sink.file(check.name + ".csv", [&](const std::string& path) { write_curve_csv(curve, path); });
      r = collision_growth_report(check.name, curve);
    } else if (check.kind == "backward_sum") {
      const auto m_list = p["m_list"].get<std::vector<int>>();
      const GrowthCurve curve = backward_sum_divergence(spec, m_list, replicas, seed, opts, p.value("fit_from", 10),
                                                        p.value("fit_to", m_list.back()));
      sink.file(check.name + ".csv", [&](const std::string& path) { write_curve_csv(curve, path); });
      r = backward_sum_report(check.name, curve);
    } else if (check.kind == "localization_proxy") {
      r = localization_proxy(spec, p["n"].get<int>(), p["K"].get<double>(), replicas, seed, opts);
    } else {
      throw std::domain_error("unknown check kind '" + check.kind + "'");
    }
    r.name = check.name;
    if (check.control) r.pass_expected = false;
    reports.push_back(std::move(r));
  }
  return reports;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

}  // namespace

nlohmann::json reports_to_json(const std::vector<TestReport>& reports) {
  json out = json::array();
  for (const TestReport& r : reports) out.push_back(to_json(r));
  return out;
}

RunOutcome run_experiment(const ExperimentConfig& config, bool write_outputs) {
  const auto started = std::chrono::steady_clock::now();
  const std::string timestamp = utc_timestamp();
  const int threads = config.threads > 0 ? config.threads : default_threads(1);
  const RandomSeed root{config.master_seed, {}};
  Sink sink(config.output_dir, write_outputs);

  RunOutcome out;
  switch (config.experiment) {
    case Experiment::Simulate: out.reports = run_simulate(config, root, threads, sink); break;
    case Experiment::Kernel: out.reports = run_kernel(config, root, threads, sink); break;
    case Experiment::Collide: out.reports = run_collide(config, root, threads, sink); break;
    case Experiment::Voter: out.reports = run_voter_experiment(config, root, threads, sink); break;
    case Experiment::Verify: out.reports = run_verify(config, root, threads, sink); break;
  }
  out.passed = suite_passes(out.reports);
  sink.json_file("reports.json", reports_to_json(out.reports));
  sink.text("reports.txt", format_reports(out.reports));

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  json listed = json::array();
  for (const TestReport& r : out.reports) {
    listed.push_back({{"name", r.name}, {"verdict", verdict_name(r.verdict)}, {"pass_expected", r.pass_expected}});
  }
  out.artifacts = sink.names();
  out.manifest = {{"tool", "dyn-rcm-lab"},
                  {"version", kVersion},
                  {"experiment", experiment_name(config.experiment)},
                  {"config", to_json(config)},
                  {"timestamp", timestamp},
                  {"wall_seconds", wall},
                  {"threads", threads},
                  {"reports", listed},
                  {"artifacts", out.artifacts},
                  {"passed", out.passed}};
  sink.json_file("manifest.json", out.manifest);
  return out;
}

}  // namespace dynrcm
