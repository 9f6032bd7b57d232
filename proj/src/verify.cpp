#include "dynrcm/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <stdexcept>

#include "dynrcm/collision.hpp"

namespace dynrcm {

namespace {

nlohmann::json seed_json(const RandomSeed& seed) { return {{"master", seed.master}, {"path", seed.path}}; }

nlohmann::json vertex_json(const Lattice& lat, const Vertex& v) {
  return std::vector<int>(v.coords.begin(), v.coords.begin() + lat.dimension());
}

EnvironmentSpec with_window(const EnvironmentSpec& spec, double a, double b) {
  EnvironmentSpec out{spec.kind, spec.lattice, TimeWindow{a, b}};
  out.validate();
  return out;
}

/// Position of v relative to the origin; minimal image on a torus.
Vertex centred(const Lattice& lat, const Vertex& v) {
  Vertex out = v;
  if (lat.is_torus()) {
    const int n = lat.side_length();
    for (int a = 0; a < lat.dimension(); ++a) {
      auto& c = out.coords[static_cast<std::size_t>(a)];
      if (2 * c > n) c -= n;
    }
  }
  return out;
}

/// The unit step taken by a jump from -> to, unwrapped on a torus.
Vertex step_between(const Lattice& lat, VertexId from, VertexId to) {
  Vertex d = lat.vertex(to) - lat.vertex(from);
  if (lat.is_torus()) {
    const int n = lat.side_length();
    for (int a = 0; a < lat.dimension(); ++a) {
      auto& c = d.coords[static_cast<std::size_t>(a)];
      if (c > 1) c -= n;
      if (c < -1) c += n;
    }
  }
  return d;
}

double analytic_norm(const EnvironmentKind& kind, int dimension, int p) {
  return infinitesimal_norm(kind, dimension, p).value;
}

}  // namespace

void TestReport::decide() {
  const double margin = 3.0 * standard_error;
  bool ok = false;
  switch (kind) {
    case ReportKind::Bound:
      ok = empirical_value <= bound_or_target + margin;
      break;
    case ReportKind::Identity:
      ok = std::abs(empirical_value - bound_or_target) <= margin;
      break;
    case ReportKind::ChiSquare:
      ok = empirical_value <= bound_or_target;
      break;
    case ReportKind::LowerBound:
      ok = empirical_value - margin >= bound_or_target;
      break;
    case ReportKind::Informational:
      verdict = Verdict::Inconclusive;
      return;
  }
  verdict = std::isfinite(empirical_value) ? (ok ? Verdict::Pass : Verdict::Fail) : Verdict::Inconclusive;
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

std::string report_kind_name(ReportKind k) {
  switch (k) {
    case ReportKind::Bound: return "bound";
    case ReportKind::Identity: return "identity";
    case ReportKind::ChiSquare: return "chi_square";
    case ReportKind::LowerBound: return "lower_bound";
    case ReportKind::Informational: return "informational";
  }
  return "informational";
}

nlohmann::json to_json(const TestReport& r) {
  return {{"name", r.name},
          {"kind", report_kind_name(r.kind)},
          {"empirical_value", r.empirical_value},
          {"bound_or_target", r.bound_or_target},
          {"standard_error", r.standard_error},
          {"replicas", r.replicas},
          {"verdict", verdict_name(r.verdict)},
          {"pass_expected", r.pass_expected},
          {"metadata", r.metadata}};
}

TestReport report_from_json(const nlohmann::json& j) {
  TestReport r;
  r.name = j.at("name").get<std::string>();
  const std::string kind = j.at("kind").get<std::string>();
  bool found = false;
  for (ReportKind k : {ReportKind::Bound, ReportKind::Identity, ReportKind::ChiSquare, ReportKind::LowerBound,
                       ReportKind::Informational}) {
    if (report_kind_name(k) == kind) {
      r.kind = k;
      found = true;
    }
  }
  if (!found) throw std::domain_error("unknown report kind '" + kind + "'");
  auto number = [&](const char* key) {
    const auto& v = j.at(key);
    return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
  };
  r.empirical_value = number("empirical_value");
  r.bound_or_target = number("bound_or_target");
  r.standard_error = number("standard_error");
  r.replicas = j.at("replicas").get<long>();
  const std::string verdict = j.at("verdict").get<std::string>();
  r.verdict = verdict == "pass" ? Verdict::Pass : verdict == "fail" ? Verdict::Fail : Verdict::Inconclusive;
  r.pass_expected = j.at("pass_expected").get<bool>();
  r.metadata = j.at("metadata");
  return r;
}

std::string format_reports(const std::vector<TestReport>& reports) {
  std::string out;
  char line[512];
  std::snprintf(line, sizeof line, "%-44s %-13s %14s %14s %12s %9s %-12s %s\n", "name", "kind", "empirical",
                "bound/target", "std.err", "replicas", "verdict", "expected");
  out += line;
  for (const TestReport& r : reports) {
    std::snprintf(line, sizeof line, "%-44s %-13s %14.6g %14.6g %12.4g %9ld %-12s %s\n", r.name.c_str(),
                  report_kind_name(r.kind).c_str(), r.empirical_value, r.bound_or_target, r.standard_error,
                  r.replicas, verdict_name(r.verdict).c_str(), r.pass_expected ? "pass" : "fail");
    out += line;
  }
  return out;
}

bool suite_passes(const std::vector<TestReport>& reports) {
  return std::all_of(reports.begin(), reports.end(),
                     [](const TestReport& r) { return !r.pass_expected || r.verdict == Verdict::Pass ||
                                                      r.kind == ReportKind::Informational; });
}

std::string growth_model_name(GrowthModel m) {
  switch (m) {
    case GrowthModel::Log: return "log";
    case GrowthModel::Sqrt: return "sqrt";
    case GrowthModel::Linear: return "linear";
  }
  return "log";
}

void GrowthCurve::validate() const {
  if (values.size() != horizons.size() || ci_halfwidths.size() != horizons.size()) {
    throw std::domain_error("growth curve lengths disagree");
  }
  for (std::size_t i = 1; i < horizons.size(); ++i) {
    if (!(horizons[i] > horizons[i - 1])) throw std::domain_error("growth curve horizons must increase strictly");
  }
}

GrowthFit fit_growth(const std::vector<double>& horizons, const std::vector<double>& values, GrowthModel preferred) {
  if (horizons.size() != values.size() || horizons.empty()) throw std::domain_error("growth fit needs matching data");
  auto transform = [](GrowthModel m, double t) {
    switch (m) {
      case GrowthModel::Log: return std::log(t);
      case GrowthModel::Sqrt: return std::sqrt(t);
      case GrowthModel::Linear: return t;
    }
    return t;
  };
  for (double t : horizons) {
    if (!(t > 0.0)) throw std::domain_error("growth fit needs positive horizons");
  }
  auto fit_for = [&](GrowthModel m) {
    std::vector<double> x(horizons.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = transform(m, horizons[i]);
    return fit_line(x, values);
  };
  GrowthFit best{preferred, fit_for(preferred)};
  if (horizons.size() <= 2) return best;
  for (GrowthModel m : {GrowthModel::Log, GrowthModel::Sqrt, GrowthModel::Linear}) {
    const LinearFit f = fit_for(m);
    if (f.residual_sum_squares < best.fit.residual_sum_squares) best = {m, f};
  }
  return best;
}

nlohmann::json to_json(const GrowthCurve& c) {
  return {{"horizons", c.horizons},
          {"values", c.values},
          {"ci_halfwidths", c.ci_halfwidths},
          {"fitted_model", growth_model_name(c.fitted_model)},
          {"fitted_slope", c.fitted_slope},
          {"slope_ci_halfwidth", c.slope_ci_halfwidth},
          {"metadata", c.metadata}};
}

void write_curve_csv(const GrowthCurve& curve, const std::string& path) {
  curve.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  out << "horizon,value,ci_halfwidth\n";
  for (std::size_t i = 0; i < curve.horizons.size(); ++i) {
    out << curve.horizons[i] << ',' << curve.values[i] << ',' << curve.ci_halfwidths[i] << '\n';
  }
}

TestReport check_moment_bound(const EnvironmentSpec& spec, int p, double b, int replicas, const RandomSeed& seed,
                              const VerifyOptions& options) {
  if (p != 1 && p != 2) throw std::domain_error("moment check supports p in {1, 2}");
  if (!(b > 0.0)) throw std::domain_error("moment check needs b > 0");
  if (replicas < 2) throw std::domain_error("moment check needs at least two replicas");
  const EnvironmentSpec local = with_window(spec, 0.0, b);
  const Vertex origin = local.lattice.origin();
  std::vector<double> powers(static_cast<std::size_t>(replicas));
  std::vector<double> counts(powers.size());
  std::vector<char> capped(powers.size(), 0);
  parallel_for(powers.size(), options.threads, [&](std::size_t i) {
    LazyEnvironment env(local, derive_seed(seed, {i, 0}));
    const WalkPath path = sample_walk(env, origin, 0.0, derive_seed(seed, {i, 1}),
                                      WalkSampling{true, false, options.jump_cap});
    const JumpCount n = jump_count(path, 0.0, b);
    counts[i] = static_cast<double>(n.count);
    powers[i] = std::pow(counts[i], p);
    capped[i] = n.lower_bound ? 1 : 0;
  });
  std::vector<EnvNorm> norms;
  nlohmann::json norm_json = nlohmann::json::array();
  for (int l = 1; l <= p; ++l) {
    norms.push_back(infinitesimal_norm(local.kind, local.lattice.dimension(), l));
    norm_json.push_back(to_json(norms.back()));
  }
  const Summary s = summarize(powers);
  TestReport r;
  r.name = "moment_bound_p" + std::to_string(p);
  r.kind = ReportKind::Bound;
  r.empirical_value = s.mean;
  r.bound_or_target = moment_bound(p, b, norms);
  r.standard_error = s.standard_error;
  r.replicas = replicas;
  r.metadata = {{"environment", kind_name(local.kind)},
                {"lattice", lattice_to_json(local.lattice)},
                {"p", p},
                {"b", b},
                {"norms", norm_json},
                {"mean_jumps", summarize(counts).mean},
                {"capped_replicas", std::count(capped.begin(), capped.end(), 1)},
                {"seed", seed_json(seed)}};
  r.decide();
  return r;
}

TestReport check_markov_type(const EnvironmentSpec& spec, double t, int replicas, const RandomSeed& seed,
                             const VerifyOptions& options, double constant) {
  if (!(t > 0.0)) throw std::domain_error("Markov-type check needs t > 0");
  if (replicas < 2) throw std::domain_error("Markov-type check needs at least two replicas");
  const EnvironmentSpec local = with_window(spec, -t, t);
  const Lattice& lat = local.lattice;
  std::vector<double> maxima(static_cast<std::size_t>(replicas));
  std::vector<char> boundary(maxima.size(), 0);
  parallel_for(maxima.size(), options.threads, [&](std::size_t i) {
    LazyEnvironment env(local, derive_seed(seed, {i, 0}));
    const WalkPath path = sample_walk(env, lat.origin(), 0.0, derive_seed(seed, {i, 1}),
                                      WalkSampling{true, true, options.jump_cap});
    if (path.exploded_forward || path.exploded_backward) {
      throw std::runtime_error("walk reached the jump cap in the Markov-type check");
    }
    long best = 0;
    auto split = std::upper_bound(path.jumps.begin(), path.jumps.end(), 0.0,
                                  [](double x, const Jump& j) { return x < j.time; });
    Vertex d{};
    for (auto it = split; it != path.jumps.end(); ++it) {
      d = d + step_between(lat, it->from, it->to);
      best = std::max(best, squared_l2_norm(d));
    }
    d = Vertex{};
    for (auto it = std::make_reverse_iterator(split); it != path.jumps.rend(); ++it) {
      d = d + step_between(lat, it->to, it->from);
      best = std::max(best, squared_l2_norm(d));
    }
    maxima[i] = static_cast<double>(best);
    boundary[i] = path.boundary_hit ? 1 : 0;
  });
  const double norm1 = analytic_norm(local.kind, lat.dimension(), 1);
  const Summary s = summarize(maxima);
  TestReport r;
  r.name = "markov_type_t" + nlohmann::json(t).dump();
  const bool informational = std::holds_alternative<DeterministicPhase>(local.kind);
  r.kind = informational ? ReportKind::Informational : ReportKind::Bound;
  r.empirical_value = s.mean;
  r.bound_or_target = constant * t * norm1;
  r.standard_error = s.standard_error;
  r.replicas = replicas;
  r.metadata = {{"environment", kind_name(local.kind)},
                {"lattice", lattice_to_json(lat)},
                {"t", t},
                {"constant", constant},
                {"norm1", norm1},
                {"boundary_hits", std::count(boundary.begin(), boundary.end(), 1)},
                {"seed", seed_json(seed)}};
  r.decide();
  return r;
}

TestReport check_censored_stationarity(const EnvironmentSpec& spec, int k, const std::vector<double>& times,
                                       int replicas, const RandomSeed& seed, const VerifyOptions& options,
                                       StartLaw start) {
  if (k < 1) throw std::domain_error("censored box needs k >= 1");
  if (times.empty()) throw std::domain_error("stationarity check needs at least one time");
  if (replicas < 1) throw std::domain_error("stationarity check needs replicas >= 1");
  double horizon = 0.0;
  for (double t : times) {
    if (!(t >= 0.0)) throw std::domain_error("stationarity times must be >= 0");
    horizon = std::max(horizon, t);
  }
  const Lattice box = Lattice::box(spec.lattice.dimension(), k);
  EnvironmentSpec local{spec.kind, box, TimeWindow{0.0, std::max(horizon, 1.0)}};
  local.validate();
  const std::size_t n = box.num_vertices();
  const VertexId origin = box.vertex_id(box.origin());
  std::vector<std::vector<VertexId>> positions(static_cast<std::size_t>(replicas));
  parallel_for(positions.size(), options.threads, [&](std::size_t i) {
    Stream pick(derive_seed(seed, {i, 2}));
    const VertexId s = start == StartLaw::Uniform ? static_cast<VertexId>(pick.below(n)) : origin;
    LazyEnvironment env(local, derive_seed(seed, {i, 0}));
    const WalkPath path = sample_walk(env, box.vertex(s), 0.0, derive_seed(seed, {i, 1}),
                                      WalkSampling{true, false, options.jump_cap});
    positions[i].reserve(times.size());
    for (double t : times) positions[i].push_back(path.position_id(t));
  });
  nlohmann::json per_time = nlohmann::json::array();
  double worst = 0.0;
  double min_p = 1.0;
  for (std::size_t j = 0; j < times.size(); ++j) {
    std::vector<std::size_t> counts(n, 0);
    for (const auto& pos : positions) ++counts[pos[j]];
    const ChiSquare c = chi_square_uniform(counts);
    worst = std::max(worst, c.statistic);
    min_p = std::min(min_p, c.p_value);
    per_time.push_back({{"t", times[j]}, {"statistic", c.statistic}, {"p_value", c.p_value}});
  }
  TestReport r;
  r.name = start == StartLaw::Uniform ? "censored_stationarity" : "censored_stationarity_fixed_start_control";
  r.kind = ReportKind::ChiSquare;
  r.empirical_value = worst;
  r.bound_or_target = chi_square_critical(static_cast<double>(n - 1), options.chi_square_alpha);
  r.standard_error = 0.0;
  r.replicas = replicas;
  r.pass_expected = start == StartLaw::Uniform;
  r.metadata = {{"environment", kind_name(spec.kind)},
                {"lattice", lattice_to_json(box)},
                {"start", start == StartLaw::Uniform ? "uniform" : "origin"},
                {"alpha", options.chi_square_alpha},
                {"min_p_value", min_p},
                {"times", per_time},
                {"seed", seed_json(seed)}};
  r.decide();
  return r;
}

GrowthCurve collision_growth(const EnvironmentSpec& spec, const std::pair<Vertex, Vertex>& starts,
                             const std::vector<double>& horizons, int replicas, const RandomSeed& seed,
                             const VerifyOptions& options) {
  if (horizons.empty()) throw std::domain_error("collision growth needs horizons");
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (!(horizons[i] > 0.0) || (i > 0 && !(horizons[i] > horizons[i - 1]))) {
      throw std::domain_error("collision horizons must be positive and increasing");
    }
  }
  if (replicas < 1) throw std::domain_error("collision growth needs replicas >= 1");
  const EnvironmentSpec local = with_window(spec, 0.0, horizons.back());
  const Lattice& lat = local.lattice;
  lat.vertex_id(starts.first);
  lat.vertex_id(starts.second);

  struct Slot {
    bool kept = false;
    std::vector<double> counts;
    double folded_error = 0.0;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(replicas));
  parallel_for(slots.size(), options.threads, [&](std::size_t i) {
    LazyEnvironment env(local, derive_seed(seed, {i, 0}));
    const WalkSampling forward{true, false, options.jump_cap};
    const WalkPath x = sample_walk(env, starts.first, 0.0, derive_seed(seed, {i, 1}), forward);
    const WalkPath y = sample_walk(env, starts.second, 0.0, derive_seed(seed, {i, 2}), forward);
    Slot& slot = slots[i];
    if (x.boundary_hit || y.boundary_hit) return;
    slot.kept = true;
    for (double h : horizons) {
      const CollisionRecord rec = collision_stats(x, y, TimeWindow{0.0, h});
      slot.counts.push_back(static_cast<double>(rec.integer_collisions));
      slot.folded_error = std::max(slot.folded_error, rec.folded_relative_error);
    }
  });

  GrowthCurve curve;
  curve.horizons = horizons;
  std::size_t kept = 0;
  double folded_error = 0.0;
  for (const Slot& s : slots) {
    kept += s.kept ? 1 : 0;
    folded_error = std::max(folded_error, s.folded_error);
  }
  std::vector<double> medians;
  std::vector<double> standard_errors;
  for (std::size_t h = 0; h < horizons.size(); ++h) {
    std::vector<double> column;
    column.reserve(kept);
    for (const Slot& s : slots) {
      if (s.kept) column.push_back(s.counts[h]);
    }
    if (column.empty()) {
      curve.values.push_back(std::numeric_limits<double>::quiet_NaN());
      curve.ci_halfwidths.push_back(std::numeric_limits<double>::quiet_NaN());
      medians.push_back(std::numeric_limits<double>::quiet_NaN());
      standard_errors.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    const Summary s = summarize(column);
    curve.values.push_back(s.mean);
    curve.ci_halfwidths.push_back(3.0 * s.standard_error);
    standard_errors.push_back(s.standard_error);
    medians.push_back(median(column));
  }
  const GrowthModel preferred = lat.dimension() == 2 ? GrowthModel::Log : GrowthModel::Sqrt;
  if (kept > 0) {
    const GrowthFit fit = fit_growth(horizons, curve.values, preferred);
    curve.fitted_model = fit.model;
    curve.fitted_slope = fit.fit.slope;
  } else {
    curve.fitted_model = preferred;
    curve.fitted_slope = std::numeric_limits<double>::quiet_NaN();
  }
  curve.metadata = {{"environment", kind_name(local.kind)},
                    {"lattice", lattice_to_json(lat)},
                    {"starts", {vertex_json(lat, starts.first), vertex_json(lat, starts.second)}},
                    {"replicas", replicas},
                    {"kept_replicas", kept},
                    {"dropped_boundary", static_cast<std::size_t>(replicas) - kept},
                    {"medians", medians},
                    {"standard_errors", standard_errors},
                    {"max_folded_relative_error", folded_error},
                    {"statistic", "integer_collisions"},
                    {"seed", seed_json(seed)}};
  return curve;
}

GrowthCurve backward_sum_divergence(const EnvironmentSpec& spec, const std::vector<int>& m_list, int env_replicas,
                                    const RandomSeed& seed, const VerifyOptions& options, int fit_from, int fit_to) {
  if (m_list.empty()) throw std::domain_error("backward sum divergence needs horizons");
  for (std::size_t i = 0; i < m_list.size(); ++i) {
    if (m_list[i] < 1 || (i > 0 && m_list[i] <= m_list[i - 1])) {
      throw std::domain_error("backward sum horizons must be positive and increasing");
    }
  }
  if (env_replicas < 1) throw std::domain_error("backward sum divergence needs env_replicas >= 1");
  if (!spec.lattice.is_torus()) throw std::domain_error("backward sum divergence needs a torus");
  if (fit_to <= 0) fit_to = m_list.back();
  if (fit_from < 1 || fit_from >= fit_to) throw std::domain_error("log-slope fit range must satisfy 1 <= from < to");
  const int max_m = std::max(m_list.back(), fit_to);
  const EnvironmentSpec local = with_window(spec, -static_cast<double>(max_m), 0.0);

  std::vector<std::vector<double>> sums(static_cast<std::size_t>(env_replicas));
  std::vector<double> slopes(sums.size());
  std::vector<double> fit_x;
  for (int m = fit_from; m <= fit_to; ++m) fit_x.push_back(std::log(static_cast<double>(m)));
  parallel_for(sums.size(), options.threads, [&](std::size_t i) {
    const ConductanceTrajectory traj = sample_environment(local, derive_seed(seed, i));
    sums[i] = backward_collision_sum(traj, local.lattice.origin(), max_m, options.kernel_tolerance);
    const std::vector<double> fit_y(sums[i].begin() + (fit_from - 1), sums[i].begin() + fit_to);
    slopes[i] = fit_line(fit_x, fit_y).slope;
  });

  GrowthCurve curve;
  std::vector<double> standard_errors;
  for (int m : m_list) {
    std::vector<double> column;
    column.reserve(sums.size());
    for (const auto& s : sums) column.push_back(s[static_cast<std::size_t>(m) - 1]);
    const Summary s = summarize(column);
    curve.horizons.push_back(m);
    curve.values.push_back(s.mean);
    curve.ci_halfwidths.push_back(3.0 * s.standard_error);
    standard_errors.push_back(s.standard_error);
  }
  const Summary slope = summarize(slopes);
  curve.fitted_model = GrowthModel::Log;
  curve.fitted_slope = slope.mean;
  curve.slope_ci_halfwidth = 3.0 * slope.standard_error;
  const GrowthModel best = fit_growth(curve.horizons, curve.values, GrowthModel::Log).model;
  curve.metadata = {{"environment", kind_name(local.kind)},
                    {"lattice", lattice_to_json(local.lattice)},
                    {"env_replicas", env_replicas},
                    {"fit_range", {fit_from, fit_to}},
                    {"slope_standard_error", slope.standard_error},
                    {"best_model", growth_model_name(best)},
                    {"standard_errors", standard_errors},
                    {"kernel_tolerance", options.kernel_tolerance},
                    {"statistic", "backward_collision_sum"},
                    {"seed", seed_json(seed)}};
  return curve;
}

TestReport collision_growth_report(const std::string& name, const GrowthCurve& curve) {
  curve.validate();
  TestReport r;
  r.name = name;
  r.kind = ReportKind::Bound;
  long drops = 0;
  bool defined = true;
  for (std::size_t i = 0; i < curve.values.size(); ++i) {
    if (!std::isfinite(curve.values[i])) defined = false;
    if (i > 0 && !(curve.values[i] > curve.values[i - 1])) ++drops;
  }
  // Counts where the mean collision count fails to increase with the horizon.
  r.empirical_value = defined ? static_cast<double>(drops) : std::numeric_limits<double>::quiet_NaN();
  r.bound_or_target = 0.0;
  r.replicas = curve.metadata.value("kept_replicas", 0L);
  r.metadata = {{"fitted_model", growth_model_name(curve.fitted_model)},
                {"fitted_slope", curve.fitted_slope},
                {"curve", to_json(curve)}};
  r.decide();
  return r;
}

TestReport backward_sum_report(const std::string& name, const GrowthCurve& curve) {
  curve.validate();
  TestReport r;
  r.name = name;
  r.kind = ReportKind::LowerBound;
  r.empirical_value = curve.fitted_slope;
  r.bound_or_target = 0.0;
  r.standard_error = curve.slope_ci_halfwidth / 3.0;
  r.replicas = curve.metadata.value("env_replicas", 0L);
  bool increasing = true;
  for (std::size_t i = 1; i < curve.values.size(); ++i) increasing = increasing && curve.values[i] > curve.values[i - 1];
  const double ratio = curve.values.size() >= 2 ? curve.values.back() / curve.values.front() : 1.0;
  r.metadata = {{"strictly_increasing", increasing},
                {"last_over_first", ratio},
                {"fitted_model", growth_model_name(curve.fitted_model)},
                {"curve", to_json(curve)}};
  r.decide();
  if (!increasing && r.verdict == Verdict::Pass) r.verdict = Verdict::Fail;
  return r;
}

TestReport localization_proxy(const EnvironmentSpec& spec, int n, double K, int env_replicas, const RandomSeed& seed,
                              const VerifyOptions& options) {
  if (n < 1 || !(K > 0.0) || env_replicas < 1) throw std::domain_error("localization proxy needs n >= 1, K > 0");
  const EnvironmentSpec local = with_window(spec, -static_cast<double>(n), 0.0);
  const Lattice& lat = local.lattice;
  const double radius2 = K * K * static_cast<double>(n);
  std::vector<char> inside(lat.num_vertices(), 0);
  for (VertexId v = 0; v < lat.num_vertices(); ++v) {
    inside[v] = static_cast<double>(squared_l2_norm(centred(lat, lat.vertex(v)))) <= radius2 ? 1 : 0;
  }
  std::vector<double> minima(static_cast<std::size_t>(env_replicas));
  parallel_for(minima.size(), options.threads, [&](std::size_t i) {
    const ConductanceTrajectory reversed = reverse_environment(sample_environment(local, derive_seed(seed, i)));
    std::vector<double> row(lat.num_vertices(), 0.0);
    row[lat.vertex_id(lat.origin())] = 1.0;
    std::vector<double> checkpoints;
    for (int m = 1; m <= n; ++m) checkpoints.push_back(m);
    double lowest = 1.0;
    propagate_rows(reversed, row, 1, 0.0, static_cast<double>(n), options.kernel_tolerance, checkpoints,
                   [&](std::size_t, const std::vector<double>& v) {
                     double mass = 0.0;
                     for (std::size_t x = 0; x < v.size(); ++x) mass += inside[x] ? v[x] : 0.0;
                     lowest = std::min(lowest, mass);
                   });
    minima[i] = lowest;
  });
  const Summary s = summarize(minima);
  TestReport r;
  r.name = "localization_proxy";
  r.kind = ReportKind::Informational;
  r.empirical_value = s.mean;
  r.standard_error = s.standard_error;
  r.replicas = env_replicas;
  r.metadata = {{"environment", kind_name(local.kind)}, {"lattice", lattice_to_json(lat)}, {"n", n}, {"K", K},
                {"seed", seed_json(seed)}};
  r.decide();
  return r;
}

}  // namespace dynrcm
