#include "dynrcm/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "dynrcm/stats.hpp"

namespace dynrcm {

void TimeWindow::validate() const {
  if (!(std::isfinite(start) && std::isfinite(end)) || !(start < end)) {
    throw std::domain_error("time window must satisfy start < end");
  }
}

std::size_t Piecewise::piece_at(double t) const {
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
  if (it == breakpoints.begin()) return 0;
  return static_cast<std::size_t>(it - breakpoints.begin()) - 1;
}

double Piecewise::integral(double a, double b, double window_end) const {
  double total = 0.0;
  for (std::size_t i = piece_at(a); i < values.size(); ++i) {
    const double lo = std::max(a, breakpoints[i]);
    const double hi = std::min(b, i + 1 < breakpoints.size() ? breakpoints[i + 1] : window_end);
    if (breakpoints[i] >= b) break;
    if (hi > lo) total += values[i] * (hi - lo);
  }
  return total;
}

double Piecewise::max_value() const {
  return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

ConductanceTrajectory::ConductanceTrajectory(Lattice lattice, TimeWindow window, std::vector<Piecewise> edges)
    : lattice_(std::move(lattice)), window_(window), edges_(std::move(edges)) {
  window_.validate();
  if (edges_.size() != lattice_.num_edges()) {
    throw std::domain_error("trajectory needs one function per lattice edge");
  }
  for (const Piecewise& pw : edges_) {
    if (pw.breakpoints.empty() || pw.breakpoints.size() != pw.values.size()) {
      throw std::domain_error("trajectory edge has mismatched breakpoints and values");
    }
    if (pw.breakpoints.front() != window_.start) {
      throw std::domain_error("trajectory edge must start at the window start");
    }
    for (std::size_t i = 0; i < pw.values.size(); ++i) {
      if (!(pw.values[i] >= 0.0) || !std::isfinite(pw.values[i])) {
        throw std::domain_error("conductances must be finite and nonnegative");
      }
      if (i > 0 && !(pw.breakpoints[i] > pw.breakpoints[i - 1])) {
        throw std::domain_error("breakpoints must be strictly increasing");
      }
      if (pw.breakpoints[i] >= window_.end) {
        throw std::domain_error("breakpoint outside the window");
      }
    }
  }
}

double ConductanceTrajectory::value(EdgeId e, double t) const {
  if (!window_.contains(t)) throw std::domain_error("time outside the trajectory window");
  return pieces(e).value_at(t);
}

double ConductanceTrajectory::total_conductance(VertexId x, double t) const {
  double total = 0.0;
  for (EdgeId e : lattice_.incident(x)) total += value(e, t);
  return total;
}

double ConductanceTrajectory::integral(EdgeId e, double a, double b) const {
  return pieces(e).integral(a, b, window_.end);
}

std::size_t ConductanceTrajectory::breakpoint_count() const {
  std::size_t n = 0;
  for (const auto& pw : edges_) n += pw.breakpoints.size() - 1;
  return n;
}

std::string kind_name(const EnvironmentKind& kind) {
  struct Visitor {
    std::string operator()(const StaticEnv&) const { return "static"; }
    std::string operator()(const DynamicalPercolation&) const { return "dynamical_percolation"; }
    std::string operator()(const Exclusion&) const { return "exclusion"; }
    std::string operator()(const DeterministicPhase&) const { return "deterministic_phase"; }
  };
  return std::visit(Visitor{}, kind);
}

namespace {

void validate_kind(const EnvironmentKind& kind) {
  auto fail = [](const char* what) { throw std::domain_error(what); };
  if (auto* s = std::get_if<StaticEnv>(&kind)) {
    if (!(s->conductance >= 0.0) || !std::isfinite(s->conductance)) fail("static conductance must be >= 0");
  } else if (auto* dp = std::get_if<DynamicalPercolation>(&kind)) {
    if (!(dp->p >= 0.0 && dp->p <= 1.0)) fail("percolation p must lie in [0, 1]");
    if (!(dp->mu > 0.0) || !std::isfinite(dp->mu)) fail("percolation refresh rate must be > 0");
  } else if (auto* ex = std::get_if<Exclusion>(&kind)) {
    if (!(ex->density >= 0.0 && ex->density <= 1.0)) fail("exclusion density must lie in [0, 1]");
    if (!(ex->hop_rate > 0.0) || !std::isfinite(ex->hop_rate)) fail("exclusion hop rate must be > 0");
    if (!(ex->low >= 0.0 && ex->low <= ex->high) || !std::isfinite(ex->high)) {
      fail("exclusion conductances must satisfy 0 <= low <= high");
    }
  } else if (auto* ph = std::get_if<DeterministicPhase>(&kind)) {
    if (!(ph->amplitude >= 0.0) || !std::isfinite(ph->amplitude)) fail("phase amplitude must be >= 0");
    if (!(ph->step > 0.0) || !std::isfinite(ph->step)) fail("phase grid step must be > 0");
  }
}

Piecewise sample_percolation_edge(const DynamicalPercolation& dp, const TimeWindow& w, Stream& rng) {
  Piecewise pw;
  pw.breakpoints.push_back(w.start);
  pw.values.push_back(rng.bernoulli(dp.p) ? 1.0 : 0.0);
  double t = w.start + rng.exponential(dp.mu);
  while (t < w.end) {
    if (t > pw.breakpoints.back()) {
      pw.breakpoints.push_back(t);
      pw.values.push_back(rng.bernoulli(dp.p) ? 1.0 : 0.0);
    }
    t += rng.exponential(dp.mu);
  }
  return pw;
}

Piecewise sample_phase(const DeterministicPhase& ph, const TimeWindow& w, const RandomSeed& seed) {
  Stream rng(derive_seed(seed, 0));
  const double theta = 2.0 * std::numbers::pi * rng.uniform();
  Piecewise pw;
  for (std::size_t k = 0;; ++k) {
    const double lo = w.start + static_cast<double>(k) * ph.step;
    if (lo >= w.end) break;
    const double hi = std::min(w.end, lo + ph.step);
    const double mid = 0.5 * (lo + hi);
    pw.breakpoints.push_back(lo);
    pw.values.push_back(ph.amplitude * 0.5 * (1.0 + std::sin(mid + theta)));
  }
  return pw;
}

std::vector<double> binomial_pmf(int n, double p) {
  std::vector<double> pmf(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) {
    pmf[static_cast<std::size_t>(k)] =
        std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)) *
        std::pow(p, k) * std::pow(1.0 - p, n - k);
  }
  return pmf;
}

double binomial_coefficient(int n, int k) {
  return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)));
}

}  // namespace

void EnvironmentSpec::validate() const {
  window.validate();
  validate_kind(kind);
}

ConductanceTrajectory sample_environment(const EnvironmentSpec& spec, const RandomSeed& seed) {
  spec.validate();
  if (std::holds_alternative<Exclusion>(spec.kind)) return sample_exclusion(spec, seed).trajectory;
  LazyEnvironment lazy(spec, seed);
  std::vector<Piecewise> edges;
  edges.reserve(spec.lattice.num_edges());
  for (EdgeId e = 0; e < spec.lattice.num_edges(); ++e) edges.push_back(lazy.pieces(e));
  return ConductanceTrajectory(spec.lattice, spec.window, std::move(edges));
}

ExclusionSample sample_exclusion(const EnvironmentSpec& spec, const RandomSeed& seed) {
  spec.validate();
  const auto* ex = std::get_if<Exclusion>(&spec.kind);
  if (ex == nullptr) throw std::domain_error("sample_exclusion needs an exclusion spec");
  const Lattice& lat = spec.lattice;
  Stream rng(derive_seed(seed, 0));

  std::vector<bool> occ(lat.num_vertices());
  for (std::size_t v = 0; v < occ.size(); ++v) occ[v] = rng.bernoulli(ex->density);
  const std::vector<bool> initial = occ;

  auto edge_value = [&](EdgeId e) {
    return (occ[lat.edge_from(e)] || occ[lat.edge_to(e)]) ? ex->high : ex->low;
  };
  std::vector<Piecewise> edges(lat.num_edges());
  for (EdgeId e = 0; e < lat.num_edges(); ++e) edges[e] = Piecewise::constant(spec.window, edge_value(e));

  std::vector<std::pair<double, EdgeId>> stirs;
  const double total_rate = ex->hop_rate * static_cast<double>(lat.num_edges());
  if (total_rate > 0.0) {
    for (double t = spec.window.start + rng.exponential(total_rate); t < spec.window.end;
         t += rng.exponential(total_rate)) {
      const auto e = static_cast<EdgeId>(rng.below(lat.num_edges()));
      stirs.emplace_back(t, e);
      const VertexId a = lat.edge_from(e);
      const VertexId b = lat.edge_to(e);
      if (occ[a] == occ[b]) continue;
      const bool tmp = occ[a];
      occ[a] = occ[b];
      occ[b] = tmp;
      for (VertexId v : {a, b}) {
        for (EdgeId f : lat.incident(v)) {
          Piecewise& pw = edges[f];
          const double value = edge_value(f);
          if (value != pw.values.back() && t > pw.breakpoints.back()) {
            pw.breakpoints.push_back(t);
            pw.values.push_back(value);
          }
        }
      }
    }
  }
  return ExclusionSample{ConductanceTrajectory(lat, spec.window, std::move(edges)), initial, std::move(stirs)};
}

std::size_t ExclusionSample::particle_count_at(double t) const {
  std::vector<bool> occ = initial_occupancy;
  const Lattice& lat = trajectory.lattice();
  for (const auto& [time, e] : stirs) {
    if (time > t) break;
    const VertexId a = lat.edge_from(e);
    const VertexId b = lat.edge_to(e);
    const bool tmp = occ[a];
    occ[a] = occ[b];
    occ[b] = tmp;
  }
  return static_cast<std::size_t>(std::count(occ.begin(), occ.end(), true));
}

LazyEnvironment::LazyEnvironment(EnvironmentSpec spec, RandomSeed seed)
    : spec_(std::move(spec)), seed_(std::move(seed)), cache_(spec_.lattice.num_edges()) {
  spec_.validate();
}

const Piecewise& LazyEnvironment::pieces(EdgeId e) {
  if (e >= cache_.size()) throw std::domain_error("edge id out of range");
  if (auto* s = std::get_if<StaticEnv>(&spec_.kind)) {
    if (!shared_) shared_ = Piecewise::constant(spec_.window, s->conductance);
    return *shared_;
  }
  if (auto* ph = std::get_if<DeterministicPhase>(&spec_.kind)) {
    if (!shared_) shared_ = sample_phase(*ph, spec_.window, seed_);
    return *shared_;
  }
  if (cache_[e]) return *cache_[e];
  if (auto* dp = std::get_if<DynamicalPercolation>(&spec_.kind)) {
    Stream rng(derive_seed(seed_, e));
    cache_[e] = sample_percolation_edge(*dp, spec_.window, rng);
    ++materialized_;
    return *cache_[e];
  }
  // Exclusion couples all edges through the particle field.
  ExclusionSample sample = sample_exclusion(spec_, seed_);
  for (EdgeId f = 0; f < cache_.size(); ++f) cache_[f] = sample.trajectory.pieces(f);
  materialized_ = cache_.size();
  return *cache_[e];
}

ConductanceTrajectory reverse_environment(const ConductanceTrajectory& traj) {
  const TimeWindow w = traj.window();
  const TimeWindow rw{-w.end, -w.start};
  std::vector<Piecewise> edges;
  edges.reserve(traj.edges().size());
  for (const Piecewise& pw : traj.edges()) {
    Piecewise out;
    const std::size_t n = pw.values.size();
    out.breakpoints.reserve(n);
    out.values.reserve(n);
    out.breakpoints.push_back(rw.start);
    out.values.push_back(pw.values[n - 1]);
    for (std::size_t i = n - 1; i >= 1; --i) {
      out.breakpoints.push_back(-pw.breakpoints[i]);
      out.values.push_back(pw.values[i - 1]);
    }
    edges.push_back(std::move(out));
  }
  return ConductanceTrajectory(traj.lattice(), rw, std::move(edges));
}

ConductanceTrajectory shift_environment(const ConductanceTrajectory& traj, const Vertex& x, double t) {
  const Lattice& lat = traj.lattice();
  if (!lat.is_torus() && x != Vertex{}) throw std::domain_error("spatial shifts require a torus");
  const Vertex minus_x = Vertex{} - x;
  std::vector<Piecewise> edges(lat.num_edges());
  for (EdgeId e = 0; e < lat.num_edges(); ++e) {
    const EdgeId source = lat.is_torus() ? lat.translate_edge(e, minus_x) : e;
    Piecewise pw = traj.pieces(source);
    for (double& b : pw.breakpoints) b += t;
    edges[e] = std::move(pw);
  }
  const TimeWindow w{traj.window().start + t, traj.window().end + t};
  return ConductanceTrajectory(lat, w, std::move(edges));
}

ConductanceTrajectory restrict_window(const ConductanceTrajectory& traj, double a, double b) {
  const TimeWindow w{a, b};
  w.validate();
  if (!traj.window().contains(w)) throw std::domain_error("sub-window outside the trajectory window");
  std::vector<Piecewise> edges;
  edges.reserve(traj.edges().size());
  for (const Piecewise& pw : traj.edges()) {
    Piecewise out;
    const std::size_t first = pw.piece_at(a);
    out.breakpoints.push_back(a);
    out.values.push_back(pw.values[first]);
    for (std::size_t i = first + 1; i < pw.values.size() && pw.breakpoints[i] < b; ++i) {
      out.breakpoints.push_back(pw.breakpoints[i]);
      out.values.push_back(pw.values[i]);
    }
    edges.push_back(std::move(out));
  }
  return ConductanceTrajectory(traj.lattice(), w, std::move(edges));
}

namespace {

/// Law of eta_0(0) on Z^d as (probability, value) atoms; empty when not discrete.
std::vector<std::pair<double, double>> vertex_conductance_law(const EnvironmentKind& kind, int dimension) {
  const int degree = 2 * dimension;
  std::vector<std::pair<double, double>> atoms;
  if (auto* s = std::get_if<StaticEnv>(&kind)) {
    atoms.emplace_back(1.0, degree * s->conductance);
  } else if (auto* dp = std::get_if<DynamicalPercolation>(&kind)) {
    auto pmf = binomial_pmf(degree, dp->p);
    for (int k = 0; k <= degree; ++k) atoms.emplace_back(pmf[static_cast<std::size_t>(k)], k);
  } else if (auto* ex = std::get_if<Exclusion>(&kind)) {
    atoms.emplace_back(ex->density, degree * ex->high);
    auto pmf = binomial_pmf(degree, ex->density);
    for (int k = 0; k <= degree; ++k) {
      atoms.emplace_back((1.0 - ex->density) * pmf[static_cast<std::size_t>(k)],
                         k * ex->high + (degree - k) * ex->low);
    }
  }
  return atoms;
}

}  // namespace

EnvNorm infinitesimal_norm(const EnvironmentKind& kind, int dimension, int p, const NormOptions& options) {
  if (p < 1) throw std::domain_error("norm exponent p must be >= 1");
  if (dimension != 1 && dimension != 2) throw std::domain_error("dimension must be 1 or 2");
  validate_kind(kind);
  EnvNorm norm;
  norm.p = p;

  if (options.method == NormMethod::Analytic) {
    norm.method = NormMethod::Analytic;
    double moment = 0.0;
    if (auto* ph = std::get_if<DeterministicPhase>(&kind)) {
      // eta_t(0) = d * a * (1 + sin(phi)), phi uniform; E[sin^j] = C(j, j/2) / 2^j for even j.
      double sum = 0.0;
      for (int j = 0; j <= p; j += 2) {
        sum += binomial_coefficient(p, j) * binomial_coefficient(j, j / 2) / std::ldexp(1.0, j);
      }
      moment = std::pow(dimension * ph->amplitude, p) * sum;
    } else {
      for (const auto& [prob, value] : vertex_conductance_law(kind, dimension)) {
        moment += prob * std::pow(value, p);
      }
    }
    norm.value = std::pow(moment, 1.0 / p);
    return norm;
  }

  if (options.replicas < 2) throw std::domain_error("Monte Carlo norm needs at least two replicas");
  if (!(options.epsilon > 0.0)) throw std::domain_error("epsilon must be > 0");
  norm.method = NormMethod::MonteCarlo;
  norm.epsilon = options.epsilon;
  const double eps = options.epsilon;
  const Lattice lat = Lattice::box(dimension, 1);
  const EnvironmentSpec spec{kind, lat, TimeWindow{0.0, eps}};
  const VertexId origin = lat.vertex_id(lat.origin());
  std::vector<double> full(static_cast<std::size_t>(options.replicas));
  std::vector<double> half(full.size());
  for (std::size_t i = 0; i < full.size(); ++i) {
    LazyEnvironment env(spec, derive_seed(options.seed, i));
    double a = 0.0;
    double b = 0.0;
    for (EdgeId e : lat.incident(origin)) {
      a += env.pieces(e).integral(0.0, eps, eps);
      b += env.pieces(e).integral(0.0, eps / 2, eps);
    }
    full[i] = std::pow(a, p);
    half[i] = std::pow(b, p);
  }
  const Summary s = summarize(full);
  const Summary h = summarize(half);
  norm.value = std::pow(s.mean, 1.0 / p) / eps;
  norm.value_half_epsilon = std::pow(h.mean, 1.0 / p) / (eps / 2);
  if (s.mean > 0.0) {
    norm.ci_halfwidth = 3.0 * s.standard_error * std::pow(s.mean, 1.0 / p - 1.0) / (p * eps);
  }
  norm.flagged = norm.ci_halfwidth > options.tolerance;
  return norm;
}

nlohmann::json lattice_to_json(const Lattice& lattice) {
  return {{"dimension", lattice.dimension()},
          {"mode", lattice.is_torus() ? "torus" : "box"},
          {"side_length", lattice.side_length()}};
}

Lattice lattice_from_json(const nlohmann::json& j) {
  const std::string mode = j.at("mode").get<std::string>();
  if (mode != "torus" && mode != "box") throw std::domain_error("lattice mode must be 'torus' or 'box'");
  return Lattice(j.at("dimension").get<int>(), mode == "torus" ? LatticeMode::Torus : LatticeMode::CensoredBox,
                 j.at("side_length").get<int>());
}

nlohmann::json to_json(const ConductanceTrajectory& traj) {
  nlohmann::json edges = nlohmann::json::array();
  for (EdgeId e = 0; e < traj.edges().size(); ++e) {
    edges.push_back({{"edge_id", e}, {"breakpoints", traj.pieces(e).breakpoints}, {"values", traj.pieces(e).values}});
  }
  return {{"lattice", lattice_to_json(traj.lattice())},
          {"window", {{"start", traj.window().start}, {"end", traj.window().end}}},
          {"edges", std::move(edges)}};
}

ConductanceTrajectory trajectory_from_json(const nlohmann::json& j) {
  Lattice lat = lattice_from_json(j.at("lattice"));
  TimeWindow w{j.at("window").at("start").get<double>(), j.at("window").at("end").get<double>()};
  std::vector<Piecewise> edges(lat.num_edges());
  for (const auto& item : j.at("edges")) {
    const auto id = item.at("edge_id").get<std::size_t>();
    if (id >= edges.size()) throw std::domain_error("edge_id out of range");
    edges[id] = Piecewise{item.at("breakpoints").get<std::vector<double>>(), item.at("values").get<std::vector<double>>()};
  }
  return ConductanceTrajectory(std::move(lat), w, std::move(edges));
}

nlohmann::json to_json(const EnvNorm& norm) {
  nlohmann::json j{{"p", norm.p},
                   {"value", norm.value},
                   {"method", norm.method == NormMethod::Analytic ? "analytic" : "monte-carlo"},
                   {"ci_halfwidth", norm.ci_halfwidth}};
  if (norm.method == NormMethod::MonteCarlo) {
    j["epsilon"] = norm.epsilon;
    j["value_half_epsilon"] = norm.value_half_epsilon;
    j["flagged"] = norm.flagged;
  }
  return j;
}

}  // namespace dynrcm
