#include "dynrcm/voter.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "dynrcm/kernel.hpp"
#include "dynrcm/point_process.hpp"
#include "dynrcm/stats.hpp"

namespace dynrcm {

namespace {

// Clock processes are sampled in blocks of this length so a run that reaches
// consensus early never pays for the rest of the horizon.
constexpr double kBlockLength = 8.0;

void require_torus(const Lattice& lat) {
  if (!lat.is_torus()) throw std::domain_error("the voter model runs on a torus");
}

}  // namespace

void OpinionField::validate() const {
  if (label_count < 1) throw std::domain_error("opinion field needs at least one label");
  if (labels.size() != lattice.num_vertices()) throw std::domain_error("opinion field must label every vertex");
  for (int l : labels) {
    if (l < 0 || l >= label_count) throw std::domain_error("opinion label outside the declared label set");
  }
}

bool OpinionField::is_consensus() const noexcept {
  return std::adjacent_find(labels.begin(), labels.end(), std::not_equal_to<>()) == labels.end();
}

OpinionField OpinionField::half_half(const Lattice& lattice) {
  OpinionField f{lattice, std::vector<int>(lattice.num_vertices(), 1), 2, 0.0};
  std::fill(f.labels.begin(), f.labels.begin() + static_cast<std::ptrdiff_t>(f.labels.size() / 2), 0);
  return f;
}

OpinionField OpinionField::constant(const Lattice& lattice, int label, int label_count) {
  OpinionField f{lattice, std::vector<int>(lattice.num_vertices(), label), label_count, 0.0};
  f.validate();
  return f;
}

OpinionField OpinionField::random(const Lattice& lattice, int label_count, const RandomSeed& seed) {
  if (label_count < 1) throw std::domain_error("opinion field needs at least one label");
  Stream rng(seed);
  OpinionField f{lattice, std::vector<int>(lattice.num_vertices()), label_count, 0.0};
  for (int& l : f.labels) l = static_cast<int>(rng.below(static_cast<std::uint64_t>(label_count)));
  return f;
}

OpinionField VoterTrace::at(double t) const {
  if (!horizon.contains(t)) throw std::domain_error("voter trace queried outside its horizon");
  OpinionField f = initial;
  f.time = t;
  for (const Flip& flip : flips) {
    if (flip.time > t) break;
    f.labels[flip.vertex] = flip.label;
  }
  return f;
}

VoterTrace run_voter(const ConductanceTrajectory& traj, const OpinionField& initial, const TimeWindow& horizon,
                     const RandomSeed& seed) {
  const Lattice& lat = traj.lattice();
  require_torus(lat);
  initial.validate();
  if (!(initial.lattice == lat)) throw std::domain_error("opinion field lives on a different lattice");
  horizon.validate();
  if (!traj.window().contains(horizon)) throw std::domain_error("voter horizon outside the environment window");

  VoterTrace trace;
  trace.initial = initial;
  trace.initial.time = horizon.start;
  trace.horizon = horizon;
  std::vector<int> labels = initial.labels;
  // Number of vertices holding each label; consensus when one count is n.
  std::vector<std::size_t> tally(static_cast<std::size_t>(initial.label_count), 0);
  for (int l : labels) ++tally[static_cast<std::size_t>(l)];
  const std::size_t n = labels.size();
  auto consensus = [&] { return std::find(tally.begin(), tally.end(), n) != tally.end(); };
  if (consensus()) {
    trace.consensus_time = horizon.start;
    return trace;
  }

  std::uint64_t block = 0;
  for (double a = horizon.start; a < horizon.end; a += kBlockLength, ++block) {
    const double b = std::min(horizon.end, a + kBlockLength);
    const ConductanceTrajectory piece = restrict_window(traj, a, b);
    // Clock 0: edge.from listens to edge.to; clock 1: edge.to listens to edge.from.
    const PointProcessSample c0 = sample_point_process(piece, derive_seed(seed, {0, block}));
    const PointProcessSample c1 = sample_point_process(piece, derive_seed(seed, {1, block}));
    const auto& e0 = c0.events();
    const auto& e1 = c1.events();
    std::size_t i0 = 0;
    std::size_t i1 = 0;
    while (i0 < e0.size() || i1 < e1.size()) {
      const bool first = i1 == e1.size() || (i0 < e0.size() && e0[i0].time <= e1[i1].time);
      const ClockRing ring = first ? e0[i0++] : e1[i1++];
      const VertexId listener = first ? lat.edge_from(ring.edge) : lat.edge_to(ring.edge);
      const VertexId speaker = first ? lat.edge_to(ring.edge) : lat.edge_from(ring.edge);
      const int l = labels[speaker];
      if (labels[listener] == l) continue;
      --tally[static_cast<std::size_t>(labels[listener])];
      ++tally[static_cast<std::size_t>(l)];
      labels[listener] = l;
      trace.flips.push_back({ring.time, listener, l});
      if (consensus()) {
        trace.consensus_time = ring.time;
        return trace;
      }
    }
  }
  return trace;
}

VoterTrace run_voter(const EnvironmentSpec& spec, const OpinionField& initial, const TimeWindow& horizon,
                     const RandomSeed& seed) {
  require_torus(spec.lattice);
  if (!spec.window.contains(horizon)) throw std::domain_error("voter horizon outside the environment window");
  const EnvironmentSpec local{spec.kind, spec.lattice, horizon};
  return run_voter(sample_environment(local, derive_seed(seed, 0)), initial, horizon, derive_seed(seed, 1));
}

TestReport duality_check(const EnvironmentSpec& spec, const OpinionField& initial, const Vertex& site, double t,
                         int replicas, const RandomSeed& seed, const VerifyOptions& options) {
  require_torus(spec.lattice);
  initial.validate();
  if (!(initial.lattice == spec.lattice)) throw std::domain_error("opinion field lives on a different lattice");
  if (!(t >= 0.0)) throw std::domain_error("duality check needs t >= 0");
  if (replicas < 2) throw std::domain_error("duality check needs at least two replicas");
  if (spec.lattice.num_vertices() > kMaxKernelVertices) throw std::domain_error("lattice exceeds the kernel size cap");
  const Lattice& lat = spec.lattice;
  const VertexId s = lat.vertex_id(site);
  const auto labels = static_cast<std::size_t>(initial.label_count);
  EnvironmentSpec local{spec.kind, lat, TimeWindow{0.0, std::max(t, 1e-9)}};
  local.validate();
  const TimeWindow horizon{0.0, t};

  // Per replica and label: indicator minus predicted probability.
  std::vector<std::vector<double>> indicator(labels, std::vector<double>(static_cast<std::size_t>(replicas)));
  std::vector<std::vector<double>> predicted(labels, std::vector<double>(static_cast<std::size_t>(replicas)));
  parallel_for(static_cast<std::size_t>(replicas), options.threads, [&](std::size_t i) {
    const ConductanceTrajectory traj = sample_environment(local, derive_seed(seed, {i, 0}));
    int label = initial.labels[s];
    std::vector<double> p(labels, 0.0);
    if (t > 0.0) {
      const VoterTrace trace = run_voter(traj, initial, horizon, derive_seed(seed, {i, 1}));
      label = trace.at(t).labels[s];
      const ConductanceTrajectory reversed = reverse_environment(traj);
      std::vector<double> row(lat.num_vertices(), 0.0);
      row[s] = 1.0;
      propagate_rows(reversed, row, 1, -t, 0.0, options.kernel_tolerance);
      for (VertexId y = 0; y < row.size(); ++y) p[static_cast<std::size_t>(initial.labels[y])] += row[y];
    } else {
      p[static_cast<std::size_t>(label)] = 1.0;
    }
    for (std::size_t l = 0; l < labels; ++l) {
      indicator[l][i] = static_cast<int>(l) == label ? 1.0 : 0.0;
      predicted[l][i] = p[l];
    }
  });

  TestReport r;
  r.name = "voter_duality";
  r.kind = ReportKind::Identity;
  r.replicas = replicas;
  nlohmann::json per_label = nlohmann::json::array();
  bool all_within = true;
  double worst_z = -1.0;
  for (std::size_t l = 0; l < labels; ++l) {
    std::vector<double> diff(static_cast<std::size_t>(replicas));
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = indicator[l][i] - predicted[l][i];
    const Summary d = summarize(diff);
    const double freq = summarize(indicator[l]).mean;
    const double pred = summarize(predicted[l]).mean;
    const bool within = std::abs(d.mean) <= 3.0 * d.standard_error;
    all_within = all_within && within;
    const double z = d.standard_error > 0.0 ? std::abs(d.mean) / d.standard_error : (d.mean == 0.0 ? 0.0 : 1e300);
    per_label.push_back({{"label", l}, {"frequency", freq}, {"predicted", pred}, {"standard_error", d.standard_error},
                         {"within_3_sigma", within}});
    if (z > worst_z) {
      worst_z = z;
      r.empirical_value = freq;
      r.bound_or_target = freq - d.mean;
      r.standard_error = d.standard_error;
    }
  }
  r.metadata = {{"environment", kind_name(spec.kind)},
                {"lattice", lattice_to_json(lat)},
                {"site", std::vector<int>(site.coords.begin(), site.coords.begin() + lat.dimension())},
                {"t", t},
                {"labels", per_label},
                {"seed", {{"master", seed.master}, {"path", seed.path}}}};
  r.decide();
  if (!all_within) r.verdict = Verdict::Fail;
  return r;
}

ConsensusStats consensus_fraction(const EnvironmentSpec& spec, double horizon, int replicas, const RandomSeed& seed,
                                  int threads) {
  require_torus(spec.lattice);
  if (!(horizon > 0.0)) throw std::domain_error("consensus horizon must be > 0");
  if (replicas < 2) throw std::domain_error("consensus fraction needs at least two replicas");
  const EnvironmentSpec local{spec.kind, spec.lattice, TimeWindow{0.0, horizon}};
  local.validate();
  std::vector<double> reached(static_cast<std::size_t>(replicas));
  std::vector<double> times(reached.size(), -1.0);
  parallel_for(reached.size(), threads, [&](std::size_t i) {
    const OpinionField initial = OpinionField::random(spec.lattice, 2, derive_seed(seed, {i, 2}));
    const VoterTrace trace = run_voter(local, initial, local.window, derive_seed(seed, i));
    reached[i] = trace.consensus_time ? 1.0 : 0.0;
    if (trace.consensus_time) times[i] = *trace.consensus_time;
  });
  ConsensusStats out;
  out.horizon = horizon;
  out.replicas = replicas;
  const Summary s = summarize(reached);
  out.fraction = s.mean;
  out.standard_error = s.standard_error;
  for (double t : times) {
    if (t >= 0.0) out.consensus_times.push_back(t);
  }
  std::sort(out.consensus_times.begin(), out.consensus_times.end());
  return out;
}

TestReport consensus_report(const ConsensusStats& stats, double required_fraction) {
  TestReport r;
  r.name = "voter_consensus_fraction";
  r.kind = ReportKind::LowerBound;
  r.empirical_value = stats.fraction;
  r.bound_or_target = required_fraction;
  r.standard_error = 0.0;
  r.replicas = stats.replicas;
  r.metadata = to_json(stats);
  r.decide();
  return r;
}

nlohmann::json to_json(const ConsensusStats& stats) {
  const double median_time = stats.consensus_times.empty() ? -1.0 : median(stats.consensus_times);
  return {{"horizon", stats.horizon},
          {"replicas", stats.replicas},
          {"fraction", stats.fraction},
          {"standard_error", stats.standard_error},
          {"reached", stats.consensus_times.size()},
          {"median_consensus_time", median_time}};
}

void write_trace_csv(const VoterTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  out << "time,vertex,label\n";
  const Lattice& lat = trace.initial.lattice;
  for (VertexId v = 0; v < trace.initial.labels.size(); ++v) {
    out << trace.horizon.start << ",\"" << to_string(lat.vertex(v)) << "\"," << trace.initial.labels[v] << '\n';
  }
  for (const Flip& f : trace.flips) out << f.time << ",\"" << to_string(lat.vertex(f.vertex)) << "\"," << f.label << '\n';
}

}  // namespace dynrcm
