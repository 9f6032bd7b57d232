#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dynrcm/environment.hpp"
#include "dynrcm/verify.hpp"

namespace dynrcm {

/// One label in [0, label_count) per vertex, indexed by vertex id.
struct OpinionField {
  Lattice lattice = Lattice::torus(1, 2);
  std::vector<int> labels;
  int label_count = 2;
  double time = 0.0;

  void validate() const;
  bool is_consensus() const noexcept;

  /// Labels split by vertex id: the first half gets 0, the rest 1.
  static OpinionField half_half(const Lattice& lattice);
  static OpinionField constant(const Lattice& lattice, int label, int label_count = 2);
  /// Independent uniform labels.
  static OpinionField random(const Lattice& lattice, int label_count, const RandomSeed& seed);
};

struct Flip {
  double time = 0.0;
  VertexId vertex = 0;
  int label = 0;

  friend bool operator==(const Flip&, const Flip&) = default;
};

/// Only label-changing copies are recorded.
struct VoterTrace {
  OpinionField initial;
  std::vector<Flip> flips;
  TimeWindow horizon;
  std::optional<double> consensus_time;

  OpinionField at(double t) const;
};

/// Voter model on a torus over horizon [a, b] in a sampled environment. Each
/// edge carries two directed clocks at rate eta_t(e); a ring makes the
/// listener copy the speaker. Simulation stops at consensus.
VoterTrace run_voter(const EnvironmentSpec& spec, const OpinionField& initial, const TimeWindow& horizon,
                     const RandomSeed& seed);

/// Same, in a given environment trajectory.
VoterTrace run_voter(const ConductanceTrajectory& traj, const OpinionField& initial, const TimeWindow& horizon,
                     const RandomSeed& seed);

/// Label frequency at `site` at time t against the annealed dual prediction
/// sum_y P^{R(eta)}_{-t,0}(site, y) 1{initial(y) = label}, one voter run per
/// sampled environment on [0, t]. Pass when every label is within 3 sigma.
TestReport duality_check(const EnvironmentSpec& spec, const OpinionField& initial, const Vertex& site, double t,
                         int replicas, const RandomSeed& seed, const VerifyOptions& options = {});

struct ConsensusStats {
  double horizon = 0.0;
  int replicas = 0;
  double fraction = 0.0;
  double standard_error = 0.0;
  std::vector<double> consensus_times;  // reached runs only, sorted
};

/// Fraction of runs from independent uniform binary fields reaching consensus by `horizon`.
ConsensusStats consensus_fraction(const EnvironmentSpec& spec, double horizon, int replicas, const RandomSeed& seed,
                                  int threads = 1);

TestReport consensus_report(const ConsensusStats& stats, double required_fraction);

nlohmann::json to_json(const ConsensusStats& stats);
void write_trace_csv(const VoterTrace& trace, const std::string& path);

}  // namespace dynrcm
