#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dynrcm/lattice.hpp"
#include "dynrcm/rng.hpp"

namespace dynrcm {

struct TimeWindow {
  double start = 0.0;
  double end = 1.0;

  double length() const noexcept { return end - start; }
  bool contains(double t) const noexcept { return start <= t && t <= end; }
  bool contains(const TimeWindow& w) const noexcept { return start <= w.start && w.end <= end; }
  void validate() const;

  friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

/// Piecewise-constant càdlàg function on a window: `values[i]` holds on
/// [breakpoints[i], breakpoints[i+1]), the last piece runs to the window end.
/// `breakpoints.front()` is the window start.
struct Piecewise {
  std::vector<double> breakpoints;
  std::vector<double> values;

  static Piecewise constant(const TimeWindow& w, double value) { return {{w.start}, {value}}; }

  std::size_t piece_at(double t) const;
  double value_at(double t) const { return values[piece_at(t)]; }
  /// Integral over [a, b] clipped to the breakpoints; `window_end` closes the last piece.
  double integral(double a, double b, double window_end) const;
  double max_value() const;

  friend bool operator==(const Piecewise&, const Piecewise&) = default;
};

/// Read-only access to per-edge conductance functions. Implementations may
/// materialize edges lazily, so access is non-const and not thread-safe.
class ConductanceSource {
 public:
  virtual ~ConductanceSource() = default;
  virtual const Lattice& lattice() const = 0;
  virtual TimeWindow window() const = 0;
  virtual const Piecewise& pieces(EdgeId e) = 0;
};

class ConductanceTrajectory {
 public:
  /// Validates: one function per edge, first breakpoint at window start,
  /// strictly increasing breakpoints inside the window, values >= 0.
  ConductanceTrajectory(Lattice lattice, TimeWindow window, std::vector<Piecewise> edges);

  const Lattice& lattice() const noexcept { return lattice_; }
  const TimeWindow& window() const noexcept { return window_; }
  const Piecewise& pieces(EdgeId e) const { return edges_.at(e); }
  const std::vector<Piecewise>& edges() const noexcept { return edges_; }

  double value(EdgeId e, double t) const;
  /// eta_t(x): sum over incident edges.
  double total_conductance(VertexId x, double t) const;
  double integral(EdgeId e, double a, double b) const;
  std::size_t breakpoint_count() const;

  friend bool operator==(const ConductanceTrajectory&, const ConductanceTrajectory&) = default;

 private:
  Lattice lattice_;
  TimeWindow window_;
  std::vector<Piecewise> edges_;
};

/// Adapter for walkers that accept a ConductanceSource.
class TrajectorySource final : public ConductanceSource {
 public:
  explicit TrajectorySource(const ConductanceTrajectory& traj) : traj_(traj) {}
  const Lattice& lattice() const override { return traj_.lattice(); }
  TimeWindow window() const override { return traj_.window(); }
  const Piecewise& pieces(EdgeId e) override { return traj_.pieces(e); }

 private:
  const ConductanceTrajectory& traj_;
};

struct StaticEnv {
  double conductance = 1.0;

  friend bool operator==(const StaticEnv&, const StaticEnv&) = default;
};

/// Each edge refreshes at rate `mu`; a refresh sets the edge open (1) with probability p.
struct DynamicalPercolation {
  double p = 0.5;
  double mu = 1.0;

  friend bool operator==(const DynamicalPercolation&, const DynamicalPercolation&) = default;
};

/// Symmetric exclusion (stirring at `hop_rate` per edge) at stationary density;
/// an edge carries `high` if at least one endpoint is occupied, else `low`.
struct Exclusion {
  double density = 0.5;
  double hop_rate = 1.0;
  double low = 0.0;
  double high = 1.0;

  friend bool operator==(const Exclusion&, const Exclusion&) = default;
};

/// All edges share amplitude * (1 + sin(t + theta)) / 2, theta uniform on [0, 2pi),
/// discretized to midpoint values on a grid of width `step`.
struct DeterministicPhase {
  double amplitude = 1.0;
  double step = 0.01;

  friend bool operator==(const DeterministicPhase&, const DeterministicPhase&) = default;
};

using EnvironmentKind = std::variant<StaticEnv, DynamicalPercolation, Exclusion, DeterministicPhase>;

std::string kind_name(const EnvironmentKind& kind);

struct EnvironmentSpec {
  EnvironmentKind kind;
  Lattice lattice;
  TimeWindow window;

  /// Throws std::domain_error on invalid parameters.
  void validate() const;
};

ConductanceTrajectory sample_environment(const EnvironmentSpec& spec, const RandomSeed& seed);

/// Exclusion sample with its driving particle configuration.
struct ExclusionSample {
  ConductanceTrajectory trajectory;
  std::vector<bool> initial_occupancy;  // by vertex id
  std::vector<std::pair<double, EdgeId>> stirs;  // (time, edge) swap events, sorted

  std::size_t particle_count_at(double t) const;
};

ExclusionSample sample_exclusion(const EnvironmentSpec& spec, const RandomSeed& seed);

/// Lazily materializes the same environment `sample_environment` produces
/// for (spec, seed), edge by edge. Independent-edge kinds sample only the
/// edges that are touched; Exclusion materializes everything on first use.
class LazyEnvironment final : public ConductanceSource {
 public:
  LazyEnvironment(EnvironmentSpec spec, RandomSeed seed);

  const Lattice& lattice() const override { return spec_.lattice; }
  TimeWindow window() const override { return spec_.window; }
  const Piecewise& pieces(EdgeId e) override;

  std::size_t materialized_edges() const noexcept { return materialized_; }

 private:
  EnvironmentSpec spec_;
  RandomSeed seed_;
  std::vector<std::optional<Piecewise>> cache_;
  std::optional<Piecewise> shared_;
  std::size_t materialized_ = 0;
};

ConductanceTrajectory reverse_environment(const ConductanceTrajectory& traj);

/// (tau_{x,t} eta)_s(e) = eta_{s-t}(e - x). Nonzero x requires a torus.
ConductanceTrajectory shift_environment(const ConductanceTrajectory& traj, const Vertex& x, double t);

/// Restriction to a sub-window [a, b].
ConductanceTrajectory restrict_window(const ConductanceTrajectory& traj, double a, double b);

enum class NormMethod { Analytic, MonteCarlo };

struct EnvNorm {
  int p = 1;
  double value = 0.0;
  NormMethod method = NormMethod::Analytic;
  double ci_halfwidth = 0.0;
  double epsilon = 0.0;            // Monte Carlo only
  double value_half_epsilon = 0.0; // Monte Carlo sensitivity at epsilon / 2
  bool flagged = false;            // CI wider than the requested tolerance
};

struct NormOptions {
  NormMethod method = NormMethod::Analytic;
  double epsilon = 0x1p-10;
  int replicas = 100000;
  RandomSeed seed{};
  double tolerance = 0.05;  // CI halfwidth above this flags the result
};

/// Infinitesimal p-norm of the stationary law on Z^d (d taken from the spec's lattice).
EnvNorm infinitesimal_norm(const EnvironmentKind& kind, int dimension, int p, const NormOptions& options = {});

nlohmann::json to_json(const ConductanceTrajectory& traj);
ConductanceTrajectory trajectory_from_json(const nlohmann::json& j);
nlohmann::json lattice_to_json(const Lattice& lattice);
Lattice lattice_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EnvNorm& norm);

}  // namespace dynrcm
