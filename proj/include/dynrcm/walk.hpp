#pragma once

#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "dynrcm/environment.hpp"
#include "dynrcm/lattice.hpp"
#include "dynrcm/point_process.hpp"
#include "dynrcm/rng.hpp"

namespace dynrcm {

inline constexpr std::size_t kDefaultJumpCap = 1'000'000;

struct Jump {
  double time = 0.0;
  VertexId from = 0;
  VertexId to = 0;

  friend bool operator==(const Jump&, const Jump&) = default;
};

/// Càdlàg lattice path over a window, stored as its value at the window
/// start plus a time-sorted jump list.
///
/// When more than the jump cap of jumps occur on one side of the start, that
/// side is truncated: the path is undefined at and beyond `forward_limit`
/// (resp. at and before `backward_limit`).
struct WalkPath {
  Lattice lattice = Lattice::box(1, 0);
  TimeWindow window;
  VertexId start = 0;
  double start_time = 0.0;
  VertexId initial = 0;
  std::vector<Jump> jumps;
  bool exploded_forward = false;
  bool exploded_backward = false;
  bool boundary_hit = false;
  double forward_limit = std::numeric_limits<double>::infinity();
  double backward_limit = -std::numeric_limits<double>::infinity();

  bool defined_at(double t) const noexcept;
  /// Throws std::domain_error outside the window or in an exploded region.
  VertexId position_id(double t) const;
  Vertex position(double t) const { return lattice.vertex(position_id(t)); }
  VertexId final_position() const noexcept { return jumps.empty() ? initial : jumps.back().to; }
};

/// Equality as functions of time (the start point is not compared).
bool same_function(const WalkPath& a, const WalkPath& b);

/// F_{u,s}(U): follows the clock rings forwards and backwards from (u, s).
/// The backward half is traced forwards through R(U) and reflected back.
WalkPath build_path(const PointProcessSample& u, const Vertex& start, double start_time,
                    std::size_t jump_cap = kDefaultJumpCap);

/// F_{u,s}(U^k) with U^k the rings on edges inside the censored box.
WalkPath censored_path(const PointProcessSample& u, const Lattice& box, const Vertex& start, double start_time,
                       std::size_t jump_cap = kDefaultJumpCap);

struct JumpCount {
  std::size_t count = 0;
  bool lower_bound = false;  // interval reaches into an exploded region
};

JumpCount jump_count(const WalkPath& path, double a, double b);

/// Left-limit reversal: a jump a -> b at time t becomes b -> a at time -t.
WalkPath reverse_path(const WalkPath& path);

/// (zeta_{r+t} - x)_r, matching shift_point_process: shift_path(F_{u,s}(U), x, t)
/// equals F_{u-x, s-t}(shift_point_process(U, x, t)).
WalkPath shift_path(const WalkPath& path, const Vertex& x, double t);

struct WalkSampling {
  bool forward = true;
  bool backward = true;
  std::size_t jump_cap = kDefaultJumpCap;
};

/// Samples the walk started at (u, s) directly from the competing
/// exponential clocks of the incident edges, without materializing U. Same
/// law as build_path(sample_point_process(...)). Forward and backward halves
/// use sub-streams 0 and 1 of `seed`.
WalkPath sample_walk(ConductanceSource& env, const Vertex& start, double start_time, const RandomSeed& seed,
                     const WalkSampling& options = {});

/// Two conditionally independent walks in `traj`, built from independent
/// point processes. Equal seeds are rejected.
std::pair<WalkPath, WalkPath> walk_pair(const ConductanceTrajectory& traj, const Vertex& x, double x_time,
                                        const Vertex& y, double y_time, const RandomSeed& seed_x,
                                        const RandomSeed& seed_y, std::size_t jump_cap = kDefaultJumpCap);

nlohmann::json to_json(const WalkPath& path);

}  // namespace dynrcm
