#pragma once

#include <vector>

#include <nlohmann/json.hpp>

#include "dynrcm/environment.hpp"
#include "dynrcm/walk.hpp"

namespace dynrcm {

struct CollisionInterval {
  double start = 0.0;
  double end = 0.0;
  bool closed_right = false;  // true when the interval runs to the horizon end
};

struct CollisionRecord {
  TimeWindow horizon;
  std::size_t integer_collisions = 0;
  double lebesgue_measure = 0.0;
  std::vector<CollisionInterval> intervals;
  /// \int_0^1 |{n >= 0 : X_{n+s} = Y_{n+s}, n+s in horizon}| ds, from the same partition.
  double folded_measure = 0.0;
  double folded_relative_error = 0.0;
};

/// Exact collision statistics of two paths on a horizon with start >= 0.
/// Positions at jump times use the càdlàg (post-jump) value. Throws when
/// either path is undefined somewhere on the horizon. The folded measure and
/// its relative disagreement with the direct measure are reported, not enforced.
CollisionRecord collision_stats(const WalkPath& x, const WalkPath& y, const TimeWindow& horizon);

/// Folded form of the collision measure, computed independently of the
/// interval lengths by integrating the count over s in [0, 1).
double folded_collision_measure(const std::vector<CollisionInterval>& intervals);

/// Integer times n in [horizon.start, horizon.end] with X_n = Y_n.
std::vector<long> integer_collision_times(const WalkPath& x, const WalkPath& y, const TimeWindow& horizon);

nlohmann::json to_json(const CollisionRecord& record);

}  // namespace dynrcm
