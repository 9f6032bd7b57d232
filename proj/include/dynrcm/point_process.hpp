#pragma once

#include <vector>

#include "dynrcm/environment.hpp"
#include "dynrcm/lattice.hpp"
#include "dynrcm/rng.hpp"

namespace dynrcm {

struct ClockRing {
  double time = 0.0;
  EdgeId edge = 0;

  friend bool operator==(const ClockRing&, const ClockRing&) = default;
};

/// Time-sorted clock rings on the edges of a lattice over a window.
/// Times are strictly increasing; construction rejects ties.
class PointProcessSample {
 public:
  PointProcessSample(Lattice lattice, TimeWindow window, std::vector<ClockRing> events);

  const Lattice& lattice() const noexcept { return lattice_; }
  const TimeWindow& window() const noexcept { return window_; }
  const std::vector<ClockRing>& events() const noexcept { return events_; }

  friend bool operator==(const PointProcessSample&, const PointProcessSample&) = default;

 private:
  Lattice lattice_;
  TimeWindow window_;
  std::vector<ClockRing> events_;
};

/// Inhomogeneous Poisson process with intensity `traj`. Coinciding times
/// (possible only through rounding) are resolved by resampling the later ring
/// uniformly within its constant piece.
PointProcessSample sample_point_process(const ConductanceTrajectory& traj, const RandomSeed& seed);

/// R(U) = {(e, -s)}.
PointProcessSample reverse_point_process(const PointProcessSample& u);

/// {(e - x, s - t)}. Nonzero x requires a torus.
PointProcessSample shift_point_process(const PointProcessSample& u, const Vertex& x, double t);

/// U restricted to the edges of `box` (both endpoints inside), relabelled to box edge ids.
PointProcessSample restrict_to_box(const PointProcessSample& u, const Lattice& box);

}  // namespace dynrcm
