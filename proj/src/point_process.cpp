#include "dynrcm/point_process.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace dynrcm {

PointProcessSample::PointProcessSample(Lattice lattice, TimeWindow window, std::vector<ClockRing> events)
    : lattice_(std::move(lattice)), window_(window), events_(std::move(events)) {
  window_.validate();
  for (std::size_t i = 0; i < events_.size(); ++i) {
    if (events_[i].edge >= lattice_.num_edges()) throw std::domain_error("clock ring on an unknown edge");
    if (!window_.contains(events_[i].time)) throw std::domain_error("clock ring outside the window");
    if (i > 0 && !(events_[i].time > events_[i - 1].time)) {
      throw std::domain_error("clock ring times must be strictly increasing");
    }
  }
}

PointProcessSample sample_point_process(const ConductanceTrajectory& traj, const RandomSeed& seed) {
  struct Draw {
    double time;
    EdgeId edge;
    double lo;
    double hi;
  };
  Stream rng(seed);
  const TimeWindow w = traj.window();
  std::vector<Draw> draws;
  for (EdgeId e = 0; e < traj.edges().size(); ++e) {
    const Piecewise& pw = traj.pieces(e);
    for (std::size_t i = 0; i < pw.values.size(); ++i) {
      const double rate = pw.values[i];
      if (rate <= 0.0) continue;
      const double lo = pw.breakpoints[i];
      const double hi = i + 1 < pw.breakpoints.size() ? pw.breakpoints[i + 1] : w.end;
      for (double t = lo + rng.exponential(rate); t < hi; t += rng.exponential(rate)) {
        draws.push_back({t, e, lo, hi});
      }
    }
  }
  auto by_time = [](const Draw& a, const Draw& b) { return a.time < b.time || (a.time == b.time && a.edge < b.edge); };
  std::sort(draws.begin(), draws.end(), by_time);
  for (bool clean = false; !clean;) {
    clean = true;
    for (std::size_t i = 1; i < draws.size(); ++i) {
      if (draws[i].time == draws[i - 1].time) {
        clean = false;
        Draw& d = draws[i];
        do {
          d.time = d.lo + (d.hi - d.lo) * rng.uniform_open();
        } while (!(d.time > d.lo && d.time < d.hi));
      }
    }
    if (!clean) std::sort(draws.begin(), draws.end(), by_time);
  }
  std::vector<ClockRing> events;
  events.reserve(draws.size());
  for (const Draw& d : draws) events.push_back({d.time, d.edge});
  return PointProcessSample(traj.lattice(), w, std::move(events));
}

PointProcessSample reverse_point_process(const PointProcessSample& u) {
  std::vector<ClockRing> events(u.events().rbegin(), u.events().rend());
  for (ClockRing& r : events) r.time = -r.time;
  return PointProcessSample(u.lattice(), TimeWindow{-u.window().end, -u.window().start}, std::move(events));
}

PointProcessSample shift_point_process(const PointProcessSample& u, const Vertex& x, double t) {
  const Lattice& lat = u.lattice();
  if (!lat.is_torus() && x != Vertex{}) throw std::domain_error("spatial shifts require a torus");
  const Vertex minus_x = Vertex{} - x;
  std::vector<ClockRing> events = u.events();
  for (ClockRing& r : events) {
    r.time = r.time - t;
    if (lat.is_torus()) r.edge = lat.translate_edge(r.edge, minus_x);
  }
  return PointProcessSample(lat, TimeWindow{u.window().start - t, u.window().end - t}, std::move(events));
}

PointProcessSample restrict_to_box(const PointProcessSample& u, const Lattice& box) {
  const Lattice& host = u.lattice();
  if (box.is_torus()) throw std::domain_error("censoring needs a box lattice");
  if (host.is_torus() || host.dimension() != box.dimension() || host.side_length() < box.side_length()) {
    throw std::domain_error("point process must live on a box containing the censoring box");
  }
  std::vector<std::optional<EdgeId>> relabel(host.num_edges());
  for (EdgeId e = 0; e < host.num_edges(); ++e) {
    const Edge& edge = host.edge(e);
    relabel[e] = box.find_edge(edge.from, edge.to);
  }
  std::vector<ClockRing> events;
  for (const ClockRing& r : u.events()) {
    if (relabel[r.edge]) events.push_back({r.time, *relabel[r.edge]});
  }
  return PointProcessSample(box, u.window(), std::move(events));
}

}  // namespace dynrcm
