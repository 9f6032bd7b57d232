#include "dynrcm/walk.hpp"

#include <algorithm>
#include <stdexcept>

namespace dynrcm {

bool WalkPath::defined_at(double t) const noexcept {
  return window.contains(t) && t < forward_limit && t > backward_limit;
}

VertexId WalkPath::position_id(double t) const {
  if (!window.contains(t)) throw std::domain_error("path queried outside its window");
  if (!defined_at(t)) throw std::domain_error("path queried inside an exploded region");
  auto it = std::upper_bound(jumps.begin(), jumps.end(), t, [](double x, const Jump& j) { return x < j.time; });
  return it == jumps.begin() ? initial : std::prev(it)->to;
}

bool same_function(const WalkPath& a, const WalkPath& b) {
  return a.lattice == b.lattice && a.window == b.window && a.initial == b.initial && a.jumps == b.jumps &&
         a.exploded_forward == b.exploded_forward && a.exploded_backward == b.exploded_backward &&
         a.forward_limit == b.forward_limit && a.backward_limit == b.backward_limit;
}

namespace {

struct Traced {
  std::vector<Jump> jumps;
  bool exploded = false;
  double limit = 0.0;
};

Traced trace_rings(const Lattice& lat, const std::vector<ClockRing>& events, VertexId start, double s,
                   std::size_t cap) {
  Traced out;
  VertexId pos = start;
  auto it = std::upper_bound(events.begin(), events.end(), s, [](double x, const ClockRing& r) { return x < r.time; });
  for (; it != events.end(); ++it) {
    if (!lat.edge_touches(it->edge, pos)) continue;
    if (out.jumps.size() == cap) {
      out.exploded = true;
      out.limit = it->time;
      break;
    }
    const VertexId next = lat.other_endpoint(it->edge, pos);
    out.jumps.push_back({it->time, pos, next});
    pos = next;
  }
  return out;
}

/// Assembles a path from a forward trace and a trace run forwards in reflected time.
WalkPath assemble(const Lattice& lat, const TimeWindow& window, VertexId start, double s, Traced forward,
                  Traced reflected) {
  WalkPath path;
  path.lattice = lat;
  path.window = window;
  path.start = start;
  path.start_time = s;
  path.jumps.reserve(forward.jumps.size() + reflected.jumps.size());
  for (auto it = reflected.jumps.rbegin(); it != reflected.jumps.rend(); ++it) {
    path.jumps.push_back({-it->time, it->to, it->from});
  }
  path.initial = reflected.jumps.empty() ? start : reflected.jumps.back().to;
  path.jumps.insert(path.jumps.end(), forward.jumps.begin(), forward.jumps.end());
  if (forward.exploded) {
    path.exploded_forward = true;
    path.forward_limit = forward.limit;
  }
  if (reflected.exploded) {
    path.exploded_backward = true;
    path.backward_limit = -reflected.limit;
  }
  if (!lat.is_torus()) {
    path.boundary_hit = lat.on_boundary(path.initial);
    for (const Jump& j : path.jumps) path.boundary_hit = path.boundary_hit || lat.on_boundary(j.to);
  }
  return path;
}

}  // namespace

WalkPath build_path(const PointProcessSample& u, const Vertex& start, double start_time, std::size_t jump_cap) {
  if (jump_cap == 0) throw std::domain_error("jump cap must be positive");
  const Lattice& lat = u.lattice();
  const VertexId sid = lat.vertex_id(start);
  if (!u.window().contains(start_time)) throw std::domain_error("start time outside the point process window");
  for (const ClockRing& r : u.events()) {
    if (r.time == start_time && lat.edge_touches(r.edge, sid)) {
      throw std::domain_error("start point is a jump point of the point process");
    }
  }
  Traced forward = trace_rings(lat, u.events(), sid, start_time, jump_cap);
  const PointProcessSample reversed = reverse_point_process(u);
  Traced reflected = trace_rings(lat, reversed.events(), sid, -start_time, jump_cap);
  return assemble(lat, u.window(), sid, start_time, std::move(forward), std::move(reflected));
}

WalkPath censored_path(const PointProcessSample& u, const Lattice& box, const Vertex& start, double start_time,
                       std::size_t jump_cap) {
  box.vertex_id(start);
  return build_path(restrict_to_box(u, box), start, start_time, jump_cap);
}

JumpCount jump_count(const WalkPath& path, double a, double b) {
  if (!(a <= b) || !path.window.contains(a) || !path.window.contains(b)) {
    throw std::domain_error("jump count interval outside the path window");
  }
  auto lo = std::lower_bound(path.jumps.begin(), path.jumps.end(), a,
                             [](const Jump& j, double x) { return j.time < x; });
  auto hi = std::upper_bound(path.jumps.begin(), path.jumps.end(), b,
                             [](double x, const Jump& j) { return x < j.time; });
  JumpCount out;
  out.count = static_cast<std::size_t>(hi - lo);
  out.lower_bound = (path.exploded_forward && b >= path.forward_limit) ||
                    (path.exploded_backward && a <= path.backward_limit);
  return out;
}

WalkPath reverse_path(const WalkPath& path) {
  WalkPath out;
  out.lattice = path.lattice;
  out.window = TimeWindow{-path.window.end, -path.window.start};
  out.start = path.start;
  out.start_time = -path.start_time;
  out.initial = path.final_position();
  out.jumps.reserve(path.jumps.size());
  for (auto it = path.jumps.rbegin(); it != path.jumps.rend(); ++it) {
    out.jumps.push_back({-it->time, it->to, it->from});
  }
  out.exploded_forward = path.exploded_backward;
  out.exploded_backward = path.exploded_forward;
  out.forward_limit = -path.backward_limit;
  out.backward_limit = -path.forward_limit;
  out.boundary_hit = path.boundary_hit;
  return out;
}

WalkPath shift_path(const WalkPath& path, const Vertex& x, double t) {
  const Lattice& lat = path.lattice;
  if (!lat.is_torus() && x != Vertex{}) throw std::domain_error("spatial shifts require a torus");
  const Vertex minus_x = Vertex{} - x;
  auto move = [&](VertexId v) { return lat.is_torus() ? lat.vertex_id(lat.translate(lat.vertex(v), minus_x)) : v; };
  WalkPath out = path;
  out.window = TimeWindow{path.window.start - t, path.window.end - t};
  out.start = move(path.start);
  out.start_time = path.start_time - t;
  out.initial = move(path.initial);
  for (Jump& j : out.jumps) {
    j.time = j.time - t;
    j.from = move(j.from);
    j.to = move(j.to);
  }
  if (path.exploded_forward) out.forward_limit = path.forward_limit - t;
  if (path.exploded_backward) out.backward_limit = path.backward_limit - t;
  return out;
}

namespace {

/// Runs the walk forwards in local time r from `start` at r0. With
/// `reflected`, local time r is original time -r and the conductance at r is
/// the left limit of the original at -r.
Traced trace_clocks(ConductanceSource& env, VertexId start, double r0, bool reflected, Stream& rng,
                    std::size_t cap) {
  const Lattice& lat = env.lattice();
  const TimeWindow w = env.window();
  const double r_end = reflected ? -w.start : w.end;
  Traced out;
  VertexId pos = start;
  double r = r0;
  std::vector<double> rates;
  while (r < r_end) {
    const auto edges = lat.incident(pos);
    rates.assign(edges.size(), 0.0);
    double total = 0.0;
    double next_change = r_end;
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const Piecewise& pw = env.pieces(edges[k]);
      const auto& bp = pw.breakpoints;
      std::size_t i = 0;
      double change = r_end;
      if (!reflected) {
        i = pw.piece_at(r);
        if (i + 1 < bp.size()) change = bp[i + 1];
      } else {
        auto it = std::lower_bound(bp.begin(), bp.end(), -r);
        i = it == bp.begin() ? 0 : static_cast<std::size_t>(it - bp.begin()) - 1;
        change = -bp[i];
      }
      rates[k] = pw.values[i];
      total += rates[k];
      next_change = std::min(next_change, change);
    }
    if (total > 0.0) {
      const double candidate = r + rng.exponential(total);
      if (candidate < next_change) {
        if (out.jumps.size() == cap) {
          out.exploded = true;
          out.limit = candidate;
          break;
        }
        const double target = rng.uniform() * total;
        std::size_t k = 0;
        double acc = 0.0;
        for (; k < rates.size(); ++k) {
          acc += rates[k];
          if (target < acc) break;
        }
        if (k == rates.size()) k = rates.size() - 1;
        while (rates[k] <= 0.0) --k;
        const VertexId next = lat.other_endpoint(edges[k], pos);
        out.jumps.push_back({candidate, pos, next});
        pos = next;
        r = candidate;
        continue;
      }
    }
    if (!(next_change > r)) break;
    r = next_change;
  }
  return out;
}

}  // namespace

WalkPath sample_walk(ConductanceSource& env, const Vertex& start, double start_time, const RandomSeed& seed,
                     const WalkSampling& options) {
  if (options.jump_cap == 0) throw std::domain_error("jump cap must be positive");
  const Lattice& lat = env.lattice();
  const VertexId sid = lat.vertex_id(start);
  if (!env.window().contains(start_time)) throw std::domain_error("start time outside the environment window");
  Traced forward;
  Traced reflected;
  if (options.forward) {
    Stream rng(derive_seed(seed, 0));
    forward = trace_clocks(env, sid, start_time, false, rng, options.jump_cap);
  }
  if (options.backward) {
    Stream rng(derive_seed(seed, 1));
    reflected = trace_clocks(env, sid, -start_time, true, rng, options.jump_cap);
  }
  return assemble(lat, env.window(), sid, start_time, std::move(forward), std::move(reflected));
}

std::pair<WalkPath, WalkPath> walk_pair(const ConductanceTrajectory& traj, const Vertex& x, double x_time,
                                        const Vertex& y, double y_time, const RandomSeed& seed_x,
                                        const RandomSeed& seed_y, std::size_t jump_cap) {
  if (seed_x.key() == seed_y.key()) {
    throw std::domain_error("walk_pair needs distinct seeds for conditional independence");
  }
  const PointProcessSample ux = sample_point_process(traj, seed_x);
  const PointProcessSample uy = sample_point_process(traj, seed_y);
  return {build_path(ux, x, x_time, jump_cap), build_path(uy, y, y_time, jump_cap)};
}

nlohmann::json to_json(const WalkPath& path) {
  const Lattice& lat = path.lattice;
  auto coords = [&](VertexId v) { return std::vector<int>(lat.vertex(v).coords.begin(), lat.vertex(v).coords.begin() + lat.dimension()); };
  nlohmann::json jumps = nlohmann::json::array();
  for (const Jump& j : path.jumps) jumps.push_back({{"time", j.time}, {"vertex", coords(j.to)}});
  nlohmann::json out{{"lattice", lattice_to_json(lat)},
                     {"window", {{"start", path.window.start}, {"end", path.window.end}}},
                     {"start", {{"vertex", coords(path.start)}, {"time", path.start_time}}},
                     {"initial", coords(path.initial)},
                     {"jumps", std::move(jumps)},
                     {"exploded_forward", path.exploded_forward},
                     {"exploded_backward", path.exploded_backward},
                     {"boundary_hit", path.boundary_hit}};
  if (path.exploded_forward) out["forward_limit"] = path.forward_limit;
  if (path.exploded_backward) out["backward_limit"] = path.backward_limit;
  return out;
}

}  // namespace dynrcm
