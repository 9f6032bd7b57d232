#include "dynrcm/collision.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dynrcm/stats.hpp"

namespace dynrcm {

namespace {

void require_defined(const WalkPath& p, const TimeWindow& h) {
  if (!p.window.contains(h)) throw std::domain_error("collision horizon outside the path window");
  if (!(p.forward_limit > h.end) || !(p.backward_limit < h.start)) {
    throw std::domain_error("path exploded inside the collision horizon");
  }
}

}  // namespace

std::vector<long> integer_collision_times(const WalkPath& x, const WalkPath& y, const TimeWindow& horizon) {
  require_defined(x, horizon);
  require_defined(y, horizon);
  std::vector<long> out;
  for (auto n = static_cast<long>(std::ceil(horizon.start)); static_cast<double>(n) <= horizon.end; ++n) {
    const auto t = static_cast<double>(n);
    if (x.position_id(t) == y.position_id(t)) out.push_back(n);
  }
  return out;
}

double folded_collision_measure(const std::vector<CollisionInterval>& intervals) {
  // Each interval piece inside [n, n+1) covers s in [alpha, beta) for that n.
  std::vector<std::pair<double, int>> marks;
  for (const CollisionInterval& iv : intervals) {
    double a = iv.start;
    while (a < iv.end) {
      const double n = std::floor(a);
      const double b = std::min(iv.end, n + 1.0);
      marks.emplace_back(a - n, +1);
      marks.emplace_back(b == n + 1.0 ? 1.0 : b - n, -1);
      a = b;
    }
  }
  std::sort(marks.begin(), marks.end());
  std::vector<double> pieces;
  pieces.reserve(marks.size());
  int count = 0;
  double s = 0.0;
  for (const auto& [at, delta] : marks) {
    if (count > 0 && at > s) pieces.push_back(count * (at - s));
    s = at;
    count += delta;
  }
  return pairwise_sum(pieces);
}

CollisionRecord collision_stats(const WalkPath& x, const WalkPath& y, const TimeWindow& horizon) {
  horizon.validate();
  if (horizon.start < 0.0) throw std::domain_error("collision horizon must start at time >= 0");
  require_defined(x, horizon);
  require_defined(y, horizon);

  std::vector<double> cuts{horizon.start};
  for (const WalkPath* p : {&x, &y}) {
    for (const Jump& j : p->jumps) {
      if (j.time > horizon.start && j.time <= horizon.end) cuts.push_back(j.time);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  CollisionRecord rec;
  rec.horizon = horizon;
  std::vector<double> lengths;
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    const double a = cuts[k];
    const bool last = k + 1 == cuts.size();
    const double b = last ? horizon.end : cuts[k + 1];
    if (x.position_id(a) != y.position_id(a)) continue;
    if (!rec.intervals.empty() && rec.intervals.back().end == a && !rec.intervals.back().closed_right) {
      rec.intervals.back().end = b;
    } else {
      rec.intervals.push_back({a, b, false});
    }
    if (last) rec.intervals.back().closed_right = true;
  }
  for (const CollisionInterval& iv : rec.intervals) lengths.push_back(iv.end - iv.start);
  rec.lebesgue_measure = pairwise_sum(lengths);

  rec.integer_collisions = integer_collision_times(x, y, horizon).size();
  std::size_t covered = 0;
  for (const CollisionInterval& iv : rec.intervals) {
    for (double n = std::ceil(iv.start); n < iv.end || (iv.closed_right && n == iv.end); n += 1.0) ++covered;
  }
  if (covered != rec.integer_collisions) {
    throw std::logic_error("integer collisions disagree with the collision intervals");
  }

  rec.folded_measure = folded_collision_measure(rec.intervals);
  const double scale = std::max(rec.lebesgue_measure, rec.folded_measure);
  rec.folded_relative_error = scale > 0.0 ? std::abs(rec.folded_measure - rec.lebesgue_measure) / scale : 0.0;
  return rec;
}

nlohmann::json to_json(const CollisionRecord& record) {
  nlohmann::json intervals = nlohmann::json::array();
  for (const auto& iv : record.intervals) intervals.push_back({iv.start, iv.end});
  return {{"horizon", {record.horizon.start, record.horizon.end}},
          {"integer_collisions", record.integer_collisions},
          {"lebesgue_measure", record.lebesgue_measure},
          {"folded_measure", record.folded_measure},
          {"folded_relative_error", record.folded_relative_error},
          {"boundary_convention", "cadlag"},
          {"intervals", std::move(intervals)}};
}

}  // namespace dynrcm
