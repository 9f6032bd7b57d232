#include <doctest.h>

#include <cmath>

#include "dynrcm/collision.hpp"
#include "dynrcm/walk.hpp"
#include "generators.hpp"

using namespace dynrcm;

namespace {

WalkPath hand_path(const Lattice& lat, const TimeWindow& w, VertexId initial, std::vector<Jump> jumps) {
  WalkPath p;
  p.lattice = lat;
  p.window = w;
  p.start = initial;
  p.start_time = w.start;
  p.initial = initial;
  p.jumps = std::move(jumps);
  return p;
}

}  // namespace

TEST_CASE("frozen walks from the same point collide at every integer time") {
  const Lattice lat = Lattice::torus(1, 5);
  for (double T : {0.5, 1.0, 3.7, 10.0}) {
    const TimeWindow w{0.0, T};
    const WalkPath x = hand_path(lat, TimeWindow{0.0, 10.0}, 2, {});
    const CollisionRecord r = collision_stats(x, x, w);
    CHECK(r.integer_collisions == static_cast<std::size_t>(std::floor(T)) + 1);
    CHECK(r.lebesgue_measure == doctest::Approx(T));
    CHECK(r.folded_relative_error <= 1e-12);
  }
}

TEST_CASE("hand-built crossing") {
  const Lattice lat = Lattice::torus(1, 6);
  const TimeWindow w{0.0, 4.0};
  // X: 0 until 1.5, then 1. Y: 2 until 0.5, 1 until 2.25, then 2.
  const WalkPath x = hand_path(lat, w, 0, {{1.5, 0, 1}});
  const WalkPath y = hand_path(lat, w, 2, {{0.5, 2, 1}, {2.25, 1, 2}});
  const CollisionRecord r = collision_stats(x, y, w);
  CHECK(r.lebesgue_measure == doctest::Approx(0.75));
  CHECK(r.integer_collisions == 1);  // n = 2
  CHECK(integer_collision_times(x, y, w) == std::vector<long>{2});
  REQUIRE(r.intervals.size() == 1);
  CHECK(r.intervals[0].start == 1.5);
  CHECK(r.intervals[0].end == 2.25);
  CHECK(r.folded_measure == doctest::Approx(0.75));
  // Jump times use the post-jump value: at t = 1.5 they already meet.
  const WalkPath z = hand_path(lat, w, 0, {{1.0, 0, 1}});
  CHECK(integer_collision_times(z, y, w) == std::vector<long>{1, 2});
}

TEST_CASE("collision record rejects bad horizons") {
  const Lattice lat = Lattice::torus(1, 6);
  const WalkPath x = hand_path(lat, {0.0, 2.0}, 0, {});
  CHECK_THROWS_AS(collision_stats(x, x, TimeWindow{-1.0, 1.0}), std::domain_error);
  CHECK_THROWS_AS(collision_stats(x, x, TimeWindow{0.0, 3.0}), std::domain_error);
}

TEST_CASE("folded measure matches the direct measure on random pairs") {
  for (std::uint64_t c = 0; c < 200; ++c) {
    Stream rng = gen::stream(40, c);
    const Lattice lat = Lattice::torus(1, gen::integer(rng, 3, 5));
    const TimeWindow w{0.0, gen::dyadic(rng, 1, 12)};
    const ConductanceTrajectory traj = gen::trajectory(rng, lat, w);
    const auto [x, y] = walk_pair(traj, Vertex{0}, 0.0, Vertex{1}, 0.0, RandomSeed{c, {0}}, RandomSeed{c, {1}});
    const CollisionRecord r = collision_stats(x, y, w);
    REQUIRE(r.folded_relative_error <= 1e-12);
    double total = 0.0;
    for (const auto& iv : r.intervals) total += iv.end - iv.start;
    REQUIRE(total == doctest::Approx(r.lebesgue_measure));
    // Integer collisions by brute force.
    std::size_t n = 0;
    for (long k = 0; k <= static_cast<long>(std::floor(w.end)); ++k) {
      n += x.position_id(static_cast<double>(k)) == y.position_id(static_cast<double>(k)) ? 1 : 0;
    }
    REQUIRE(r.integer_collisions == n);
  }
}
