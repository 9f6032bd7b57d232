#include <doctest.h>

#include <cmath>

#include "dynrcm/kernel.hpp"
#include "dynrcm/stats.hpp"
#include "dynrcm/walk.hpp"
#include "generators.hpp"

using namespace dynrcm;

namespace {

struct Case {
  ConductanceTrajectory traj;
  PointProcessSample u;
  Vertex start;
  double start_time;
};

Case random_case(std::uint64_t test, std::uint64_t c) {
  Stream rng = gen::stream(test, c);
  const Lattice lat = gen::torus(rng, 6);
  const TimeWindow w{gen::dyadic(rng, -4, -0.5), gen::dyadic(rng, 0.5, 4)};
  ConductanceTrajectory traj = gen::trajectory(rng, lat, w);
  PointProcessSample u = sample_point_process(traj, RandomSeed{c, {test}});
  return {traj, u, gen::vertex(rng, lat), rng.uniform(w.start, w.end)};
}

/// Pearson statistic against `probs`, merging cells with expectation below 5.
std::pair<double, int> pearson(const std::vector<double>& counts, const std::vector<double>& probs, double n) {
  double stat = 0.0;
  int cells = 0;
  double merged_obs = 0.0;
  double merged_exp = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double e = n * probs[i];
    if (e < 5.0) {
      merged_obs += counts[i];
      merged_exp += e;
      continue;
    }
    stat += (counts[i] - e) * (counts[i] - e) / e;
    ++cells;
  }
  if (merged_exp > 0.0) {
    stat += (merged_obs - merged_exp) * (merged_obs - merged_exp) / merged_exp;
    ++cells;
  }
  return {stat, cells - 1};
}

}  // namespace

TEST_CASE("every point of the path regenerates the same path") {
  for (std::uint64_t c = 0; c < 1000; ++c) {
    const Case k = random_case(30, c);
    const WalkPath p = build_path(k.u, k.start, k.start_time);
    REQUIRE(p.position(k.start_time) == k.start);
    Stream rng = gen::stream(31, c);
    const double t = rng.uniform(k.traj.window().start, k.traj.window().end);
    const WalkPath q = build_path(k.u, p.position(t), t);
    REQUIRE(same_function(p, q));
  }
}

TEST_CASE("paths commute with space-time shifts") {
  for (std::uint64_t c = 0; c < 1000; ++c) {
    const Case k = random_case(32, c);
    Stream rng = gen::stream(33, c);
    const Lattice& lat = k.traj.lattice();
    const Vertex x = gen::vertex(rng, lat);
    const double t = gen::dyadic(rng, -3, 3);
    const WalkPath lhs = shift_path(build_path(k.u, k.start, k.start_time), x, t);
    const Vertex minus_x = lat.translate(Vertex{}, Vertex{} - x);
    const WalkPath rhs =
        build_path(shift_point_process(k.u, x, t), lat.translate(k.start, minus_x), k.start_time - t);
    REQUIRE(same_function(lhs, rhs));
  }
}

TEST_CASE("paths commute with time reversal") {
  for (std::uint64_t c = 0; c < 1000; ++c) {
    const Case k = random_case(34, c);
    const WalkPath lhs = reverse_path(build_path(k.u, k.start, k.start_time));
    const WalkPath rhs = build_path(reverse_point_process(k.u), k.start, -k.start_time);
    REQUIRE(same_function(lhs, rhs));
    REQUIRE(same_function(reverse_path(lhs), build_path(k.u, k.start, k.start_time)));
  }
}

TEST_CASE("reversal takes left limits") {
  const Lattice lat = Lattice::torus(1, 5);
  const PointProcessSample u(lat, {0.0, 3.0}, {{1.0, 0}, {2.0, 1}});
  const WalkPath p = build_path(u, Vertex{0}, 0.5);
  CHECK(p.position(1.0) == Vertex{1});
  CHECK(p.position(2.0) == Vertex{2});
  const WalkPath r = reverse_path(p);
  CHECK(r.position(-2.0) == Vertex{1});
  CHECK(r.position(-1.0) == Vertex{0});
  CHECK(r.position(-3.0) == Vertex{2});
  CHECK(jump_count(p, 0.0, 3.0).count == 2);
  CHECK(jump_count(p, 1.5, 3.0).count == 1);
}

TEST_CASE("starting on a ring is rejected") {
  const Lattice lat = Lattice::torus(1, 5);
  const PointProcessSample u(lat, {0.0, 3.0}, {{1.0, 0}});
  CHECK_THROWS_AS(build_path(u, Vertex{0}, 1.0), std::domain_error);
  CHECK_NOTHROW(build_path(u, Vertex{3}, 1.0));
}

TEST_CASE("jump cap truncates the path") {
  const Lattice lat = Lattice::torus(1, 4);
  const TimeWindow w{0.0, 10.0};
  const ConductanceTrajectory traj(lat, w, std::vector<Piecewise>(4, Piecewise::constant(w, 5.0)));
  const PointProcessSample u = sample_point_process(traj, RandomSeed{1, {}});
  const WalkPath p = build_path(u, Vertex{0}, 5.0, 10);
  CHECK(p.exploded_forward);
  CHECK(p.exploded_backward);
  CHECK_FALSE(p.defined_at(p.forward_limit));
  CHECK(p.defined_at(5.0));
  CHECK_THROWS_AS(p.position(9.99), std::domain_error);
}

TEST_CASE("censored paths never leave the box") {
  const Lattice big = Lattice::box(2, 8);
  const TimeWindow w{-5.0, 5.0};
  const ConductanceTrajectory traj(big, w, std::vector<Piecewise>(big.num_edges(), Piecewise::constant(w, 1.0)));
  const Lattice box = Lattice::box(2, 2);
  for (std::uint64_t c = 0; c < 20; ++c) {
    const PointProcessSample u = sample_point_process(traj, RandomSeed{c, {}});
    const WalkPath p = censored_path(u, box, Vertex{1, 0}, 0.0);
    CHECK(p.lattice == box);
    for (const Jump& j : p.jumps) REQUIRE(box.find_edge(j.from, j.to).has_value());
  }
}

TEST_CASE("the direct sampler and the point-process walk follow the exact kernel") {
  Stream rng = gen::stream(35, 0);
  const Lattice lat = Lattice::torus(2, 4);
  const ConductanceTrajectory traj = gen::trajectory(rng, lat, TimeWindow{-1.5, 1.5}, 3);
  const VertexId origin = lat.vertex_id(Vertex{0, 0});
  const KernelMatrix fwd = transition_kernel(traj, 0.0, 1.5);
  const KernelMatrix bwd = transition_kernel(traj, 0.0, -1.5);
  std::vector<double> pf(lat.num_vertices());
  std::vector<double> pb(lat.num_vertices());
  for (std::size_t v = 0; v < pf.size(); ++v) {
    pf[v] = fwd.entries(origin, static_cast<Eigen::Index>(v));
    pb[v] = bwd.entries(origin, static_cast<Eigen::Index>(v));
  }
  const int n = 20000;
  std::vector<double> direct_f(pf.size(), 0.0);
  std::vector<double> direct_b(pf.size(), 0.0);
  std::vector<double> built_f(pf.size(), 0.0);
  TrajectorySource source(traj);
  for (int i = 0; i < n; ++i) {
    const WalkPath d = sample_walk(source, Vertex{0, 0}, 0.0, RandomSeed{9, {static_cast<std::uint64_t>(i)}});
    direct_f[d.position_id(1.5)] += 1;
    direct_b[d.position_id(-1.5)] += 1;
    if (i < n / 4) {
      const PointProcessSample u = sample_point_process(traj, RandomSeed{10, {static_cast<std::uint64_t>(i)}});
      built_f[build_path(u, Vertex{0, 0}, 0.0).position_id(1.5)] += 1;
    }
  }
  const auto [sf, df] = pearson(direct_f, pf, n);
  const auto [sb, db] = pearson(direct_b, pb, n);
  const auto [su, du] = pearson(built_f, pf, n / 4);
  CHECK(sf <= chi_square_critical(df, 1e-4));
  CHECK(sb <= chi_square_critical(db, 1e-4));
  CHECK(su <= chi_square_critical(du, 1e-4));
}

TEST_CASE("walk pairs need distinct seeds") {
  const Lattice lat = Lattice::torus(1, 4);
  const TimeWindow w{0.0, 1.0};
  const ConductanceTrajectory traj(lat, w, std::vector<Piecewise>(4, Piecewise::constant(w, 1.0)));
  CHECK_THROWS_AS(walk_pair(traj, Vertex{0}, 0.0, Vertex{1}, 0.0, RandomSeed{1, {}}, RandomSeed{1, {}}),
                  std::domain_error);
  CHECK_NOTHROW(walk_pair(traj, Vertex{0}, 0.0, Vertex{1}, 0.0, RandomSeed{1, {0}}, RandomSeed{1, {1}}));
}
