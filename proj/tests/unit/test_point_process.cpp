#include <doctest.h>

#include <cmath>

#include "dynrcm/point_process.hpp"
#include "dynrcm/stats.hpp"
#include "generators.hpp"

using namespace dynrcm;

TEST_CASE("rings are sorted, inside the window and only where the intensity is positive") {
  for (std::uint64_t c = 0; c < 50; ++c) {
    Stream rng = gen::stream(20, c);
    const Lattice lat = gen::torus(rng, 5);
    const ConductanceTrajectory traj = gen::trajectory(rng, lat, TimeWindow{-2.0, 3.0});
    const PointProcessSample u = sample_point_process(traj, RandomSeed{c, {}});
    for (std::size_t i = 0; i < u.events().size(); ++i) {
      const ClockRing& r = u.events()[i];
      REQUIRE(traj.window().contains(r.time));
      REQUIRE(traj.value(r.edge, r.time) > 0.0);
      if (i > 0) REQUIRE(u.events()[i - 1].time < r.time);
    }
    CHECK(u == sample_point_process(traj, RandomSeed{c, {}}));
  }
}

TEST_CASE("ring counts have Poisson mean equal to the integrated intensity") {
  const Lattice lat = Lattice::torus(1, 4);
  const TimeWindow w{0.0, 2.0};
  std::vector<Piecewise> edges{Piecewise{{0.0, 1.0}, {1.0, 3.0}}, Piecewise::constant(w, 0.0),
                               Piecewise::constant(w, 0.5), Piecewise{{0.0, 0.5}, {0.0, 2.0}}};
  const ConductanceTrajectory traj(lat, w, edges);
  std::vector<std::vector<double>> counts(4);
  for (std::uint64_t i = 0; i < 4000; ++i) {
    std::vector<double> c(4, 0.0);
    const PointProcessSample u = sample_point_process(traj, RandomSeed{1, {i}});
    for (const auto& r : u.events()) c[r.edge] += 1;
    for (int e = 0; e < 4; ++e) counts[e].push_back(c[e]);
  }
  const double expected[] = {4.0, 0.0, 1.0, 3.0};
  for (int e = 0; e < 4; ++e) {
    const Summary s = summarize(counts[e]);
    CHECK(std::abs(s.mean - expected[e]) <= 4 * std::sqrt(expected[e] / 4000) + 1e-12);
    CHECK(std::abs(s.variance - expected[e]) <= 0.2 * expected[e] + 1e-12);
  }
}

TEST_CASE("reverse and shift act on the rings") {
  Stream rng = gen::stream(21, 0);
  const Lattice lat = Lattice::torus(2, 4);
  const ConductanceTrajectory traj = gen::trajectory(rng, lat, TimeWindow{0.0, 2.0});
  const PointProcessSample u = sample_point_process(traj, RandomSeed{2, {}});
  const PointProcessSample r = reverse_point_process(u);
  REQUIRE(r.events().size() == u.events().size());
  const std::size_t n = u.events().size();
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(r.events()[i].time == -u.events()[n - 1 - i].time);
    CHECK(r.events()[i].edge == u.events()[n - 1 - i].edge);
  }
  CHECK(reverse_point_process(r) == u);
  const Vertex x{1, 3};
  const PointProcessSample s = shift_point_process(u, x, 0.75);
  const Vertex minus_x{lat.side_length() - 1, lat.side_length() - 3};
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(s.events()[i].time == u.events()[i].time - 0.75);
    CHECK(s.events()[i].edge == lat.translate_edge(u.events()[i].edge, minus_x));
  }
}

TEST_CASE("restriction to a box keeps only interior edges") {
  const Lattice big = Lattice::box(2, 6);
  const ConductanceTrajectory traj(big, TimeWindow{0.0, 3.0},
                                   std::vector<Piecewise>(big.num_edges(), Piecewise::constant({0.0, 3.0}, 1.0)));
  const PointProcessSample u = sample_point_process(traj, RandomSeed{3, {}});
  const Lattice small = Lattice::box(2, 2);
  const PointProcessSample v = restrict_to_box(u, small);
  std::size_t expected = 0;
  for (const auto& r : u.events()) {
    const Edge& e = big.edge(r.edge);
    expected += small.contains(e.from) && small.contains(e.to) ? 1 : 0;
  }
  CHECK(v.events().size() == expected);
  CHECK(v.lattice() == small);
}

TEST_CASE("ties are rejected") {
  const Lattice lat = Lattice::torus(1, 3);
  CHECK_THROWS_AS(PointProcessSample(lat, {0.0, 1.0}, {{0.5, 0}, {0.5, 1}}), std::domain_error);
  CHECK_THROWS_AS(PointProcessSample(lat, {0.0, 1.0}, {{0.6, 0}, {0.5, 1}}), std::domain_error);
  CHECK_THROWS_AS(PointProcessSample(lat, {0.0, 1.0}, {{1.5, 0}}), std::domain_error);
}
