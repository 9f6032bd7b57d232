#include <doctest.h>

#include <set>

#include "dynrcm/lattice.hpp"
#include "generators.hpp"

using namespace dynrcm;

namespace {

/// Adjacent pairs counted by brute force over all vertex pairs.
std::size_t brute_force_edges(const Lattice& lat) {
  std::size_t count = 0;
  for (VertexId a = 0; a < lat.num_vertices(); ++a) {
    for (VertexId b = a + 1; b < lat.num_vertices(); ++b) {
      const Vertex d = lat.vertex(b) - lat.vertex(a);
      int unit = 0;
      int zero = 0;
      for (int k = 0; k < lat.dimension(); ++k) {
        int c = d[k];
        if (lat.is_torus()) {
          const int n = lat.side_length();
          c = ((c % n) + n) % n;
          if (c == n - 1) c = 1;
        }
        unit += std::abs(c) == 1 ? 1 : 0;
        zero += c == 0 ? 1 : 0;
      }
      count += (unit == 1 && zero == lat.dimension() - 1) ? 1 : 0;
    }
  }
  return count;
}

}  // namespace

TEST_CASE("vertex and edge counts match brute force") {
  for (int d = 1; d <= 2; ++d) {
    for (int n = 2; n <= 7; ++n) {
      const Lattice t = Lattice::torus(d, n);
      CHECK(t.num_vertices() == static_cast<std::size_t>(d == 1 ? n : n * n));
      CHECK(t.num_edges() == brute_force_edges(t));
    }
    for (int k = 0; k <= 5; ++k) {
      const Lattice b = Lattice::box(d, k);
      CHECK(b.num_vertices() == static_cast<std::size_t>(d == 1 ? 2 * k + 1 : 2 * k * k + 2 * k + 1));
      CHECK(b.num_edges() == brute_force_edges(b));
    }
  }
  CHECK(Lattice::torus(1, 2).num_edges() == 1);
  CHECK(Lattice::torus(2, 2).num_edges() == 4);
  CHECK(Lattice::torus(2, 5).num_edges() == 50);
}

TEST_CASE("balls") {
  const Lattice t = Lattice::torus(2, 9);
  CHECK(t.ball_members({Vertex{0, 0}, 2, Norm::L2}).size() == 13);
  CHECK(t.ball_members({Vertex{4, 4}, 2, Norm::L1}).size() == 13);
  CHECK(t.ball_members({Vertex{0, 0}, 3, Norm::L2}).size() == 29);
  CHECK(Lattice::box(2, 5).ball_members({Vertex{0, 0}, 5, Norm::L1}).size() == Lattice::box(2, 5).num_vertices());
  CHECK_THROWS_AS(t.ball_members({Vertex{0, 0}, 5, Norm::L1}), std::domain_error);
  CHECK_THROWS_AS(Lattice::box(2, 3).ball_members({Vertex{3, 0}, 1, Norm::L1}), std::domain_error);
}

TEST_CASE("ids, incidence and canonical edges are consistent") {
  for (std::uint64_t c = 0; c < 50; ++c) {
    Stream rng = gen::stream(1, c);
    const Lattice lat = rng.bernoulli(0.5) ? gen::torus(rng, 7) : Lattice::box(gen::integer(rng, 1, 2), gen::integer(rng, 0, 5));
    for (VertexId v = 0; v < lat.num_vertices(); ++v) {
      REQUIRE(lat.vertex_id(lat.vertex(v)) == v);
      const auto inc = lat.incident(v);
      REQUIRE(std::is_sorted(inc.begin(), inc.end()));
      for (EdgeId e : inc) {
        REQUIRE(lat.edge_touches(e, v));
        const VertexId w = lat.other_endpoint(e, v);
        REQUIRE(lat.find_edge(v, w) == e);
        REQUIRE(lat.canonical(lat.vertex(v), lat.vertex(w)) == lat.edge(e));
      }
      if (lat.is_torus() && lat.side_length() > 2) REQUIRE(inc.size() == static_cast<std::size_t>(2 * lat.dimension()));
    }
  }
  CHECK_THROWS_AS(Lattice::box(2, 2).vertex_id(Vertex{2, 1}), std::domain_error);
  CHECK_THROWS_AS(Lattice::torus(3, 4), std::domain_error);
  CHECK_THROWS_AS(Lattice::torus(1, 1), std::domain_error);
  CHECK_THROWS_AS(Lattice::box(1, -1), std::domain_error);
}

TEST_CASE("torus translations are bijections on vertices and edges") {
  for (std::uint64_t c = 0; c < 40; ++c) {
    Stream rng = gen::stream(2, c);
    const Lattice lat = gen::torus(rng, 7);
    const Vertex z = gen::vertex(rng, lat);
    std::set<VertexId> seen;
    for (VertexId v = 0; v < lat.num_vertices(); ++v) seen.insert(lat.vertex_id(lat.translate(lat.vertex(v), z)));
    CHECK(seen.size() == lat.num_vertices());
    std::set<EdgeId> edges;
    for (EdgeId e = 0; e < lat.num_edges(); ++e) {
      const EdgeId f = lat.translate_edge(e, z);
      edges.insert(f);
      CHECK(lat.vertex(lat.edge_from(f)) == lat.translate(lat.vertex(lat.edge_from(e)), z));
    }
    CHECK(edges.size() == lat.num_edges());
  }
  CHECK_THROWS_AS(Lattice::box(2, 3).translate(Vertex{0, 0}, Vertex{1, 0}), std::domain_error);
}

TEST_CASE("box boundary is the outer l1 shell") {
  const Lattice b = Lattice::box(2, 4);
  std::size_t shell = 0;
  for (VertexId v = 0; v < b.num_vertices(); ++v) {
    const bool on = b.on_boundary(v);
    CHECK(on == (l1_norm(b.vertex(v)) == 4));
    shell += on ? 1 : 0;
  }
  CHECK(shell == 16);
}
