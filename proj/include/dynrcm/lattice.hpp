#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dynrcm {

using VertexId = std::uint32_t;
using EdgeId = std::uint32_t;

/// A point of Z^d (d = 1 or 2). Unused trailing coordinates are zero.
struct Vertex {
  std::array<int, 2> coords{0, 0};

  constexpr Vertex() = default;
  constexpr explicit Vertex(int x) : coords{x, 0} {}
  constexpr Vertex(int x, int y) : coords{x, y} {}

  constexpr int operator[](int axis) const { return coords[static_cast<std::size_t>(axis)]; }
  friend constexpr auto operator<=>(const Vertex&, const Vertex&) = default;
  friend constexpr Vertex operator+(Vertex a, Vertex b) {
    return {a.coords[0] + b.coords[0], a.coords[1] + b.coords[1]};
  }
  friend constexpr Vertex operator-(Vertex a, Vertex b) {
    return {a.coords[0] - b.coords[0], a.coords[1] - b.coords[1]};
  }
};

int l1_norm(const Vertex& v);
long squared_l2_norm(const Vertex& v);
std::string to_string(const Vertex& v);

/// Nearest-neighbour edge. `to` is `from` stepped by +1 along `axis`
/// (modulo the side length on a torus), which fixes a unique representation.
struct Edge {
  Vertex from;
  Vertex to;
  int axis = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

enum class LatticeMode { CensoredBox, Torus };

enum class Norm { L1, L2 };

struct Ball {
  Vertex center;
  int radius = 0;
  Norm norm = Norm::L1;
};

/// Finite window onto Z^d.
///
/// CensoredBox(k): the l1 ball B_k = {x : |x|_1 <= k} with the edges having
/// both endpoints inside it. Torus(n): (Z/nZ)^d with coordinates in [0, n).
/// A torus of side 2 is taken as a simple graph, one edge per axis pair.
///
/// Vertices are enumerated row-major (first coordinate outermost); edges
/// are enumerated by (vertex id, axis). Copies share immutable storage.
class Lattice {
 public:
  Lattice(int dimension, LatticeMode mode, int side_length);

  static Lattice box(int dimension, int radius) {
    return Lattice(dimension, LatticeMode::CensoredBox, radius);
  }
  static Lattice torus(int dimension, int side) { return Lattice(dimension, LatticeMode::Torus, side); }

  int dimension() const noexcept;
  LatticeMode mode() const noexcept;
  int side_length() const noexcept;
  bool is_torus() const noexcept { return mode() == LatticeMode::Torus; }

  std::size_t num_vertices() const noexcept;
  std::size_t num_edges() const noexcept;

  bool contains(const Vertex& v) const noexcept;
  /// Throws std::domain_error when `v` is not a vertex of this lattice.
  VertexId vertex_id(const Vertex& v) const;
  std::optional<VertexId> find_vertex(const Vertex& v) const noexcept;
  const Vertex& vertex(VertexId id) const;

  const Edge& edge(EdgeId id) const;
  VertexId edge_from(EdgeId id) const;
  VertexId edge_to(EdgeId id) const;
  bool edge_touches(EdgeId id, VertexId v) const;
  VertexId other_endpoint(EdgeId id, VertexId v) const;
  std::optional<EdgeId> find_edge(VertexId a, VertexId b) const noexcept;
  std::optional<EdgeId> find_edge(const Vertex& a, const Vertex& b) const;

  /// Edge ids incident to `v`, ascending.
  std::span<const EdgeId> incident(VertexId v) const;
  std::vector<Edge> incident_edges(const Vertex& v) const;

  /// Canonical representation of the edge {a, b}; throws if not adjacent.
  Edge canonical(const Vertex& a, const Vertex& b) const;

  /// Torus translation v + z (coordinates reduced mod n). Boxes only allow z = 0.
  Vertex translate(const Vertex& v, const Vertex& z) const;
  EdgeId translate_edge(EdgeId e, const Vertex& z) const;

  /// The vertex representing the origin: 0 in a box, (0, ..., 0) on a torus.
  Vertex origin() const noexcept { return Vertex{}; }

  /// True on the outer shell |x|_1 = k of a censored box; always false on tori.
  bool on_boundary(VertexId v) const;

  /// Members of the ball, sorted by vertex id.
  std::vector<Vertex> ball_members(const Ball& ball) const;

  std::string describe() const;

  friend bool operator==(const Lattice& a, const Lattice& b) noexcept;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

}  // namespace dynrcm
