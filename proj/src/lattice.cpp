#include "dynrcm/lattice.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>

namespace dynrcm {

int l1_norm(const Vertex& v) { return std::abs(v[0]) + std::abs(v[1]); }

long squared_l2_norm(const Vertex& v) {
  return static_cast<long>(v[0]) * v[0] + static_cast<long>(v[1]) * v[1];
}

std::string to_string(const Vertex& v) {
  return "(" + std::to_string(v[0]) + "," + std::to_string(v[1]) + ")";
}

namespace {

constexpr std::size_t kMaxVertices = std::size_t{1} << 24;

int wrap(int x, int n) {
  const int r = x % n;
  return r < 0 ? r + n : r;
}

}  // namespace

struct Lattice::Impl {
  int dimension = 1;
  LatticeMode mode = LatticeMode::Torus;
  int side = 1;
  int span = 1;  // coordinate range per axis: n (torus) or 2k+1 (box)
  std::vector<Vertex> vertices;
  std::vector<std::int64_t> slot_to_id;  // dense map over the coordinate range
  std::vector<Edge> edges;
  std::vector<VertexId> edge_from;
  std::vector<VertexId> edge_to;
  std::vector<std::size_t> incidence_offsets;
  std::vector<EdgeId> incidence;

  std::optional<std::size_t> slot(const Vertex& v) const {
    std::size_t s = 0;
    for (int a = 0; a < dimension; ++a) {
      const int c = mode == LatticeMode::Torus ? v[a] : v[a] + side;
      if (c < 0 || c >= span) return std::nullopt;
      s = s * static_cast<std::size_t>(span) + static_cast<std::size_t>(c);
    }
    for (int a = dimension; a < 2; ++a) {
      if (v[a] != 0) return std::nullopt;
    }
    return s;
  }

  std::optional<VertexId> find(const Vertex& v) const {
    auto s = slot(v);
    if (!s) return std::nullopt;
    const std::int64_t id = slot_to_id[*s];
    if (id < 0) return std::nullopt;
    return static_cast<VertexId>(id);
  }

  std::optional<Vertex> step(const Vertex& v, int axis) const {
    Vertex w = v;
    w.coords[static_cast<std::size_t>(axis)] += 1;
    if (mode == LatticeMode::Torus) {
      w.coords[static_cast<std::size_t>(axis)] = wrap(w[axis], side);
      return w;
    }
    if (l1_norm(w) > side) return std::nullopt;
    return w;
  }
};

Lattice::Lattice(int dimension, LatticeMode mode, int side_length) {
  if (dimension != 1 && dimension != 2) throw std::domain_error("lattice dimension must be 1 or 2");
  if (mode == LatticeMode::Torus && side_length < 2) throw std::domain_error("torus side must be >= 2");
  if (mode == LatticeMode::CensoredBox && side_length < 0) throw std::domain_error("box radius must be >= 0");

  auto impl = std::make_shared<Impl>();
  impl->dimension = dimension;
  impl->mode = mode;
  impl->side = side_length;
  impl->span = mode == LatticeMode::Torus ? side_length : 2 * side_length + 1;

  std::size_t slots = 1;
  for (int a = 0; a < dimension; ++a) {
    slots *= static_cast<std::size_t>(impl->span);
    if (slots > kMaxVertices) throw std::domain_error("lattice too large");
  }
  impl->slot_to_id.assign(slots, -1);

  const int lo = mode == LatticeMode::Torus ? 0 : -side_length;
  const int hi = mode == LatticeMode::Torus ? side_length - 1 : side_length;
  const int lo1 = dimension == 2 ? lo : 0;
  const int hi1 = dimension == 2 ? hi : 0;
  for (int x = lo; x <= hi; ++x) {
    for (int y = lo1; y <= hi1; ++y) {
      Vertex v{x, y};
      if (mode == LatticeMode::CensoredBox && l1_norm(v) > side_length) continue;
      impl->slot_to_id[*impl->slot(v)] = static_cast<std::int64_t>(impl->vertices.size());
      impl->vertices.push_back(v);
    }
  }

  for (VertexId id = 0; id < impl->vertices.size(); ++id) {
    const Vertex& v = impl->vertices[id];
    for (int axis = 0; axis < dimension; ++axis) {
      // On a side-2 torus the +1 and -1 neighbours coincide; keep one edge.
      if (mode == LatticeMode::Torus && side_length == 2 && v[axis] != 0) continue;
      auto w = impl->step(v, axis);
      if (!w) continue;
      impl->edges.push_back(Edge{v, *w, axis});
      impl->edge_from.push_back(id);
      impl->edge_to.push_back(*impl->find(*w));
    }
  }

  std::vector<std::size_t> degree(impl->vertices.size(), 0);
  for (std::size_t e = 0; e < impl->edges.size(); ++e) {
    ++degree[impl->edge_from[e]];
    ++degree[impl->edge_to[e]];
  }
  impl->incidence_offsets.assign(impl->vertices.size() + 1, 0);
  for (std::size_t v = 0; v < degree.size(); ++v) {
    impl->incidence_offsets[v + 1] = impl->incidence_offsets[v] + degree[v];
  }
  impl->incidence.resize(impl->incidence_offsets.back());
  std::vector<std::size_t> fill(impl->incidence_offsets.begin(), impl->incidence_offsets.end() - 1);
  for (std::size_t e = 0; e < impl->edges.size(); ++e) {
    impl->incidence[fill[impl->edge_from[e]]++] = static_cast<EdgeId>(e);
    impl->incidence[fill[impl->edge_to[e]]++] = static_cast<EdgeId>(e);
  }
  for (std::size_t v = 0; v < degree.size(); ++v) {
    std::sort(impl->incidence.begin() + static_cast<std::ptrdiff_t>(impl->incidence_offsets[v]),
              impl->incidence.begin() + static_cast<std::ptrdiff_t>(impl->incidence_offsets[v + 1]));
  }
  impl_ = std::move(impl);
}

int Lattice::dimension() const noexcept { return impl_->dimension; }
LatticeMode Lattice::mode() const noexcept { return impl_->mode; }
int Lattice::side_length() const noexcept { return impl_->side; }
std::size_t Lattice::num_vertices() const noexcept { return impl_->vertices.size(); }
std::size_t Lattice::num_edges() const noexcept { return impl_->edges.size(); }

bool Lattice::contains(const Vertex& v) const noexcept { return impl_->find(v).has_value(); }

std::optional<VertexId> Lattice::find_vertex(const Vertex& v) const noexcept { return impl_->find(v); }

VertexId Lattice::vertex_id(const Vertex& v) const {
  auto id = impl_->find(v);
  if (!id) throw std::domain_error("vertex " + to_string(v) + " is outside the lattice " + describe());
  return *id;
}

const Vertex& Lattice::vertex(VertexId id) const {
  if (id >= impl_->vertices.size()) throw std::domain_error("vertex id out of range");
  return impl_->vertices[id];
}

const Edge& Lattice::edge(EdgeId id) const {
  if (id >= impl_->edges.size()) throw std::domain_error("edge id out of range");
  return impl_->edges[id];
}

VertexId Lattice::edge_from(EdgeId id) const { return impl_->edge_from[id]; }
VertexId Lattice::edge_to(EdgeId id) const { return impl_->edge_to[id]; }

bool Lattice::edge_touches(EdgeId id, VertexId v) const {
  return impl_->edge_from[id] == v || impl_->edge_to[id] == v;
}

VertexId Lattice::other_endpoint(EdgeId id, VertexId v) const {
  return impl_->edge_from[id] == v ? impl_->edge_to[id] : impl_->edge_from[id];
}

std::span<const EdgeId> Lattice::incident(VertexId v) const {
  const auto& off = impl_->incidence_offsets;
  return {impl_->incidence.data() + off[v], off[v + 1] - off[v]};
}

std::optional<EdgeId> Lattice::find_edge(VertexId a, VertexId b) const noexcept {
  for (EdgeId e : incident(a)) {
    if (other_endpoint(e, a) == b && a != b) return e;
  }
  return std::nullopt;
}

std::optional<EdgeId> Lattice::find_edge(const Vertex& a, const Vertex& b) const {
  auto ia = impl_->find(a);
  auto ib = impl_->find(b);
  if (!ia || !ib) return std::nullopt;
  return find_edge(*ia, *ib);
}

std::vector<Edge> Lattice::incident_edges(const Vertex& v) const {
  std::vector<Edge> out;
  for (EdgeId e : incident(vertex_id(v))) out.push_back(impl_->edges[e]);
  return out;
}

Edge Lattice::canonical(const Vertex& a, const Vertex& b) const {
  auto e = find_edge(a, b);
  if (!e) throw std::domain_error(to_string(a) + " and " + to_string(b) + " are not adjacent");
  return impl_->edges[*e];
}

Vertex Lattice::translate(const Vertex& v, const Vertex& z) const {
  if (!is_torus()) {
    if (z != Vertex{}) throw std::domain_error("spatial shifts require a torus");
    return v;
  }
  Vertex w = v + z;
  for (int a = 0; a < dimension(); ++a) w.coords[static_cast<std::size_t>(a)] = wrap(w[a], side_length());
  return w;
}

EdgeId Lattice::translate_edge(EdgeId e, const Vertex& z) const {
  const Edge& edge = impl_->edges[e];
  auto id = find_edge(translate(edge.from, z), translate(edge.to, z));
  return *id;
}

bool Lattice::on_boundary(VertexId v) const {
  if (is_torus()) return false;
  return l1_norm(vertex(v)) == side_length();
}

std::vector<Vertex> Lattice::ball_members(const Ball& ball) const {
  if (ball.radius < 0) throw std::domain_error("ball radius must be nonnegative");
  vertex_id(ball.center);
  if (is_torus() && 2 * ball.radius >= side_length()) {
    throw std::domain_error("ball radius must be < side/2 on a torus");
  }
  const int r = ball.radius;
  const int r1 = dimension() == 2 ? r : 0;
  std::vector<VertexId> ids;
  for (int dx = -r; dx <= r; ++dx) {
    for (int dy = -r1; dy <= r1; ++dy) {
      const Vertex offset{dx, dy};
      const bool inside = ball.norm == Norm::L1
                              ? l1_norm(offset) <= r
                              : squared_l2_norm(offset) <= static_cast<long>(r) * r;
      if (!inside) continue;
      Vertex v = is_torus() ? translate(ball.center, offset) : ball.center + offset;
      auto id = impl_->find(v);
      if (!id) throw std::domain_error("ball does not fit inside the lattice");
      ids.push_back(*id);
    }
  }
  std::sort(ids.begin(), ids.end());
  std::vector<Vertex> out;
  out.reserve(ids.size());
  for (VertexId id : ids) out.push_back(impl_->vertices[id]);
  return out;
}

std::string Lattice::describe() const {
  return std::string(is_torus() ? "torus" : "box") + "(d=" + std::to_string(dimension()) +
         ", side=" + std::to_string(side_length()) + ")";
}

bool operator==(const Lattice& a, const Lattice& b) noexcept {
  return a.impl_ == b.impl_ || (a.dimension() == b.dimension() && a.mode() == b.mode() &&
                                a.side_length() == b.side_length());
}

}  // namespace dynrcm
