#include "surfrec/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace surfrec {

namespace {

std::int64_t edge_key(VertexId a, VertexId b, std::size_t n) {
  if (a > b) std::swap(a, b);
  return static_cast<std::int64_t>(a) * static_cast<std::int64_t>(n) + b;
}

double max_edge_length(const Vec3& a, const Vec3& b, const Vec3& c) {
  return std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
}

// Relative area floor below which a face counts as degenerate.
constexpr double kDegenerateAreaFactor = 1e-14;

}  // namespace

TriMesh::TriMesh(std::vector<Vec3> vertices, std::vector<Face> faces, MeshOptions options)
    : vertices_(std::move(vertices)) {
  topo_ = build_topology(vertices_.size(), std::move(faces), options);
  check_faces_nondegenerate();
}

TriMesh::TriMesh(std::vector<Vec3> vertices, std::shared_ptr<const Topology> topo)
    : vertices_(std::move(vertices)), topo_(std::move(topo)) {}

TriMesh TriMesh::with_vertices(std::vector<Vec3> vertices) const {
  if (vertices.size() != vertices_.size())
    throw MeshError("with_vertices: expected " + std::to_string(vertices_.size()) + " vertices, got " +
                    std::to_string(vertices.size()));
  TriMesh out(std::move(vertices), topo_);
  out.check_faces_nondegenerate();
  return out;
}

std::shared_ptr<const TriMesh::Topology> TriMesh::build_topology(std::size_t nv, std::vector<Face> faces,
                                                                 const MeshOptions& options) {
  auto topo = std::make_shared<Topology>();
  const std::size_t nf = faces.size();
  if (nv == 0 || nf == 0) throw MeshError("mesh has no vertices or no faces");

  for (std::size_t f = 0; f < nf; ++f) {
    const Face& t = faces[f];
    for (VertexId v : t)
      if (v < 0 || static_cast<std::size_t>(v) >= nv)
        throw MeshError("face " + std::to_string(f) + " references vertex " + std::to_string(v) +
                        " out of range");
    if (t[0] == t[1] || t[1] == t[2] || t[2] == t[0])
      throw MeshError("face " + std::to_string(f) + " repeats a vertex index");
  }

  // Half-edges sorted by undirected key; equal keys form one edge.
  struct HalfEdge {
    std::int64_t key;
    std::int32_t index;  // 3 * face + local
  };
  std::vector<HalfEdge> hes(3 * nf);
  for (std::size_t f = 0; f < nf; ++f)
    for (int k = 0; k < 3; ++k)
      hes[3 * f + k] = {edge_key(faces[f][k], faces[f][(k + 1) % 3], nv), static_cast<std::int32_t>(3 * f + k)};
  std::sort(hes.begin(), hes.end(), [](const HalfEdge& a, const HalfEdge& b) {
    return a.key != b.key ? a.key < b.key : a.index < b.index;
  });

  struct Group {
    std::int64_t key;
    std::int32_t first;
    std::int32_t second;
  };
  std::vector<Group> groups;
  groups.reserve(3 * nf / 2 + 1);
  for (std::size_t i = 0; i < hes.size();) {
    std::size_t j = i;
    while (j < hes.size() && hes[j].key == hes[i].key) ++j;
    const std::size_t count = j - i;
    const Face& fa = faces[static_cast<std::size_t>(hes[i].index / 3)];
    const VertexId a = fa[hes[i].index % 3];
    const VertexId b = fa[(hes[i].index % 3 + 1) % 3];
    auto describe = [&] {
      std::ostringstream os;
      os << "edge (" << std::min(a, b) << ", " << std::max(a, b) << ")";
      return os.str();
    };
    if (count > 2) throw MeshError("non-manifold " + describe() + " shared by " + std::to_string(count) + " faces");
    if (count == 1 && !options.allow_open)
      throw MeshError("non-manifold " + describe() + " has a single incident face (open mesh)");
    if (count == 2) {
      const Face& fb = faces[static_cast<std::size_t>(hes[i + 1].index / 3)];
      const VertexId c = fb[hes[i + 1].index % 3];
      if (c == a)
        throw MeshError("inconsistent orientation on " + describe() + " between faces " +
                        std::to_string(hes[i].index / 3) + " and " + std::to_string(hes[i + 1].index / 3));
    }
    groups.push_back({hes[i].key, hes[i].index, count == 2 ? hes[i + 1].index : -1});
    i = j;
  }

  // Edge ids follow first appearance while scanning faces in order.
  std::vector<std::size_t> order(groups.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return groups[x].first < groups[y].first; });
  const std::size_t ne = groups.size();
  topo->edges.resize(ne);
  topo->edge_faces.resize(ne);
  topo->edge_keys.resize(ne);
  topo->edge_by_key.resize(ne);
  std::vector<EdgeId> id_of_group(ne);
  for (std::size_t e = 0; e < ne; ++e) id_of_group[order[e]] = static_cast<EdgeId>(e);
  for (std::size_t g = 0; g < ne; ++g) {
    const EdgeId e = id_of_group[g];
    const Face& fa = faces[static_cast<std::size_t>(groups[g].first / 3)];
    VertexId a = fa[groups[g].first % 3];
    VertexId b = fa[(groups[g].first % 3 + 1) % 3];
    topo->edges[e] = {std::min(a, b), std::max(a, b)};
    topo->edge_faces[e] = {groups[g].first / 3, groups[g].second < 0 ? -1 : groups[g].second / 3};
    topo->edge_keys[g] = groups[g].key;
    topo->edge_by_key[g] = e;
    if (groups[g].second < 0) topo->closed = false;
  }

  // Vertex -> faces.
  topo->vf_offsets.assign(nv + 1, 0);
  for (const Face& t : faces)
    for (VertexId v : t) ++topo->vf_offsets[static_cast<std::size_t>(v) + 1];
  for (std::size_t v = 0; v < nv; ++v) {
    if (topo->vf_offsets[v + 1] == 0) throw MeshError("vertex " + std::to_string(v) + " belongs to no face");
    topo->vf_offsets[v + 1] += topo->vf_offsets[v];
  }
  topo->vf.resize(3 * nf);
  {
    std::vector<std::size_t> fill(topo->vf_offsets.begin(), topo->vf_offsets.end() - 1);
    for (std::size_t f = 0; f < nf; ++f)
      for (VertexId v : faces[f]) topo->vf[fill[static_cast<std::size_t>(v)]++] = static_cast<FaceId>(f);
  }

  // Vertex -> vertices.
  topo->vv_offsets.assign(nv + 1, 0);
  for (const Edge& e : topo->edges) {
    ++topo->vv_offsets[static_cast<std::size_t>(e[0]) + 1];
    ++topo->vv_offsets[static_cast<std::size_t>(e[1]) + 1];
  }
  for (std::size_t v = 0; v < nv; ++v) topo->vv_offsets[v + 1] += topo->vv_offsets[v];
  topo->vv.resize(2 * ne);
  {
    std::vector<std::size_t> fill(topo->vv_offsets.begin(), topo->vv_offsets.end() - 1);
    for (const Edge& e : topo->edges) {
      topo->vv[fill[static_cast<std::size_t>(e[0])]++] = e[1];
      topo->vv[fill[static_cast<std::size_t>(e[1])]++] = e[0];
    }
    for (std::size_t v = 0; v < nv; ++v)
      std::sort(topo->vv.begin() + static_cast<std::ptrdiff_t>(topo->vv_offsets[v]),
                topo->vv.begin() + static_cast<std::ptrdiff_t>(topo->vv_offsets[v + 1]));
  }

  topo->faces = std::move(faces);
  return topo;
}

void TriMesh::check_faces_nondegenerate() const {
  for (std::size_t f = 0; f < topo_->faces.size(); ++f) {
    const auto p = face_points(static_cast<FaceId>(f));
    const double area = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]).norm();
    const double d = max_edge_length(p[0], p[1], p[2]);
    if (!(area > kDegenerateAreaFactor * d * d))
      throw MeshError("face " + std::to_string(f) + " is degenerate (area " + std::to_string(area) + ")");
  }
}

EdgeId TriMesh::find_edge(VertexId a, VertexId b) const {
  if (a == b) return -1;
  const std::int64_t key = edge_key(a, b, vertices_.size());
  const auto it = std::lower_bound(topo_->edge_keys.begin(), topo_->edge_keys.end(), key);
  if (it == topo_->edge_keys.end() || *it != key) return -1;
  return topo_->edge_by_key[static_cast<std::size_t>(it - topo_->edge_keys.begin())];
}

std::span<const FaceId> TriMesh::vertex_faces(VertexId v) const {
  const auto i = static_cast<std::size_t>(v);
  return {topo_->vf.data() + topo_->vf_offsets[i], topo_->vf_offsets[i + 1] - topo_->vf_offsets[i]};
}

std::span<const VertexId> TriMesh::vertex_neighbors(VertexId v) const {
  const auto i = static_cast<std::size_t>(v);
  return {topo_->vv.data() + topo_->vv_offsets[i], topo_->vv_offsets[i + 1] - topo_->vv_offsets[i]};
}

std::array<Vec3, 3> TriMesh::face_points(FaceId f) const {
  const Face& t = face(f);
  return {vertex(t[0]), vertex(t[1]), vertex(t[2])};
}

int TriMesh::euler_characteristic() const {
  return static_cast<int>(vertex_count()) - static_cast<int>(edge_count()) + static_cast<int>(face_count());
}

bool TriMesh::same_connectivity(const TriMesh& other) const {
  return topo_ == other.topo_ || (vertex_count() == other.vertex_count() && faces() == other.faces());
}

TriMesh uniform_refine(const TriMesh& mesh) {
  const std::size_t nv = mesh.vertex_count();
  std::vector<Vec3> vertices = mesh.vertices();
  vertices.reserve(nv + mesh.edge_count());
  for (const Edge& e : mesh.edges()) vertices.push_back(0.5 * (mesh.vertex(e[0]) + mesh.vertex(e[1])));

  auto mid = [&](VertexId a, VertexId b) {
    const EdgeId e = mesh.find_edge(a, b);
    return static_cast<VertexId>(nv + static_cast<std::size_t>(e));
  };
  std::vector<Face> faces;
  faces.reserve(4 * mesh.face_count());
  for (const Face& t : mesh.faces()) {
    const VertexId ab = mid(t[0], t[1]);
    const VertexId bc = mid(t[1], t[2]);
    const VertexId ca = mid(t[2], t[0]);
    faces.push_back({t[0], ab, ca});
    faces.push_back({ab, t[1], bc});
    faces.push_back({ca, bc, t[2]});
    faces.push_back({ab, bc, ca});
  }
  return TriMesh(std::move(vertices), std::move(faces), MeshOptions{.allow_open = !mesh.is_closed()});
}

MeshStats mesh_stats(const TriMesh& mesh) {
  MeshStats s;
  s.h = 0.0;
  s.h_min = std::numeric_limits<double>::infinity();
  s.min_angle = std::numbers::pi;
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    const auto p = mesh.face_points(static_cast<FaceId>(f));
    const double d = max_edge_length(p[0], p[1], p[2]);
    s.h = std::max(s.h, d);
    s.h_min = std::min(s.h_min, d);
    for (int k = 0; k < 3; ++k) {
      const Vec3 u = p[(k + 1) % 3] - p[k];
      const Vec3 w = p[(k + 2) % 3] - p[k];
      const double angle = std::atan2(u.cross(w).norm(), u.dot(w));
      s.min_angle = std::min(s.min_angle, angle);
    }
  }
  s.quasi_uniformity = s.h / s.h_min;
  return s;
}

VertexPatch vertex_patch(const TriMesh& mesh, VertexId v, std::size_t min_vertices, int min_rings) {
  if (v < 0 || static_cast<std::size_t>(v) >= mesh.vertex_count())
    throw MeshError("vertex_patch: vertex " + std::to_string(v) + " out of range");
  if (min_vertices >= mesh.vertex_count())
    throw MeshError("vertex_patch: mesh has " + std::to_string(mesh.vertex_count()) + " vertices, cannot collect " +
                    std::to_string(min_vertices) + " around a center");

  std::vector<VertexId> reached{v};
  std::vector<VertexId> frontier{v};
  // Patches hold a few dozen vertices; a linear scan beats a mesh-sized marker array.
  auto seen = [&](VertexId w) { return std::find(reached.begin(), reached.end(), w) != reached.end(); };
  int rings = 0;
  while (rings < std::max(1, min_rings) || reached.size() - 1 < min_vertices) {
    std::vector<VertexId> next;
    for (VertexId u : frontier)
      for (VertexId w : mesh.vertex_neighbors(u))
        if (!seen(w) && std::find(next.begin(), next.end(), w) == next.end()) next.push_back(w);
    if (next.empty())
      throw MeshError("vertex_patch: connected component of vertex " + std::to_string(v) + " has fewer than " +
                      std::to_string(min_vertices) + " other vertices");
    ++rings;
    reached.insert(reached.end(), next.begin(), next.end());
    frontier = std::move(next);
  }

  VertexPatch patch;
  patch.center = v;
  patch.rings = rings;
  patch.ring_vertices.assign(reached.begin() + 1, reached.end());
  std::sort(patch.ring_vertices.begin(), patch.ring_vertices.end());

  // Element patch: faces incident to a vertex strictly inside the outermost ring.
  const std::size_t inner_count = reached.size() - frontier.size();
  std::vector<VertexId> inner(reached.begin(), reached.begin() + static_cast<std::ptrdiff_t>(inner_count));
  for (VertexId w : inner)
    for (FaceId f : mesh.vertex_faces(w)) patch.ring_faces.push_back(f);
  std::sort(patch.ring_faces.begin(), patch.ring_faces.end());
  patch.ring_faces.erase(std::unique(patch.ring_faces.begin(), patch.ring_faces.end()), patch.ring_faces.end());
  return patch;
}

NormalArea triangle_normal_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 n = (b - a).cross(c - a);
  const double len = n.norm();
  const double d = max_edge_length(a, b, c);
  if (!(len > 2.0 * kDegenerateAreaFactor * d * d)) throw GeometryError("zero-area triangle");
  return {n / len, 0.5 * len};
}

NormalArea face_normal_area(const TriMesh& mesh, FaceId f) {
  if (f < 0 || static_cast<std::size_t>(f) >= mesh.face_count())
    throw MeshError("face index " + std::to_string(f) + " out of range");
  const auto p = mesh.face_points(f);
  return triangle_normal_area(p[0], p[1], p[2]);
}

double heron_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  // Kahan's ordering of Heron's formula, stable for needle triangles.
  std::array<double, 3> l{(b - c).norm(), (c - a).norm(), (a - b).norm()};
  std::sort(l.begin(), l.end(), std::greater<>());
  const double x = l[0], y = l[1], z = l[2];
  const double p = (x + (y + z)) * (z - (x - y)) * (z + (x - y)) * (x + (y - z));
  return 0.25 * std::sqrt(std::max(p, 0.0));
}

double mesh_area(const TriMesh& mesh) {
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    const auto p = mesh.face_points(static_cast<FaceId>(f));
    total += 0.5 * (p[1] - p[0]).cross(p[2] - p[0]).norm();
  }
  return total;
}

}  // namespace surfrec
