#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "surfrec/common.hpp"

namespace surfrec {

using Face = std::array<VertexId, 3>;
/// Undirected edge stored as (min, max).
using Edge = std::array<VertexId, 2>;

struct MeshOptions {
  /// Accept edges with a single incident face. Only meant for unit-test fixtures.
  bool allow_open = false;
};

/// Indexed triangle mesh of a closed, consistently oriented 2-manifold.
///
/// Immutable after construction. Connectivity lives in a shared block so that
/// meshes produced by moving vertices (projection, perturbation) share it.
class TriMesh {
 public:
  TriMesh(std::vector<Vec3> vertices, std::vector<Face> faces, MeshOptions options = {});

  /// Same connectivity, new vertex positions. Re-checks that no face degenerates.
  [[nodiscard]] TriMesh with_vertices(std::vector<Vec3> vertices) const;

  [[nodiscard]] std::size_t vertex_count() const { return vertices_.size(); }
  [[nodiscard]] std::size_t face_count() const { return topo_->faces.size(); }
  [[nodiscard]] std::size_t edge_count() const { return topo_->edges.size(); }

  [[nodiscard]] const std::vector<Vec3>& vertices() const { return vertices_; }
  [[nodiscard]] const Vec3& vertex(VertexId v) const { return vertices_[static_cast<std::size_t>(v)]; }
  [[nodiscard]] const std::vector<Face>& faces() const { return topo_->faces; }
  [[nodiscard]] const Face& face(FaceId f) const { return topo_->faces[static_cast<std::size_t>(f)]; }
  [[nodiscard]] const std::vector<Edge>& edges() const { return topo_->edges; }

  /// Incident faces of an edge; the second entry is -1 on a boundary edge of an open mesh.
  [[nodiscard]] std::array<FaceId, 2> edge_faces(EdgeId e) const {
    return topo_->edge_faces[static_cast<std::size_t>(e)];
  }
  /// Edge index for the vertex pair, or -1.
  [[nodiscard]] EdgeId find_edge(VertexId a, VertexId b) const;

  /// Faces incident to v, ascending.
  [[nodiscard]] std::span<const FaceId> vertex_faces(VertexId v) const;
  /// One-ring neighbours of v, ascending.
  [[nodiscard]] std::span<const VertexId> vertex_neighbors(VertexId v) const;

  [[nodiscard]] std::array<Vec3, 3> face_points(FaceId f) const;

  [[nodiscard]] int euler_characteristic() const;
  [[nodiscard]] bool is_closed() const { return topo_->closed; }
  [[nodiscard]] bool same_connectivity(const TriMesh& other) const;

 private:
  struct Topology {
    std::vector<Face> faces;
    std::vector<Edge> edges;
    std::vector<std::array<FaceId, 2>> edge_faces;
    std::vector<std::int64_t> edge_keys;  // sorted keys
    std::vector<EdgeId> edge_by_key;      // edge id per sorted key
    std::vector<std::size_t> vf_offsets;
    std::vector<FaceId> vf;
    std::vector<std::size_t> vv_offsets;
    std::vector<VertexId> vv;
    bool closed = true;
  };

  TriMesh(std::vector<Vec3> vertices, std::shared_ptr<const Topology> topo);
  static std::shared_ptr<const Topology> build_topology(std::size_t n_vertices, std::vector<Face> faces,
                                                        const MeshOptions& options);
  void check_faces_nondegenerate() const;

  std::vector<Vec3> vertices_;
  std::shared_ptr<const Topology> topo_;
};

struct MeshStats {
  double h = 0.0;          // max element diameter
  double h_min = 0.0;      // min element diameter
  double min_angle = 0.0;  // radians
  double quasi_uniformity = 0.0;
};

struct VertexPatch {
  VertexId center = -1;
  int rings = 0;
  std::vector<VertexId> ring_vertices;  // ascending, center excluded
  std::vector<FaceId> ring_faces;       // ascending
};

enum class MeshFormat { off, obj };

[[nodiscard]] MeshFormat format_from_path(const std::filesystem::path& path);
[[nodiscard]] TriMesh load_mesh(const std::filesystem::path& path, MeshFormat format, MeshOptions options = {});
void save_mesh(const TriMesh& mesh, const std::filesystem::path& path, MeshFormat format);

/// 1-to-4 midpoint subdivision. New vertex V + e sits on the midpoint of edge e.
[[nodiscard]] TriMesh uniform_refine(const TriMesh& mesh);

[[nodiscard]] MeshStats mesh_stats(const TriMesh& mesh);

/// Smallest ring neighbourhood of v holding at least min_vertices vertices (center excluded),
/// never fewer than min_rings rings.
[[nodiscard]] VertexPatch vertex_patch(const TriMesh& mesh, VertexId v, std::size_t min_vertices,
                                       int min_rings = 1);

struct NormalArea {
  Vec3 normal;
  double area = 0.0;
};

[[nodiscard]] NormalArea face_normal_area(const TriMesh& mesh, FaceId f);
[[nodiscard]] NormalArea triangle_normal_area(const Vec3& a, const Vec3& b, const Vec3& c);
[[nodiscard]] double heron_area(const Vec3& a, const Vec3& b, const Vec3& c);
[[nodiscard]] double mesh_area(const TriMesh& mesh);

}  // namespace surfrec
