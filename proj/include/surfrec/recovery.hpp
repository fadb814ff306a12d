#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "surfrec/sparse.hpp"

namespace surfrec {

enum class RecoveryScheme {
  pppr,  // quadratic least-squares fit of nodal values
  pspr,  // linear least-squares fit of element gradients at centroids
};

[[nodiscard]] RecoveryScheme parse_scheme(std::string_view name);
[[nodiscard]] std::string_view scheme_name(RecoveryScheme scheme);

enum class NormalWeighting { area, uniform };

/// Columns phi1, phi2, phi3 of `basis`; phi3 is the averaged normal.
struct LocalFrame {
  Vec3 origin = Vec3::Zero();
  Mat3 basis = Mat3::Identity();
};

[[nodiscard]] Vec3 averaged_normal(const TriMesh& mesh, VertexId v, NormalWeighting weighting = NormalWeighting::area);
[[nodiscard]] LocalFrame local_frame(const TriMesh& mesh, VertexId v, NormalWeighting weighting = NormalWeighting::area);

struct PatchCoordinates {
  std::vector<VertexId> vertices;  // center first, then the ring vertices in ascending order
  std::vector<Vec2> zeta;
  std::vector<double> heights;
};

[[nodiscard]] PatchCoordinates project_patch(const TriMesh& mesh, const VertexPatch& patch, const LocalFrame& frame);

/// Least-squares quadratic through (zeta_j, values_j); returns its gradient at the origin.
[[nodiscard]] Vec2 ppr_fit(std::span<const Vec2> zeta, std::span<const double> values);
/// Least-squares affine fit of sampled gradients; returns its value at the origin.
[[nodiscard]] Vec2 spr_fit(std::span<const Vec2> centroids, std::span<const Vec2> gradients);

/// Per-vertex output of the geometric recovery step.
class RecoveredGeometry {
 public:
  [[nodiscard]] RecoveryScheme scheme() const { return scheme_; }
  [[nodiscard]] std::size_t vertex_count() const { return frames_.size(); }
  [[nodiscard]] const LocalFrame& frame(VertexId v) const { return frames_[static_cast<std::size_t>(v)]; }
  /// Recovered gradient (R_h s)(0) of the patch heights.
  [[nodiscard]] const Vec2& slope(VertexId v) const { return slopes_[static_cast<std::size_t>(v)]; }
  /// 3x2 Jacobian (I, R_h s)^T in frame coordinates.
  [[nodiscard]] Mat32 jacobian(VertexId v) const;
  [[nodiscard]] int rings(VertexId v) const { return rings_[static_cast<std::size_t>(v)]; }
  [[nodiscard]] std::span<const VertexId> patch(VertexId v) const;
  /// Linear recovery operator at v: (R_h w)(0) = sum_j weights[j] * (w_j - w_center) over patch(v).
  [[nodiscard]] std::span<const Vec2> weights(VertexId v) const;
  /// R_h applied to nodal data at v.
  [[nodiscard]] Vec2 apply(VertexId v, const VectorX& values) const;

 private:
  friend RecoveredGeometry recover_geometry(const TriMesh&, RecoveryScheme, NormalWeighting);
  RecoveryScheme scheme_ = RecoveryScheme::pppr;
  std::vector<LocalFrame> frames_;
  std::vector<Vec2> slopes_;
  std::vector<int> rings_;
  std::vector<std::size_t> offsets_{0};
  std::vector<VertexId> patch_;
  std::vector<Vec2> weights_;
};

inline constexpr std::size_t kMinPatchVertices = 6;
inline constexpr int kMaxPatchRings = 3;

[[nodiscard]] RecoveredGeometry recover_geometry(const TriMesh& mesh, RecoveryScheme scheme,
                                                 NormalWeighting weighting = NormalWeighting::area);

/// Ambient recovered gradient per vertex: (a1, a2) (J J^T)^{-1} J mapped through the frame.
[[nodiscard]] std::vector<Vec3> recover_gradient(const RecoveredGeometry& geometry, const VectorX& values);

/// Normalised cross product of the recovered Jacobian columns, oriented along phi3.
[[nodiscard]] std::vector<Vec3> recover_normal(const RecoveredGeometry& geometry);

/// Per-vertex averaged normals for the whole mesh.
[[nodiscard]] std::vector<Vec3> averaged_normals(const TriMesh& mesh, NormalWeighting weighting = NormalWeighting::area);

}  // namespace surfrec
