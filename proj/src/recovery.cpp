#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include <Eigen/SVD>

#include "surfrec/recovery.hpp"
#include "surfrec/surface.hpp"

namespace surfrec {

namespace {

constexpr double kRankTol = 1e-10;

// Rows of the pseudo-inverse of `A`, or nothing when A is numerically rank deficient.
std::optional<Eigen::MatrixXd> pseudo_inverse(const Eigen::MatrixXd& A) {
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (s.size() < A.cols() || !(s[s.size() - 1] > kRankTol * s[0])) return std::nullopt;
  return svd.matrixV() * s.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
}

double patch_radius(std::span<const Vec2> pts) {
  double r = 0.0;
  for (const Vec2& z : pts) r = std::max(r, z.norm());
  return r;
}

// Weights mapping nodal values to the gradient at the origin of the least-squares quadratic.
std::optional<std::vector<Vec2>> ppr_weights(std::span<const Vec2> zeta) {
  const auto n = static_cast<Eigen::Index>(zeta.size());
  if (n < 6) return std::nullopt;
  const double rho = patch_radius(zeta);
  if (!(rho > 0.0)) return std::nullopt;
  Eigen::MatrixXd V(n, 6);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double x = zeta[static_cast<std::size_t>(j)][0] / rho;
    const double y = zeta[static_cast<std::size_t>(j)][1] / rho;
    V.row(j) << 1.0, x, y, x * x, x * y, y * y;
  }
  const auto P = pseudo_inverse(V);
  if (!P) return std::nullopt;
  std::vector<Vec2> w(zeta.size());
  for (Eigen::Index j = 0; j < n; ++j) w[static_cast<std::size_t>(j)] = Vec2((*P)(1, j), (*P)(2, j)) / rho;
  return w;
}

// Weights mapping sampled values at the centroids to the value at the origin of the affine fit.
std::optional<std::vector<double>> spr_weights(std::span<const Vec2> centroids) {
  const auto m = static_cast<Eigen::Index>(centroids.size());
  if (m < 3) return std::nullopt;
  const double rho = patch_radius(centroids);
  if (!(rho > 0.0)) return std::nullopt;
  Eigen::MatrixXd A(m, 3);
  for (Eigen::Index j = 0; j < m; ++j)
    A.row(j) << 1.0, centroids[static_cast<std::size_t>(j)][0] / rho, centroids[static_cast<std::size_t>(j)][1] / rho;
  const auto P = pseudo_inverse(A);
  if (!P) return std::nullopt;
  std::vector<double> w(centroids.size());
  for (Eigen::Index j = 0; j < m; ++j) w[static_cast<std::size_t>(j)] = (*P)(0, j);
  return w;
}

std::optional<std::vector<Vec2>> spr_operator(const TriMesh& mesh, const VertexPatch& patch,
                                              const PatchCoordinates& pc) {
  const auto local = [&](VertexId g) {
    const auto it = std::find(pc.vertices.begin(), pc.vertices.end(), g);
    if (it == pc.vertices.end()) throw RecoveryError("patch face refers to a vertex outside the patch");
    return static_cast<std::size_t>(it - pc.vertices.begin());
  };
  std::vector<Vec2> centroids;
  std::vector<std::array<std::size_t, 3>> idx;
  std::vector<std::array<Vec2, 3>> grads;
  for (const FaceId f : patch.ring_faces) {
    const auto& t = mesh.face(f);
    const std::array<std::size_t, 3> li{local(t[0]), local(t[1]), local(t[2])};
    const Vec2& a = pc.zeta[li[0]];
    const Vec2& b = pc.zeta[li[1]];
    const Vec2& c = pc.zeta[li[2]];
    const double det = (b - a)[0] * (c - a)[1] - (b - a)[1] * (c - a)[0];
    if (std::abs(det) <= 1e-14 * (b - a).squaredNorm()) return std::nullopt;
    const auto rot = [](const Vec2& e) { return Vec2(-e[1], e[0]); };
    grads.push_back({rot(c - b) / det, rot(a - c) / det, rot(b - a) / det});
    centroids.push_back((a + b + c) / 3.0);
    idx.push_back(li);
  }
  const auto w = spr_weights(centroids);
  if (!w) return std::nullopt;
  std::vector<Vec2> out(pc.vertices.size(), Vec2::Zero());
  for (std::size_t f = 0; f < idx.size(); ++f)
    for (std::size_t k = 0; k < 3; ++k) out[idx[f][k]] += (*w)[f] * grads[f][k];
  return out;
}

void check_no_fold(const PatchCoordinates& pc, VertexId v) {
  const double rho = patch_radius(pc.zeta);
  for (std::size_t i = 0; i < pc.zeta.size(); ++i)
    for (std::size_t j = i + 1; j < pc.zeta.size(); ++j)
      if ((pc.zeta[i] - pc.zeta[j]).norm() <= 1e-12 * rho)
        throw RecoveryError("vertices " + std::to_string(pc.vertices[i]) + " and " + std::to_string(pc.vertices[j]) +
                            " project to the same parameter point in the patch of vertex " + std::to_string(v));
}

}  // namespace

RecoveryScheme parse_scheme(std::string_view name) {
  if (name == "pppr") return RecoveryScheme::pppr;
  if (name == "pspr") return RecoveryScheme::pspr;
  throw ConfigError("unknown recovery scheme '" + std::string(name) + "' (expected pppr or pspr)");
}

std::string_view scheme_name(RecoveryScheme scheme) { return scheme == RecoveryScheme::pppr ? "pppr" : "pspr"; }

Vec3 averaged_normal(const TriMesh& mesh, VertexId v, NormalWeighting weighting) {
  Vec3 sum = Vec3::Zero();
  for (const FaceId f : mesh.vertex_faces(v)) {
    const auto na = face_normal_area(mesh, f);
    sum += weighting == NormalWeighting::area ? na.area * na.normal : na.normal;
  }
  const double n = sum.norm();
  if (!(n > 1e-14)) throw RecoveryError("averaged normal vanishes at vertex " + std::to_string(v));
  return sum / n;
}

std::vector<Vec3> averaged_normals(const TriMesh& mesh, NormalWeighting weighting) {
  std::vector<Vec3> out(mesh.vertex_count());
  for (std::size_t v = 0; v < out.size(); ++v) out[v] = averaged_normal(mesh, static_cast<VertexId>(v), weighting);
  return out;
}

LocalFrame local_frame(const TriMesh& mesh, VertexId v, NormalWeighting weighting) {
  LocalFrame fr;
  fr.origin = mesh.vertex(v);
  const Vec3 n = averaged_normal(mesh, v, weighting);
  const auto [t1, t2] = tangent_basis(n);
  fr.basis.col(0) = t1;
  fr.basis.col(1) = t2;
  fr.basis.col(2) = n;
  return fr;
}

PatchCoordinates project_patch(const TriMesh& mesh, const VertexPatch& patch, const LocalFrame& frame) {
  PatchCoordinates pc;
  pc.vertices.reserve(patch.ring_vertices.size() + 1);
  pc.vertices.push_back(patch.center);
  pc.vertices.insert(pc.vertices.end(), patch.ring_vertices.begin(), patch.ring_vertices.end());
  pc.zeta.reserve(pc.vertices.size());
  pc.heights.reserve(pc.vertices.size());
  for (const VertexId j : pc.vertices) {
    const Vec3 d = mesh.vertex(j) - frame.origin;
    pc.zeta.emplace_back(d.dot(frame.basis.col(0)), d.dot(frame.basis.col(1)));
    pc.heights.push_back(d.dot(frame.basis.col(2)));
  }
  return pc;
}

Vec2 ppr_fit(std::span<const Vec2> zeta, std::span<const double> values) {
  if (zeta.size() != values.size()) throw RecoveryError("ppr_fit: point and value counts differ");
  const auto w = ppr_weights(zeta);
  if (!w) throw RecoveryError("ppr_fit: quadratic least-squares system is rank deficient");
  Vec2 g = Vec2::Zero();
  for (std::size_t j = 0; j < values.size(); ++j) g += values[j] * (*w)[j];
  return g;
}

Vec2 spr_fit(std::span<const Vec2> centroids, std::span<const Vec2> gradients) {
  if (centroids.size() != gradients.size()) throw RecoveryError("spr_fit: point and gradient counts differ");
  const auto w = spr_weights(centroids);
  if (!w) throw RecoveryError("spr_fit: affine least-squares system is rank deficient");
  Vec2 g = Vec2::Zero();
  for (std::size_t j = 0; j < gradients.size(); ++j) g += (*w)[j] * gradients[j];
  return g;
}

Mat32 RecoveredGeometry::jacobian(VertexId v) const {
  const Vec2& s = slope(v);
  Mat32 J;
  J << 1.0, 0.0, 0.0, 1.0, s[0], s[1];
  return J;
}

std::span<const VertexId> RecoveredGeometry::patch(VertexId v) const {
  const auto i = static_cast<std::size_t>(v);
  return {patch_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
}

std::span<const Vec2> RecoveredGeometry::weights(VertexId v) const {
  const auto i = static_cast<std::size_t>(v);
  return {weights_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
}

Vec2 RecoveredGeometry::apply(VertexId v, const VectorX& values) const {
  const auto ids = patch(v);
  const auto w = weights(v);
  const double center = values[ids[0]];
  Vec2 g = Vec2::Zero();
  for (std::size_t j = 1; j < ids.size(); ++j) g += (values[ids[j]] - center) * w[j];
  return g;
}

RecoveredGeometry recover_geometry(const TriMesh& mesh, RecoveryScheme scheme, NormalWeighting weighting) {
  RecoveredGeometry g;
  g.scheme_ = scheme;
  const auto nv = mesh.vertex_count();
  g.frames_.reserve(nv);
  g.slopes_.reserve(nv);
  g.rings_.reserve(nv);
  g.offsets_.reserve(nv + 1);
  for (std::size_t i = 0; i < nv; ++i) {
    const auto v = static_cast<VertexId>(i);
    const LocalFrame frame = local_frame(mesh, v, weighting);
    VertexPatch patch = vertex_patch(mesh, v, kMinPatchVertices);
    PatchCoordinates pc;
    std::optional<std::vector<Vec2>> w;
    while (true) {
      pc = project_patch(mesh, patch, frame);
      check_no_fold(pc, v);
      w = scheme == RecoveryScheme::pppr ? ppr_weights(pc.zeta) : spr_operator(mesh, patch, pc);
      if (w) break;
      if (patch.rings >= kMaxPatchRings)
        throw RecoveryError("least-squares fit at vertex " + std::to_string(v) + " is rank deficient with " +
                            std::to_string(kMaxPatchRings) + " rings");
      patch = vertex_patch(mesh, v, kMinPatchVertices, patch.rings + 1);
    }
    Vec2 slope = Vec2::Zero();
    for (std::size_t j = 1; j < pc.heights.size(); ++j) slope += (pc.heights[j] - pc.heights[0]) * (*w)[j];
    g.frames_.push_back(frame);
    g.slopes_.push_back(slope);
    g.rings_.push_back(patch.rings);
    g.patch_.insert(g.patch_.end(), pc.vertices.begin(), pc.vertices.end());
    g.weights_.insert(g.weights_.end(), w->begin(), w->end());
    g.offsets_.push_back(g.patch_.size());
  }
  return g;
}

std::vector<Vec3> recover_gradient(const RecoveredGeometry& geometry, const VectorX& values) {
  if (static_cast<std::size_t>(values.size()) != geometry.vertex_count())
    throw RecoveryError("recover_gradient: field length does not match the mesh");
  std::vector<Vec3> out(geometry.vertex_count());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto v = static_cast<VertexId>(i);
    const Vec2 a = geometry.apply(v, values);
    const Mat23 J = geometry.jacobian(v).transpose();
    const Eigen::RowVector3d row = a.transpose() * (J * J.transpose()).inverse() * J;
    out[i] = geometry.frame(v).basis * row.transpose();
  }
  return out;
}

std::vector<Vec3> recover_normal(const RecoveredGeometry& geometry) {
  std::vector<Vec3> out(geometry.vertex_count());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Vec2& s = geometry.slope(static_cast<VertexId>(i));
    // (1, 0, s1) x (0, 1, s2) has a positive third component, i.e. it already points along phi3.
    out[i] = geometry.frame(static_cast<VertexId>(i)).basis * Vec3(-s[0], -s[1], 1.0).normalized();
  }
  return out;
}

}  // namespace surfrec
