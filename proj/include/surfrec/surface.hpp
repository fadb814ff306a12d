#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <string_view>

#include "surfrec/mesh.hpp"

namespace surfrec {

/// Closed surface given as the zero level set of a smooth function.
struct LevelSetSurface {
  std::string name;
  std::function<double(const Vec3&)> phi;
  std::function<Vec3(const Vec3&)> grad_phi;
  std::function<Mat3(const Vec3&)> hess_phi;

  /// Unit normal of the level set through x.
  [[nodiscard]] Vec3 normal(const Vec3& x) const;
  /// div(grad phi / |grad phi|), the sum of principal curvatures of the level set through x.
  [[nodiscard]] double mean_curvature(const Vec3& x) const;
};

/// "sphere" (unit, signed distance), "torus" (radii 4 and 1, signed distance) or
/// "quartic" ((x^2-1)^2 + (y^2-1)^2 + (z^2-1)^2 - 1.05).
[[nodiscard]] LevelSetSurface builtin_surface(std::string_view name);

enum class ProjectionMode {
  newton,       // damped Newton along grad phi until |phi| <= 1e-12
  first_order,  // exactly one step x - phi grad phi / |grad phi|^2
};

[[nodiscard]] Vec3 project_to_surface(const LevelSetSurface& surface, const Vec3& x,
                                      ProjectionMode mode = ProjectionMode::newton);

// ---- mesh generators -------------------------------------------------------

[[nodiscard]] TriMesh make_icosahedron();
/// Icosahedron refined `level` times, new vertices Newton-projected onto the unit sphere.
/// Vertex count 10 * 4^level + 2.
[[nodiscard]] TriMesh make_icosphere(int level);
/// Chevron-pattern parameter grid of (20 * 2^level) x (10 * 2^level) vertices mapped onto the torus.
[[nodiscard]] TriMesh make_chevron_torus(int level);
/// Coarse mesh of the quartic surface with all vertices on the surface.
[[nodiscard]] TriMesh make_quartic_base();
/// Quartic base refined `level` times; each refinement projects only the new vertices.
[[nodiscard]] TriMesh make_quartic(int level, ProjectionMode mode = ProjectionMode::first_order);

/// Newton-projects every vertex of `mesh` onto `surface`.
[[nodiscard]] TriMesh project_mesh(const TriMesh& mesh, const LevelSetSurface& surface);

// ---- deviated meshes -------------------------------------------------------

inline constexpr double kNoPerturbation = std::numeric_limits<double>::infinity();

/// Vertex displacement d_n * nu + d_t * t with |d_n| <= c h^normal_order and
/// |d_t| <= c h^tangential_order, t a seeded random unit tangent.
struct PerturbationSpec {
  double normal_order = kNoPerturbation;
  double tangential_order = kNoPerturbation;
  bool normal_random = false;      // magnitude scaled by U[-1, 1]
  bool tangential_random = false;  // magnitude scaled by U[-1, 1]
  double magnitude = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
  [[nodiscard]] bool is_identity() const {
    return normal_order == kNoPerturbation && tangential_order == kNoPerturbation;
  }
};

/// Parses "normal:2[:rand|:det],tangential:3[:rand|:det][,rand|,det][,c=VALUE]" or "none".
[[nodiscard]] PerturbationSpec parse_perturbation(std::string_view text);
[[nodiscard]] std::string format_perturbation(const PerturbationSpec& spec);

/// Orthonormal tangent basis at a point with unit normal n: Gram-Schmidt of the
/// coordinate axis least aligned with n, then n x t1.
[[nodiscard]] std::pair<Vec3, Vec3> tangent_basis(const Vec3& n);

[[nodiscard]] TriMesh perturb_mesh(const TriMesh& mesh_star, const LevelSetSurface& surface,
                                   const PerturbationSpec& spec);

// ---- geometric supercloseness ---------------------------------------------

using Triangle = std::array<Vec3, 3>;

/// Affine map between two triangles with matching vertex order, written over a
/// planar frame attached to the first triangle.
struct TrianglePairTransform {
  Mat32 jacobian;  // dGamma
  Mat2 metric;     // dGamma^T dGamma
  double sqrt_det = 0.0;
};

[[nodiscard]] TrianglePairTransform pair_transform(const Triangle& tau1, const Triangle& tau2);

struct SuperclosenessReport {
  double jacobian = 0.0;  // max_e max_ij |dGamma - Id|
  double metric = 0.0;    // max_e max_ij |g - I|
  double sqrt_det = 0.0;  // max_e |sqrt(det g) - 1|
};

/// Element-wise maxima over face pairs, reference triangles taken from mesh_star.
[[nodiscard]] SuperclosenessReport supercloseness_report(const TriMesh& mesh_star, const TriMesh& mesh_dev);

}  // namespace surfrec
