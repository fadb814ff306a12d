#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include "surfrec/recovery.hpp"
#include "surfrec/sparse.hpp"
#include "surfrec/surface.hpp"

namespace surfrec {

enum class NormalSource {
  elementwise,  // constant face normal
  averaged,     // area-weighted vertex average, interpolated linearly
  recovered,    // recovered vertex normal, interpolated linearly
};

[[nodiscard]] NormalSource parse_normal_source(std::string_view name);
[[nodiscard]] std::string_view normal_source_name(NormalSource source);

struct PenaltyConfig {
  double beta = 1.0;
  NormalSource normal_source = NormalSource::recovered;
  RecoveryScheme scheme = RecoveryScheme::pppr;  // used by the recovered source

  void validate() const;
};

using VectorField = std::vector<Vec3>;

/// Unknowns are ambient 3-vectors per vertex, vertex-major (3 v + k).
struct VectorSystem {
  CsrMatrix stiffness;  // tangentially projected componentwise gradients
  CsrMatrix penalty;    // mu * (u . nu, v . nu)
  CsrMatrix matrix;     // stiffness + penalty
  double mu = 0.0;
  double h = 0.0;
  VectorField vertex_normals;  // empty for the elementwise source
};

/// Vertex normals used by the penalty term; empty for the elementwise source.
[[nodiscard]] VectorField penalty_normals(const TriMesh& mesh, const PenaltyConfig& cfg);

[[nodiscard]] VectorSystem assemble_vector_system(const TriMesh& mesh, const PenaltyConfig& cfg);

/// Integrals of products of four barycentric functions over a triangle of unit area.
[[nodiscard]] double barycentric_quartic_moment(int a, int b, int c, int d);

struct ManufacturedVectorProblem {
  std::function<Vec3(const Vec3&)> u;
  std::function<Mat3(const Vec3&)> du;  // ambient Jacobian, row k = grad u_k
  std::function<Vec3(const Vec3&)> f;
};

/// Tangential field on the unit sphere and the right-hand side matching the assembled
/// projected form (f = u). Only the sphere is supported.
[[nodiscard]] ManufacturedVectorProblem manufactured_vector_problem(const LevelSetSurface& surface);

[[nodiscard]] VectorField interpolate_vector(const TriMesh& mesh, const std::function<Vec3(const Vec3&)>& u);
[[nodiscard]] VectorX flatten(const VectorField& field);
[[nodiscard]] VectorField unflatten(const VectorX& values);

/// Consistent-mass load vector of f sampled at the vertices.
[[nodiscard]] VectorX vector_load(const TriMesh& mesh, const std::function<Vec3(const Vec3&)>& f);

[[nodiscard]] VectorField solve_vector_laplace(const TriMesh& mesh, const VectorSystem& system,
                                               const std::function<Vec3(const Vec3&)>& f, const CgOptions& opt = {});

struct VectorErrors {
  double l2 = 0.0;
  double h1 = 0.0;
};

/// l2: exact L2 norm of u_h - I_h u on the mesh.
/// h1: sqrt(l2^2 + sum_k ||grad_h u_h,k - P grad u_k||^2), the gradient term with the edge-midpoint
/// rule and exact gradients at the surface projection of each quadrature point.
[[nodiscard]] VectorErrors vector_errors(const TriMesh& mesh, const LevelSetSurface& surface, const VectorField& uh,
                                         const ManufacturedVectorProblem& problem);

}  // namespace surfrec
