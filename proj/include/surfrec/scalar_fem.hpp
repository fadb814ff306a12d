#pragma once

#include <array>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "surfrec/sparse.hpp"
#include "surfrec/surface.hpp"

namespace surfrec {

/// Smooth function on R^3 with closed-form derivatives.
struct AmbientFunction {
  std::string name;
  std::function<double(const Vec3&)> value;
  std::function<Vec3(const Vec3&)> gradient;
  std::function<Mat3(const Vec3&)> hessian;
};

/// "x1x2", "exp_r2" (exp(x^2 + y^2 + z^2)) or "one".
[[nodiscard]] AmbientFunction builtin_function(std::string_view name);

enum class ScalarProblem { laplace, reaction };

/// f = -Laplace-Beltrami(u) (+ u for the reaction problem), evaluated from ambient derivatives of u
/// and of the level-set function.
[[nodiscard]] std::function<double(const Vec3&)> ambient_rhs(const LevelSetSurface& surface,
                                                             const AmbientFunction& u, ScalarProblem problem);

/// Ambient gradients of the three barycentric functions of a triangle; they lie in its plane.
[[nodiscard]] std::array<Vec3, 3> barycentric_gradients(const Vec3& a, const Vec3& b, const Vec3& c);

[[nodiscard]] Eigen::Matrix3d local_stiffness(const Vec3& a, const Vec3& b, const Vec3& c);
[[nodiscard]] CsrMatrix assemble_stiffness(const TriMesh& mesh);
[[nodiscard]] CsrMatrix assemble_mass(const TriMesh& mesh, bool lumped);
[[nodiscard]] VectorX lumped_mass(const TriMesh& mesh);

/// Pure Laplacian with zero lumped-mass mean. `mass_weights` defaults to the lumped mass of the mesh.
[[nodiscard]] VectorX solve_mean_zero(const CsrMatrix& stiffness, const VectorX& rhs, const VectorX& mass_weights,
                                      const CgOptions& opt = {});

/// Load vector M f_I with consistent mass and f sampled at the surface projection of each vertex.
[[nodiscard]] VectorX load_vector(const TriMesh& mesh, const LevelSetSurface& surface,
                                  const std::function<double(const Vec3&)>& f);

/// (K + M) u = M f.
[[nodiscard]] VectorX solve_reaction(const TriMesh& mesh, const LevelSetSurface& surface,
                                     const std::function<double(const Vec3&)>& f, const CgOptions& opt = {});

/// -Laplace-Beltrami u = f with zero mean.
[[nodiscard]] VectorX solve_laplace(const TriMesh& mesh, const LevelSetSurface& surface,
                                    const std::function<double(const Vec3&)>& f, const CgOptions& opt = {});

/// Nodal interpolant u(p(x_i)) of u composed with the surface projection.
[[nodiscard]] VectorX interpolate(const TriMesh& mesh, const LevelSetSurface& surface, const AmbientFunction& u);

[[nodiscard]] Vec3 element_gradient(const TriMesh& mesh, FaceId f, const VectorX& values);

/// Exact surface gradient P(y) grad u(y).
[[nodiscard]] Vec3 surface_gradient(const LevelSetSurface& surface, const AmbientFunction& u, const Vec3& y);

struct GradientErrors {
  double fem = 0.0;           // ||grad_g u - grad_h u_h||
  double interpolant = 0.0;   // ||grad_h u_I - grad_h u_h||
  double recovered = 0.0;     // ||grad_g u - G_h u_h||, NaN when no recovered field is given
};

/// L2 gradient errors on the mesh with the three-point edge-midpoint rule; exact gradients are
/// evaluated at the Newton projection of each quadrature point.
[[nodiscard]] GradientErrors gradient_errors(const TriMesh& mesh, const LevelSetSurface& surface,
                                             const AmbientFunction& u, const VectorX& uh,
                                             const std::vector<Vec3>* recovered = nullptr);

}  // namespace surfrec
