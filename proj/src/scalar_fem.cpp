#include <cmath>
#include <limits>
#include <string>

#include "surfrec/scalar_fem.hpp"

namespace surfrec {

AmbientFunction builtin_function(std::string_view name) {
  AmbientFunction u;
  u.name = std::string(name);
  if (name == "x1x2") {
    u.value = [](const Vec3& x) { return x[0] * x[1]; };
    u.gradient = [](const Vec3& x) -> Vec3 { return {x[1], x[0], 0.0}; };
    u.hessian = [](const Vec3&) -> Mat3 {
      Mat3 H = Mat3::Zero();
      H(0, 1) = H(1, 0) = 1.0;
      return H;
    };
  } else if (name == "exp_r2") {
    u.value = [](const Vec3& x) { return std::exp(x.squaredNorm()); };
    u.gradient = [](const Vec3& x) -> Vec3 { return 2.0 * std::exp(x.squaredNorm()) * x; };
    u.hessian = [](const Vec3& x) -> Mat3 {
      return std::exp(x.squaredNorm()) * (2.0 * Mat3::Identity() + 4.0 * x * x.transpose());
    };
  } else if (name == "one") {
    u.value = [](const Vec3&) { return 1.0; };
    u.gradient = [](const Vec3&) -> Vec3 { return Vec3::Zero(); };
    u.hessian = [](const Vec3&) -> Mat3 { return Mat3::Zero(); };
  } else {
    throw ConfigError("unknown function '" + std::string(name) + "' (expected x1x2, exp_r2 or one)");
  }
  return u;
}

std::function<double(const Vec3&)> ambient_rhs(const LevelSetSurface& surface, const AmbientFunction& u,
                                               ScalarProblem problem) {
  return [surface, u, problem](const Vec3& x) {
    const Vec3 nu = surface.normal(x);
    const double H = surface.mean_curvature(x);
    const Mat3 D2u = u.hessian(x);
    const double lb = D2u.trace() - H * u.gradient(x).dot(nu) - nu.dot(D2u * nu);
    return problem == ScalarProblem::reaction ? -lb + u.value(x) : -lb;
  };
}

std::array<Vec3, 3> barycentric_gradients(const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 N = (b - a).cross(c - a);
  const double n2 = N.squaredNorm();
  if (!(n2 > 0.0)) throw GeometryError("barycentric_gradients: degenerate triangle");
  return {N.cross(c - b) / n2, N.cross(a - c) / n2, N.cross(b - a) / n2};
}

Eigen::Matrix3d local_stiffness(const Vec3& a, const Vec3& b, const Vec3& c) {
  const auto g = barycentric_gradients(a, b, c);
  const double area = 0.5 * (b - a).cross(c - a).norm();
  Eigen::Matrix3d K;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) K(i, j) = area * g[static_cast<std::size_t>(i)].dot(g[static_cast<std::size_t>(j)]);
  return K;
}

CsrMatrix assemble_stiffness(const TriMesh& mesh) {
  CsrMatrix A = CsrMatrix::from_mesh(mesh);
  for (FaceId f = 0; f < static_cast<FaceId>(mesh.face_count()); ++f) {
    const auto& t = mesh.face(f);
    const auto p = mesh.face_points(f);
    const auto K = local_stiffness(p[0], p[1], p[2]);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        A.add(static_cast<std::size_t>(t[static_cast<std::size_t>(i)]), static_cast<std::size_t>(t[static_cast<std::size_t>(j)]), K(i, j));
  }
  return A;
}

CsrMatrix assemble_mass(const TriMesh& mesh, bool lumped) {
  CsrMatrix M = CsrMatrix::from_mesh(mesh);
  for (FaceId f = 0; f < static_cast<FaceId>(mesh.face_count()); ++f) {
    const auto& t = mesh.face(f);
    const double area = face_normal_area(mesh, f).area;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        M.add(static_cast<std::size_t>(t[i]), static_cast<std::size_t>(t[j]), area / 12.0 * (i == j ? 2.0 : 1.0));
  }
  if (!lumped) return M;
  // Row sums of the consistent matrix, so both agree bit for bit.
  const VectorX d = M.row_sums();
  CsrMatrix L = CsrMatrix::from_mesh(mesh);
  for (std::size_t i = 0; i < mesh.vertex_count(); ++i) L.add(i, i, d[static_cast<Eigen::Index>(i)]);
  return L;
}

VectorX lumped_mass(const TriMesh& mesh) { return assemble_mass(mesh, false).row_sums(); }

VectorX solve_mean_zero(const CsrMatrix& stiffness, const VectorX& rhs, const VectorX& mass_weights,
                        const CgOptions& opt) {
  VectorX x = VectorX::Zero(rhs.size());
  conjugate_gradient_mean_zero(stiffness, rhs, mass_weights, x, opt);
  return x;
}

VectorX load_vector(const TriMesh& mesh, const LevelSetSurface& surface, const std::function<double(const Vec3&)>& f) {
  VectorX fv(static_cast<Eigen::Index>(mesh.vertex_count()));
  for (std::size_t i = 0; i < mesh.vertex_count(); ++i)
    fv[static_cast<Eigen::Index>(i)] = f(project_to_surface(surface, mesh.vertices()[i]));
  return assemble_mass(mesh, false) * fv;
}

VectorX solve_reaction(const TriMesh& mesh, const LevelSetSurface& surface,
                       const std::function<double(const Vec3&)>& f, const CgOptions& opt) {
  const CsrMatrix A = assemble_stiffness(mesh).plus(assemble_mass(mesh, false));
  const VectorX b = load_vector(mesh, surface, f);
  VectorX x = VectorX::Zero(b.size());
  conjugate_gradient(A, b, x, opt);
  return x;
}

VectorX solve_laplace(const TriMesh& mesh, const LevelSetSurface& surface,
                      const std::function<double(const Vec3&)>& f, const CgOptions& opt) {
  return solve_mean_zero(assemble_stiffness(mesh), load_vector(mesh, surface, f), lumped_mass(mesh), opt);
}

VectorX interpolate(const TriMesh& mesh, const LevelSetSurface& surface, const AmbientFunction& u) {
  VectorX v(static_cast<Eigen::Index>(mesh.vertex_count()));
  for (std::size_t i = 0; i < mesh.vertex_count(); ++i)
    v[static_cast<Eigen::Index>(i)] = u.value(project_to_surface(surface, mesh.vertices()[i]));
  return v;
}

Vec3 element_gradient(const TriMesh& mesh, FaceId f, const VectorX& values) {
  const auto& t = mesh.face(f);
  const auto p = mesh.face_points(f);
  const auto g = barycentric_gradients(p[0], p[1], p[2]);
  return values[t[0]] * g[0] + values[t[1]] * g[1] + values[t[2]] * g[2];
}

Vec3 surface_gradient(const LevelSetSurface& surface, const AmbientFunction& u, const Vec3& y) {
  const Vec3 n = surface.normal(y);
  const Vec3 g = u.gradient(y);
  return g - g.dot(n) * n;
}

GradientErrors gradient_errors(const TriMesh& mesh, const LevelSetSurface& surface, const AmbientFunction& u,
                               const VectorX& uh, const std::vector<Vec3>* recovered) {
  if (static_cast<std::size_t>(uh.size()) != mesh.vertex_count())
    throw Error("gradient_errors: field length does not match the mesh");
  if (recovered && recovered->size() != mesh.vertex_count())
    throw Error("gradient_errors: recovered field length does not match the mesh");

  // Quadrature points are edge midpoints, so exact gradients are computed once per edge.
  const auto& edges = mesh.edges();
  std::vector<Vec3> exact(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Vec3 m = 0.5 * (mesh.vertex(edges[e][0]) + mesh.vertex(edges[e][1]));
    exact[e] = surface_gradient(surface, u, project_to_surface(surface, m));
  }
  const VectorX ui = interpolate(mesh, surface, u);

  double fem = 0.0, interp = 0.0, rec = 0.0;
  for (FaceId f = 0; f < static_cast<FaceId>(mesh.face_count()); ++f) {
    const auto& t = mesh.face(f);
    const auto p = mesh.face_points(f);
    const auto g = barycentric_gradients(p[0], p[1], p[2]);
    const double w = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]).norm() / 3.0;
    const Vec3 guh = uh[t[0]] * g[0] + uh[t[1]] * g[1] + uh[t[2]] * g[2];
    const Vec3 gui = ui[t[0]] * g[0] + ui[t[1]] * g[1] + ui[t[2]] * g[2];
    interp += 3.0 * w * (gui - guh).squaredNorm();
    for (std::size_t k = 0; k < 3; ++k) {
      const VertexId a = t[k];
      const VertexId b = t[(k + 1) % 3];
      const Vec3& ex = exact[static_cast<std::size_t>(mesh.find_edge(a, b))];
      fem += w * (ex - guh).squaredNorm();
      if (recovered) {
        const Vec3 gr = 0.5 * ((*recovered)[static_cast<std::size_t>(a)] + (*recovered)[static_cast<std::size_t>(b)]);
        rec += w * (ex - gr).squaredNorm();
      }
    }
  }
  GradientErrors out;
  out.fem = std::sqrt(fem);
  out.interpolant = std::sqrt(interp);
  out.recovered = recovered ? std::sqrt(rec) : std::numeric_limits<double>::quiet_NaN();
  return out;
}

}  // namespace surfrec
