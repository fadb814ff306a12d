#include <array>
#include <cmath>
#include <string>

#include "surfrec/scalar_fem.hpp"
#include "surfrec/vector_fem.hpp"

namespace surfrec {

namespace {

void add_block(CsrMatrix& A, VertexId a, VertexId b, const Mat3& B) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      A.add(3 * static_cast<std::size_t>(a) + static_cast<std::size_t>(i),
            3 * static_cast<std::size_t>(b) + static_cast<std::size_t>(j), B(i, j));
}

}  // namespace

NormalSource parse_normal_source(std::string_view name) {
  if (name == "elementwise") return NormalSource::elementwise;
  if (name == "averaged") return NormalSource::averaged;
  if (name == "recovered") return NormalSource::recovered;
  throw ConfigError("unknown normal source '" + std::string(name) + "' (expected elementwise, averaged or recovered)");
}

std::string_view normal_source_name(NormalSource source) {
  switch (source) {
    case NormalSource::elementwise: return "elementwise";
    case NormalSource::averaged: return "averaged";
    case NormalSource::recovered: return "recovered";
  }
  return "";
}

void PenaltyConfig::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("penalty beta must be positive and finite");
}

double barycentric_quartic_moment(int a, int b, int c, int d) {
  int count[3] = {0, 0, 0};
  for (const int i : {a, b, c, d}) ++count[i];
  constexpr double fact[5] = {1, 1, 2, 6, 24};
  return 2.0 * fact[count[0]] * fact[count[1]] * fact[count[2]] / 720.0;
}

VectorField penalty_normals(const TriMesh& mesh, const PenaltyConfig& cfg) {
  switch (cfg.normal_source) {
    case NormalSource::elementwise: return {};
    case NormalSource::averaged: return averaged_normals(mesh);
    case NormalSource::recovered: return recover_normal(recover_geometry(mesh, cfg.scheme));
  }
  return {};
}

VectorSystem assemble_vector_system(const TriMesh& mesh, const PenaltyConfig& cfg) {
  cfg.validate();
  VectorSystem sys;
  sys.h = mesh_stats(mesh).h;
  sys.mu = cfg.beta / (sys.h * sys.h);
  sys.vertex_normals = penalty_normals(mesh, cfg);
  sys.stiffness = CsrMatrix::from_mesh(mesh, 3);
  sys.penalty = sys.stiffness;

  double moment[3][3][3][3];
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c)
        for (int d = 0; d < 3; ++d) moment[a][b][c][d] = barycentric_quartic_moment(a, b, c, d);

  for (FaceId f = 0; f < static_cast<FaceId>(mesh.face_count()); ++f) {
    const auto& t = mesh.face(f);
    const auto p = mesh.face_points(f);
    const auto na = face_normal_area(mesh, f);
    const Mat3 P = Mat3::Identity() - na.normal * na.normal.transpose();
    const auto K = local_stiffness(p[0], p[1], p[2]);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        add_block(sys.stiffness, t[static_cast<std::size_t>(a)], t[static_cast<std::size_t>(b)], K(a, b) * P);
        Mat3 B = Mat3::Zero();
        if (sys.vertex_normals.empty()) {
          B = na.area / 12.0 * (a == b ? 2.0 : 1.0) * (na.normal * na.normal.transpose());
        } else {
          for (int c = 0; c < 3; ++c) {
            const Vec3& nc = sys.vertex_normals[static_cast<std::size_t>(t[static_cast<std::size_t>(c)])];
            for (int d = 0; d < 3; ++d) {
              const Vec3& nd = sys.vertex_normals[static_cast<std::size_t>(t[static_cast<std::size_t>(d)])];
              B += moment[a][b][c][d] * na.area * (nc * nd.transpose());
            }
          }
        }
        add_block(sys.penalty, t[static_cast<std::size_t>(a)], t[static_cast<std::size_t>(b)], sys.mu * B);
      }
    }
  }
  sys.matrix = sys.stiffness.plus(sys.penalty);
  return sys;
}

ManufacturedVectorProblem manufactured_vector_problem(const LevelSetSurface& surface) {
  if (surface.name != "sphere")
    throw ConfigError("manufactured vector problem is only available on the unit sphere, not '" + surface.name + "'");
  ManufacturedVectorProblem prob;
  prob.u = [](const Vec3& x) -> Vec3 {
    const double X = x[0], Y = x[1], Z = x[2];
    return {-(Y + Z) * X + Y * Y + Z * Z, -(X + Z) * Y + X * X + Z * Z, -(X + Y) * Z + X * X + Y * Y};
  };
  prob.du = [](const Vec3& x) -> Mat3 {
    const double X = x[0], Y = x[1], Z = x[2];
    Mat3 J;
    J << -(Y + Z), 2 * Y - X, 2 * Z - X,
         2 * X - Y, -(X + Z), 2 * Z - Y,
         2 * X - Z, 2 * Y - Z, -(X + Y);
    return J;
  };
  // On the unit sphere u = P(1, 1, 1) is the surface gradient of x + y + z, and the
  // operator behind the projected componentwise form maps it to itself.
  prob.f = prob.u;
  return prob;
}

VectorField interpolate_vector(const TriMesh& mesh, const std::function<Vec3(const Vec3&)>& u) {
  VectorField out(mesh.vertex_count());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = u(mesh.vertices()[i]);
  return out;
}

VectorX flatten(const VectorField& field) {
  VectorX x(static_cast<Eigen::Index>(3 * field.size()));
  for (std::size_t i = 0; i < field.size(); ++i) x.segment<3>(static_cast<Eigen::Index>(3 * i)) = field[i];
  return x;
}

VectorField unflatten(const VectorX& values) {
  VectorField out(static_cast<std::size_t>(values.size() / 3));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = values.segment<3>(static_cast<Eigen::Index>(3 * i));
  return out;
}

VectorX vector_load(const TriMesh& mesh, const std::function<Vec3(const Vec3&)>& f) {
  const CsrMatrix M = assemble_mass(mesh, false);
  const VectorField fv = interpolate_vector(mesh, f);
  VectorX b = VectorX::Zero(static_cast<Eigen::Index>(3 * mesh.vertex_count()));
  const auto& rp = M.row_ptr();
  for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
    Vec3 s = Vec3::Zero();
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) s += M.values()[k] * fv[static_cast<std::size_t>(M.cols()[k])];
    b.segment<3>(static_cast<Eigen::Index>(3 * i)) = s;
  }
  return b;
}

VectorField solve_vector_laplace(const TriMesh& mesh, const VectorSystem& system,
                                 const std::function<Vec3(const Vec3&)>& f, const CgOptions& opt) {
  const VectorX b = vector_load(mesh, f);
  VectorX x = VectorX::Zero(b.size());
  conjugate_gradient(system.matrix, b, x, opt);
  return unflatten(x);
}

VectorErrors vector_errors(const TriMesh& mesh, const LevelSetSurface& surface, const VectorField& uh,
                           const ManufacturedVectorProblem& problem) {
  if (uh.size() != mesh.vertex_count()) throw Error("vector_errors: field length does not match the mesh");
  const VectorField ui = interpolate_vector(mesh, problem.u);
  const auto& edges = mesh.edges();
  std::vector<Mat3> exact(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Vec3 y = project_to_surface(surface, 0.5 * (mesh.vertex(edges[e][0]) + mesh.vertex(edges[e][1])));
    const Vec3 n = surface.normal(y);
    exact[e] = problem.du(y) * (Mat3::Identity() - n * n.transpose());
  }
  double l2 = 0.0, semi = 0.0;
  for (FaceId f = 0; f < static_cast<FaceId>(mesh.face_count()); ++f) {
    const auto& t = mesh.face(f);
    const auto p = mesh.face_points(f);
    const double area = face_normal_area(mesh, f).area;
    std::array<Vec3, 3> e;
    for (std::size_t k = 0; k < 3; ++k) e[k] = uh[static_cast<std::size_t>(t[k])] - ui[static_cast<std::size_t>(t[k])];
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t b = 0; b < 3; ++b) l2 += area / 12.0 * (a == b ? 2.0 : 1.0) * e[a].dot(e[b]);
    const auto g = barycentric_gradients(p[0], p[1], p[2]);
    Mat3 grad = Mat3::Zero();
    for (std::size_t k = 0; k < 3; ++k) grad += uh[static_cast<std::size_t>(t[k])] * g[k].transpose();
    for (std::size_t k = 0; k < 3; ++k) {
      const EdgeId edge = mesh.find_edge(t[k], t[(k + 1) % 3]);
      semi += area / 3.0 * (grad - exact[static_cast<std::size_t>(edge)]).squaredNorm();
    }
  }
  l2 = std::max(l2, 0.0);
  return {std::sqrt(l2), std::sqrt(l2 + semi)};
}

}  // namespace surfrec
