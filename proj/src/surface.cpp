#include <cmath>
#include <string>

#include "surfrec/surface.hpp"

namespace surfrec {

namespace {

constexpr double kProjectionTol = 1e-12;
constexpr int kMaxNewton = 50;
constexpr double kMinGradient = 1e-14;

LevelSetSurface make_sphere() {
  LevelSetSurface s;
  s.name = "sphere";
  s.phi = [](const Vec3& x) { return x.norm() - 1.0; };
  s.grad_phi = [](const Vec3& x) -> Vec3 {
    const double r = x.norm();
    if (r == 0.0) throw GeometryError("sphere: gradient undefined at the origin");
    return x / r;
  };
  s.hess_phi = [](const Vec3& x) -> Mat3 {
    const double r = x.norm();
    if (r == 0.0) throw GeometryError("sphere: Hessian undefined at the origin");
    const Vec3 n = x / r;
    return (Mat3::Identity() - n * n.transpose()) / r;
  };
  return s;
}

// Signed distance to the torus with major radius 4 and minor radius 1.
LevelSetSurface make_torus() {
  constexpr double R = 4.0;
  LevelSetSurface s;
  s.name = "torus";
  s.phi = [](const Vec3& x) {
    const double rho = std::hypot(x[0], x[1]);
    return std::hypot(rho - R, x[2]) - 1.0;
  };
  s.grad_phi = [](const Vec3& x) -> Vec3 {
    const double rho = std::hypot(x[0], x[1]);
    const double r = std::hypot(rho - R, x[2]);
    if (rho == 0.0 || r == 0.0) throw GeometryError("torus: gradient undefined on the axis or the core circle");
    const double c = (rho - R) / (r * rho);
    return {c * x[0], c * x[1], x[2] / r};
  };
  s.hess_phi = [](const Vec3& x) -> Mat3 {
    const double rho = std::hypot(x[0], x[1]);
    const double r = std::hypot(rho - R, x[2]);
    if (rho == 0.0 || r == 0.0) throw GeometryError("torus: Hessian undefined on the axis or the core circle");
    const Vec3 grho(x[0] / rho, x[1] / rho, 0.0);
    Mat3 hrho = Mat3::Zero();
    hrho.topLeftCorner<2, 2>() = (Mat2::Identity() - grho.head<2>() * grho.head<2>().transpose()) / rho;
    const Vec3 ez(0.0, 0.0, 1.0);
    const Vec3 g = ((rho - R) * grho + x[2] * ez) / r;
    return (grho * grho.transpose() + (rho - R) * hrho + ez * ez.transpose() - g * g.transpose()) / r;
  };
  return s;
}

LevelSetSurface make_quartic() {
  LevelSetSurface s;
  s.name = "quartic";
  s.phi = [](const Vec3& x) {
    double v = -1.05;
    for (int i = 0; i < 3; ++i) v += (x[i] * x[i] - 1.0) * (x[i] * x[i] - 1.0);
    return v;
  };
  s.grad_phi = [](const Vec3& x) -> Vec3 {
    Vec3 g;
    for (int i = 0; i < 3; ++i) g[i] = 4.0 * x[i] * (x[i] * x[i] - 1.0);
    return g;
  };
  s.hess_phi = [](const Vec3& x) -> Mat3 {
    Mat3 H = Mat3::Zero();
    for (int i = 0; i < 3; ++i) H(i, i) = 12.0 * x[i] * x[i] - 4.0;
    return H;
  };
  return s;
}

}  // namespace

Vec3 LevelSetSurface::normal(const Vec3& x) const {
  const Vec3 g = grad_phi(x);
  const double n = g.norm();
  if (n < kMinGradient) throw GeometryError(name + ": vanishing gradient");
  return g / n;
}

double LevelSetSurface::mean_curvature(const Vec3& x) const {
  const Vec3 g = grad_phi(x);
  const double gn = g.norm();
  if (gn < kMinGradient) throw GeometryError(name + ": vanishing gradient");
  const Vec3 n = g / gn;
  const Mat3 H = hess_phi(x);
  return (H.trace() - n.dot(H * n)) / gn;
}

LevelSetSurface builtin_surface(std::string_view name) {
  if (name == "sphere") return make_sphere();
  if (name == "torus") return make_torus();
  if (name == "quartic") return make_quartic();
  throw ConfigError("unknown surface '" + std::string(name) + "' (expected sphere, torus or quartic)");
}

Vec3 project_to_surface(const LevelSetSurface& surface, const Vec3& x0, ProjectionMode mode) {
  Vec3 x = x0;
  double f = surface.phi(x);
  if (mode == ProjectionMode::first_order) {
    const Vec3 g = surface.grad_phi(x);
    const double g2 = g.squaredNorm();
    if (g2 < kMinGradient * kMinGradient) throw GeometryError(surface.name + ": vanishing gradient in projection");
    return x - (f / g2) * g;
  }
  for (int it = 0; it < kMaxNewton; ++it) {
    if (std::abs(f) <= kProjectionTol) return x;
    const Vec3 g = surface.grad_phi(x);
    const double g2 = g.squaredNorm();
    if (g2 < kMinGradient * kMinGradient) throw GeometryError(surface.name + ": vanishing gradient in projection");
    const Vec3 step = (f / g2) * g;
    double t = 1.0;
    Vec3 trial = x - step;
    double ft = surface.phi(trial);
    for (int k = 0; k < 30 && std::abs(ft) >= std::abs(f); ++k) {
      t *= 0.5;
      trial = x - t * step;
      ft = surface.phi(trial);
    }
    x = trial;
    f = ft;
  }
  if (std::abs(f) <= kProjectionTol) return x;
  throw GeometryError(surface.name + ": Newton projection did not converge from (" + std::to_string(x0[0]) + ", " +
                      std::to_string(x0[1]) + ", " + std::to_string(x0[2]) + "), |phi| = " + std::to_string(std::abs(f)));
}

TriMesh project_mesh(const TriMesh& mesh, const LevelSetSurface& surface) {
  std::vector<Vec3> v(mesh.vertices());
  for (Vec3& p : v) p = project_to_surface(surface, p);
  return mesh.with_vertices(std::move(v));
}

}  // namespace surfrec
