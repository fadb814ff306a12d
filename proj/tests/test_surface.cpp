#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "surfrec/mesh.hpp"
#include "surfrec/surface.hpp"

using namespace surfrec;

namespace {

// Bisection on g over [lo, hi] with a sign change.
template <typename F>
double bisect(F g, double lo, double hi) {
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    if ((g(lo) < 0) == (g(mid) < 0))
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double max_phi(const TriMesh& m, const LevelSetSurface& s) {
  double e = 0.0;
  for (const Vec3& v : m.vertices()) e = std::max(e, std::abs(s.phi(v)));
  return e;
}

}  // namespace

TEST_CASE("built-in level sets") {
  const auto sphere = builtin_surface("sphere");
  CHECK(sphere.phi({1, 0, 0}) == 0.0);
  CHECK((sphere.normal({1, 0, 0}) - Vec3(1, 0, 0)).norm() == 0.0);
  CHECK(sphere.mean_curvature({0, 0.6, 0.8}) == doctest::Approx(2.0).epsilon(1e-12));

  const auto torus = builtin_surface("torus");
  CHECK(std::abs(torus.phi({5, 0, 0})) <= 1e-15);
  CHECK(std::abs(torus.phi({3, 0, 0})) <= 1e-15);
  CHECK((torus.normal({3, 0, 0}) - Vec3(-1, 0, 0)).norm() <= 1e-15);

  // 3 (a^2 - 1)^2 = 1.05 on the diagonal: roots from an independent 1D bisection.
  const auto quartic = builtin_surface("quartic");
  const auto g = [](double a) { return 3.0 * (a * a - 1.0) * (a * a - 1.0) - 1.05; };
  for (const double a : {bisect(g, 1.0, 2.0), bisect(g, 0.0, 1.0)}) {
    CHECK(std::abs(quartic.phi({a, a, a})) <= 1e-10);
    CHECK(std::abs(quartic.phi({-a, -a, a})) <= 1e-10);
  }
  CHECK(bisect(g, 1.0, 2.0) == doctest::Approx(std::sqrt(1.0 + std::sqrt(0.35))).epsilon(1e-12));

  CHECK_THROWS_AS((void)builtin_surface("klein"), ConfigError);
}

TEST_CASE("analytic derivatives agree with central differences") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1.5, 1.5);
  for (const char* name : {"sphere", "torus", "quartic"}) {
    const auto s = builtin_surface(name);
    for (int k = 0; k < 20; ++k) {
      Vec3 x(U(rng), U(rng), U(rng));
      if (std::string(name) == "torus") x += Vec3(3.5, 0, 0);
      const double d = 1e-5;
      Vec3 fd;
      Mat3 hfd;
      for (int i = 0; i < 3; ++i) {
        const Vec3 e = d * Vec3::Unit(i);
        fd[i] = (s.phi(x + e) - s.phi(x - e)) / (2 * d);
        hfd.col(i) = (s.grad_phi(x + e) - s.grad_phi(x - e)) / (2 * d);
      }
      CHECK((fd - s.grad_phi(x)).norm() <= 1e-7 * std::max(1.0, fd.norm()));
      CHECK((hfd - s.hess_phi(x)).norm() <= 1e-6 * std::max(1.0, hfd.norm()));
    }
  }
}

TEST_CASE("projection onto the surface") {
  const auto sphere = builtin_surface("sphere");
  CHECK((project_to_surface(sphere, {2, 0, 0}) - Vec3(1, 0, 0)).norm() <= 1e-12);
  const double eps = 1e-3;
  const Vec3 y = project_to_surface(sphere, {1 + eps, 0, 0}, ProjectionMode::first_order);
  CHECK(std::abs(sphere.phi(y)) <= eps * eps);

  const auto torus = builtin_surface("torus");
  const Vec3 p = project_to_surface(torus, {4.3, 0.2, 1.4});
  CHECK(std::abs(torus.phi(p)) <= 1e-12);
  CHECK_THROWS_AS((void)project_to_surface(sphere, {0, 0, 0}), GeometryError);
}

TEST_CASE("first-order projection of new quartic vertices is within a frozen C h^4 of Newton") {
  const auto quartic = builtin_surface("quartic");
  std::size_t previous = make_quartic(0).vertex_count();
  CHECK(max_phi(make_quartic(0), quartic) <= 1e-12);
  for (int level = 1; level <= 2; ++level) {
    const TriMesh m = make_quartic(level);
    const double h = mesh_stats(m).h;
    double gap = 0.0;
    for (std::size_t i = previous; i < m.vertex_count(); ++i)
      gap = std::max(gap, (m.vertices()[i] - project_to_surface(quartic, m.vertices()[i])).norm());
    // Measured ratios 1.548 and 1.576 at levels 1 and 2.
    CHECK(gap / std::pow(h, 4) >= 1.4);
    CHECK(gap / std::pow(h, 4) <= 1.7);
    CHECK(gap <= 0.02 * h * h);
    previous = m.vertex_count();
  }
}

TEST_CASE("generator vertex counts and postconditions") {
  const auto sphere = builtin_surface("sphere");
  const std::size_t counts[] = {162, 642, 2562, 10242, 40962};
  for (int level = 2; level <= 6; ++level) {
    const TriMesh m = make_icosphere(level);
    CHECK(m.vertex_count() == counts[level - 2]);
    CHECK(m.vertex_count() == 10 * (std::size_t{1} << (2 * level)) + 2);
    CHECK(max_phi(m, sphere) <= 1e-12);
    CHECK(m.euler_characteristic() == 2);
  }
  const auto torus = builtin_surface("torus");
  for (int level = 0; level <= 3; ++level) {
    const TriMesh m = make_chevron_torus(level);
    CHECK(m.vertex_count() == 200 * (std::size_t{1} << (2 * level)));
    CHECK(m.euler_characteristic() == 0);
    CHECK(max_phi(m, torus) <= 1e-12);
  }
  const TriMesh q = make_quartic(0);
  CHECK(q.euler_characteristic() == -8);  // genus 5
  CHECK(q.is_closed());
  CHECK(mesh_stats(q).min_angle > 10.0 * std::numbers::pi / 180.0);
}

TEST_CASE("generated meshes are oriented outward") {
  for (const char* name : {"sphere", "torus", "quartic"}) {
    const auto s = builtin_surface(name);
    const TriMesh m = std::string(name) == "sphere"  ? make_icosphere(2)
                      : std::string(name) == "torus" ? make_chevron_torus(0)
                                                     : make_quartic(0);
    for (FaceId f = 0; f < static_cast<FaceId>(m.face_count()); ++f) {
      const auto p = m.face_points(f);
      CHECK(face_normal_area(m, f).normal.dot(s.normal((p[0] + p[1] + p[2]) / 3.0)) > 0.0);
    }
  }
}

TEST_CASE("perturbation specs parse, format and validate") {
  const auto a = parse_perturbation("normal:2:det,tangential:3:rand");
  CHECK(a.normal_order == 2.0);
  CHECK(a.tangential_order == 3.0);
  CHECK_FALSE(a.normal_random);
  CHECK(a.tangential_random);
  CHECK(format_perturbation(a) == "normal:2:det,tangential:3:rand");

  const auto b = parse_perturbation("normal:2,tangential:2,rand,c=0.5");
  CHECK(b.normal_random);
  CHECK(b.tangential_random);
  CHECK(b.magnitude == 0.5);
  CHECK(format_perturbation(parse_perturbation(format_perturbation(b))) == format_perturbation(b));

  CHECK(parse_perturbation("none").is_identity());
  CHECK(parse_perturbation("tangential:2:rand").normal_order == kNoPerturbation);
  CHECK_THROWS_AS((void)parse_perturbation("normal:1.5"), ConfigError);
  CHECK_THROWS_AS((void)parse_perturbation("normal:2:maybe"), ConfigError);
  CHECK_THROWS_AS((void)parse_perturbation("sideways:2"), ConfigError);
  CHECK_THROWS_AS((void)parse_perturbation("normal:2,c=-1"), ConfigError);
}

TEST_CASE("tangent basis is orthonormal") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> N;
  for (int k = 0; k < 100; ++k) {
    const Vec3 n = Vec3(N(rng), N(rng), N(rng)).normalized();
    const auto [t1, t2] = tangent_basis(n);
    CHECK(std::abs(t1.dot(n)) <= 1e-14);
    CHECK(std::abs(t2.dot(n)) <= 1e-14);
    CHECK(std::abs(t1.dot(t2)) <= 1e-14);
    CHECK(std::abs(t1.norm() - 1) <= 1e-14);
    CHECK(t1.cross(t2).dot(n) > 0.0);
  }
}

TEST_CASE("perturbed meshes") {
  const auto sphere = builtin_surface("sphere");
  const TriMesh star = make_icosphere(3);
  const double h = mesh_stats(star).h;

  CHECK(perturb_mesh(star, sphere, parse_perturbation("none")).vertices() == star.vertices());

  auto spec = parse_perturbation("normal:2:det,tangential:3:rand");
  spec.seed = 9;
  const TriMesh dev = perturb_mesh(star, sphere, spec);
  for (std::size_t i = 0; i < star.vertex_count(); ++i) {
    const Vec3 d = dev.vertices()[i] - star.vertices()[i];
    CHECK(d.norm() <= h * h + h * h * h + 1e-15);
    // Deterministic normal part of exactly h^2.
    CHECK(d.dot(star.vertices()[i]) == doctest::Approx(h * h).epsilon(1e-12));
  }

  CHECK(perturb_mesh(star, sphere, spec).vertices() == dev.vertices());
  auto other = spec;
  other.seed = 10;
  CHECK(perturb_mesh(star, sphere, other).vertices() != dev.vertices());
}

TEST_CASE("element pair transforms") {
  const Triangle t1 = {Vec3(0.1, 0.2, 0.3), Vec3(1.0, 0.4, -0.2), Vec3(0.3, 1.1, 0.5)};

  SUBCASE("translation") {
    const Vec3 s(3, -1, 2);
    const auto t = pair_transform(t1, {t1[0] + s, t1[1] + s, t1[2] + s});
    Mat32 id = Mat32::Zero();
    id(0, 0) = id(1, 1) = 1;
    CHECK((t.jacobian - id).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((t.metric - Mat2::Identity()).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(std::abs(t.sqrt_det - 1) <= 1e-14);
  }
  SUBCASE("scaling by two") {
    const auto t = pair_transform(t1, {t1[0], t1[0] + 2 * (t1[1] - t1[0]), t1[0] + 2 * (t1[2] - t1[0])});
    CHECK((t.metric - 4 * Mat2::Identity()).cwiseAbs().maxCoeff() <= 1e-13);
    CHECK(std::abs(t.sqrt_det - 4) <= 1e-13);
  }
  SUBCASE("in-plane rotation keeps the metric") {
    // Rodrigues rotation about the triangle normal, an independent 3D oracle.
    const Vec3 n = (t1[1] - t1[0]).cross(t1[2] - t1[0]).normalized();
    const double th = 0.7;
    const Mat3 K = (Mat3() << 0, -n.z(), n.y(), n.z(), 0, -n.x(), -n.y(), n.x(), 0).finished();
    const Mat3 R = Mat3::Identity() + std::sin(th) * K + (1 - std::cos(th)) * K * K;
    const auto t = pair_transform(t1, {t1[0], t1[0] + R * (t1[1] - t1[0]), t1[0] + R * (t1[2] - t1[0])});
    CHECK((t.metric - Mat2::Identity()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(std::abs(t.jacobian(0, 0) - std::cos(th)) <= 1e-12);
    CHECK(std::abs(t.jacobian(1, 0) - std::sin(th)) <= 1e-12);
  }
  SUBCASE("area ratio property") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int k = 0; k < 200; ++k) {
      Triangle a, b;
      for (int i = 0; i < 3; ++i) {
        a[static_cast<std::size_t>(i)] = Vec3(U(rng), U(rng), U(rng));
        b[static_cast<std::size_t>(i)] = Vec3(U(rng), U(rng), U(rng));
      }
      const double A1 = triangle_normal_area(a[0], a[1], a[2]).area;
      const double A2 = 0.5 * (b[1] - b[0]).cross(b[2] - b[0]).norm();
      if (A1 < 0.05 || A2 < 0.05) continue;
      CHECK(std::abs(pair_transform(a, b).sqrt_det * A1 - A2) <= 1e-10 * A2);
    }
  }
  CHECK_THROWS_AS((void)pair_transform({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)}, t1), GeometryError);
}

TEST_CASE("supercloseness reports") {
  const auto sphere = builtin_surface("sphere");
  const TriMesh star = make_icosphere(2);
  const auto zero = supercloseness_report(star, star);
  CHECK(zero.jacobian == 0.0);
  CHECK(zero.metric == 0.0);
  CHECK(zero.sqrt_det == 0.0);
  CHECK_THROWS_AS((void)supercloseness_report(star, make_icosphere(3)), MeshError);

  const auto orders = [&](const char* regime) {
    std::vector<SuperclosenessReport> r;
    std::vector<double> h;
    for (int level = 4; level <= 7; ++level) {
      const TriMesh s = make_icosphere(level);
      auto spec = parse_perturbation(regime);
      spec.seed = 42 + static_cast<std::uint64_t>(level);
      r.push_back(supercloseness_report(s, perturb_mesh(s, sphere, spec)));
      h.push_back(mesh_stats(s).h);
    }
    // Average order from level 4 to level 7.
    const double dh = std::log(h.front() / h.back());
    return std::array<double, 3>{std::log(r.front().jacobian / r.back().jacobian) / dh,
                                 std::log(r.front().metric / r.back().metric) / dh,
                                 std::log(r.front().sqrt_det / r.back().sqrt_det) / dh};
  };
  SUBCASE("deterministic normal h^2, random tangential h^3") {
    const auto o = orders("normal:2:det,tangential:3:rand");
    CHECK(o[0] >= 1.9);
    CHECK(o[0] <= 2.1);
  }
  SUBCASE("random normal h^2, tangential h^3") {
    const auto o = orders("normal:2:rand,tangential:3:det");
    CHECK(o[0] >= 0.8);
    CHECK(o[0] <= 1.2);
    CHECK(o[2] >= 1.8);
    CHECK(o[2] <= 2.1);
  }
}
