#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "surfrec/surface.hpp"

namespace surfrec {

namespace {

// Flips every face whose normal points towards the origin. Only valid for
// star-shaped closed meshes such as the icosahedron.
void orient_outward(const std::vector<Vec3>& v, std::vector<Face>& faces) {
  for (Face& f : faces) {
    const Vec3& a = v[static_cast<std::size_t>(f[0])];
    const Vec3& b = v[static_cast<std::size_t>(f[1])];
    const Vec3& c = v[static_cast<std::size_t>(f[2])];
    if ((b - a).cross(c - a).dot(a + b + c) < 0.0) std::swap(f[1], f[2]);
  }
}

TriMesh refine_and_project(const TriMesh& mesh, const LevelSetSurface& surface, ProjectionMode mode) {
  const TriMesh fine = uniform_refine(mesh);
  std::vector<Vec3> v(fine.vertices());
  for (std::size_t i = mesh.vertex_count(); i < v.size(); ++i) v[i] = project_to_surface(surface, v[i], mode);
  return fine.with_vertices(std::move(v));
}

// ---- quartic base mesh -----------------------------------------------------
//
// The quartic's interior is a tubular neighbourhood of the edges of the cube
// [-1, 1]^3 (genus 5). The mesh starts as the boundary of a voxel shell around
// those edges, is pushed radially onto the surface from the edge skeleton and
// then relaxed tangentially.

constexpr double kShellHalfWidth = 0.25;
constexpr int kCornerCells = 4;  // cells across a shell block at a cube corner
constexpr int kEdgeCells = 8;    // cells along the middle part of a cube edge
constexpr int kSmoothingSweeps = 20;

Vec3 closest_on_cube_edges(const Vec3& p) {
  Vec3 best = Vec3::Zero();
  double best_d = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < 3; ++axis) {
    const int u = (axis + 1) % 3;
    const int w = (axis + 2) % 3;
    for (const double su : {-1.0, 1.0}) {
      for (const double sw : {-1.0, 1.0}) {
        Vec3 q;
        q[axis] = std::clamp(p[axis], -1.0, 1.0);
        q[u] = su;
        q[w] = sw;
        const double d = (p - q).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = q;
        }
      }
    }
  }
  return best;
}

// First sign change of phi along the ray s + t d (phi(s) < 0), refined by bisection.
Vec3 ray_to_surface(const LevelSetSurface& surface, const Vec3& s, const Vec3& d) {
  constexpr double dt = 0.01;
  double lo = 0.0;
  double hi = dt;
  while (surface.phi(s + hi * d) < 0.0) {
    lo = hi;
    hi += dt;
    if (hi > 2.0) throw GeometryError("quartic base mesh: ray left the working region");
  }
  for (int k = 0; k < 60; ++k) {
    const double mid = 0.5 * (lo + hi);
    (surface.phi(s + mid * d) < 0.0 ? lo : hi) = mid;
  }
  return s + 0.5 * (lo + hi) * d;
}

TriMesh quartic_voxel_shell() {
  const double a = kShellHalfWidth;
  const double nodes[4] = {-1.0 - a, -1.0 + a, 1.0 - a, 1.0 + a};
  const int cells[3] = {kCornerCells, kEdgeCells, kCornerCells};

  std::vector<double> grid;
  std::vector<int> block_of_cell;
  for (int b = 0; b < 3; ++b) {
    for (int k = 0; k < cells[b]; ++k) {
      grid.push_back(nodes[b] + (nodes[b + 1] - nodes[b]) * k / cells[b]);
      block_of_cell.push_back(b);
    }
  }
  grid.push_back(nodes[3]);
  const int n = static_cast<int>(block_of_cell.size());

  const auto solid = [&](int i, int j, int k) {
    if (i < 0 || j < 0 || k < 0 || i >= n || j >= n || k >= n) return false;
    const int middles = (block_of_cell[static_cast<std::size_t>(i)] == 1) +
                        (block_of_cell[static_cast<std::size_t>(j)] == 1) +
                        (block_of_cell[static_cast<std::size_t>(k)] == 1);
    return middles <= 1;
  };

  std::map<std::array<int, 3>, VertexId> index;
  std::vector<Vec3> vertices;
  const auto vid = [&](std::array<int, 3> g) {
    const auto [it, inserted] = index.try_emplace(g, static_cast<VertexId>(vertices.size()));
    if (inserted)
      vertices.emplace_back(grid[static_cast<std::size_t>(g[0])], grid[static_cast<std::size_t>(g[1])],
                            grid[static_cast<std::size_t>(g[2])]);
    return it->second;
  };

  std::vector<Face> faces;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        if (!solid(i, j, k)) continue;
        const std::array<int, 3> c{i, j, k};
        for (int axis = 0; axis < 3; ++axis) {
          for (const int side : {0, 1}) {
            std::array<int, 3> nb = c;
            nb[static_cast<std::size_t>(axis)] += side ? 1 : -1;
            if (solid(nb[0], nb[1], nb[2])) continue;
            const auto u = static_cast<std::size_t>((axis + 1) % 3);
            const auto w = static_cast<std::size_t>((axis + 2) % 3);
            std::array<int, 3> q00 = c;
            q00[static_cast<std::size_t>(axis)] += side;
            auto q10 = q00, q11 = q00, q01 = q00;
            q10[u] += 1;
            q11[u] += 1;
            q11[w] += 1;
            q01[w] += 1;
            // (u, w, axis) is right-handed, so q00 q10 q11 q01 faces +axis.
            VertexId p[4] = {vid(q00), vid(q10), vid(q11), vid(q01)};
            if (!side) std::swap(p[1], p[3]);
            faces.push_back({p[0], p[1], p[2]});
            faces.push_back({p[0], p[2], p[3]});
          }
        }
      }
    }
  }
  return TriMesh(std::move(vertices), std::move(faces));
}

}  // namespace

TriMesh make_icosahedron() {
  const double t = std::numbers::phi;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                         {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  for (Vec3& p : v) p.normalize();
  std::vector<Face> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                         {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                         {3, 8, 9},   {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  orient_outward(v, f);
  return TriMesh(std::move(v), std::move(f));
}

TriMesh make_icosphere(int level) {
  if (level < 0) throw ConfigError("icosphere level must be >= 0");
  const LevelSetSurface sphere = builtin_surface("sphere");
  TriMesh mesh = make_icosahedron();
  for (int l = 0; l < level; ++l) mesh = refine_and_project(mesh, sphere, ProjectionMode::newton);
  return mesh;
}

TriMesh make_chevron_torus(int level) {
  if (level < 0) throw ConfigError("torus level must be >= 0");
  const int nt = 20 << level;  // around the axis
  const int np = 10 << level;  // around the tube
  const auto id = [&](int i, int j) { return static_cast<VertexId>(((i + nt) % nt) * np + (j + np) % np); };
  std::vector<Vec3> v;
  v.reserve(static_cast<std::size_t>(nt) * static_cast<std::size_t>(np));
  for (int i = 0; i < nt; ++i) {
    const double theta = 2.0 * std::numbers::pi * i / nt;
    for (int j = 0; j < np; ++j) {
      const double phi = 2.0 * std::numbers::pi * j / np;
      const double rho = 4.0 + std::cos(phi);
      v.emplace_back(rho * std::cos(theta), rho * std::sin(theta), std::sin(phi));
    }
  }
  std::vector<Face> f;
  f.reserve(2 * v.size());
  for (int i = 0; i < nt; ++i) {
    for (int j = 0; j < np; ++j) {
      const VertexId a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      // Diagonal direction alternates between neighbouring columns.
      if (i % 2 == 0) {
        f.push_back({a, b, c});
        f.push_back({a, c, d});
      } else {
        f.push_back({a, b, d});
        f.push_back({b, c, d});
      }
    }
  }
  return TriMesh(std::move(v), std::move(f));
}

TriMesh make_quartic_base() {
  const LevelSetSurface quartic = builtin_surface("quartic");
  const TriMesh shell = quartic_voxel_shell();

  std::vector<Vec3> v(shell.vertices());
  for (Vec3& p : v) {
    const Vec3 s = closest_on_cube_edges(p);
    p = ray_to_surface(quartic, s, (p - s).normalized());
  }

  for (int sweep = 0; sweep < kSmoothingSweeps; ++sweep) {
    std::vector<Vec3> next(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      Vec3 avg = Vec3::Zero();
      const auto nb = shell.vertex_neighbors(static_cast<VertexId>(i));
      for (const VertexId j : nb) avg += v[static_cast<std::size_t>(j)];
      avg /= static_cast<double>(nb.size());
      const Vec3 n = quartic.normal(v[i]);
      const Vec3 d = avg - v[i];
      next[i] = project_to_surface(quartic, v[i] + d - d.dot(n) * n);
    }
    v.swap(next);
  }

  TriMesh mesh = shell.with_vertices(std::move(v));
  int bad = 0;
  for (FaceId f = 0; f < static_cast<FaceId>(mesh.face_count()); ++f) {
    const auto p = mesh.face_points(f);
    const Vec3 c = (p[0] + p[1] + p[2]) / 3.0;
    if (face_normal_area(mesh, f).normal.dot(quartic.normal(c)) <= 0.0) ++bad;
  }
  if (bad) throw MeshError("quartic base mesh: " + std::to_string(bad) + " faces inverted");
  // One exactly projected refinement keeps the frozen error of later first-order levels small.
  return refine_and_project(mesh, quartic, ProjectionMode::newton);
}

TriMesh make_quartic(int level, ProjectionMode mode) {
  if (level < 0) throw ConfigError("quartic level must be >= 0");
  const LevelSetSurface quartic = builtin_surface("quartic");
  TriMesh mesh = make_quartic_base();
  for (int l = 0; l < level; ++l) mesh = refine_and_project(mesh, quartic, mode);
  return mesh;
}

}  // namespace surfrec
