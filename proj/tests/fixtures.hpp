#pragma once

#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "surfrec/mesh.hpp"

namespace surfrec::test {

/// n x n vertex grid on [0, (n-1) s]^2 in the plane z = 0, each square cut along a diagonal.
/// Open mesh; `jitter` moves interior vertices by up to jitter * s.
inline TriMesh planar_grid(int n, double s = 1.0, double jitter = 0.0, unsigned seed = 1) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<Vec3> v;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      Vec3 p(i * s, j * s, 0.0);
      if (i > 0 && j > 0 && i < n - 1 && j < n - 1) {
        p.x() += jitter * s * U(rng);
        p.y() += jitter * s * U(rng);
      }
      v.push_back(p);
    }
  std::vector<Face> f;
  auto id = [n](int i, int j) { return static_cast<VertexId>(j * n + i); };
  for (int j = 0; j + 1 < n; ++j)
    for (int i = 0; i + 1 < n; ++i) {
      f.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      f.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  MeshOptions opt;
  opt.allow_open = true;
  return TriMesh(std::move(v), std::move(f), opt);
}

inline bool is_interior(int n, VertexId v, int margin) {
  const int i = v % n, j = v / n;
  return i >= margin && j >= margin && i < n - margin && j < n - margin;
}

inline TriMesh tetrahedron() {
  return TriMesh({{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}}, {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}});
}

/// Scratch file removed on destruction.
struct TempFile {
  std::filesystem::path path;
  explicit TempFile(const std::string& name)
      : path(std::filesystem::temp_directory_path() / ("surfrec_test_" + name)) {}
  ~TempFile() {
    std::error_code ec;
    std::filesystem::remove(path, ec);
  }
};

}  // namespace surfrec::test
