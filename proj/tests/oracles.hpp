#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "surfrec/mesh.hpp"
#include "surfrec/vector_fem.hpp"

// Dense reference assemblies written independently of the library kernels.
namespace surfrec::test {

struct QuadPoint {
  std::array<double, 3> lambda;
  double weight;  // fraction of the triangle area
};

/// Seven-point degree-5 rule on a triangle.
inline std::vector<QuadPoint> degree5_rule() {
  const double r = std::sqrt(15.0);
  const double b1 = (6 + r) / 21, a1 = 1 - 2 * b1, w1 = (155 + r) / 1200;
  const double b2 = (6 - r) / 21, a2 = 1 - 2 * b2, w2 = (155 - r) / 1200;
  return {{{1.0 / 3, 1.0 / 3, 1.0 / 3}, 9.0 / 40},
          {{a1, b1, b1}, w1}, {{b1, a1, b1}, w1}, {{b1, b1, a1}, w1},
          {{a2, b2, b2}, w2}, {{b2, a2, b2}, w2}, {{b2, b2, a2}, w2}};
}

/// Brute-force dense assembly: stiffness from explicit projections, penalty by quadrature of the
/// interpolated (or face) normal.
inline Eigen::MatrixXd dense_vector_matrix(const TriMesh& mesh, const VectorField& normals, double mu) {
  const auto n3 = static_cast<Eigen::Index>(3 * mesh.vertex_count());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n3, n3);
  const auto rule = degree5_rule();
  for (FaceId f = 0; f < static_cast<FaceId>(mesh.face_count()); ++f) {
    const auto& t = mesh.face(f);
    const auto p = mesh.face_points(f);
    const Vec3 cr = (p[1] - p[0]).cross(p[2] - p[0]);
    const double area = 0.5 * cr.norm();
    const Vec3 nf = cr.normalized();
    const Mat3 P = Mat3::Identity() - nf * nf.transpose();
    // Barycentric gradients from the inverse of the 2x2 edge Gram matrix.
    Eigen::Matrix<double, 3, 2> E;
    E << p[1] - p[0], p[2] - p[0];
    const Eigen::Matrix<double, 2, 3> Einv = (E.transpose() * E).inverse() * E.transpose();
    const std::array<Vec3, 3> g = {-(Einv.row(0) + Einv.row(1)).transpose(), Einv.row(0).transpose(),
                                   Einv.row(1).transpose()};
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const auto ia = 3 * t[static_cast<std::size_t>(a)], ib = 3 * t[static_cast<std::size_t>(b)];
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) {
            // sum over ambient directions d of (d_d phi_a e_i) . P (d_d phi_b e_j) = g_a.g_b P_ij
            A(ia + i, ib + j) += area * g[static_cast<std::size_t>(a)].dot(g[static_cast<std::size_t>(b)]) * P(i, j);
          }
        for (const auto& q : rule) {
          Vec3 n = nf;
          if (!normals.empty()) {
            n.setZero();
            for (std::size_t c = 0; c < 3; ++c) n += q.lambda[c] * normals[static_cast<std::size_t>(t[c])];
          }
          const double phi = q.lambda[static_cast<std::size_t>(a)] * q.lambda[static_cast<std::size_t>(b)];
          A.block<3, 3>(ia, ib) += mu * q.weight * area * phi * (n * n.transpose());
        }
      }
  }
  return A;
}


/// Barycentric gradients from the inverse of the 2x2 edge Gram matrix.
inline std::array<Vec3, 3> gram_gradients(const std::array<Vec3, 3>& p) {
  Eigen::Matrix<double, 3, 2> E;
  E << p[1] - p[0], p[2] - p[0];
  const Eigen::Matrix<double, 2, 3> Einv = (E.transpose() * E).inverse() * E.transpose();
  return {-(Einv.row(0) + Einv.row(1)).transpose(), Einv.row(0).transpose(), Einv.row(1).transpose()};
}

/// Dense P1 stiffness plus s times the consistent mass (area/12 off the diagonal, area/6 on it).
inline Eigen::MatrixXd dense_scalar_matrix(const TriMesh& mesh, double s) {
  const auto n = static_cast<Eigen::Index>(mesh.vertex_count());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (FaceId f = 0; f < static_cast<FaceId>(mesh.face_count()); ++f) {
    const auto& t = mesh.face(f);
    const auto p = mesh.face_points(f);
    const double area = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]).norm();
    const auto g = gram_gradients(p);
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t b = 0; b < 3; ++b)
        A(t[a], t[b]) += area * g[a].dot(g[b]) + s * area * (a == b ? 1.0 / 6 : 1.0 / 12);
  }
  return A;
}

}  // namespace surfrec::test
