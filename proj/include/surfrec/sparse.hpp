#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "surfrec/mesh.hpp"

namespace surfrec {

using VectorX = Eigen::VectorXd;

/// Square compressed-row matrix with sorted column indices per row.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  /// Pattern of a P1 operator on `mesh` with `block` unknowns per vertex (vertex-major), zero values.
  static CsrMatrix from_mesh(const TriMesh& mesh, int block = 1);

  [[nodiscard]] std::size_t rows() const { return row_ptr_.empty() ? 0 : row_ptr_.size() - 1; }
  [[nodiscard]] std::size_t nonzeros() const { return col_.size(); }

  /// Adds v to entry (i, j); the entry must be in the pattern.
  void add(std::size_t i, std::size_t j, double v);
  [[nodiscard]] double coeff(std::size_t i, std::size_t j) const;

  void multiply(const VectorX& x, VectorX& y) const;
  [[nodiscard]] VectorX operator*(const VectorX& x) const;
  [[nodiscard]] VectorX diagonal() const;
  [[nodiscard]] VectorX row_sums() const;
  [[nodiscard]] Eigen::MatrixXd to_dense() const;
  /// this + s * other; both must share the same pattern.
  [[nodiscard]] CsrMatrix plus(const CsrMatrix& other, double s = 1.0) const;

  [[nodiscard]] const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  [[nodiscard]] const std::vector<std::int32_t>& cols() const { return col_; }
  [[nodiscard]] const std::vector<double>& values() const { return val_; }

 private:
  [[nodiscard]] std::size_t find(std::size_t i, std::size_t j) const;

  std::vector<std::size_t> row_ptr_;
  std::vector<std::int32_t> col_;
  std::vector<double> val_;
};

struct CgOptions {
  double rel_tol = 1e-10;
  std::size_t max_iter = 0;  // 0 means 10 * rows
};

struct CgResult {
  std::size_t iterations = 0;
  double rel_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients for an SPD matrix; x holds the initial guess.
CgResult conjugate_gradient(const CsrMatrix& A, const VectorX& b, VectorX& x, const CgOptions& opt = {});

/// CG for a symmetric positive semidefinite A whose kernel is the constants.
/// b is made compatible by removing (sum b / sum w) w; the result has zero w-weighted mean.
CgResult conjugate_gradient_mean_zero(const CsrMatrix& A, const VectorX& b, const VectorX& weights, VectorX& x,
                                      const CgOptions& opt = {});

}  // namespace surfrec
