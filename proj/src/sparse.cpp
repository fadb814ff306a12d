#include <algorithm>
#include <cmath>
#include <string>

#include "surfrec/sparse.hpp"

namespace surfrec {

CsrMatrix CsrMatrix::from_mesh(const TriMesh& mesh, int block) {
  if (block < 1) throw Error("CsrMatrix::from_mesh: block size must be positive");
  const auto nv = mesh.vertex_count();
  const auto b = static_cast<std::size_t>(block);
  CsrMatrix m;
  m.row_ptr_.assign(nv * b + 1, 0);
  std::vector<VertexId> stencil;
  for (std::size_t v = 0; v < nv; ++v) {
    const auto nb = mesh.vertex_neighbors(static_cast<VertexId>(v));
    stencil.assign(nb.begin(), nb.end());
    stencil.insert(std::upper_bound(stencil.begin(), stencil.end(), static_cast<VertexId>(v)), static_cast<VertexId>(v));
    for (std::size_t r = 0; r < b; ++r) {
      for (const VertexId w : stencil)
        for (std::size_t c = 0; c < b; ++c) m.col_.push_back(static_cast<std::int32_t>(static_cast<std::size_t>(w) * b + c));
      m.row_ptr_[v * b + r + 1] = m.col_.size();
    }
  }
  m.val_.assign(m.col_.size(), 0.0);
  return m;
}

std::size_t CsrMatrix::find(std::size_t i, std::size_t j) const {
  const auto first = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
  const auto last = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
  const auto it = std::lower_bound(first, last, static_cast<std::int32_t>(j));
  if (it == last || *it != static_cast<std::int32_t>(j)) return static_cast<std::size_t>(-1);
  return static_cast<std::size_t>(it - col_.begin());
}

void CsrMatrix::add(std::size_t i, std::size_t j, double v) {
  const auto k = find(i, j);
  if (k == static_cast<std::size_t>(-1))
    throw Error("CsrMatrix::add: entry (" + std::to_string(i) + ", " + std::to_string(j) + ") not in pattern");
  val_[k] += v;
}

double CsrMatrix::coeff(std::size_t i, std::size_t j) const {
  const auto k = find(i, j);
  return k == static_cast<std::size_t>(-1) ? 0.0 : val_[k];
}

void CsrMatrix::multiply(const VectorX& x, VectorX& y) const {
  const auto n = rows();
  y.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += val_[k] * x[col_[k]];
    y[static_cast<Eigen::Index>(i)] = s;
  }
}

VectorX CsrMatrix::operator*(const VectorX& x) const {
  VectorX y;
  multiply(x, y);
  return y;
}

VectorX CsrMatrix::diagonal() const {
  VectorX d(static_cast<Eigen::Index>(rows()));
  for (std::size_t i = 0; i < rows(); ++i) d[static_cast<Eigen::Index>(i)] = coeff(i, i);
  return d;
}

VectorX CsrMatrix::row_sums() const {
  VectorX s = VectorX::Zero(static_cast<Eigen::Index>(rows()));
  for (std::size_t i = 0; i < rows(); ++i)
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s[static_cast<Eigen::Index>(i)] += val_[k];
  return s;
}

Eigen::MatrixXd CsrMatrix::to_dense() const {
  const auto n = static_cast<Eigen::Index>(rows());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < rows(); ++i)
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) d(static_cast<Eigen::Index>(i), col_[k]) = val_[k];
  return d;
}

CsrMatrix CsrMatrix::plus(const CsrMatrix& other, double s) const {
  if (other.row_ptr_ != row_ptr_ || other.col_ != col_) throw Error("CsrMatrix::plus: pattern mismatch");
  CsrMatrix r = *this;
  for (std::size_t k = 0; k < val_.size(); ++k) r.val_[k] += s * other.val_[k];
  return r;
}

namespace {

VectorX inverse_diagonal(const CsrMatrix& A) {
  VectorX d = A.diagonal();
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (!(d[i] > 0.0)) throw SolverError("CG: non-positive diagonal entry at row " + std::to_string(i));
    d[i] = 1.0 / d[i];
  }
  return d;
}

// Preconditioned CG; `project` maps residual-like vectors onto the solvable subspace.
template <typename Project>
CgResult pcg(const CsrMatrix& A, const VectorX& b, VectorX& x, const CgOptions& opt, Project project) {
  const auto n = static_cast<Eigen::Index>(A.rows());
  if (b.size() != n) throw SolverError("CG: right-hand side has wrong length");
  if (x.size() != n) x = VectorX::Zero(n);
  const std::size_t max_iter = opt.max_iter ? opt.max_iter : 10 * static_cast<std::size_t>(n);
  const VectorX dinv = inverse_diagonal(A);

  CgResult res;
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    x.setZero();
    return res;
  }
  VectorX r = b - A * x;
  project(r);
  VectorX z = dinv.cwiseProduct(r);
  project(z);
  VectorX p = z;
  VectorX q(n);
  double rz = r.dot(z);
  res.rel_residual = r.norm() / bnorm;
  while (res.rel_residual > opt.rel_tol) {
    if (res.iterations >= max_iter)
      throw SolverError("CG: no convergence after " + std::to_string(max_iter) +
                        " iterations (relative residual " + std::to_string(res.rel_residual) + ")");
    A.multiply(p, q);
    const double pq = p.dot(q);
    if (!(pq > 0.0)) throw SolverError("CG: matrix is not positive definite on the search space");
    const double alpha = rz / pq;
    x += alpha * p;
    r -= alpha * q;
    project(r);
    z = dinv.cwiseProduct(r);
    project(z);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
    ++res.iterations;
    res.rel_residual = r.norm() / bnorm;
  }
  return res;
}

}  // namespace

CgResult conjugate_gradient(const CsrMatrix& A, const VectorX& b, VectorX& x, const CgOptions& opt) {
  return pcg(A, b, x, opt, [](VectorX&) {});
}

CgResult conjugate_gradient_mean_zero(const CsrMatrix& A, const VectorX& b, const VectorX& weights, VectorX& x,
                                      const CgOptions& opt) {
  const double wsum = weights.sum();
  if (!(wsum > 0.0)) throw SolverError("CG: mean-zero weights must have positive sum");
  const VectorX bc = b - (b.sum() / wsum) * weights;
  const auto remove_constant = [](VectorX& v) { v.array() -= v.mean(); };
  const CgResult res = pcg(A, bc, x, opt, remove_constant);
  x.array() -= weights.dot(x) / wsum;
  return res;
}

}  // namespace surfrec
