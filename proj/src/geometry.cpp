#include "crm/geometry.hpp"

#include <algorithm>
#include <string>

#include "crm/errors.hpp"

namespace crm {

void require_dim(Eigen::Index expected, const Vector& x, const char* what) {
  if (x.size() != expected) {
    throw InvalidArgument(std::string(what) + ": expected a vector of length " +
                          std::to_string(expected) + ", got " + std::to_string(x.size()));
  }
}

AffineSubspace::AffineSubspace(Vector offset, Matrix basis)
    : offset_(std::move(offset)), basis_(std::move(basis)) {
  if (offset_.size() == 0) throw InvalidArgument("AffineSubspace: ambient dimension must be positive");
  if (basis_.rows() != offset_.size()) {
    // An empty basis may arrive as 0 x 0; normalize to n x 0.
    if (basis_.cols() == 0) {
      basis_.resize(offset_.size(), 0);
    } else {
      throw InvalidArgument("AffineSubspace: basis has " + std::to_string(basis_.rows()) +
                            " rows but the offset has length " + std::to_string(offset_.size()));
    }
  }
  if (basis_.cols() > basis_.rows()) {
    throw InvalidArgument("AffineSubspace: more basis columns than the ambient dimension");
  }
  const double residual = orthonormality_residual();
  if (!(residual <= kOrthonormalTol)) {
    throw ValidationError("AffineSubspace: basis is not orthonormal (residual " +
                          std::to_string(residual) + ")");
  }
}

AffineSubspace AffineSubspace::from_spanning_set(Vector offset, const Matrix& spanning) {
  const Eigen::Index n = offset.size();
  if (spanning.cols() == 0) return AffineSubspace(std::move(offset), Matrix(n, 0));
  if (spanning.rows() != n) {
    throw InvalidArgument("AffineSubspace: spanning set rows do not match the offset length");
  }
  Eigen::JacobiSVD<Matrix> svd(spanning, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  Eigen::Index rank = 0;
  if (sv.size() > 0 && sv(0) > 0.0) {
    while (rank < sv.size() && sv(rank) > kRankCutoff * sv(0)) ++rank;
  }
  return AffineSubspace(std::move(offset), svd.matrixU().leftCols(rank));
}

AffineSubspace AffineSubspace::linear(const Matrix& spanning) {
  return from_spanning_set(Vector::Zero(spanning.rows()), spanning);
}

AffineSubspace AffineSubspace::whole_space(Eigen::Index n) {
  return AffineSubspace(Vector::Zero(n), Matrix::Identity(n, n));
}

AffineSubspace AffineSubspace::point(Vector p) {
  const Eigen::Index n = p.size();
  return AffineSubspace(std::move(p), Matrix(n, 0));
}

const Matrix& AffineSubspace::complement_basis() const {
  return complement_.get([this] {
    const Eigen::Index n = ambient_dim();
    const Eigen::Index d = dim();
    if (d == 0) return Matrix(Matrix::Identity(n, n));
    if (d == n) return Matrix(n, 0);
    Eigen::HouseholderQR<Matrix> qr(basis_);
    Matrix q = qr.householderQ() * Matrix::Identity(n, n);
    return Matrix(q.rightCols(n - d));
  });
}

double AffineSubspace::orthonormality_residual() const {
  const Eigen::Index d = basis_.cols();
  if (d == 0) return 0.0;
  return (basis_.transpose() * basis_ - Matrix::Identity(d, d)).norm();
}

AffineSubspace AffineSubspace::translated(const Vector& t) const {
  require_dim(ambient_dim(), t, "AffineSubspace::translated");
  return AffineSubspace(offset_ + t, basis_);
}

Vector project(const AffineSubspace& u, const Vector& x) {
  require_dim(u.ambient_dim(), x, "project");
  const Matrix& b = u.basis();
  if (b.cols() == 0) return u.offset();
  const Vector rel = x - u.offset();
  return u.offset() + b * (b.transpose() * rel);
}

Vector reflect(const AffineSubspace& u, const Vector& x) {
  return 2.0 * project(u, x) - x;
}

bool contains(const AffineSubspace& u, const Vector& x, double tol) {
  if (tol < 0.0) throw InvalidArgument("contains: tolerance must be nonnegative");
  const Vector p = project(u, x);
  return (x - p).norm() <= tol * std::max(1.0, x.norm());
}

AffineSubspace intersect(std::span<const AffineSubspace> subspaces) {
  if (subspaces.empty()) throw InvalidArgument("intersect: empty family");
  const Eigen::Index n = subspaces.front().ambient_dim();
  Eigen::Index k = 0;
  double scale = 1.0;
  for (const auto& u : subspaces) {
    if (u.ambient_dim() != n) throw InvalidArgument("intersect: ambient dimensions differ");
    k += n - u.dim();
    scale = std::max(scale, u.offset().norm());
  }
  if (k == 0) return AffineSubspace(Vector::Zero(n), Matrix::Identity(n, n));

  // Stacked constraints N_i^T (x - p_i) = 0, written as N^T x = b.
  Matrix normals(n, k);
  Vector rhs(k);
  Eigen::Index col = 0;
  for (const auto& u : subspaces) {
    const Matrix& c = u.complement_basis();
    normals.middleCols(col, c.cols()) = c;
    rhs.segment(col, c.cols()) = c.transpose() * u.offset();
    col += c.cols();
  }

  Eigen::JacobiSVD<Matrix> svd(normals, Eigen::ComputeFullU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > kRankCutoff * sv(0)) ++rank;

  // Minimum-norm solution of N^T x = b with N = U S V^T.
  const Matrix ur = svd.matrixU().leftCols(rank);
  const Matrix vr = svd.matrixV().leftCols(rank);
  const Vector offset = ur * (vr.transpose() * rhs).cwiseQuotient(sv.head(rank));
  const double residual = (normals.transpose() * offset - rhs).norm();
  if (residual > 1e-8 * scale) {
    throw EmptyIntersection("intersect: subspaces have no common point (constraint residual " +
                            std::to_string(residual) + ")");
  }
  return AffineSubspace(offset, svd.matrixU().rightCols(n - rank));
}

ProblemInstance::ProblemInstance(std::vector<AffineSubspace> subspaces)
    : subspaces_(std::move(subspaces)) {
  if (subspaces_.empty()) throw InvalidArgument("ProblemInstance: at least one subspace is required");
  ambient_dim_ = subspaces_.front().ambient_dim();
  for (const auto& u : subspaces_) {
    if (u.ambient_dim() != ambient_dim_) {
      throw InvalidArgument("ProblemInstance: subspaces have different ambient dimensions");
    }
  }
}

ProblemInstance::ProblemInstance(std::vector<AffineSubspace> subspaces, AffineSubspace solution_set)
    : ProblemInstance(std::move(subspaces)) {
  if (solution_set.ambient_dim() != ambient_dim_) {
    throw InvalidArgument("ProblemInstance: solution set has the wrong ambient dimension");
  }
  for (const auto& u : subspaces_) {
    bool ok = contains(u, solution_set.offset(), 1e-10);
    for (Eigen::Index j = 0; ok && j < solution_set.dim(); ++j) {
      ok = contains(u, solution_set.offset() + solution_set.basis().col(j), 1e-10);
    }
    if (!ok) throw ValidationError("ProblemInstance: declared solution set is not contained in every subspace");
  }
  solution_.get([&] { return std::move(solution_set); });
}

const AffineSubspace& ProblemInstance::solution_set() const {
  return solution_.get([this] { return intersect(subspaces_); });
}

Vector solution_projection(const ProblemInstance& problem, const Vector& x) {
  require_dim(problem.ambient_dim(), x, "solution_projection");
  return project(problem.solution_set(), x);
}

}  // namespace crm
