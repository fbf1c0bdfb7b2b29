#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace crm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Relative singular-value cutoff shared by every rank decision in the library.
inline constexpr double kRankCutoff = 1e-10;
/// Maximum allowed deviation of basis^T basis from the identity.
inline constexpr double kOrthonormalTol = 1e-12;

namespace detail {

/// Write-once slot shared between copies of an immutable object. Readers see
/// either nothing or the fully built value.
template <class T>
class LazySlot {
 public:
  template <class F>
  const T& get(F&& build) const {
    std::call_once(state_->once, [&] { state_->value.emplace(build()); });
    return *state_->value;
  }

 private:
  struct State {
    std::once_flag once;
    std::optional<T> value;
  };
  std::shared_ptr<State> state_ = std::make_shared<State>();
};

}  // namespace detail

/// An affine subspace `offset + span(basis)` of R^n. The basis columns are
/// orthonormal; a basis with zero columns describes the single point `offset`.
class AffineSubspace {
 public:
  /// Takes an already orthonormal basis. Throws ValidationError when
  /// ||basis^T basis - I|| exceeds kOrthonormalTol and InvalidArgument on
  /// shape mismatch.
  AffineSubspace(Vector offset, Matrix basis);

  /// Orthonormalizes an arbitrary spanning set (columns of `spanning`) by SVD
  /// with relative cutoff kRankCutoff. Rank deficiency silently lowers the
  /// dimension.
  static AffineSubspace from_spanning_set(Vector offset, const Matrix& spanning);

  /// The linear subspace spanned by `spanning` (offset at the origin).
  static AffineSubspace linear(const Matrix& spanning);

  /// The whole space R^n.
  static AffineSubspace whole_space(Eigen::Index n);

  /// The single point p.
  static AffineSubspace point(Vector p);

  Eigen::Index ambient_dim() const { return offset_.size(); }
  Eigen::Index dim() const { return basis_.cols(); }
  const Vector& offset() const { return offset_; }
  const Matrix& basis() const { return basis_; }

  /// Orthonormal basis of the orthogonal complement of the direction space,
  /// n x (n - d). Built on first use.
  const Matrix& complement_basis() const;

  /// ||basis^T basis - I|| (Frobenius).
  double orthonormality_residual() const;

  /// Same direction space, offset moved by t.
  AffineSubspace translated(const Vector& t) const;

 private:
  Vector offset_;
  Matrix basis_;
  detail::LazySlot<Matrix> complement_;
};

/// Orthogonal projection of x onto U.
Vector project(const AffineSubspace& u, const Vector& x);

/// Reflection 2 P_U(x) - x.
Vector reflect(const AffineSubspace& u, const Vector& x);

/// True iff ||x - P_U(x)|| <= tol * max(1, ||x||).
bool contains(const AffineSubspace& u, const Vector& x, double tol);

/// Intersection of a nonempty family. The direction space is the orthogonal
/// complement of the span of all complement bases; the offset is the
/// minimum-norm common point. Throws EmptyIntersection when the stacked
/// constraints are inconsistent.
AffineSubspace intersect(std::span<const AffineSubspace> subspaces);

/// A best-approximation instance: the ordered family U_1, ..., U_m. The order
/// fixes the reflection cascade. S is computed on first request and cached.
class ProblemInstance {
 public:
  explicit ProblemInstance(std::vector<AffineSubspace> subspaces);
  /// Attaches a precomputed S; every subspace must contain it (residual 1e-10).
  ProblemInstance(std::vector<AffineSubspace> subspaces, AffineSubspace solution_set);

  Eigen::Index ambient_dim() const { return ambient_dim_; }
  std::size_t size() const { return subspaces_.size(); }
  const std::vector<AffineSubspace>& subspaces() const { return subspaces_; }
  const AffineSubspace& subspace(std::size_t i) const { return subspaces_.at(i); }

  /// S = intersection of all U_i. Throws EmptyIntersection.
  const AffineSubspace& solution_set() const;

 private:
  Eigen::Index ambient_dim_;
  std::vector<AffineSubspace> subspaces_;
  detail::LazySlot<AffineSubspace> solution_;
};

/// P_S(x), the solution of the best approximation problem for x.
Vector solution_projection(const ProblemInstance& problem, const Vector& x);

/// Throws InvalidArgument unless x has the instance's ambient dimension.
void require_dim(Eigen::Index expected, const Vector& x, const char* what);

}  // namespace crm
