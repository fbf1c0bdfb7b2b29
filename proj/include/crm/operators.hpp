#pragma once

#include <vector>

#include "crm/geometry.hpp"

namespace crm {

/// x together with its successive reflections x^(i) = R_{U_i} ... R_{U_1}(x).
struct ReflectionCascade {
  Vector input;
  std::vector<Vector> stages;  ///< stages[i] holds x^(i+1)
};

struct CircumcenterResult {
  Vector point;         ///< C(x)
  Vector coefficients;  ///< alpha, with C(x) = x + sum_j alpha_j (x^(j) - x)
  ReflectionCascade cascade;
  Eigen::Index gram_rank = 0;
  double residual = 0.0;  ///< ||G alpha - b||
};

ReflectionCascade cascade(const ProblemInstance& problem, const Vector& x);

/// Difference vectors shorter than this times max(1, ||x||) count as roundoff.
inline constexpr double kNoiseFloor = 1e-13;

/// The circumcenter of x, x^(1), ..., x^(m) inside their affine hull W_x.
///
/// alpha satisfies the m x m Gram system
///   sum_j alpha_j <x^(j) - x, x^(i) - x> = 1/2 ||x^(i) - x||^2,
/// solved through a column-pivoted QR of the differences rather than the Gram
/// matrix itself. Pivots below kRankCutoff relative, or below kNoiseFloor
/// absolute, are dropped. alpha is the minimum-norm solution; it is not unique
/// when the differences are dependent, while the point is.
/// When x lies in S every difference vanishes and C(x) = x.
/// Throws NumericalFailure if the system residual exceeds 1e-6 scale^2, which
/// cannot happen for consistent affine data.
CircumcenterResult circumcenter(const ProblemInstance& problem, const Vector& x);

/// Same, reusing a cascade that was already computed for x.
CircumcenterResult circumcenter(ReflectionCascade cascade);

/// A(x) = (1/m) sum_i A_i(x), with A_1 = (Id + P_{U_1}) / 2 and
/// A_i = (Id + P_{U_i} R_{U_{i-1}} ... R_{U_1}) / 2. Evaluated from one
/// cascade since P_{U_i}(x^(i-1)) is the midpoint of x^(i-1) and x^(i).
Vector averaged_apply(const ProblemInstance& problem, const Vector& x);
Vector averaged_apply(const ReflectionCascade& cascade);

/// A as an affine map x -> linear * x + shift.
struct AffineMap {
  Matrix linear;
  Vector shift;

  Vector operator()(const Vector& x) const { return linear * x + shift; }
};

/// Assembles A by probing it at s0 = S.offset and s0 + e_k. Throws
/// EmptyIntersection when S is empty.
AffineMap averaged_matrix(const ProblemInstance& problem);

/// One Douglas-Rachford step (x + R_{U_2} R_{U_1} x) / 2. Requires m = 2.
Vector douglas_rachford_step(const ProblemInstance& problem, const Vector& x);

}  // namespace crm
