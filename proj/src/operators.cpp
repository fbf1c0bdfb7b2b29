#include "crm/operators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "crm/errors.hpp"

namespace crm {

ReflectionCascade cascade(const ProblemInstance& problem, const Vector& x) {
  require_dim(problem.ambient_dim(), x, "cascade");
  ReflectionCascade out;
  out.input = x;
  out.stages.reserve(problem.size());
  const Vector* prev = &x;
  for (const auto& u : problem.subspaces()) {
    out.stages.push_back(reflect(u, *prev));
    prev = &out.stages.back();
  }
  return out;
}

CircumcenterResult circumcenter(ReflectionCascade cc) {
  const Vector& x = cc.input;
  const auto m = static_cast<Eigen::Index>(cc.stages.size());

  Matrix diffs(x.size(), m);
  for (Eigen::Index j = 0; j < m; ++j) diffs.col(j) = cc.stages[j] - x;

  const Matrix gram = diffs.transpose() * diffs;
  const Vector rhs = 0.5 * gram.diagonal();

  // Work on D = x^(i) - x directly rather than on G = D^T D: squaring the
  // condition number would truncate genuine but thin directions of W_x.
  // With D P = Q R, C(x) = x + Q_r y where R_r^T y = P^T rhs.
  Eigen::ColPivHouseholderQR<Matrix> qr(diffs);
  const Matrix& r = qr.matrixQR();
  const double floor = std::max(kRankCutoff * std::abs(r(0, 0)), kNoiseFloor * std::max(1.0, x.norm()));
  const Eigen::Index diag = std::min(diffs.rows(), m);
  Eigen::Index rank = 0;
  while (rank < diag && std::abs(r(rank, rank)) > floor) ++rank;

  CircumcenterResult out;
  out.gram_rank = rank;
  out.coefficients = Vector::Zero(m);
  if (rank == 0) {
    out.point = x;
    out.residual = 0.0;
    out.cascade = std::move(cc);
    return out;
  }

  const auto r11 = r.topLeftCorner(rank, rank).triangularView<Eigen::Upper>();
  const Vector b = (qr.colsPermutation().transpose() * rhs).head(rank);
  Vector y = Vector::Zero(x.size());
  y.head(rank) = r11.transpose().solve(b);
  out.point = x + qr.householderQ() * y;

  // Minimum-norm alpha with D alpha = C(x) - x, under the same rank decision.
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(diffs.rows(), diffs.cols());
  cod.setThreshold(floor / std::abs(r(0, 0)));  // must precede compute()
  cod.compute(diffs);
  out.coefficients = cod.solve(Vector(out.point - x));
  out.residual = (gram * out.coefficients - rhs).norm();

  const double scale = std::max({1.0, x.norm(), std::sqrt(gram.diagonal().maxCoeff())});
  if (!(out.residual <= 1e-6 * scale * scale)) {
    throw NumericalFailure("circumcenter: Gram system residual " + std::to_string(out.residual) +
                           " is inconsistent with affine input");
  }
  out.cascade = std::move(cc);
  return out;
}

CircumcenterResult circumcenter(const ProblemInstance& problem, const Vector& x) {
  return circumcenter(cascade(problem, x));
}

Vector averaged_apply(const ReflectionCascade& cc) {
  const Vector& x = cc.input;
  const auto m = static_cast<double>(cc.stages.size());
  // A_i(x) = x/2 + (x^(i) + x^(i-1))/4 with x^(0) = x.
  Vector sum = Vector::Zero(x.size());
  const Vector* prev = &x;
  for (const auto& stage : cc.stages) {
    sum += 0.5 * x + 0.25 * (stage + *prev);
    prev = &stage;
  }
  return sum / m;
}

Vector averaged_apply(const ProblemInstance& problem, const Vector& x) {
  return averaged_apply(cascade(problem, x));
}

AffineMap averaged_matrix(const ProblemInstance& problem) {
  const Eigen::Index n = problem.ambient_dim();
  const Vector s0 = problem.solution_set().offset();
  const Vector a0 = averaged_apply(problem, s0);

  AffineMap map{Matrix(n, n), Vector()};
  for (Eigen::Index k = 0; k < n; ++k) {
    Vector probe = s0;
    probe(k) += 1.0;
    map.linear.col(k) = averaged_apply(problem, probe) - a0;
  }
  map.shift = a0 - map.linear * s0;
  return map;
}

Vector douglas_rachford_step(const ProblemInstance& problem, const Vector& x) {
  if (problem.size() != 2) {
    throw UnsupportedConfiguration("Douglas-Rachford requires exactly 2 subspaces, got " +
                                   std::to_string(problem.size()));
  }
  const ReflectionCascade cc = cascade(problem, x);
  return 0.5 * (x + cc.stages[1]);
}

}  // namespace crm
