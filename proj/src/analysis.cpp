#include "crm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "crm/errors.hpp"
#include "crm/operators.hpp"

namespace crm {

namespace {

// Columns A_lin(b) for each column b of `dirs`, with A_lin(v) = A(s0 + v) - s0.
Matrix apply_linear_part(const ProblemInstance& problem, const Matrix& dirs) {
  const Vector& s0 = problem.solution_set().offset();
  Matrix out(dirs.rows(), dirs.cols());
  for (Eigen::Index j = 0; j < dirs.cols(); ++j) {
    out.col(j) = averaged_apply(problem, Vector(s0 + dirs.col(j))) - s0;
  }
  return out;
}

void check_below_one(double r) {
  if (!(r < 1.0 - 1e-12)) {
    throw NumericalFailure("contraction factor " + std::to_string(r) +
                           " is not below 1; the instance is inconsistent");
  }
}

}  // namespace

double contraction_factor(const ProblemInstance& problem) {
  const Matrix& perp = problem.solution_set().complement_basis();
  if (perp.cols() == 0) return 0.0;
  const Matrix image = apply_linear_part(problem, perp);
  const double r = Eigen::JacobiSVD<Matrix>(image).singularValues()(0);
  check_below_one(r);
  return r;
}

double contraction_factor_power(const ProblemInstance& problem, int iterations) {
  const Matrix& perp = problem.solution_set().complement_basis();
  if (perp.cols() == 0) return 0.0;
  const Matrix image = apply_linear_part(problem, perp);
  const Matrix normal = image.transpose() * image;
  Vector v = Vector::Ones(normal.cols()).normalized();
  double lambda = 0.0;
  for (int k = 0; k < iterations; ++k) {
    Vector w = normal * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    lambda = v.dot(w);
    v = w / norm;
  }
  return std::sqrt(std::max(lambda, 0.0));
}

double empirical_rate(const SolverTrace& trace, double window) {
  const auto& q = trace.rate_quotients;
  if (q.size() < 8) {
    throw InsufficientData("empirical_rate: need at least 8 rate quotients, trace has " +
                           std::to_string(q.size()));
  }
  if (!(window > 0.0 && window <= 1.0)) throw InvalidArgument("empirical_rate: window must be in (0, 1]");
  const auto count = static_cast<std::size_t>(std::ceil(window * static_cast<double>(q.size())));
  double log_sum = 0.0;
  for (std::size_t i = q.size() - count; i < q.size(); ++i) {
    if (q[i] <= 0.0) return 0.0;
    log_sum += std::log(q[i]);
  }
  return std::exp(log_sum / static_cast<double>(count));
}

double friedrichs_cos(const AffineSubspace& u1, const AffineSubspace& u2) {
  if (u1.ambient_dim() != u2.ambient_dim()) {
    throw InvalidArgument("friedrichs_cos: ambient dimensions differ");
  }
  if (u1.dim() == 0 || u2.dim() == 0) return 0.0;
  const Matrix cross = u1.basis().transpose() * u2.basis();
  const Vector sv = Eigen::JacobiSVD<Matrix>(cross).singularValues();
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) < 1.0 - 1e-10) return sv(i);
  }
  return 0.0;
}

RateReport rate_report(const ProblemInstance& problem, const std::vector<SolverTrace>& traces) {
  RateReport report;
  report.r_A = contraction_factor(problem);
  for (const auto& t : traces) {
    if (t.rate_quotients.size() < 8) continue;
    const double rate = empirical_rate(t);
    auto [it, inserted] = report.method_rates.emplace(t.method, rate);
    if (!inserted) it->second = std::max(it->second, rate);
  }
  if (problem.size() == 2) report.friedrichs_cos = friedrichs_cos(problem.subspace(0), problem.subspace(1));
  return report;
}

}  // namespace crm
