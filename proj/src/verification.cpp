#include "crm/verification.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "crm/analysis.hpp"
#include "crm/operators.hpp"
#include "crm/problems.hpp"
#include "crm/solvers.hpp"

namespace crm {

Vector affine_hull_projection(const Vector& base, const Matrix& directions, const Vector& target) {
  const Vector rel = target - base;
  if (directions.cols() == 0) return base;
  Eigen::ColPivHouseholderQR<Matrix> qr(directions);
  // Absolute cutoff: a cascade that barely moves (x numerically in S) must not
  // contribute a roundoff direction, which a relative threshold would keep.
  const double cutoff = kRankCutoff * std::max({1.0, base.norm(), target.norm()});
  const Eigen::Index diag = std::min(directions.rows(), directions.cols());
  Eigen::Index rank = 0;
  while (rank < diag && std::abs(qr.matrixR()(rank, rank)) > cutoff) ++rank;
  if (rank == 0) return base;
  const Matrix q = qr.householderQ() * Matrix::Identity(directions.rows(), rank);
  return base + q * (q.transpose() * rel);
}

Vector project_onto_reflection_hull(const ProblemInstance& problem, const Vector& x,
                                    const Vector& target) {
  const ReflectionCascade cc = cascade(problem, x);
  Matrix diffs(x.size(), static_cast<Eigen::Index>(cc.stages.size()));
  for (std::size_t j = 0; j < cc.stages.size(); ++j) {
    diffs.col(static_cast<Eigen::Index>(j)) = cc.stages[j] - x;
  }
  return affine_hull_projection(x, diffs, target);
}

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed(); });
}

namespace {

enum Check {
  kEquidistance,
  kMembership,
  kOracle,
  kFejer,
  kContraction,
  kInvariance,
  kDomination,
  kRateBound,
  kLimit,
  kCheckCount
};

constexpr std::array<const char*, kCheckCount> kNames = {
    "circumcenter_equidistance", "circumcenter_in_reflection_hull", "circumcenter_equals_hull_projection",
    "averaged_fejer_inequality", "averaged_contraction_r_A", "crm_solution_invariance",
    "crm_dominates_averaged_step", "crm_linear_rate_bound", "crm_limit_is_solution"};

constexpr std::array<double, kCheckCount> kThresholds = {1e-9, 1e-9, 1e-8, 1e-10, 1e-10,
                                                          1e-9, 1e-9, 1e-9, 1e-7};

using Residuals = std::array<double, kCheckCount>;

Residuals check_start(const ProblemInstance& problem, const Vector& x, double r_a, std::size_t index,
                      const SolverConfig& base_cfg) {
  Residuals res{};
  const AffineSubspace& sol = problem.solution_set();
  const double scale = std::max(1.0, x.norm());
  const Vector px = project(sol, x);

  // A second point of S, away from P_S(x).
  Rng rng(0x5eedULL + index);
  Vector s2 = px;
  if (sol.dim() > 0) s2 += sol.basis() * rng.gaussian_vector(sol.dim());

  const CircumcenterResult cr = circumcenter(problem, x);
  const Vector& c = cr.point;
  const Vector ax = averaged_apply(cr.cascade);

  for (const auto& stage : cr.cascade.stages) {
    res[kEquidistance] = std::max(res[kEquidistance], std::abs((c - x).norm() - (c - stage).norm()) / scale);
  }
  const Vector wc = project_onto_reflection_hull(problem, x, c);
  res[kMembership] = (c - wc).norm() / scale;
  for (const Vector* s : std::array<const Vector*, 2>{&px, &s2}) {
    const Vector ws = project_onto_reflection_hull(problem, x, *s);
    res[kOracle] = std::max(res[kOracle], (c - ws).norm() / scale);
    const double lhs = (ax - *s).squaredNorm();
    const double rhs = (x - *s).squaredNorm() - (x - ax).squaredNorm();
    res[kFejer] = std::max(res[kFejer], (lhs - rhs) / std::max(1.0, (x - *s).squaredNorm()));
  }
  res[kContraction] = std::max(0.0, ((ax - px).norm() - r_a * (x - px).norm()) / scale);
  res[kInvariance] = (project(sol, c) - px).norm() / scale;
  res[kDomination] = std::max(0.0, ((c - px).norm() - (ax - px).norm()) / scale);

  SolverConfig cfg = base_cfg;
  cfg.record_iterates = false;
  const SolverTrace trace = run_crm(problem, x, cfg);
  double bound = trace.distances.front();
  for (double d : trace.distances) {
    res[kRateBound] = std::max(res[kRateBound], d - bound);
    bound *= r_a;
  }
  res[kLimit] = trace.converged ? (trace.final_point - px).norm() / scale
                                : std::numeric_limits<double>::infinity();
  return res;
}

}  // namespace

VerifyReport verify_instance(const ProblemInstance& problem, std::span<const Vector> starts,
                             const SolverConfig& cfg, Execution exec) {
  VerifyReport report;
  report.starts = static_cast<int>(starts.size());
  report.r_A = contraction_factor(problem);

  const auto count = static_cast<std::ptrdiff_t>(starts.size());
  std::vector<Residuals> per_start(starts.size());
  std::vector<std::exception_ptr> errors(starts.size());
  auto one = [&](std::ptrdiff_t i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      per_start[k] = check_start(problem, starts[k], report.r_A, k, cfg);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < count; ++i) one(i);
  } else {
    for (std::ptrdiff_t i = 0; i < count; ++i) one(i);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  for (int c = 0; c < kCheckCount; ++c) {
    InvariantCheck check{kNames[c], 0.0, kThresholds[c]};
    for (const auto& r : per_start) check.worst = std::max(check.worst, r[c]);
    report.checks.push_back(std::move(check));
  }
  return report;
}

}  // namespace crm
