#pragma once

#include <map>
#include <optional>

#include "crm/geometry.hpp"
#include "crm/solvers.hpp"

namespace crm {

/// r_A = sup { ||A y|| : y in S^perp, ||y|| = 1 } for the linear part of A.
///
/// Computed as the largest singular value of A_lin * B_perp, where B_perp is
/// an orthonormal basis of the complement of S's direction space. Returns 0
/// when S = R^n. Throws NumericalFailure if the value reaches 1 - 1e-12.
double contraction_factor(const ProblemInstance& problem);

/// Power iteration on (A_lin P_perp)^T (A_lin P_perp); a cross-check for
/// contraction_factor, not a replacement.
double contraction_factor_power(const ProblemInstance& problem, int iterations = 2000);

/// Geometric mean of the last `window` fraction of the rate quotients.
/// Throws InsufficientData when fewer than 8 quotients exist.
double empirical_rate(const SolverTrace& trace, double window = 0.25);

/// Cosine of the Friedrichs angle between the direction spaces of u1 and u2:
/// the largest singular value of B1^T B2 below 1 - 1e-10 (shared directions
/// deflated), or 0 if there is none.
double friedrichs_cos(const AffineSubspace& u1, const AffineSubspace& u2);

struct RateReport {
  double r_A = 0.0;
  std::map<Method, double> method_rates;
  std::optional<double> friedrichs_cos;
};

/// Certified r_A plus, per method, the worst empirical rate over the traces
/// that have enough quotients.
RateReport rate_report(const ProblemInstance& problem, const std::vector<SolverTrace>& traces);

}  // namespace crm
