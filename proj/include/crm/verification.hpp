#pragma once

#include <span>
#include <string>
#include <vector>

#include "crm/batch.hpp"
#include "crm/geometry.hpp"
#include "crm/solvers.hpp"

namespace crm {

/// Projection of `target` onto base + span(directions), by column-pivoted QR
/// of the direction matrix. Pivots below kRankCutoff * max(1, |base|, |target|)
/// are treated as zero. Never touches the equidistance system, so it serves as
/// an oracle for the circumcenter.
Vector affine_hull_projection(const Vector& base, const Matrix& directions, const Vector& target);

/// Projection of `target` onto W_x = aff{x, x^(1), ..., x^(m)} for the
/// instance's cascade at x.
Vector project_onto_reflection_hull(const ProblemInstance& problem, const Vector& x,
                                    const Vector& target);

struct InvariantCheck {
  std::string name;
  double worst = 0.0;      ///< largest scaled violation seen (<= 0 means slack)
  double threshold = 0.0;  ///< pass iff worst <= threshold
  bool passed() const { return worst <= threshold; }
};

struct VerifyReport {
  std::vector<InvariantCheck> checks;
  int starts = 0;
  double r_A = 0.0;
  bool passed() const;
};

/// The invariant battery for one instance, evaluated at every start:
/// equidistance, W_x membership, agreement with the hull-projection oracle for
/// two points of S, the Fejer inequality for A, the r_A contraction of A,
/// invariance of P_S under C, per-step domination of A by C, and the r_A^k
/// bound along a CRM trace (which must also end at P_S(x0)).
/// `cfg` drives the CRM traces.
VerifyReport verify_instance(const ProblemInstance& problem, std::span<const Vector> starts,
                             const SolverConfig& cfg = {}, Execution exec = Execution::parallel);

}  // namespace crm
