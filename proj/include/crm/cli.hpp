#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "crm/solvers.hpp"

namespace crm::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsage = 2,           ///< bad flags, unreadable instance, unsupported method
  kNotConverged = 3,    ///< some solver hit max_iterations
  kVerifyFailed = 4,    ///< invariant violated or instance failed validation
};

/// Entry point shared by the `crm` executable and the tests. args[0] is the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// CSV trace: header `iter,dist_to_solution,step_norm,rate_quotient`, then one
/// row per step k = 1..K with distances[k], step_norms[k-1] and
/// distances[k] / distances[k-1]. Numbers use 17 significant digits.
std::string trace_csv(const SolverTrace& trace);

/// Two-column `iter dist` series including iteration 0, for plotting.
std::string convergence_series(const SolverTrace& trace);

}  // namespace crm::cli
