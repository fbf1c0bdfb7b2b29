#pragma once

#include <span>
#include <vector>

#include "crm/geometry.hpp"
#include "crm/solvers.hpp"

namespace crm {

/// How independent cells are scheduled. `serial` is the reference path; the
/// parallel path must produce identical results.
enum class Execution { serial, parallel };

/// Number of OpenMP threads available to the parallel path (1 without OpenMP).
int max_threads();

/// Runs every (start, method) cell. Result i * methods.size() + j is the trace
/// of methods[j] from starts[i]; the layout does not depend on scheduling.
/// The first exception thrown by any cell (in cell order) is rethrown.
std::vector<SolverTrace> run_batch(const ProblemInstance& problem, std::span<const Vector> starts,
                                   std::span<const Method> methods, const SolverConfig& cfg,
                                   Execution exec = Execution::parallel);

/// `count` Gaussian start vectors scaled by `scale`. The stream is seeded from
/// a salted `seed`, so it differs from generate() with the same seed.
std::vector<Vector> random_starts(Eigen::Index n, int count, double scale, std::uint64_t seed);

}  // namespace crm
