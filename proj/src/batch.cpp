#include "crm/batch.hpp"

#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "crm/problems.hpp"

namespace crm {

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

std::vector<SolverTrace> run_batch(const ProblemInstance& problem, std::span<const Vector> starts,
                                   std::span<const Method> methods, const SolverConfig& cfg,
                                   Execution exec) {
  cfg.validate();
  if (cfg.use_solution_oracle) problem.solution_set();  // build the cache before fanning out

  const auto cells = static_cast<std::ptrdiff_t>(starts.size() * methods.size());
  std::vector<SolverTrace> traces(static_cast<std::size_t>(cells));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(cells));

  auto run_cell = [&](std::ptrdiff_t c) {
    const auto i = static_cast<std::size_t>(c) / methods.size();
    const auto j = static_cast<std::size_t>(c) % methods.size();
    try {
      traces[static_cast<std::size_t>(c)] = run(methods[j], problem, starts[i], cfg);
    } catch (...) {
      errors[static_cast<std::size_t>(c)] = std::current_exception();
    }
  };

  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t c = 0; c < cells; ++c) run_cell(c);
  } else {
    for (std::ptrdiff_t c = 0; c < cells; ++c) run_cell(c);
  }

  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return traces;
}

std::vector<Vector> random_starts(Eigen::Index n, int count, double scale, std::uint64_t seed) {
  // Salted so that starts never replay the generator stream of the same seed,
  // whose first Gaussian vector spans S for linear instances.
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int k = 0; k < count; ++k) out.push_back(scale * rng.gaussian_vector(n));
  return out;
}

}  // namespace crm
