// Serial reference vs OpenMP path for the two batch kernels. Results are
// bitwise identical (see test_batch), so only wall time differs.
//
//   ./build/bench/crm_bench --benchmark_counters_tabular=true

#include <benchmark/benchmark.h>

#include "crm/batch.hpp"
#include "crm/problems.hpp"
#include "crm/verification.hpp"

namespace {

using namespace crm;

ProblemInstance instance(Eigen::Index n) {
  GeneratorSpec spec;
  spec.ambient_dim = n;
  spec.solution_dim = n / 4;
  // Each U_i keeps about 3/4 of the directions outside S.
  const Eigen::Index k = 3 * (n - spec.solution_dim) / 4;
  spec.subspace_dims = {spec.solution_dim + k, spec.solution_dim + k - 1, spec.solution_dim + k - 2,
                        spec.solution_dim + k};
  spec.seed = 17;
  spec.affine = true;
  return generate(spec).problem;
}

const std::vector<Method> kMethods{Method::CRM, Method::AVG, Method::MAP, Method::CIMMINO};

void batch(benchmark::State& state, Execution exec) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const auto p = instance(n);
  const auto starts = random_starts(n, 32, 10.0, 1);
  SolverConfig cfg;
  cfg.max_iterations = 100000;
  cfg.record_iterates = false;
  for (auto _ : state) {
    auto traces = run_batch(p, starts, kMethods, cfg, exec);
    benchmark::DoNotOptimize(traces.data());
  }
  state.counters["cells"] = static_cast<double>(starts.size() * kMethods.size());
  state.counters["threads"] = exec == Execution::parallel ? max_threads() : 1;
}

void verify(benchmark::State& state, Execution exec) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const auto p = instance(n);
  const auto starts = random_starts(n, 32, 10.0, 2);
  for (auto _ : state) {
    auto report = verify_instance(p, starts, {}, exec);
    benchmark::DoNotOptimize(report.checks.data());
  }
  state.counters["threads"] = exec == Execution::parallel ? max_threads() : 1;
}

}  // namespace

BENCHMARK_CAPTURE(batch, serial, Execution::serial)->Arg(12)->Arg(40)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(batch, parallel, Execution::parallel)->Arg(12)->Arg(40)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(verify, serial, Execution::serial)->Arg(12)->Arg(40)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(verify, parallel, Execution::parallel)->Arg(12)->Arg(40)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
