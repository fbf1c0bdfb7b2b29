#include "doctest.h"

#include <cmath>

#include "crm/analysis.hpp"
#include "crm/errors.hpp"
#include "crm/operators.hpp"
#include "crm/solvers.hpp"
#include "test_support.hpp"

using namespace crm;
using crm::test::vec;

namespace {

ProblemInstance random_instance(Eigen::Index n, std::vector<Eigen::Index> dims, Eigen::Index ds,
                                std::uint64_t seed, bool affine = true) {
  GeneratorSpec spec;
  spec.ambient_dim = n;
  spec.subspace_dims = std::move(dims);
  spec.solution_dim = ds;
  spec.seed = seed;
  spec.affine = affine;
  return generate(spec).problem;
}

}  // namespace

TEST_CASE("method names") {
  CHECK(parse_method("crm") == Method::CRM);
  CHECK(parse_method("Cimmino") == Method::CIMMINO);
  CHECK_THROWS_AS(parse_method("cadra"), InvalidArgument);
  const auto list = parse_method_list("CRM,map,CRM");
  REQUIRE(list.size() == 2);
  CHECK(list[1] == Method::MAP);
  CHECK_THROWS_AS(parse_method_list(""), InvalidArgument);
}

TEST_CASE("config validation") {
  SolverConfig cfg;
  cfg.max_iterations = 0;
  CHECK_THROWS_AS(run_crm(test::axes2(), vec({1, 1}), cfg), InvalidArgument);
  cfg = {};
  cfg.tolerance = 0.0;
  CHECK_THROWS_AS(run_crm(test::axes2(), vec({1, 1}), cfg), InvalidArgument);
}

TEST_CASE("CRM on the axes lands on S in one step") {
  const auto t = run_crm(test::axes2(), vec({1, 1}));
  CHECK(t.converged);
  CHECK(t.iterations() == 1);
  CHECK(t.final_point.norm() < 1e-14);
  CHECK(t.iterates.size() == 2);
}

TEST_CASE("every method is idle at a point of S") {
  const Vector s = vec({3, 0, 0});
  for (Method m : {Method::CRM, Method::AVG, Method::MAP, Method::CIMMINO, Method::DRM}) {
    const auto t = run(m, test::planes3(), s);
    CHECK(t.converged);
    CHECK(t.iterations() == 0);
    CHECK(t.final_point == s);
  }
}

TEST_CASE("CRM on a random n = 10, m = 4 instance obeys the r_A bound") {
  const auto p = random_instance(10, {7, 8, 6, 7}, 2, 41);
  const double r_a = contraction_factor(p);
  Rng rng(3);
  for (int k = 0; k < 10; ++k) {
    const Vector x0 = 10.0 * rng.gaussian_vector(10);
    const auto t = run_crm(p, x0);
    REQUIRE(t.converged);
    CHECK(test::rel_err(t.final_point, solution_projection(p, x0)) <= 1e-8);
    for (std::size_t i = 0; i + 1 < t.distances.size(); ++i) {
      CHECK(t.distances[i + 1] <= r_a * t.distances[i] + 1e-12);
    }
  }
}

TEST_CASE("averaged iteration") {
  SUBCASE("axes of R^2") {
    const auto t = run_averaged(test::axes2(), vec({1, 1}));
    REQUIRE(t.iterates.size() > 1);
    CHECK(test::rel_err(t.iterates[1], vec({0.75, 0.25})) < 1e-15);
    for (double q : t.rate_quotients) CHECK(q <= 0.75 + 1e-12);
    CHECK(t.converged);
  }
  SUBCASE("limit is P_S(x0)") {
    const auto p = random_instance(8, {5, 6, 4}, 1, 12);
    Rng rng(8);
    const Vector x0 = 10.0 * rng.gaussian_vector(8);
    const auto t = run_averaged(p, x0);
    REQUIRE(t.converged);
    CHECK(test::rel_err(t.final_point, solution_projection(p, x0)) <= 1e-8);
  }
}

TEST_CASE("alternating projections") {
  SUBCASE("axes: one sweep") {
    const auto t = run_map(test::axes2(), vec({1, 1}));
    CHECK(t.iterations() == 1);
    CHECK(t.final_point.norm() == 0.0);
  }
  SUBCASE("45 degree lines decay by cos^2 = 1/2 per sweep") {
    const auto t = run_map(test::lines2(45.0), vec({0.3, 2.0}));
    REQUIRE(t.converged);
    REQUIRE(t.rate_quotients.size() > 3);
    // The first sweep leaves the start's off-line component; later sweeps are exact.
    for (std::size_t k = 1; k < t.rate_quotients.size(); ++k) CHECK(std::abs(t.rate_quotients[k] - 0.5) <= 1e-6);
  }
}

TEST_CASE("Cimmino") {
  SUBCASE("axes: iteration matrix I/2") {
    const auto t = run_cimmino(test::axes2(), vec({1, 1}));
    CHECK(test::rel_err(t.iterates[1], vec({0.5, 0.5})) < 1e-15);
    for (double q : t.rate_quotients) CHECK(std::abs(q - 0.5) < 1e-12);
  }
  SUBCASE("single subspace: one step") {
    const ProblemInstance p({test::line2(30.0)});
    const auto t = run_cimmino(p, vec({1, 5}));
    CHECK(t.iterations() == 1);
    CHECK(t.converged);
  }
  SUBCASE("limit equals P_S(x0) on random affine instances") {
    int i = 0;
    for (const auto& p : test::random_instances(25, 55, 8, 4)) {
      Rng rng(static_cast<std::uint64_t>(i++));
      const Vector x0 = 10.0 * rng.gaussian_vector(p.ambient_dim());
      SolverConfig cfg;
      cfg.max_iterations = 200000;
      const auto t = run_cimmino(p, x0, cfg);
      REQUIRE(t.converged);
      CHECK(test::rel_err(t.final_point, solution_projection(p, x0)) <= 1e-7);
    }
  }
}

TEST_CASE("Douglas-Rachford") {
  SUBCASE("axes: one step to the origin") {
    const auto t = run_drm(test::axes2(), vec({1, 1}));
    CHECK(t.iterations() == 1);
    CHECK(t.final_point.norm() < 1e-15);
  }
  SUBCASE("m != 2 is unsupported") {
    const ProblemInstance three({test::line2(0), test::line2(30), test::line2(60)});
    CHECK_THROWS_AS(run_drm(three, vec({1, 1})), UnsupportedConfiguration);
  }
  SUBCASE("shadow converges to P_S(x0); C beats the DRM step along the way") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto p = random_instance(9, {5, 6}, 2, seed);
      Rng rng(seed + 100);
      const Vector x0 = 10.0 * rng.gaussian_vector(9);
      // Near-parallel pairs stall DRM's shadow around 1e-9 in double precision.
      SolverConfig cfg;
      cfg.tolerance = 1e-8;
      cfg.max_iterations = 200000;
      const auto t = run_drm(p, x0, cfg);
      REQUIRE(t.converged);
      const Vector target = solution_projection(p, x0);
      CHECK(test::rel_err(t.final_point, target) <= 1e-7);
      for (const auto& x : t.iterates) {
        const Vector px = solution_projection(p, x);
        CHECK((circumcenter(p, x).point - px).norm() <=
              (douglas_rachford_step(p, x) - px).norm() + 1e-12 * std::max(1.0, x.norm()));
      }
    }
  }
}

TEST_CASE("trace invariants across methods") {
  int i = 0;
  for (const auto& p : test::random_instances(40, 123, 10, 4)) {
    Rng rng(static_cast<std::uint64_t>(i++));
    const Vector x0 = 10.0 * rng.gaussian_vector(p.ambient_dim());
    const double r_a = contraction_factor(p);
    SolverConfig cfg;
    cfg.max_iterations = 100000;
    for (Method m : {Method::CRM, Method::AVG, Method::MAP, Method::CIMMINO}) {
      const auto t = run(m, p, x0, cfg);
      CHECK(t.converged);
      CHECK(t.distances.back() <= cfg.tolerance);
      for (std::size_t k = 0; k + 1 < t.distances.size(); ++k) {
        CHECK(t.distances[k + 1] <= t.distances[k] + 1e-12);
      }
      CHECK(test::rel_err(t.final_point, solution_projection(p, x0)) <= 1e-7);
      if (m == Method::CRM || m == Method::AVG) {
        double bound = t.distances.front();
        for (double d : t.distances) {
          CHECK(d <= bound + 1e-9);
          bound *= r_a;
        }
      }
    }
  }
}

TEST_CASE("projected start keeps the limit") {
  int i = 0;
  for (const auto& p : test::random_instances(30, 321)) {
    Rng rng(static_cast<std::uint64_t>(i++));
    const Vector x0 = 10.0 * rng.gaussian_vector(p.ambient_dim());
    SolverConfig cfg;
    cfg.use_projected_start = true;
    const auto a = run_crm(p, x0);
    const auto b = run_crm(p, x0, cfg);
    REQUIRE(b.converged);
    CHECK(test::rel_err(b.iterates.front(), project(p.subspace(0), x0)) < 1e-15);
    CHECK((a.final_point - b.final_point).norm() <= 1e-8 * std::max(1.0, x0.norm()));
  }
}

TEST_CASE("runs are bitwise deterministic") {
  const auto p = random_instance(12, {8, 9, 7}, 3, 5);
  const Vector x0 = 10.0 * Rng(6).gaussian_vector(12);
  for (Method m : {Method::CRM, Method::AVG, Method::MAP, Method::CIMMINO}) {
    const auto a = run(m, p, x0);
    const auto b = run(m, p, x0);
    CHECK(a.distances == b.distances);
    CHECK(a.step_norms == b.step_norms);
    CHECK(a.final_point == b.final_point);
  }
}

TEST_CASE("iteration cap reports non-convergence") {
  SolverConfig cfg;
  cfg.max_iterations = 3;
  const auto t = run_averaged(test::lines2(10.0), vec({1, 1}), cfg);
  CHECK_FALSE(t.converged);
  CHECK(t.iterations() == 3);
  CHECK(t.distances.size() == 4);
}

TEST_CASE("step-norm stopping without the solution oracle") {
  SolverConfig cfg;
  cfg.use_solution_oracle = false;
  const auto p = random_instance(6, {3, 4}, 1, 2);
  const Vector x0 = 10.0 * Rng(1).gaussian_vector(6);
  const auto t = run_crm(p, x0, cfg);
  CHECK(t.converged);
  CHECK(t.distances.empty());
  CHECK(t.step_norms.back() <= cfg.tolerance);
  CHECK(test::rel_err(t.final_point, solution_projection(p, x0)) <= 1e-8);
}
