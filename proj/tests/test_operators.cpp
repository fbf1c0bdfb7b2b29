#include "doctest.h"

#include <algorithm>

#include "crm/analysis.hpp"
#include "crm/errors.hpp"
#include "crm/operators.hpp"
#include "crm/verification.hpp"
#include "test_support.hpp"

using namespace crm;
using crm::test::vec;

TEST_CASE("cascade") {
  SUBCASE("axes of R^2") {
    const auto cc = cascade(test::axes2(), vec({1, 1}));
    REQUIRE(cc.stages.size() == 2);
    CHECK(cc.stages[0].isApprox(vec({1, -1})));
    CHECK(cc.stages[1].isApprox(vec({-1, -1})));
  }
  SUBCASE("planes z = 0 then y = 0") {
    const auto cc = cascade(test::planes3(), vec({1, 2, 3}));
    CHECK(cc.stages[0].isApprox(vec({1, 2, -3})));
    CHECK(cc.stages[1].isApprox(vec({1, -2, -3})));
  }
  SUBCASE("points of S are fixed by every stage") {
    const Vector s = vec({4, 0, 0});
    for (const auto& stage : cascade(test::planes3(), s).stages) CHECK(stage == s);
  }
  SUBCASE("norm preservation relative to S") {
    for (const auto& p : test::random_instances(30, 11)) {
      Rng rng(1);
      const Vector x = 10.0 * rng.gaussian_vector(p.ambient_dim());
      const Vector s = solution_projection(p, x);
      for (const auto& stage : cascade(p, x).stages) {
        CHECK(std::abs((stage - s).norm() - (x - s).norm()) <= 1e-10 * std::max(1.0, (x - s).norm()));
      }
    }
  }
  CHECK_THROWS_AS(cascade(test::axes2(), vec({1, 1, 1})), InvalidArgument);
}

TEST_CASE("circumcenter: axes of R^2 by hand") {
  const auto r = circumcenter(test::axes2(), vec({1, 1}));
  // G = [[4, 4], [4, 8]], b = (2, 4), alpha = (0, 1/2).
  CHECK(std::abs(r.coefficients(0)) < 1e-14);
  CHECK(std::abs(r.coefficients(1) - 0.5) < 1e-14);
  CHECK(r.point.norm() < 1e-14);
  CHECK(r.gram_rank == 2);
  CHECK(r.residual < 1e-14);
}

TEST_CASE("circumcenter: dependent differences give the minimum-norm alpha") {
  // The same line three times: x^(1) = x^(3) = (1,-1) and x^(2) = x.
  const auto l = test::line2(0.0);
  const auto r = circumcenter(ProblemInstance({l, l, l}), vec({1, 1}));
  CHECK(r.gram_rank == 1);
  CHECK(test::rel_err(r.point, vec({1, 0})) < 1e-15);
  CHECK(test::rel_err(r.coefficients, vec({0.25, 0, 0.25})) < 1e-15);
}

TEST_CASE("circumcenter: x in S is its own circumcenter") {
  const Vector s = vec({-2, 0, 0});
  const auto r = circumcenter(test::planes3(), s);
  CHECK(r.point == s);
  CHECK(r.coefficients.isZero(0.0));
  CHECK(r.gram_rank == 0);
}

TEST_CASE("circumcenter: reconstruction identity and hull oracle on n = 6, m = 3") {
  GeneratorSpec spec;
  spec.ambient_dim = 6;
  spec.subspace_dims = {4, 4, 3};
  spec.solution_dim = 1;
  spec.seed = 17;
  spec.affine = true;
  const auto p = generate(spec).problem;
  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    const Vector x = 10.0 * rng.gaussian_vector(6);
    const auto r = circumcenter(p, x);
    Vector rebuilt = x;
    for (std::size_t j = 0; j < r.cascade.stages.size(); ++j) {
      rebuilt += r.coefficients(static_cast<Eigen::Index>(j)) * (r.cascade.stages[j] - x);
    }
    CHECK((rebuilt - r.point).norm() <= 1e-12 * std::max(1.0, x.norm()));
    const Vector oracle = project_onto_reflection_hull(p, x, solution_projection(p, x));
    CHECK(test::rel_err(r.point, oracle) <= 1e-8);
  }
}

TEST_CASE("circumcenter: inconsistent cascade is a numerical failure") {
  ReflectionCascade bogus;
  bogus.input = vec({0, 0});
  bogus.stages = {vec({1, 0}), vec({2, 0})};
  CHECK_THROWS_AS(circumcenter(bogus), NumericalFailure);
}

TEST_CASE("circumcenter: dependent differences keep the point well defined") {
  // m = 5 subspaces in R^2: at most 2 independent differences.
  std::vector<AffineSubspace> family;
  for (double deg : {0.0, 20.0, 70.0, 110.0, 150.0}) family.push_back(test::line2(deg));
  const ProblemInstance p(family);
  const auto r = circumcenter(p, vec({3, -1}));
  CHECK(r.gram_rank <= 2);
  CHECK(r.point.norm() < 1e-12);
}

TEST_CASE("circumcenter invariants on random instances") {
  int trial = 0;
  for (const auto& p : test::random_instances(300, 31)) {
    Rng rng(static_cast<std::uint64_t>(trial++));
    const Vector x = 10.0 * rng.gaussian_vector(p.ambient_dim());
    const double scale = std::max(1.0, x.norm());
    const auto r = circumcenter(p, x);
    for (const auto& stage : r.cascade.stages) {
      CHECK(std::abs((r.point - x).norm() - (r.point - stage).norm()) <= 1e-9 * scale);
    }
    CHECK((r.point - project_onto_reflection_hull(p, x, r.point)).norm() <= 1e-9 * scale);

    // Two different points of S project to the same point of W_x.
    const auto& sol = p.solution_set();
    Vector s2 = sol.offset();
    if (sol.dim() > 0) s2 += sol.basis() * rng.gaussian_vector(sol.dim());
    const Vector a = project_onto_reflection_hull(p, x, solution_projection(p, x));
    const Vector b = project_onto_reflection_hull(p, x, s2);
    CHECK((a - b).norm() <= 1e-8 * scale);
    CHECK((r.point - a).norm() <= 1e-8 * scale);
  }
}

TEST_CASE("subspace order changes the cascade but not the invariants") {
  GeneratorSpec spec;
  spec.ambient_dim = 7;
  spec.subspace_dims = {5, 4, 5};
  spec.solution_dim = 1;
  spec.seed = 8;
  const auto p = generate(spec).problem;
  auto reversed = p.subspaces();
  std::reverse(reversed.begin(), reversed.end());
  const ProblemInstance q(reversed);
  Rng rng(2);
  const Vector x = 10.0 * rng.gaussian_vector(7);
  for (const ProblemInstance* inst : {&p, &q}) {
    const auto r = circumcenter(*inst, x);
    for (const auto& stage : r.cascade.stages) {
      CHECK(std::abs((r.point - x).norm() - (r.point - stage).norm()) <= 1e-9 * x.norm());
    }
    CHECK((r.point - project_onto_reflection_hull(*inst, x, r.point)).norm() <= 1e-9 * x.norm());
  }
}

TEST_CASE("averaged operator: hand values and fixed points") {
  // A_1(1,1) = (1, 0.5), A_2(1,1) = (0.5, 0); the mean is (0.75, 0.25).
  CHECK(test::rel_err(averaged_apply(test::axes2(), vec({1, 1})), vec({0.75, 0.25})) < 1e-15);
  const Vector s = vec({7, 0, 0});
  CHECK(averaged_apply(test::planes3(), s) == s);
}

TEST_CASE("averaged operator: Fejer inequality, contraction, and P_S invariance") {
  int trial = 0;
  for (const auto& p : test::random_instances(100, 77)) {
    Rng rng(static_cast<std::uint64_t>(1000 + trial++));
    const double r_a = contraction_factor(p);
    const auto& sol = p.solution_set();
    for (int k = 0; k < 5; ++k) {
      const Vector x = 10.0 * rng.gaussian_vector(p.ambient_dim());
      Vector s = sol.offset();
      if (sol.dim() > 0) s += sol.basis() * rng.gaussian_vector(sol.dim());
      const Vector ax = averaged_apply(p, x);
      CHECK((ax - s).squaredNorm() <= (x - s).squaredNorm() - (x - ax).squaredNorm() + 1e-10);

      const Vector px = solution_projection(p, x);
      CHECK((ax - px).norm() <= r_a * (x - px).norm() + 1e-10);
      CHECK((solution_projection(p, ax) - px).norm() <= 1e-9 * std::max(1.0, x.norm()));
      // A(x) lies in W_x.
      CHECK((ax - project_onto_reflection_hull(p, x, ax)).norm() <= 1e-9 * std::max(1.0, x.norm()));
    }
  }
}

TEST_CASE("averaged_matrix") {
  SUBCASE("axes of R^2") {
    const auto map = averaged_matrix(test::axes2());
    Matrix expected(2, 2);
    expected << 0.75, 0, 0, 0.25;
    CHECK((map.linear - expected).norm() < 1e-15);
    CHECK(map.shift.norm() < 1e-15);
  }
  SUBCASE("single full-space subspace gives the identity") {
    const ProblemInstance p({AffineSubspace::whole_space(4)});
    const auto map = averaged_matrix(p);
    CHECK((map.linear - Matrix::Identity(4, 4)).norm() < 1e-15);
    CHECK(map.shift.norm() < 1e-15);
  }
  SUBCASE("matches the operator on random vectors and fixes s0") {
    for (const auto& p : test::random_instances(20, 5)) {
      const auto map = averaged_matrix(p);
      const Vector& s0 = p.solution_set().offset();
      CHECK((map(s0) - s0).norm() <= 1e-10 * std::max(1.0, s0.norm()));
      Rng rng(9);
      for (int k = 0; k < 10; ++k) {
        const Vector x = 10.0 * rng.gaussian_vector(p.ambient_dim());
        CHECK(test::rel_err(map(x), averaged_apply(p, x)) <= 1e-10);
      }
    }
  }
  SUBCASE("empty intersection propagates") {
    const auto a = AffineSubspace::from_spanning_set(vec({0, 0}), vec({1, 0}));
    const auto b = AffineSubspace::from_spanning_set(vec({0, 1}), vec({1, 0}));
    CHECK_THROWS_AS(averaged_matrix(ProblemInstance({a, b})), EmptyIntersection);
  }
}

TEST_CASE("Douglas-Rachford step") {
  CHECK(douglas_rachford_step(test::axes2(), vec({1, 1})).norm() < 1e-15);
  const ProblemInstance three({test::line2(0), test::line2(30), test::line2(60)});
  CHECK_THROWS_AS(douglas_rachford_step(three, vec({1, 1})), UnsupportedConfiguration);
}
