#include <doctest.h>

#include <random>

#include "rppa/bounds.hpp"
#include "rppa/verify.hpp"
#include "rppa/worst_case.hpp"

using namespace rppa;

TEST_CASE("classic factor values and scaling") {
  CHECK(bound_classic(1, 1.5) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(bound_classic(49, 1.5) == doctest::Approx(1.0 / 150.0).epsilon(1e-15));
  // Doubling N+1 halves the factor.
  CHECK(bound_classic(19, 0.8) ==
        doctest::Approx(2.0 * bound_classic(39, 0.8)).epsilon(1e-15));
  CHECK_THROWS_AS(bound_classic(0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(bound_classic(3, 2.0), std::invalid_argument);
}

TEST_CASE("optimal factor values and dominance") {
  CHECK(bound_optimal(1, 1.5) == doctest::Approx(1.0 / 7.0).epsilon(1e-15));
  CHECK(bound_optimal(100, 1.5) == doctest::Approx(1.0 / 304.0).epsilon(1e-15));
  for (double lambda : {0.1, 0.7, 1.3, 1.9})
    for (std::size_t n = 1; n <= 30; ++n)
      CHECK(bound_optimal(n, lambda) < bound_classic(n, lambda));
  // The two factors agree asymptotically: ratio -> 1 as N grows.
  CHECK(bound_classic(100000, 1.3) / bound_optimal(100000, 1.3) ==
        doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("rate report columns are mutually consistent") {
  const RateReport r = RateReport::make(4, 1.5, 0.0625001);
  CHECK(r.classic == doctest::Approx(bound_classic(4, 1.5)));
  CHECK(r.optimal == doctest::Approx(1.0 / 16.0));
  CHECK(r.lower_example == r.optimal);
  CHECK(r.abs_gap == doctest::Approx(1e-7).scale(0.0).epsilon(1e-6));
  CHECK(r.rel_gap == doctest::Approx(1.6e-6).scale(0.0).epsilon(1e-6));
}

TEST_CASE("quadratic slack inequality at hand-picked points") {
  // A = 1, B = 0 and A = 0, B = 1 are both feasible corner cases.
  const double lambda = 1.5;
  const std::size_t n = 2;
  const double rhs = proof_quadratic_rhs(lambda, n);
  CHECK(rhs == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(proof_quadratic(1.0, 0.0, lambda, n) >= rhs);
  CHECK(proof_quadratic(0.0, 1.0, lambda, n) >= rhs);
  // The analytic minimizer over A + B = 1 attains (2-lambda)/(lambda N + 2
  // - lambda), which strictly dominates the right-hand side: here 1/7 > 1/10.
  const double b = proof_minimizer_b(lambda, n);
  CHECK(proof_quadratic(1.0 - b, b, lambda, n) ==
        doctest::Approx(1.0 / 7.0).epsilon(1e-14));
  CHECK(proof_quadratic(1.0 - b, b, lambda, n) ==
        doctest::Approx((2.0 - lambda) / (lambda * double(n) + 2.0 - lambda))
            .epsilon(1e-14));
}

TEST_CASE("slack inequality holds on a sampled grid") {
  std::vector<std::pair<double, double>> grid;
  for (int i = 0; i < 60; ++i)
    for (int j = 0; j < 60; ++j)
      grid.emplace_back(3.0 * i / 59.0, 3.0 * j / 59.0);
  for (double lambda : {0.1, 1.0, 1.9})
    for (std::size_t n = 1; n <= 12; ++n)
      CHECK(check_proof_inequality(lambda, n, grid));
}

TEST_CASE("slack inequality detector notices a forged violation") {
  // The minimum over the segment sits a fixed margin above the right-hand
  // side; shrinking the tolerance past that margin must flip the verdict,
  // which exercises the failure path of the checker.
  const double lambda = 1.0;
  const std::size_t n = 3;
  const double b = proof_minimizer_b(lambda, n);
  std::vector<std::pair<double, double>> pts{{1.0 - b, b}};
  const double margin =
      proof_quadratic(1.0 - b, b, lambda, n) - proof_quadratic_rhs(lambda, n);
  CHECK(margin == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(check_proof_inequality(lambda, n, pts, 1e-12));
  CHECK_FALSE(check_proof_inequality(lambda, n, pts, -2.0 * margin));
}

TEST_CASE("telescoping ledger on a stationary run is degenerate but valid") {
  const ViProblem p{Operator{ZeroOperator{1}}, ConstraintSet{WholeSpace{1}},
                    SymMatrix::identity(1), 1.0, {2.0}};
  const Trajectory t = run(p, 3);
  const auto led = check_telescoping(t, p, {2.0});
  CHECK(led.degenerate);
  CHECK(led.all_hold);
  const auto led2 = check_telescoping(t, p, {5.0});
  CHECK_FALSE(led2.degenerate);
  CHECK(led2.all_hold);
}

TEST_CASE("telescoping chain holds on random runs") {
  std::mt19937 rng(101);
  for (int rep = 0; rep < 30; ++rep) {
    const ViProblem p = rep % 2 == 0 ? testing::random_affine_problem(3, rng)
                                     : testing::random_piecewise_problem(rng);
    const Trajectory t = run(p, 1 + rep % 5);
    const Vector w = testing::random_vector(p.dim(), rng, 3.0);
    const auto led = check_telescoping(t, p, w);
    CHECK(led.all_hold);
    CHECK(led.sum_gap <= led.final_bound + 1e-9);
  }
}

TEST_CASE("telescoping chain is tight on the worst-case instance") {
  const auto cert = build_certificate(2, 1.5, 10.0, 1.0, 1.0);
  const ViProblem p = cert.problem();
  const Trajectory t = run(p, 2);
  const auto led = check_telescoping(t, p, {cert.w_star});
  CHECK(led.all_hold);
  // (N+1) x gap = 3 x 2.5 = 7.5 equals the final bound 3/(2 x 5) x 25.
  CHECK(led.sum_gap == doctest::Approx(7.5).epsilon(1e-12));
  CHECK(led.final_bound == doctest::Approx(7.5).epsilon(1e-12));
  CHECK(led.sum_gap == doctest::Approx(led.final_bound).epsilon(1e-9));
  // The normalized ratios sit exactly on the A + B = 1 segment.
  CHECK(led.ratio_a + led.ratio_b == doctest::Approx(1.0).epsilon(1e-12));
}
