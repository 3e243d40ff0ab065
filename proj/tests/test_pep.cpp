#include <doctest.h>

#include <random>
#include <sstream>

#include "rppa/pep.hpp"
#include "rppa/verify.hpp"
#include "rppa/worst_case.hpp"

using namespace rppa;

TEST_CASE("w_k coefficients follow the geometric recursion") {
  // w_0 = 0, w_1 = lambda wt_0, w_2 = (1-lambda) lambda wt_0 + lambda wt_1.
  const double lambda = 1.5;
  const Vector c0 = coeffs_wk(0, lambda, 3);
  CHECK(norm2(c0) == 0.0);
  const Vector c1 = coeffs_wk(1, lambda, 3);
  CHECK(c1[0] == doctest::Approx(1.5));
  CHECK(c1[1] == 0.0);
  const Vector c2 = coeffs_wk(2, lambda, 3);
  CHECK(c2[0] == doctest::Approx((1.0 - lambda) * lambda));
  CHECK(c2[1] == doctest::Approx(lambda));
  CHECK(c2[2] == 0.0);
  CHECK(c2.size() == 6);
  CHECK_THROWS_AS(coeffs_wk(4, lambda, 3), std::invalid_argument);
}

TEST_CASE("assembled instance has the right shape and counts") {
  for (std::size_t n : {std::size_t(1), std::size_t(3), std::size_t(50)}) {
    const PepInstance inst = assemble(n, 1.5);
    CHECK(inst.dim == n + 3);
    CHECK(inst.ineq_constraints.size() == n * (n + 1) / 2 + n + 1);
    CHECK(inst.objective.order() == n + 3);
    // Normalization matrix is a single unit entry.
    CHECK(inst.eq_constraint(n + 1, n + 1) == 1.0);
    CHECK(inst.eq_constraint.frobenius_norm() == doctest::Approx(1.0));
  }
  CHECK_THROWS_AS(assemble(0, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(assemble(3, 2.0), std::invalid_argument);
}

TEST_CASE("constraint builders validate their indices") {
  CHECK_THROWS_AS(build_a_ij(2, 1, 1.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(build_a_ij(1, 1, 1.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(build_a_ij(1, 4, 1.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(build_a_iw(4, 1.0, 3), std::invalid_argument);
}

TEST_CASE("traces of the embedded Gram match direct inner products") {
  std::mt19937 rng(53);
  double worst = 0.0;
  for (int rep = 0; rep < 40; ++rep) {
    const ViProblem p = rep % 2 == 0 ? testing::random_affine_problem(3, rng)
                                     : testing::random_piecewise_problem(rng);
    const Trajectory t = run(p, 1 + rep % 5);
    const Vector w = testing::random_vector(p.dim(), rng, 3.0);
    worst = std::max(worst, testing::trace_identity_error(t, p, w));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("embedded Gram of a stationary run is a single unit entry") {
  // Zero operator from w0 = 0: all iterates stay at the origin, and with a
  // unit-norm probe the Gram has a single 1 in the probe slot.
  const std::size_t n = 3;
  const ViProblem p{Operator{ZeroOperator{2}}, ConstraintSet{WholeSpace{2}},
                    SymMatrix::identity(2), 1.0, {0.0, 0.0}};
  const Trajectory t = run(p, n);
  const SymMatrix g = embed(t, p, {1.0, 0.0});
  for (std::size_t i = 0; i < g.order(); ++i)
    for (std::size_t j = 0; j <= i; ++j)
      CHECK(g(i, j) == ((i == n + 1 && j == n + 1) ? 1.0 : 0.0));
  CHECK(build_a_w(n).inner(g) == 1.0);
}

TEST_CASE("embedded Gram is feasible for every PEP constraint") {
  std::mt19937 rng(59);
  double worst = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    const ViProblem p = rep % 2 == 0 ? testing::random_affine_problem(2, rng)
                                     : testing::random_piecewise_problem(rng);
    const std::size_t n = 4;
    const Trajectory t = run(p, n);
    const SymMatrix g = embed(t, p, testing::random_vector(p.dim(), rng, 2.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j <= n; ++j)
        worst = std::max(worst, -build_a_ij(i, j, p.lambda, n).inner(g));
    for (std::size_t i = 0; i <= n; ++i)
      worst = std::max(worst, -build_a_iw(i, p.lambda, n).inner(g));
    worst = std::max(worst, -sym_eig(g).eigenvalues.front());
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("objective trace equals the ergodic gap with the sign flipped") {
  std::mt19937 rng(61);
  const ViProblem p = testing::random_affine_problem(3, rng);
  const Trajectory t = run(p, 4);
  const Vector w = testing::random_vector(3, rng, 2.0);
  const SymMatrix g = embed(t, p, w);
  CHECK(build_c(4).inner(g) ==
        doctest::Approx(-ergodic_gap(t, p, w)).epsilon(1e-10));
}

TEST_CASE("small PEP solves recover the analytic worst case") {
  SdpConfig cfg;
  cfg.tol = 1e-9;
  SUBCASE("N = 1, lambda = 1.0 gives 1/6") {
    const PepSolution sol = solve_pep(assemble(1, 1.0), cfg);
    CHECK(sol.eps == doctest::Approx(1.0 / 6.0).epsilon(1e-5));
  }
  SUBCASE("N = 1, lambda = 1.5 gives 1/7") {
    const PepSolution sol = solve_pep(assemble(1, 1.5), cfg);
    CHECK(sol.eps == doctest::Approx(1.0 / 7.0).epsilon(1e-5));
  }
}

TEST_CASE("PEP value is nonincreasing in N and matches the example scan") {
  SdpConfig cfg;
  cfg.tol = 1e-9;
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t n = 1; n <= 4; ++n) {
    const double eps = solve_pep(assemble(n, 1.5), cfg).eps;
    CHECK(eps <= prev + 1e-7);
    prev = eps;
    // Cross-check against the grid scan of the one-dimensional family.
    const auto scan = case_scan(default_certificate(n, 1.5));
    CHECK(eps == doctest::Approx(scan.max_upper).epsilon(2e-4));
  }
}

TEST_CASE("triplet export and import round-trip the instance") {
  const PepInstance inst = assemble(3, 1.25);
  std::ostringstream out;
  write_sdp_triplets(out, inst);
  std::istringstream in(out.str());
  const SdpProblem back = read_sdp_triplets(in);

  CHECK(back.dim == inst.dim);
  CHECK(back.pep_n == inst.n_steps);
  CHECK(back.pep_lambda == doctest::Approx(inst.lambda).epsilon(1e-16));
  REQUIRE(back.constraints.size() == inst.ineq_constraints.size() + 1);

  const SdpProblem direct = to_sdp_problem(inst);
  auto same = [](const SymMatrix& a, const SymMatrix& b) {
    if (a.order() != b.order()) return false;
    for (std::size_t i = 0; i < a.order(); ++i)
      for (std::size_t j = 0; j <= i; ++j)
        if (a(i, j) != b(i, j)) return false;
    return true;
  };
  CHECK(same(back.objective, direct.objective));
  for (std::size_t l = 0; l < back.constraints.size(); ++l) {
    CHECK(same(back.constraints[l].a, direct.constraints[l].a));
    CHECK(back.constraints[l].sense == direct.constraints[l].sense);
    CHECK(back.constraints[l].rhs == direct.constraints[l].rhs);
  }

  // Both routes give the same solver result bit for bit.
  const SdpResult r1 = solve_sdp(direct), r2 = solve_sdp(back);
  CHECK(r1.objective_value == r2.objective_value);
  CHECK(r1.iterations == r2.iterations);
}

TEST_CASE("triplet reader rejects malformed input") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return read_sdp_triplets(in);
  };
  CHECK_THROWS_AS(parse("bogus\n"), std::runtime_error);
  CHECK_THROWS_AS(parse("pep-sdp 1\nend\n"), std::runtime_error);
  CHECK_THROWS_AS(parse("pep-sdp 1\nobjective nnz 1\n0 0 1\nend\n"),
                  std::runtime_error);
  CHECK_THROWS_AS(parse("pep-sdp 1\ndim 2\nobjective nnz 1\n0 0\nend\n"),
                  std::runtime_error);
}
