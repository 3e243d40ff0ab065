#include <doctest.h>

#include <random>

#include "rppa/bounds.hpp"
#include "rppa/rppa.hpp"
#include "rppa/verify.hpp"

using namespace rppa;

namespace {

ViProblem identity_affine(double lambda, double w0) {
  return ViProblem{Operator{AffineOperator(1, {1.0}, {0.0})},
                   ConstraintSet{WholeSpace{1}}, SymMatrix::identity(1), lambda,
                   {w0}};
}

ViProblem plateau_problem(double lambda, double w0, double c, double delta) {
  return ViProblem{Operator{Piecewise1D{c, delta}}, ConstraintSet{WholeSpace{1}},
                   SymMatrix::identity(1), lambda, {w0}};
}

}  // namespace

TEST_CASE("scalar identity operator halves the iterate each step") {
  const auto p = identity_affine(1.0, 4.0);
  const Trajectory t = run(p, 1);
  REQUIRE(t.w.size() == 3);
  REQUIRE(t.wt.size() == 2);
  CHECK(t.wt[0][0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(t.wt[1][0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(t.w[1][0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(t.w[2][0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(t.ergodic_mean[0] == doctest::Approx(1.5).epsilon(1e-14));
}

TEST_CASE("plateau run with relaxation matches the arithmetic progression") {
  const auto p = plateau_problem(1.5, 10.0, 1.0, 1.0);
  const Trajectory t = run(p, 2);
  CHECK(t.wt[0][0] == doctest::Approx(9.0).epsilon(1e-14));
  CHECK(t.wt[1][0] == doctest::Approx(7.5).epsilon(1e-14));
  CHECK(t.wt[2][0] == doctest::Approx(6.0).epsilon(1e-14));
  CHECK(t.ergodic_mean[0] == doctest::Approx(7.5).epsilon(1e-14));
}

TEST_CASE("zero operator leaves every iterate at the start point") {
  const ViProblem p{Operator{ZeroOperator{3}}, ConstraintSet{WholeSpace{3}},
                    SymMatrix::identity(3), 0.7, {1.0, 2.0, 3.0}};
  const Trajectory t = run(p, 4);
  for (const auto& wk : t.w) CHECK(norm2(sub(wk, p.w0)) == 0.0);
  CHECK(norm2(sub(t.ergodic_mean, p.w0)) == 0.0);
}

TEST_CASE("trajectory satisfies the relaxation identity and mean definition") {
  std::mt19937 rng(31);
  for (int rep = 0; rep < 10; ++rep) {
    const ViProblem p = rep % 2 == 0 ? testing::random_affine_problem(4, rng)
                                     : testing::random_piecewise_problem(rng);
    const std::size_t n = 3 + rep % 4;
    const Trajectory t = run(p, n);
    REQUIRE(t.w.size() == n + 2);
    REQUIRE(t.wt.size() == n + 1);
    Vector mean(p.dim(), 0.0);
    for (std::size_t k = 0; k <= n; ++k) {
      const Vector pred =
          axpy(p.lambda, sub(t.wt[k], t.w[k]), t.w[k]);
      CHECK(norm2(sub(pred, t.w[k + 1])) == 0.0);
      mean = add(mean, t.wt[k]);
    }
    mean = scaled(mean, 1.0 / double(n + 1));
    CHECK(norm2(sub(mean, t.ergodic_mean)) <= 1e-12 * (1.0 + norm2(mean)));
  }
}

TEST_CASE("ergodic gap at selected probe points of the plateau run") {
  const auto p = plateau_problem(1.5, 10.0, 1.0, 1.0);
  const Trajectory t = run(p, 2);
  // Probe w = 5: (7.5 - 5) * 1 = 2.5, distance^2 = 25, ratio 0.1.
  CHECK(ergodic_gap(t, p, {5.0}) == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(ergodic_gap(t, p, {5.0}) / 25.0 == doctest::Approx(0.1).epsilon(1e-13));
  // Probe w = w0 = 10: mean - w0 = -(lambda N + 2) c / 2 = -2.5.
  CHECK(ergodic_gap(t, p, {10.0}) == doctest::Approx(-2.5).epsilon(1e-14));
}

TEST_CASE("scaling the problem scales the trajectory") {
  std::mt19937 rng(37);
  for (double r : {0.25, 3.0, 11.0}) {
    const ViProblem p = testing::random_affine_problem(3, rng);
    const ViProblem ps = scale_problem(p, r);
    const Trajectory t = run(p, 5), ts = run(ps, 5);
    for (std::size_t k = 0; k <= 5; ++k)
      CHECK(norm2(sub(scaled(t.wt[k], 1.0 / r), ts.wt[k])) <=
            1e-10 * (1.0 + norm2(t.wt[k])));
  }
  CHECK_THROWS_AS(scale_problem(identity_affine(1.0, 1.0), 0.0),
                  std::invalid_argument);
}

TEST_CASE("translating the problem shifts the trajectory") {
  std::mt19937 rng(41);
  const ViProblem p = testing::random_piecewise_problem(rng);
  const Vector shift{2.5};
  const ViProblem pt = translate_problem(p, shift);
  const Trajectory t = run(p, 5), tt = run(pt, 5);
  for (std::size_t k = 0; k <= 5; ++k)
    CHECK(norm2(sub(sub(t.wt[k], shift), tt.wt[k])) <=
          1e-10 * (1.0 + norm2(t.wt[k])));
}

TEST_CASE("iterates are Fejer monotone toward the affine solution") {
  std::mt19937 rng(43);
  for (int rep = 0; rep < 10; ++rep) {
    const ViProblem p = testing::random_affine_problem(3, rng);
    const auto& a = std::get<AffineOperator>(p.f.v);
    // Solution of M w = -q (M is nonsingular for these random instances).
    Vector rhs = a.q;
    for (double& v : rhs) v = -v;
    const Vector w_sol = lu_solve(a.m, a.dim, std::move(rhs), "test");
    const Trajectory t = run(p, 8);
    double prev = h_norm_sq(p.h, sub(t.w[0], w_sol));
    for (std::size_t k = 1; k < t.w.size(); ++k) {
      const double cur = h_norm_sq(p.h, sub(t.w[k], w_sol));
      CHECK(cur <= prev + 1e-10 * (1.0 + prev));
      prev = cur;
    }
  }
}

TEST_CASE("both ergodic bounds hold on probe grids of live runs") {
  std::mt19937 rng(47);
  double worst = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    const ViProblem p = rep % 2 == 0 ? testing::random_affine_problem(3, rng)
                                     : testing::random_piecewise_problem(rng);
    const std::size_t n = 2 + rep % 4;
    const Trajectory t = run(p, n);
    for (const Vector& w : probe_grid(t, p)) {
      const double dist = h_norm_sq(p.h, sub(w, p.w0));
      const double gap = ergodic_gap(t, p, w);
      worst = std::max(worst, gap - bound_classic(n, p.lambda) * dist);
      worst = std::max(worst, gap - bound_optimal(n, p.lambda) * dist);
    }
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("probe grid is deterministic and lives inside the set") {
  const ViProblem p{Operator{Piecewise1D{1.0, 1.0}},
                    ConstraintSet{Box{{0.0}, {12.0}}}, SymMatrix::identity(1),
                    1.0, {10.0}};
  const Trajectory t = run(p, 3);
  const auto g1 = probe_grid(t, p), g2 = probe_grid(t, p);
  REQUIRE(g1.size() == g2.size());
  CHECK(g1.size() == 2 + 4 + 50);
  for (std::size_t i = 0; i < g1.size(); ++i) {
    CHECK(g1[i] == g2[i]);
    CHECK(p.omega.contains(g1[i], 1e-12));
  }
}

TEST_CASE("run rejects N = 0") {
  CHECK_THROWS_AS(run(identity_affine(1.0, 1.0), 0), std::invalid_argument);
}
