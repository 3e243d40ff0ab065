#pragma once

#include <functional>
#include <random>
#include <sstream>

#include "rppa/bounds.hpp"
#include "rppa/pep.hpp"
#include "rppa/worst_case.hpp"

namespace rppa {

struct CheckResult {
  std::string name;
  bool pass;
  std::string detail;
};

namespace testing {

/// Random SPD matrix A A^T + I.
inline SymMatrix random_spd(std::size_t n, std::mt19937& rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<double> a(n * n);
  for (double& v : a) v = unif(rng);
  SymMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = (i == j) ? 1.0 : 0.0;
      for (std::size_t k = 0; k < n; ++k) s += a[i * n + k] * a[j * n + k];
      m.set(i, j, s);
    }
  return m;
}

inline SymMatrix random_symmetric(std::size_t n, std::mt19937& rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  SymMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) m.set(i, j, unif(rng));
  return m;
}

inline Vector random_vector(std::size_t n, std::mt19937& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> unif(-scale, scale);
  Vector v(n);
  for (double& x : v) x = unif(rng);
  return v;
}

/// Random monotone affine map: M = S + K with S PSD and K skew-symmetric.
inline AffineOperator random_monotone_affine(std::size_t n, std::mt19937& rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const SymMatrix s = random_spd(n, rng);
  std::vector<double> m(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) {
      const double k = unif(rng);
      m[i * n + j] = s(i, j) + k;
      m[j * n + i] = s(i, j) - k;
    }
  for (std::size_t i = 0; i < n; ++i) m[i * n + i] = s(i, i);
  return AffineOperator(n, std::move(m), random_vector(n, rng));
}

inline ViProblem random_affine_problem(std::size_t n, std::mt19937& rng) {
  std::uniform_real_distribution<double> lam(0.2, 1.8);
  return ViProblem{Operator{random_monotone_affine(n, rng)},
                   ConstraintSet{WholeSpace{n}}, random_spd(n, rng), lam(rng),
                   random_vector(n, rng, 3.0)};
}

inline ViProblem random_piecewise_problem(std::mt19937& rng) {
  std::uniform_real_distribution<double> unif(0.2, 2.0);
  std::uniform_real_distribution<double> lam(0.2, 1.8);
  std::uniform_real_distribution<double> start(-5.0, 5.0);
  SymMatrix h(1);
  h.set(0, 0, unif(rng));
  return ViProblem{Operator{Piecewise1D{unif(rng), unif(rng)}},
                   ConstraintSet{WholeSpace{1}}, h, lam(rng),
                   Vector{start(rng)}};
}

/// Direct inner-product evaluation of every PEP trace against the embedded
/// Gram matrix; returns the worst absolute discrepancy.
inline double trace_identity_error(const Trajectory& t, const ViProblem& p,
                                   const Vector& w) {
  const std::size_t n = t.n_steps;
  const SymMatrix g = embed(t, p, w);
  const Vector fw = p.f.evaluate(w);
  double worst = 0.0;

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j <= n; ++j) {
      const double direct =
          h_inner(p.h, sub(t.wt[j], t.wt[i]),
                  sub(sub(t.w[j], t.wt[j]), sub(t.w[i], t.wt[i])));
      const double traced = build_a_ij(i, j, t.lambda, n).inner(g);
      worst = std::max(worst, std::abs(direct - traced));
    }
  for (std::size_t i = 0; i <= n; ++i) {
    const double direct =
        dot(sub(t.wt[i], w),
            sub(p.h.apply(sub(t.w[i], t.wt[i])), fw));
    const double traced = build_a_iw(i, t.lambda, n).inner(g);
    worst = std::max(worst, std::abs(direct - traced));
  }
  worst = std::max(worst, std::abs(build_a_w(n).inner(g) -
                                   h_norm_sq(p.h, sub(w, t.w[0]))));
  worst = std::max(
      worst, std::abs(build_c(n).inner(g) - dot(sub(w, t.ergodic_mean), fw)));
  return worst;
}

}  // namespace testing

namespace detail {

template <typename Fn>
void run_check(std::vector<CheckResult>& out, const std::string& name, Fn fn) {
  std::ostringstream detail;
  bool pass = false;
  try {
    pass = fn(detail);
  } catch (const std::exception& e) {
    detail << "exception: " << e.what();
  }
  out.push_back({name, pass, detail.str()});
}

}  // namespace detail

/// The full property suite: trace identities, metamorphic maps, both rate
/// bounds on live runs, the proof-chain checks, and certificate agreement.
/// Exercises everything except the (slow) PEP solves.
inline std::vector<CheckResult> run_verification(unsigned seed = 12345) {
  std::vector<CheckResult> results;
  std::mt19937 rng(seed);

  detail::run_check(results, "trace-identities", [&](std::ostream& os) {
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
      std::uniform_int_distribution<std::size_t> nn(1, 6), dd(1, 5);
      const bool affine = rep % 2 == 0;
      ViProblem p = affine ? testing::random_affine_problem(dd(rng), rng)
                           : testing::random_piecewise_problem(rng);
      const Trajectory t = run(p, nn(rng));
      const Vector w = testing::random_vector(p.dim(), rng, 3.0);
      worst = std::max(worst, testing::trace_identity_error(t, p, w));
    }
    os << "worst discrepancy " << worst;
    return worst <= 1e-9;
  });

  detail::run_check(results, "embedding-feasibility", [&](std::ostream& os) {
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
      ViProblem p = rep % 2 == 0 ? testing::random_affine_problem(3, rng)
                                 : testing::random_piecewise_problem(rng);
      const std::size_t n = 3;
      const Trajectory t = run(p, n);
      const Vector w = testing::random_vector(p.dim(), rng, 2.0);
      const SymMatrix g = embed(t, p, w);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j <= n; ++j)
          worst = std::max(worst, -build_a_ij(i, j, p.lambda, n).inner(g));
      for (std::size_t i = 0; i <= n; ++i)
        worst = std::max(worst, -build_a_iw(i, p.lambda, n).inner(g));
      const double min_eig = sym_eig(g).eigenvalues.front();
      worst = std::max(worst, -min_eig);
    }
    os << "worst violation " << worst;
    return worst <= 1e-9;
  });

  detail::run_check(results, "metamorphic-homogeneity", [&](std::ostream& os) {
    std::uniform_real_distribution<double> rr(0.1, 10.0);
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
      ViProblem p = rep % 2 == 0 ? testing::random_affine_problem(3, rng)
                                 : testing::random_piecewise_problem(rng);
      const double r = rr(rng);
      const ViProblem ps = scale_problem(p, r);
      const Trajectory t = run(p, 4), ts = run(ps, 4);
      Vector w = testing::random_vector(p.dim(), rng, 2.0);
      for (std::size_t k = 0; k <= 4; ++k)
        worst = std::max(worst,
                         norm2(sub(scaled(t.wt[k], 1.0 / r), ts.wt[k])) /
                             (1.0 + norm2(t.wt[k])));
      const double e1 = ergodic_gap(t, p, w) / h_norm_sq(p.h, sub(w, p.w0));
      const double e2 = ergodic_gap(ts, ps, scaled(w, 1.0 / r)) /
                        h_norm_sq(ps.h, sub(scaled(w, 1.0 / r), ps.w0));
      worst = std::max(worst, std::abs(e1 - e2) / (1.0 + std::abs(e1)));
    }
    os << "worst relative error " << worst;
    return worst <= 1e-9;
  });

  detail::run_check(results, "metamorphic-translation", [&](std::ostream& os) {
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
      ViProblem p = rep % 2 == 0 ? testing::random_affine_problem(3, rng)
                                 : testing::random_piecewise_problem(rng);
      const Vector shift = testing::random_vector(p.dim(), rng, 4.0);
      const ViProblem pt = translate_problem(p, shift);
      const Trajectory t = run(p, 4), tt = run(pt, 4);
      Vector w = testing::random_vector(p.dim(), rng, 2.0);
      for (std::size_t k = 0; k <= 4; ++k)
        worst = std::max(worst, norm2(sub(sub(t.wt[k], shift), tt.wt[k])) /
                                    (1.0 + norm2(t.wt[k])));
      const double e1 = ergodic_gap(t, p, w) / h_norm_sq(p.h, sub(w, p.w0));
      const double e2 = ergodic_gap(tt, pt, sub(w, shift)) /
                        h_norm_sq(pt.h, sub(sub(w, shift), pt.w0));
      worst = std::max(worst, std::abs(e1 - e2) / (1.0 + std::abs(e1)));
    }
    os << "worst relative error " << worst;
    return worst <= 1e-9;
  });

  detail::run_check(results, "rate-bounds-on-runs", [&](std::ostream& os) {
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
      ViProblem p = rep % 2 == 0 ? testing::random_affine_problem(3, rng)
                                 : testing::random_piecewise_problem(rng);
      const std::size_t n = 2 + rep % 5;
      const Trajectory t = run(p, n);
      for (const Vector& w : probe_grid(t, p)) {
        const double dist = h_norm_sq(p.h, sub(w, p.w0));
        const double gap = ergodic_gap(t, p, w);
        worst = std::max(worst, gap - bound_classic(n, p.lambda) * dist);
        worst = std::max(worst, gap - bound_optimal(n, p.lambda) * dist);
      }
    }
    os << "worst bound excess " << worst;
    return worst <= 1e-9;
  });

  detail::run_check(results, "proof-inequality-grid", [&](std::ostream& os) {
    std::vector<std::pair<double, double>> grid;
    for (int i = 0; i < 200; ++i)
      for (int j = 0; j < 200; ++j)
        grid.emplace_back(3.0 * i / 199.0, 3.0 * j / 199.0);
    for (double lambda : {0.1, 0.5, 1.0, 1.5, 1.9})
      for (std::size_t n = 1; n <= 20; ++n)
        if (!check_proof_inequality(lambda, n, grid)) {
          os << "violated at lambda=" << lambda << " N=" << n;
          return false;
        }
    os << "held on 200x200 grid for all (lambda, N)";
    return true;
  });

  detail::run_check(results, "telescoping-chain", [&](std::ostream& os) {
    for (int rep = 0; rep < 20; ++rep) {
      ViProblem p = rep % 2 == 0 ? testing::random_affine_problem(3, rng)
                                 : testing::random_piecewise_problem(rng);
      const Trajectory t = run(p, 3);
      const Vector w = testing::random_vector(p.dim(), rng, 2.0);
      if (!check_telescoping(t, p, w).all_hold) {
        os << "chain violated on random run " << rep;
        return false;
      }
    }
    os << "chain held on 20 random runs";
    return true;
  });

  detail::run_check(results, "certificate-closed-form", [&](std::ostream& os) {
    std::uniform_real_distribution<double> lam(0.2, 1.8), w0d(2.0, 20.0),
        frac(0.05, 0.95);
    std::uniform_int_distribution<std::size_t> nn(1, 10);
    double worst = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
      const std::size_t n = nn(rng);
      const double lambda = lam(rng), w0 = w0d(rng), delta = 0.2 * w0;
      const double c =
          frac(rng) * (w0 - delta) / (lambda * double(n) + 2.0);
      const auto cert = build_certificate(n, lambda, w0, delta, c);
      const Trajectory t = run(cert.problem(), n);
      for (std::size_t k = 0; k <= n; ++k)
        worst = std::max(worst,
                         std::abs(t.wt[k][0] - cert.wt_closed_form[k]));
      worst = std::max(worst, std::abs(certificate_ratio(cert, cert.w_star) -
                                       optimal_ratio(n, lambda)));
    }
    os << "worst discrepancy " << worst;
    return worst <= 1e-12;
  });

  detail::run_check(results, "certificate-case-scan", [&](std::ostream& os) {
    const auto cert = build_certificate(2, 1.5, 10.0, 1.0, 1.0);
    const auto scan = case_scan(cert);
    const double target = optimal_ratio(2, 1.5);
    os << "upper " << scan.max_upper << " at " << scan.arg_upper << ", middle "
       << scan.max_middle << ", lower " << scan.max_lower;
    return std::abs(scan.max_upper - target) <= 1e-4 &&
           std::abs(scan.arg_upper - cert.w_star) <= 2e-3 &&
           scan.max_middle <= target + 1e-6 && scan.max_lower < 0.0;
  });

  return results;
}

}  // namespace rppa
