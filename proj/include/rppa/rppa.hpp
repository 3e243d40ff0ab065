#pragma once

#include <random>

#include "rppa/operators.hpp"

namespace rppa {

/// Full iterate history of one RPPA run:
/// w has length N+2 (w_0 .. w_{N+1}), wt has length N+1 (wt_0 .. wt_N).
struct Trajectory {
  std::vector<Vector> w;
  std::vector<Vector> wt;
  Vector ergodic_mean;  // (1/(N+1)) sum_k wt_k
  double lambda;
  std::size_t n_steps;  // N
};

/// Runs RPPA for N+1 PPA steps:
///   wt_k from the PPA step, then w_{k+1} = w_k + lambda (wt_k - w_k).
inline Trajectory run(const ViProblem& p, std::size_t n_steps) {
  if (n_steps < 1) throw std::invalid_argument("run: N must be >= 1");
  Trajectory t;
  t.lambda = p.lambda;
  t.n_steps = n_steps;
  t.w.reserve(n_steps + 2);
  t.wt.reserve(n_steps + 1);
  t.w.push_back(p.w0);
  Vector mean(p.dim(), 0.0);
  for (std::size_t k = 0; k <= n_steps; ++k) {
    const Vector& wk = t.w.back();
    Vector wtk = ppa_step(p, wk);
    Vector next(wk.size());
    for (std::size_t i = 0; i < wk.size(); ++i) {
      next[i] = wk[i] + p.lambda * (wtk[i] - wk[i]);
      mean[i] += wtk[i];
    }
    t.wt.push_back(std::move(wtk));
    t.w.push_back(std::move(next));
  }
  t.ergodic_mean = scaled(mean, 1.0 / double(n_steps + 1));
  return t;
}

/// The ergodic performance quantity (wbar_N - w)^T F(w).
inline double ergodic_gap(const Trajectory& t, const ViProblem& p, const Vector& w) {
  return dot(sub(t.ergodic_mean, w), p.f.evaluate(w));
}

/// Homogeneity map: G(u) = F(Ru)/R, Omega' = Omega/R, start w0/R.
inline ViProblem scale_problem(const ViProblem& p, double r) {
  if (r <= 0.0) throw std::invalid_argument("scale_problem: R must be > 0");
  Operator g = p.f;
  if (auto* a = std::get_if<AffineOperator>(&g.v)) {
    for (double& qi : a->q) qi /= r;
  } else if (auto* pw = std::get_if<Piecewise1D>(&g.v)) {
    pw->c /= r;
    pw->delta /= r;
    pw->center /= r;
  }
  ConstraintSet omega = p.omega;
  if (auto* b = std::get_if<Box>(&omega.v)) {
    for (double& v : b->lower) v /= r;
    for (double& v : b->upper) v /= r;
  }
  return ViProblem(std::move(g), std::move(omega), p.h, p.lambda,
                   scaled(p.w0, 1.0 / r));
}

/// Translation map: G(u) = F(u + shift), Omega' = Omega - shift, start w0 - shift.
inline ViProblem translate_problem(const ViProblem& p, const Vector& shift) {
  if (shift.size() != p.dim())
    throw DimensionMismatch("translate_problem: shift dim mismatch");
  Operator g = p.f;
  if (auto* a = std::get_if<AffineOperator>(&g.v)) {
    // F(u+s) = M u + (q + M s)
    for (std::size_t i = 0; i < a->dim; ++i)
      for (std::size_t j = 0; j < a->dim; ++j)
        a->q[i] += a->m[i * a->dim + j] * shift[j];
  } else if (auto* pw = std::get_if<Piecewise1D>(&g.v)) {
    pw->center -= shift[0];
  }
  ConstraintSet omega = p.omega;
  if (auto* b = std::get_if<Box>(&omega.v)) {
    for (std::size_t i = 0; i < b->lower.size(); ++i) {
      b->lower[i] -= shift[i];
      b->upper[i] -= shift[i];
    }
  }
  return ViProblem(std::move(g), std::move(omega), p.h, p.lambda,
                   sub(p.w0, shift));
}

/// Deterministic probe grid for bound checks: w0, the ergodic mean, every
/// wt_k, and `extra` seeded pseudo-random points inside Omega within a ball
/// of radius 3 ||w0 - wt_N|| around w0.
inline std::vector<Vector> probe_grid(const Trajectory& t, const ViProblem& p,
                                      std::size_t extra = 50,
                                      unsigned seed = 20240) {
  std::vector<Vector> probes;
  probes.push_back(p.omega.project(p.w0));
  probes.push_back(p.omega.project(t.ergodic_mean));
  for (const auto& wtk : t.wt) probes.push_back(p.omega.project(wtk));

  double radius = 3.0 * norm2(sub(p.w0, t.wt.back()));
  if (radius <= 0.0) radius = 1.0;
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (std::size_t s = 0; s < extra; ++s) {
    Vector w(p.dim());
    for (double& v : w) v = unif(rng);
    probes.push_back(p.omega.project(axpy(radius, w, p.w0)));
  }
  return probes;
}

}  // namespace rppa
