#pragma once

#include "rppa/rppa.hpp"

namespace rppa {

namespace detail {
inline void require_rate_params(std::size_t n_steps, double lambda,
                                const char* who) {
  if (n_steps < 1) throw std::invalid_argument(std::string(who) + ": N >= 1");
  if (lambda <= 0.0 || lambda >= 2.0)
    throw std::invalid_argument(std::string(who) + ": lambda in (0,2)");
}
}  // namespace detail

/// The classic ergodic factor 1/(2 lambda (N+1)).
inline double bound_classic(std::size_t n_steps, double lambda) {
  detail::require_rate_params(n_steps, lambda, "bound_classic");
  return 1.0 / (2.0 * lambda * double(n_steps + 1));
}

/// The optimal ergodic factor 1/(2 (lambda N + 2)).
inline double bound_optimal(std::size_t n_steps, double lambda) {
  detail::require_rate_params(n_steps, lambda, "bound_optimal");
  return 1.0 / (2.0 * (lambda * double(n_steps) + 2.0));
}

struct RateReport {
  std::size_t n_steps;
  double lambda;
  double eps_pep;
  double classic;
  double optimal;
  double lower_example;  // equals `optimal`; kept as a separate column
  double abs_gap;        // |eps_pep - optimal|
  double rel_gap;        // abs_gap / optimal

  static RateReport make(std::size_t n, double lambda, double eps) {
    RateReport r;
    r.n_steps = n;
    r.lambda = lambda;
    r.eps_pep = eps;
    r.classic = bound_classic(n, lambda);
    r.optimal = bound_optimal(n, lambda);
    r.lower_example = r.optimal;
    r.abs_gap = std::abs(eps - r.optimal);
    r.rel_gap = r.abs_gap / r.optimal;
    return r;
  }
};

/// The quadratic slack inequality behind the optimal rate:
///   A^2 + ((2-lambda)/(lambda N)) B^2 >= (2-lambda)/(lambda N + 2)
/// for A, B >= 0 with A + B >= 1.
inline double proof_quadratic(double a, double b, double lambda,
                              std::size_t n_steps) {
  return a * a + (2.0 - lambda) / (lambda * double(n_steps)) * b * b;
}

inline double proof_quadratic_rhs(double lambda, std::size_t n_steps) {
  return (2.0 - lambda) / (lambda * double(n_steps) + 2.0);
}

/// Minimizer of the B-quadratic on the A + B = 1 segment.
inline double proof_minimizer_b(double lambda, std::size_t n_steps) {
  return 1.0 / (1.0 + (2.0 - lambda) / (lambda * double(n_steps)));
}

/// Checks the slack inequality at every sample (the analytic minimizer is
/// always appended), with slack tolerance -1e-12.
inline bool check_proof_inequality(double lambda, std::size_t n_steps,
                                   std::vector<std::pair<double, double>> samples,
                                   double tol = 1e-12) {
  detail::require_rate_params(n_steps, lambda, "check_proof_inequality");
  const double bstar = proof_minimizer_b(lambda, n_steps);
  samples.emplace_back(1.0 - bstar, bstar);
  const double rhs = proof_quadratic_rhs(lambda, n_steps);
  for (const auto& [a, b] : samples) {
    if (a < 0.0 || b < 0.0 || a + b < 1.0) continue;  // outside the domain
    if (proof_quadratic(a, b, lambda, n_steps) - rhs < -tol) return false;
  }
  return true;
}

/// Per-step record of the optimal-rate proof chain at one trajectory step.
struct TelescopingStep {
  double gap_term;       // <wt_k - w, F(w)>
  double mono_term;      // <wt_k - w, F(wt_k)>
  double ppa_term;       // (w - wt_k)^T H (wt_k - w_k)
  double identity_term;  // same quantity via the three-square expansion
};

/// Aggregated ledger of the proof chain over a whole run.
///
/// The summed per-step bound is relaxed in three moves: Cauchy-Schwarz over
/// the N+1 step norms, the triangle inequality down to ||w_{N+1} - w_0||,
/// and the quadratic slack inequality in the normalized ratios (A, B). Note
/// the Cauchy-Schwarz denominator here is N+1, the number of summands; with
/// N instead, the relaxation is numerically violated on the tight
/// piecewise-operator instance while the end constants are unchanged.
struct TelescopingLedger {
  std::vector<TelescopingStep> steps;
  double sum_gap;         // (N+1) x ergodic gap
  double sum_step_bound;  // sum of per-step telescoped bounds
  double after_cauchy;
  double after_triangle;
  double ratio_a;         // ||w - w_{N+1}||_H / ||w - w_0||_H
  double ratio_b;         // ||w_{N+1} - w_0||_H / ||w - w_0||_H
  double final_bound;     // (N+1)/(2(lambda N + 2)) ||w - w_0||_H^2
  bool degenerate;        // w == w_0: normalized ratios undefined
  bool all_hold;
};

inline TelescopingLedger check_telescoping(const Trajectory& t,
                                           const ViProblem& p, const Vector& w,
                                           double tol = 1e-9) {
  const std::size_t n = t.n_steps;
  const double lambda = t.lambda;
  TelescopingLedger led{};
  led.steps.reserve(n + 1);
  const Vector fw = p.f.evaluate(w);
  const double dist0_sq = h_norm_sq(p.h, sub(w, t.w[0]));
  const double scale = std::max(dist0_sq, 1.0);
  led.all_hold = true;

  double sum_bound = 0.0;
  double sum_step_norms = 0.0;
  double sum_step_norms_sq = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    TelescopingStep s{};
    const Vector diff = sub(t.wt[k], w);
    s.gap_term = dot(diff, fw);
    s.mono_term = dot(diff, p.f.evaluate(t.wt[k]));
    const Vector step = sub(t.wt[k], t.w[k]);
    s.ppa_term = -h_inner(p.h, diff, step);
    s.identity_term =
        h_inner(p.h, sub(w, t.w[k]), step) - h_norm_sq(p.h, step);

    const Vector dk = sub(t.w[k + 1], t.w[k]);
    const double dk_sq = h_norm_sq(p.h, dk);
    sum_step_norms += std::sqrt(dk_sq);
    sum_step_norms_sq += dk_sq;
    sum_bound += 1.0 / (2.0 * lambda) *
                     (h_norm_sq(p.h, sub(w, t.w[k])) -
                      h_norm_sq(p.h, sub(w, t.w[k + 1])) + dk_sq) -
                 dk_sq / (lambda * lambda);

    if (s.gap_term - s.mono_term > tol * scale) led.all_hold = false;
    if (s.mono_term - s.ppa_term > tol * scale) led.all_hold = false;
    if (std::abs(s.ppa_term - s.identity_term) > tol * scale)
      led.all_hold = false;
    led.steps.push_back(s);
  }

  const double half_lam = 1.0 / (2.0 * lambda);
  const double slack_coef = (2.0 - lambda) / (2.0 * lambda * lambda);
  const double tel = half_lam * (dist0_sq - h_norm_sq(p.h, sub(w, t.w[n + 1])));

  led.sum_gap = double(n + 1) * ergodic_gap(t, p, w);
  led.sum_step_bound = tel - slack_coef * sum_step_norms_sq;
  led.after_cauchy =
      tel - slack_coef * sum_step_norms * sum_step_norms / double(n + 1);
  const double end_dist_sq = h_norm_sq(p.h, sub(t.w[n + 1], t.w[0]));
  led.after_triangle = tel - slack_coef * end_dist_sq / double(n + 1);
  led.final_bound =
      double(n + 1) / (2.0 * (lambda * double(n) + 2.0)) * dist0_sq;

  if (led.sum_gap - led.sum_step_bound > tol * scale) led.all_hold = false;
  if (led.sum_step_bound - led.after_cauchy > tol * scale) led.all_hold = false;
  if (led.after_cauchy - led.after_triangle > tol * scale) led.all_hold = false;

  led.degenerate = dist0_sq < 1e-24;
  if (!led.degenerate) {
    const double dist0 = std::sqrt(dist0_sq);
    led.ratio_a = std::sqrt(h_norm_sq(p.h, sub(w, t.w[n + 1]))) / dist0;
    led.ratio_b = std::sqrt(end_dist_sq) / dist0;
    // A + B >= 1 and the slack quadratic with the N+1 coefficient.
    if (led.ratio_a + led.ratio_b < 1.0 - tol) led.all_hold = false;
    const double quad = led.ratio_a * led.ratio_a +
                        (2.0 - lambda) / (lambda * double(n + 1)) *
                            led.ratio_b * led.ratio_b;
    if (quad - proof_quadratic_rhs(lambda, n) < -tol) led.all_hold = false;
    if (led.after_triangle - led.final_bound > tol * scale)
      led.all_hold = false;
  }
  if (led.sum_gap - led.final_bound > tol * scale) led.all_hold = false;
  return led;
}

}  // namespace rppa
