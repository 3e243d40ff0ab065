#pragma once

#include "rppa/rppa.hpp"

namespace rppa {

struct COutOfRange : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// The one-dimensional lower-bound construction: the piecewise operator with
/// plateau value c, kink at delta, start w0 > delta, and c small enough that
/// the whole trajectory stays on the upper plateau. The ratio it achieves at
/// w_star = w0 - (lambda N + 2) c equals 1/(2(lambda N + 2)).
struct WorstCaseCertificate {
  std::size_t n_steps;
  double lambda;
  double w0;
  double delta;
  double c;
  std::vector<double> wt_closed_form;  // wt_k = w0 - c - k lambda c
  double ergodic_mean;                 // w0 - (lambda N + 2)/2 c
  double w_star;                       // w0 - (lambda N + 2) c
  double achieved_ratio;               // 1/(2(lambda N + 2))

  ViProblem problem() const {
    return ViProblem{Operator{Piecewise1D{c, delta}},
                     ConstraintSet{WholeSpace{1}}, SymMatrix::identity(1),
                     lambda, Vector{w0}};
  }
};

inline double optimal_ratio(std::size_t n_steps, double lambda) {
  return 1.0 / (2.0 * (lambda * double(n_steps) + 2.0));
}

inline WorstCaseCertificate build_certificate(std::size_t n_steps, double lambda,
                                              double w0, double delta, double c) {
  if (n_steps < 1) throw std::invalid_argument("build_certificate: N >= 1");
  if (lambda <= 0.0 || lambda >= 2.0)
    throw std::invalid_argument("build_certificate: lambda in (0,2)");
  if (!(w0 > delta && delta > 0.0))
    throw std::invalid_argument("build_certificate: require w0 > delta > 0");
  const double factor = lambda * double(n_steps) + 2.0;
  if (!(c > 0.0 && c < (w0 - delta) / factor))
    throw COutOfRange("build_certificate: c outside (0, (w0-delta)/(lambda N+2))");

  WorstCaseCertificate cert;
  cert.n_steps = n_steps;
  cert.lambda = lambda;
  cert.w0 = w0;
  cert.delta = delta;
  cert.c = c;
  cert.wt_closed_form.resize(n_steps + 1);
  for (std::size_t k = 0; k <= n_steps; ++k)
    cert.wt_closed_form[k] = w0 - c - double(k) * lambda * c;
  cert.ergodic_mean = w0 - 0.5 * factor * c;
  cert.w_star = w0 - factor * c;
  cert.achieved_ratio = 1.0 / (2.0 * factor);
  return cert;
}

/// Certificate parameters near the admissibility boundary, where the
/// construction is most informative.
inline WorstCaseCertificate default_certificate(std::size_t n_steps,
                                                double lambda) {
  const double w0 = 10.0, delta = 1.0;
  const double c = 0.9 * (w0 - delta) / (lambda * double(n_steps) + 2.0);
  return build_certificate(n_steps, lambda, w0, delta, c);
}

/// The performance ratio (wbar_N - w)^T F(w) / ||w - w0||^2 at probe w.
inline double certificate_ratio(const WorstCaseCertificate& cert, double w) {
  const Piecewise1D f{cert.c, cert.delta};
  const double num = (cert.ergodic_mean - w) * f.eval(w);
  const double den = (w - cert.w0) * (w - cert.w0);
  return num / den;
}

struct CaseScanResult {
  double max_upper;   // over w > delta (w != w0)
  double arg_upper;
  double max_middle;  // over w in [-delta, delta]
  double arg_middle;
  double max_lower;   // over w < -delta
  double arg_lower;
};

/// Grid search of the ratio over the three branches of the operator. The
/// upper window is chosen to contain w_star; w = w0 is excluded.
inline CaseScanResult case_scan(const WorstCaseCertificate& cert,
                                double step_rel = 1e-4) {
  const double step = step_rel * cert.w0;
  const double factor = cert.lambda * double(cert.n_steps) + 2.0;

  auto scan = [&](double lo, double hi, double& best_w) {
    double best = -std::numeric_limits<double>::infinity();
    best_w = lo;
    for (double w = lo; w <= hi + 0.5 * step; w += step) {
      if (std::abs(w - cert.w0) < 0.5 * step) continue;  // excluded point
      const double r = certificate_ratio(cert, std::min(w, hi));
      if (r > best) {
        best = r;
        best_w = std::min(w, hi);
      }
    }
    return best;
  };

  CaseScanResult res{};
  const double upper_lo = std::max(cert.delta + step,
                                   cert.w0 - 3.0 * factor * cert.c);
  res.max_upper = scan(upper_lo, cert.w0 - step, res.arg_upper);
  res.max_middle = scan(-cert.delta, cert.delta, res.arg_middle);
  res.max_lower = scan(-3.0 * cert.w0, -cert.delta - step, res.arg_lower);
  return res;
}

}  // namespace rppa
