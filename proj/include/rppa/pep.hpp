#pragma once

#include <iomanip>
#include <ostream>
#include <tuple>

#include "rppa/rppa.hpp"
#include "rppa/sdp.hpp"

namespace rppa {

// Basis convention for the Gram matrix of order N+3 (0-based slots):
// slot k in [0,N] carries wt_k, slot N+1 carries w, slot N+2 carries F(w).

/// Coefficients of w_k over the wt basis under the w_0 = 0 convention:
/// w_k = sum_{i<k} (1-lambda)^{k-1-i} lambda wt_i. Length N+3; the w and
/// F(w) slots are zero.
inline Vector coeffs_wk(std::size_t k, double lambda, std::size_t n_steps) {
  if (k > n_steps) throw std::invalid_argument("coeffs_wk: k out of range");
  Vector c(n_steps + 3, 0.0);
  double pow = lambda;  // (1-lambda)^{k-1-i} * lambda, walking i downward
  for (std::size_t ii = k; ii-- > 0;) {
    c[ii] = pow;
    pow *= 1.0 - lambda;
  }
  return c;
}

namespace detail {

inline Vector unit(std::size_t i, std::size_t dim) {
  Vector e(dim, 0.0);
  e[i] = 1.0;
  return e;
}

}  // namespace detail

/// Monotonicity constraint between steps i < j:
/// tr(G A_ij) = <wt_j - wt_i, H(w_j - wt_j) - H(w_i - wt_i)>.
inline SymMatrix build_a_ij(std::size_t i, std::size_t j, double lambda,
                            std::size_t n_steps) {
  if (!(i < j && j <= n_steps))
    throw std::invalid_argument("build_a_ij: require 0 <= i < j <= N");
  const std::size_t dim = n_steps + 3;
  Vector a = coeffs_wk(j, lambda, n_steps);
  a[j] -= 1.0;
  const Vector ci = coeffs_wk(i, lambda, n_steps);
  for (std::size_t s = 0; s < dim; ++s) a[s] -= ci[s];
  a[i] += 1.0;
  Vector b(dim, 0.0);
  b[j] = 1.0;
  b[i] = -1.0;
  return SymMatrix::sym_outer(a, b);
}

/// Monotonicity constraint between step i and the probe point w:
/// tr(G A_iw) = <wt_i - w, H(w_i - wt_i) - F(w)>.
inline SymMatrix build_a_iw(std::size_t i, double lambda, std::size_t n_steps) {
  if (i > n_steps) throw std::invalid_argument("build_a_iw: i out of range");
  const std::size_t dim = n_steps + 3;
  Vector a = coeffs_wk(i, lambda, n_steps);
  a[i] -= 1.0;
  a[dim - 1] -= 1.0;  // -F(w)
  Vector b(dim, 0.0);
  b[i] = 1.0;
  b[dim - 2] = -1.0;  // -w
  return SymMatrix::sym_outer(a, b);
}

/// Normalization matrix: tr(G A_w) = ||w - w_0||_H^2 under the w_0 = 0
/// convention; a single 1 at (N+1, N+1).
inline SymMatrix build_a_w(std::size_t n_steps) {
  SymMatrix m(n_steps + 3);
  m.set(n_steps + 1, n_steps + 1, 1.0);
  return m;
}

/// Symmetrized objective: tr(G C_sym) = (w - wbar_N)^T F(w).
inline SymMatrix build_c(std::size_t n_steps) {
  const std::size_t dim = n_steps + 3;
  Vector a(dim, 0.0);
  a[dim - 2] = 1.0;
  for (std::size_t k = 0; k <= n_steps; ++k) a[k] = -1.0 / double(n_steps + 1);
  return SymMatrix::sym_outer(a, detail::unit(dim - 1, dim));
}

struct PepInstance {
  std::size_t n_steps;
  double lambda;
  std::size_t dim;
  SymMatrix objective;  // C_sym
  std::vector<std::pair<SymMatrix, std::string>> ineq_constraints;
  SymMatrix eq_constraint;  // A_w, rhs = 1
};

/// Assembles the worst-case SDP for (N, lambda): N(N+1)/2 pairwise
/// constraints, N+1 probe constraints, one normalization equality.
inline PepInstance assemble(std::size_t n_steps, double lambda) {
  if (n_steps < 1) throw std::invalid_argument("assemble: N must be >= 1");
  if (lambda <= 0.0 || lambda >= 2.0)
    throw std::invalid_argument("assemble: lambda must lie in (0,2)");
  PepInstance inst{n_steps, lambda, n_steps + 3, build_c(n_steps), {},
                   build_a_w(n_steps)};
  inst.ineq_constraints.reserve(n_steps * (n_steps + 1) / 2 + n_steps + 1);
  for (std::size_t i = 0; i < n_steps; ++i)
    for (std::size_t j = i + 1; j <= n_steps; ++j)
      inst.ineq_constraints.emplace_back(
          build_a_ij(i, j, lambda, n_steps),
          "A_" + std::to_string(i) + "_" + std::to_string(j));
  for (std::size_t i = 0; i <= n_steps; ++i)
    inst.ineq_constraints.emplace_back(build_a_iw(i, lambda, n_steps),
                                       "A_" + std::to_string(i) + "_w");
  return inst;
}

/// Embeds a recorded trajectory plus probe point as the Gram matrix
/// G(i,j) = <P_i, P_j> for P = [H^1/2 wt_0 ... H^1/2 wt_N, H^1/2 w, H^-1/2 F(w)]
/// after translating every point by -w_0, which realizes the w_0 = 0
/// convention the constraint matrices are written in. All constraint traces
/// are invariant under that common shift; the normalization trace becomes
/// ||w - w_0||_H^2.
inline SymMatrix embed(const Trajectory& t, const ViProblem& p, const Vector& w) {
  const std::size_t n_steps = t.n_steps;
  const std::size_t dim = n_steps + 3;
  if (w.size() != p.dim()) throw DimensionMismatch("embed: probe dim mismatch");

  std::vector<Vector> pts(n_steps + 2);
  for (std::size_t k = 0; k <= n_steps; ++k) pts[k] = sub(t.wt[k], t.w[0]);
  pts[n_steps + 1] = sub(w, t.w[0]);
  const Vector fw = p.f.evaluate(w);
  const Vector hinv_fw = cholesky(p.h).solve(fw);

  SymMatrix g(dim);
  for (std::size_t i = 0; i < n_steps + 2; ++i) {
    for (std::size_t j = 0; j <= i; ++j)
      g.set(i, j, h_inner(p.h, pts[i], pts[j]));
    g.set(i, dim - 1, dot(pts[i], fw));
  }
  g.set(dim - 1, dim - 1, dot(fw, hinv_fw));
  return g;
}

inline SdpProblem to_sdp_problem(const PepInstance& inst) {
  SdpProblem p;
  p.dim = inst.dim;
  p.pep_n = inst.n_steps;
  p.pep_lambda = inst.lambda;
  p.objective = inst.objective;
  for (const auto& [a, label] : inst.ineq_constraints)
    p.constraints.push_back({a, Sense::Ge, 0.0});
  p.constraints.push_back({inst.eq_constraint, Sense::Eq, 1.0});
  return p;
}

struct PepSolution {
  SymMatrix g;
  double eps;  // -min tr(G C_sym)
  std::size_t iterations;
  double primal_residual;
  double dual_residual;
};

/// Solves the assembled SDP; eps is the negated optimum. Throws SolverFailed
/// if the splitting scheme stops at the iteration cap.
inline PepSolution solve_pep(const PepInstance& inst, const SdpConfig& cfg = {}) {
  const SdpProblem sdp = to_sdp_problem(inst);
  SdpResult res = solve_sdp(sdp, cfg);
  if (res.status != SdpStatus::Optimal)
    throw SolverFailed("solve_pep: iteration cap reached", res.primal_residual,
                       res.dual_residual);
  return {std::move(res.g), -res.objective_value, res.iterations,
          res.primal_residual, res.dual_residual};
}

/// Plain-text triplet export (one line per nonzero: row col value, upper
/// triangle of each symmetric matrix) so external solvers can cross-check.
inline void write_sdp_triplets(std::ostream& out, const PepInstance& inst) {
  out << std::setprecision(17);
  const auto dump = [&](const SymMatrix& m) {
    std::vector<std::tuple<std::size_t, std::size_t, double>> nz;
    for (std::size_t i = 0; i < m.order(); ++i)
      for (std::size_t j = i; j < m.order(); ++j)
        if (m(i, j) != 0.0) nz.emplace_back(i, j, m(i, j));
    out << "nnz " << nz.size() << "\n";
    for (const auto& [i, j, v] : nz) out << i << " " << j << " " << v << "\n";
  };
  out << "pep-sdp 1\n";
  out << "dim " << inst.dim << "\n";
  out << "N " << inst.n_steps << "\n";
  out << "lambda " << inst.lambda << "\n";
  out << "objective ";
  dump(inst.objective);
  for (const auto& [a, label] : inst.ineq_constraints) {
    out << "# " << label << "\n";
    out << "constraint ge rhs 0 ";
    dump(a);
  }
  out << "# A_w\n";
  out << "constraint eq rhs 1 ";
  dump(inst.eq_constraint);
  out << "end\n";
}

}  // namespace rppa
