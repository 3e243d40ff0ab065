#pragma once

#include <istream>
#include <sstream>

#include "rppa/linalg.hpp"

namespace rppa {

enum class Sense { Ge, Eq };

struct SdpConstraint {
  SymMatrix a;
  Sense sense;
  double rhs;
};

struct SdpProblem {
  std::size_t dim = 0;
  SymMatrix objective;
  std::vector<SdpConstraint> constraints;
  // Carried through the triplet format for provenance; unused by the solver.
  std::size_t pep_n = 0;
  double pep_lambda = 0.0;
};

struct SdpConfig {
  double rho = 1.0;
  std::size_t max_iter = 200000;
  double tol = 1e-8;
  double over_relax = 1.6;
};

enum class SdpStatus { Optimal, IterationCap };

struct SdpResult {
  SymMatrix g;
  double objective_value = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  std::size_t iterations = 0;
  SdpStatus status = SdpStatus::IterationCap;
};

struct DegenerateConstraints : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverFailed : std::runtime_error {
  double primal_residual;
  double dual_residual;
  SolverFailed(const std::string& what, double rp, double rd)
      : std::runtime_error(what + " (primal " + std::to_string(rp) + ", dual " +
                           std::to_string(rd) + ")"),
        primal_residual(rp),
        dual_residual(rd) {}
};

/// Worst scaled constraint violation of a candidate G, used to pick the
/// reported iterate and by tests.
inline double max_violation(const SdpProblem& p, const SymMatrix& g) {
  double worst = 0.0;
  for (const auto& con : p.constraints) {
    const double t = con.a.inner(g);
    const double scale = 1.0 + std::abs(con.rhs);
    if (con.sense == Sense::Eq)
      worst = std::max(worst, std::abs(t - con.rhs) / scale);
    else
      worst = std::max(worst, std::max(0.0, con.rhs - t) / scale);
  }
  return worst;
}

/// Dense standard-form SDP solver:
///   min <C,G>  s.t.  <A_l,G> {>=,=} b_l,  G >= 0 (PSD)
/// via ADMM with over-relaxation. Inequalities carry slack variables; the
/// affine step is a projection through a pre-factorized constraint Gram
/// system, the cone step is a PSD projection, both followed by a dual update.
/// Constraints are rescaled to unit Frobenius norm up front.
/// Deterministic: fixed evaluation order, no randomization.
inline SdpResult solve_sdp(const SdpProblem& prob, const SdpConfig& cfg = {}) {
  const std::size_t n = prob.dim;
  const std::size_t m = prob.constraints.size();
  if (m == 0) throw std::invalid_argument("solve_sdp: no constraints");
  if (prob.objective.order() != n)
    throw DimensionMismatch("solve_sdp: objective order mismatch");

  // Scale each constraint to unit Frobenius norm; keep only the nonzeros
  // (PEP constraint matrices are mostly zero).
  struct SparseCon {
    std::vector<std::pair<std::size_t, double>> nz;  // index into raw(), value
    double inner(const SymMatrix& x) const {
      double s = 0.0;
      for (const auto& [idx, v] : nz) s += v * x.raw()[idx];
      return s;
    }
    void axpy_into(double alpha, SymMatrix& x) const {
      for (const auto& [idx, v] : nz) x.raw()[idx] += alpha * v;
    }
  };
  std::vector<SparseCon> a_hat(m);
  Vector b_hat(m);
  std::vector<int> slack_of(m, -1);
  std::size_t n_slack = 0;
  for (std::size_t l = 0; l < m; ++l) {
    const auto& con = prob.constraints[l];
    if (con.a.order() != n)
      throw DimensionMismatch("solve_sdp: constraint order mismatch");
    const double fro = con.a.frobenius_norm();
    if (fro < 1e-14)
      throw DegenerateConstraints("solve_sdp: zero constraint matrix");
    const auto& raw = con.a.raw();
    for (std::size_t idx = 0; idx < raw.size(); ++idx)
      if (raw[idx] != 0.0) a_hat[l].nz.emplace_back(idx, raw[idx] / fro);
    b_hat[l] = con.rhs / fro;
    if (con.sense == Sense::Ge) slack_of[l] = int(n_slack++);
  }

  // Constraint Gram (with slack contributions on the diagonal), factored once.
  SymMatrix gram(m);
  {
    SymMatrix scratch(n);
    for (std::size_t k = 0; k < m; ++k) {
      for (double& v : scratch.raw()) v = 0.0;
      a_hat[k].axpy_into(1.0, scratch);
      for (std::size_t l = k; l < m; ++l) {
        double v = a_hat[l].inner(scratch);
        if (l == k && slack_of[l] >= 0) v += 1.0;
        gram.set(l, k, v);
      }
    }
  }
  CholeskyFactor gram_chol = [&] {
    try {
      return cholesky(gram);
    } catch (const NotPositiveDefinite&) {
      throw DegenerateConstraints("solve_sdp: constraint Gram not factorizable");
    }
  }();

  const double alpha = cfg.over_relax;
  double rho = cfg.rho;

  // PSD projection warm-started on the previous iteration's eigenbasis: the
  // iterate changes slowly, so conjugating by the last Q leaves a nearly
  // diagonal matrix and the Jacobi sweeps terminate almost immediately.
  std::vector<double> q_basis(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) q_basis[i * n + i] = 1.0;
  std::vector<double> work_a(n * n), work_b(n * n), work_q(n * n);
  auto project_psd_warm = [&](const SymMatrix& min) {
    const auto& mr = min.raw();
    // work_b = Q^T M Q via work_a = M Q
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double sacc = 0.0;
        for (std::size_t k = 0; k < n; ++k)
          sacc += mr[i * n + k] * q_basis[k * n + j];
        work_a[i * n + j] = sacc;
      }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double sacc = 0.0;
        for (std::size_t k = 0; k < n; ++k)
          sacc += q_basis[k * n + i] * work_a[k * n + j];
        work_b[i * n + j] = sacc;
      }
    // Symmetrize against roundoff, then finish diagonalizing.
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) {
        const double avg = 0.5 * (work_b[i * n + j] + work_b[j * n + i]);
        work_b[i * n + j] = avg;
        work_b[j * n + i] = avg;
      }
    for (std::size_t i = 0; i < n * n; ++i) work_q[i] = 0.0;
    for (std::size_t i = 0; i < n; ++i) work_q[i * n + i] = 1.0;
    const double thresh = 1e-12 * std::max(min.frobenius_norm(), 1e-300);
    detail::jacobi_sweeps(work_b, work_q, n, thresh);
    // q_basis <- Q * Q_rot
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double sacc = 0.0;
        for (std::size_t k = 0; k < n; ++k)
          sacc += q_basis[i * n + k] * work_q[k * n + j];
        work_a[i * n + j] = sacc;
      }
    q_basis.swap(work_a);
    // Reassemble with negative eigenvalues clamped.
    SymMatrix out(n);
    auto& outr = out.raw();
    for (std::size_t k = 0; k < n; ++k) {
      const double lam = work_b[k * n + k];
      if (lam <= 0.0) continue;
      for (std::size_t i = 0; i < n; ++i) {
        const double qik = lam * q_basis[i * n + k];
        if (qik == 0.0) continue;
        for (std::size_t j = 0; j <= i; ++j)
          outr[i * n + j] += qik * q_basis[j * n + k];
      }
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) outr[i * n + j] = outr[j * n + i];
    return out;
  };

  SymMatrix z(n), u(n), x(n), x_relaxed(n);
  Vector t(n_slack, 0.0), v_dual(n_slack, 0.0);
  Vector s(n_slack, 0.0), s_relaxed(n_slack, 0.0);
  Vector resid(m), nu(m);

  SymMatrix z_avg(n);
  std::size_t avg_count = 0;

  double rp = 0.0, rd = 0.0;
  std::size_t iter = 0;
  bool converged = false;

  for (iter = 1; iter <= cfg.max_iter; ++iter) {
    // Affine step: project z - u - C/rho (and slack analogue) onto the
    // constraint subspace through the normal equations.
    x = z;
    x.axpy(-1.0, u);
    x.axpy(-1.0 / rho, prob.objective);
    for (std::size_t j = 0; j < n_slack; ++j) s[j] = t[j] - v_dual[j];

    for (std::size_t l = 0; l < m; ++l) {
      double lhs = a_hat[l].inner(x);
      if (slack_of[l] >= 0) lhs -= s[slack_of[l]];
      resid[l] = b_hat[l] - lhs;
    }
    nu = gram_chol.solve(resid);
    for (std::size_t l = 0; l < m; ++l) {
      a_hat[l].axpy_into(nu[l], x);
      if (slack_of[l] >= 0) s[slack_of[l]] -= nu[l];
    }

    // Over-relaxation.
    x_relaxed = x;
    x_relaxed *= alpha;
    x_relaxed.axpy(1.0 - alpha, z);
    for (std::size_t j = 0; j < n_slack; ++j)
      s_relaxed[j] = alpha * s[j] + (1.0 - alpha) * t[j];

    // Cone step.
    SymMatrix z_prev = z;
    Vector t_prev = t;
    SymMatrix z_in = x_relaxed;
    z_in.axpy(1.0, u);
    z = project_psd_warm(z_in);
    for (std::size_t j = 0; j < n_slack; ++j)
      t[j] = std::max(s_relaxed[j] + v_dual[j], 0.0);

    // Dual update (scaled form).
    u.axpy(1.0, x_relaxed);
    u.axpy(-1.0, z);
    for (std::size_t j = 0; j < n_slack; ++j) v_dual[j] += s_relaxed[j] - t[j];

    z_avg.axpy(1.0, z);
    ++avg_count;

    // Scaled residuals.
    double pr = 0.0, du = 0.0, xn = 0.0, zn = 0.0, un = 0.0;
    {
      SymMatrix d = x;
      d.axpy(-1.0, z);
      pr = d.frobenius_norm();
      d = z;
      d.axpy(-1.0, z_prev);
      du = d.frobenius_norm();
      xn = x.frobenius_norm();
      zn = z.frobenius_norm();
      un = u.frobenius_norm();
    }
    for (std::size_t j = 0; j < n_slack; ++j) {
      pr = std::hypot(pr, s[j] - t[j]);
      du = std::hypot(du, t[j] - t_prev[j]);
      un = std::hypot(un, v_dual[j]);
    }
    rp = pr / (1.0 + std::max(xn, zn));
    rd = rho * du / (1.0 + rho * un);
    if (rp <= cfg.tol && rd <= cfg.tol) {
      converged = true;
      break;
    }

    // Deterministic residual balancing; dual variables are rescaled so the
    // unscaled multipliers are preserved.
    if (iter % 50 == 0 && iter < cfg.max_iter / 2) {
      double factor = 1.0;
      if (rp > 5.0 * rd)
        factor = 2.0;
      else if (rd > 5.0 * rp)
        factor = 0.5;
      if (factor != 1.0 && rho * factor >= 1e-4 && rho * factor <= 1e4) {
        rho *= factor;
        u *= 1.0 / factor;
        for (double& vj : v_dual) vj /= factor;
      }
    }
  }
  if (!converged) iter = cfg.max_iter;

  // Report whichever of the last and the averaged PSD iterate is more
  // feasible for the original constraints.
  z_avg *= 1.0 / double(std::max<std::size_t>(avg_count, 1));
  const SymMatrix& pick =
      (max_violation(prob, z) <= max_violation(prob, z_avg)) ? z : z_avg;

  SdpResult res;
  res.g = pick;
  res.objective_value = prob.objective.inner(pick);
  res.primal_residual = rp;
  res.dual_residual = rd;
  res.iterations = iter;
  res.status = converged ? SdpStatus::Optimal : SdpStatus::IterationCap;
  return res;
}

/// Reads the plain-text triplet format produced by write_sdp_triplets().
inline SdpProblem read_sdp_triplets(std::istream& in) {
  SdpProblem p;
  std::string line;
  auto fail = [](const std::string& why) {
    throw std::runtime_error("read_sdp_triplets: " + why);
  };
  auto read_entries = [&](SymMatrix& mat, std::size_t nnz) {
    for (std::size_t k = 0; k < nnz; ++k) {
      if (!std::getline(in, line)) fail("truncated entry list");
      std::istringstream ls(line);
      std::size_t i, j;
      double val;
      if (!(ls >> i >> j >> val)) fail("bad entry line: " + line);
      mat.set(i, j, val);
    }
  };

  if (!std::getline(in, line) || line.rfind("pep-sdp", 0) != 0)
    fail("missing pep-sdp header");
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "end") break;
    if (key == "dim") {
      ls >> p.dim;
    } else if (key == "N") {
      ls >> p.pep_n;
    } else if (key == "lambda") {
      ls >> p.pep_lambda;
    } else if (key == "objective") {
      std::string nnz_kw;
      std::size_t nnz;
      if (!(ls >> nnz_kw >> nnz) || nnz_kw != "nnz") fail("bad objective line");
      if (p.dim == 0) fail("dim must precede objective");
      p.objective = SymMatrix(p.dim);
      read_entries(p.objective, nnz);
    } else if (key == "constraint") {
      std::string sense_kw, rhs_kw, nnz_kw;
      double rhs;
      std::size_t nnz;
      if (!(ls >> sense_kw >> rhs_kw >> rhs >> nnz_kw >> nnz) ||
          rhs_kw != "rhs" || nnz_kw != "nnz")
        fail("bad constraint line");
      if (p.dim == 0) fail("dim must precede constraints");
      SdpConstraint con{SymMatrix(p.dim),
                        sense_kw == "eq" ? Sense::Eq : Sense::Ge, rhs};
      if (sense_kw != "eq" && sense_kw != "ge") fail("unknown sense " + sense_kw);
      read_entries(con.a, nnz);
      p.constraints.push_back(std::move(con));
    } else {
      fail("unknown key: " + key);
    }
  }
  if (p.dim == 0 || p.constraints.empty()) fail("incomplete problem");
  return p;
}

}  // namespace rppa
