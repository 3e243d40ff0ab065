#pragma once

#include <cmath>
#include <limits>
#include <variant>

#include "rppa/linalg.hpp"

namespace rppa {

struct UnsupportedPairing : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SingularResolvent : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// F(w) = M w + q with M + M^T >= 0 (monotone). M stored dense row-major.
struct AffineOperator {
  std::size_t dim;
  std::vector<double> m;  // dim x dim, row-major
  Vector q;

  AffineOperator(std::size_t d, std::vector<double> mat, Vector rhs)
      : dim(d), m(std::move(mat)), q(std::move(rhs)) {
    if (m.size() != dim * dim || q.size() != dim)
      throw DimensionMismatch("AffineOperator: inconsistent sizes");
    SymMatrix sym(dim);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j <= i; ++j)
        sym.set(i, j, 0.5 * (m[i * dim + j] + m[j * dim + i]));
    const auto eig = sym_eig(sym);
    if (eig.eigenvalues.front() < -1e-10)
      throw std::invalid_argument("AffineOperator: M + M^T not PSD (not monotone)");
  }

  Vector operator()(const Vector& w) const {
    if (w.size() != dim) throw DimensionMismatch("AffineOperator: dim mismatch");
    Vector y(q);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) y[i] += m[i * dim + j] * w[j];
    return y;
  }
};

/// Scalar three-branch operator around `center`:
///   F(w) =  c              for w - center >  delta
///   F(w) = (c/delta)(w-center) for |w - center| <= delta
///   F(w) = -c              for w - center < -delta
struct Piecewise1D {
  double c;
  double delta;
  double center = 0.0;

  Piecewise1D(double c_, double delta_, double center_ = 0.0)
      : c(c_), delta(delta_), center(center_) {
    if (c <= 0.0 || delta <= 0.0)
      throw std::invalid_argument("Piecewise1D: require c > 0 and delta > 0");
  }

  double eval(double w) const {
    const double y = w - center;
    if (y > delta) return c;
    if (y < -delta) return -c;
    return c / delta * y;
  }
};

struct ZeroOperator {
  std::size_t dim;
};

struct Operator {
  std::variant<ZeroOperator, AffineOperator, Piecewise1D> v;

  std::size_t dim() const {
    if (auto* a = std::get_if<AffineOperator>(&v)) return a->dim;
    if (std::get_if<Piecewise1D>(&v)) return 1;
    return std::get<ZeroOperator>(v).dim;
  }

  Vector evaluate(const Vector& w) const {
    if (w.size() != dim()) throw DimensionMismatch("Operator::evaluate: dim mismatch");
    if (auto* a = std::get_if<AffineOperator>(&v)) return (*a)(w);
    if (auto* p = std::get_if<Piecewise1D>(&v)) return {p->eval(w[0])};
    return Vector(w.size(), 0.0);
  }
};

struct WholeSpace {
  std::size_t dim;
};

struct Box {
  Vector lower;
  Vector upper;

  Box(Vector lo, Vector hi) : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size())
      throw DimensionMismatch("Box: bound sizes differ");
    for (std::size_t i = 0; i < lower.size(); ++i)
      if (lower[i] > upper[i])
        throw std::invalid_argument("Box: lower > upper");
  }
};

struct ConstraintSet {
  std::variant<WholeSpace, Box> v;

  std::size_t dim() const {
    if (auto* w = std::get_if<WholeSpace>(&v)) return w->dim;
    return std::get<Box>(v).lower.size();
  }

  bool is_whole_space() const { return std::holds_alternative<WholeSpace>(v); }

  bool contains(const Vector& w, double tol = 0.0) const {
    if (w.size() != dim()) throw DimensionMismatch("ConstraintSet::contains");
    if (is_whole_space()) return true;
    const auto& b = std::get<Box>(v);
    for (std::size_t i = 0; i < w.size(); ++i)
      if (w[i] < b.lower[i] - tol || w[i] > b.upper[i] + tol) return false;
    return true;
  }

  Vector project(const Vector& w) const {
    if (is_whole_space()) return w;
    const auto& b = std::get<Box>(v);
    Vector r(w);
    for (std::size_t i = 0; i < r.size(); ++i)
      r[i] = std::clamp(r[i], b.lower[i], b.upper[i]);
    return r;
  }
};

/// A VI instance together with the algorithm parameters it will be run with.
struct ViProblem {
  Operator f;
  ConstraintSet omega;
  SymMatrix h;       // SPD metric
  double lambda;     // relaxation, in (0,2)
  Vector w0;

  ViProblem(Operator f_, ConstraintSet omega_, SymMatrix h_, double lambda_,
            Vector w0_)
      : f(std::move(f_)),
        omega(std::move(omega_)),
        h(std::move(h_)),
        lambda(lambda_),
        w0(std::move(w0_)) {
    if (lambda <= 0.0 || lambda >= 2.0)
      throw std::invalid_argument("ViProblem: lambda must lie in (0,2)");
    const std::size_t d = f.dim();
    if (omega.dim() != d || h.order() != d || w0.size() != d)
      throw DimensionMismatch("ViProblem: dimension mismatch");
    cholesky(h);  // SPD check; throws NotPositiveDefinite otherwise
  }

  std::size_t dim() const { return f.dim(); }
};

namespace detail {

// Scalar PPA step for Piecewise1D with scalar metric h > 0, unconstrained:
// solve F(wt) + h (wt - wk) = 0 branch by branch; the solution is unique by
// monotonicity. Branch-boundary ties go to the middle segment.
inline double piecewise_resolvent_free(const Piecewise1D& f, double h, double wk) {
  const double yk = wk - f.center;  // work in centered coordinates
  const double slope = f.c / f.delta;
  const double mid = h * yk / (h + slope);
  if (std::abs(mid) <= f.delta) return mid + f.center;
  const double hi = yk - f.c / h;
  if (hi > f.delta) return hi + f.center;
  const double lo = yk + f.c / h;
  if (lo < -f.delta) return lo + f.center;
  // Boundary case: fall back to the (continuous) middle value clamped.
  return std::clamp(mid, -f.delta, f.delta) + f.center;
}

}  // namespace detail

/// PPA step: returns wt in Omega with (w - wt)^T [F(wt) + H(wt - wk)] >= 0
/// for all w in Omega. Closed-form resolvents only; unsupported pairings throw.
inline Vector ppa_step(const ViProblem& p, const Vector& wk) {
  if (wk.size() != p.dim()) throw DimensionMismatch("ppa_step: dim mismatch");
  const std::size_t n = p.dim();

  if (auto* z = std::get_if<ZeroOperator>(&p.f.v)) {
    (void)z;
    if (p.omega.is_whole_space()) return wk;
    // Scalar metric box case: resolvent of the normal cone is the projection.
    if (n == 1) return p.omega.project(wk);
    throw UnsupportedPairing("ppa_step: Zero operator with box set in n > 1");
  }

  if (auto* a = std::get_if<AffineOperator>(&p.f.v)) {
    if (!p.omega.is_whole_space())
      throw UnsupportedPairing("ppa_step: affine operator supports whole space only");
    // (H + M) wt = H wk - q
    std::vector<double> hm(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        hm[i * n + j] = p.h(i, j) + a->m[i * n + j];
    Vector rhs = p.h.apply(wk);
    for (std::size_t i = 0; i < n; ++i) rhs[i] -= a->q[i];
    try {
      return lu_solve(std::move(hm), n, std::move(rhs), "ppa_step");
    } catch (const std::runtime_error&) {
      throw SingularResolvent("ppa_step: H + M numerically singular");
    }
  }

  const auto& pw = std::get<Piecewise1D>(p.f.v);
  if (n != 1)
    throw UnsupportedPairing("ppa_step: Piecewise1D is one-dimensional");
  const double h = p.h(0, 0);
  const double free_sol = detail::piecewise_resolvent_free(pw, h, wk[0]);
  if (p.omega.is_whole_space()) return {free_sol};

  const auto& box = std::get<Box>(p.omega.v);
  const double lo = box.lower[0], hi = box.upper[0];
  const double wt = std::clamp(free_sol, lo, hi);
  // Complementarity of the clamped solution for the scalar monotone equation:
  // at the lower bound the residual must be >= 0, at the upper bound <= 0.
  const double r = pw.eval(wt) + h * (wt - wk[0]);
  if ((wt == lo && r < -1e-12) || (wt == hi && r > 1e-12))
    throw UnsupportedPairing("ppa_step: box complementarity check failed");
  return {wt};
}

/// Minimum over probe points of (w - wt)^T [F(wt) + H(wt - wk)].
/// A correct PPA step keeps this >= -1e-9 for probes inside Omega.
inline double residual(const ViProblem& p, const Vector& wt, const Vector& wk,
                       const std::vector<Vector>& probes) {
  const Vector g = add(p.f.evaluate(wt), p.h.apply(sub(wt, wk)));
  double r = std::numeric_limits<double>::infinity();
  for (const auto& w : probes) r = std::min(r, dot(sub(w, wt), g));
  return r;
}

}  // namespace rppa
