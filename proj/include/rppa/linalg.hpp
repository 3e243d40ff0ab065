#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rppa {

using Vector = std::vector<double>;

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct NotPositiveDefinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NoConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline double dot(const Vector& x, const Vector& y) {
  if (x.size() != y.size()) throw DimensionMismatch("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline Vector axpy(double a, const Vector& x, const Vector& y) {
  if (x.size() != y.size()) throw DimensionMismatch("axpy: size mismatch");
  Vector r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = a * x[i] + y[i];
  return r;
}

inline Vector scaled(const Vector& x, double a) {
  Vector r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = a * x[i];
  return r;
}

inline Vector sub(const Vector& x, const Vector& y) { return axpy(-1.0, y, x); }
inline Vector add(const Vector& x, const Vector& y) { return axpy(1.0, x, y); }

inline double norm2(const Vector& x) { return std::sqrt(dot(x, x)); }

/// Dense symmetric matrix. Full storage; symmetry is maintained by set().
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t order, double diag = 0.0)
      : n_(order), a_(order * order, 0.0) {
    if (order == 0) throw std::invalid_argument("SymMatrix: order must be >= 1");
    for (std::size_t i = 0; i < n_; ++i) a_[i * n_ + i] = diag;
  }

  static SymMatrix identity(std::size_t order) { return SymMatrix(order, 1.0); }

  static SymMatrix diagonal(const Vector& d) {
    SymMatrix m(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m.a_[i * d.size() + i] = d[i];
    return m;
  }

  /// Symmetrized outer product (a b^T + b a^T)/2.
  static SymMatrix sym_outer(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw DimensionMismatch("sym_outer: size mismatch");
    SymMatrix m(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < a.size(); ++j)
        m.a_[i * a.size() + j] = 0.5 * (a[i] * b[j] + b[i] * a[j]);
    return m;
  }

  std::size_t order() const { return n_; }

  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

  void set(std::size_t i, std::size_t j, double v) {
    a_[i * n_ + j] = v;
    a_[j * n_ + i] = v;
  }

  void add_at(std::size_t i, std::size_t j, double v) {
    a_[i * n_ + j] += v;
    if (i != j) a_[j * n_ + i] += v;
  }

  Vector apply(const Vector& x) const {
    if (x.size() != n_) throw DimensionMismatch("SymMatrix::apply: size mismatch");
    Vector y(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      double s = 0.0;
      const double* row = &a_[i * n_];
      for (std::size_t j = 0; j < n_; ++j) s += row[j] * x[j];
      y[i] = s;
    }
    return y;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (double v : a_) s += v * v;
    return std::sqrt(s);
  }

  /// Frobenius inner product <A,B> = sum_ij A_ij B_ij.
  double inner(const SymMatrix& other) const {
    if (other.n_ != n_) throw DimensionMismatch("SymMatrix::inner: order mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < a_.size(); ++k) s += a_[k] * other.a_[k];
    return s;
  }

  SymMatrix& operator+=(const SymMatrix& other) {
    if (other.n_ != n_) throw DimensionMismatch("SymMatrix::+=: order mismatch");
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += other.a_[k];
    return *this;
  }

  SymMatrix& axpy(double alpha, const SymMatrix& other) {
    if (other.n_ != n_) throw DimensionMismatch("SymMatrix::axpy: order mismatch");
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += alpha * other.a_[k];
    return *this;
  }

  SymMatrix& operator*=(double alpha) {
    for (double& v : a_) v *= alpha;
    return *this;
  }

  const std::vector<double>& raw() const { return a_; }
  std::vector<double>& raw() { return a_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

/// Lower-triangular Cholesky factor with solve routines.
class CholeskyFactor {
 public:
  explicit CholeskyFactor(std::size_t n) : n_(n), l_(n * n, 0.0) {}

  std::size_t order() const { return n_; }
  double at(std::size_t i, std::size_t j) const { return l_[i * n_ + j]; }
  double& at(std::size_t i, std::size_t j) { return l_[i * n_ + j]; }

  /// Solves L y = b.
  Vector solve_lower(const Vector& b) const {
    if (b.size() != n_) throw DimensionMismatch("solve_lower: size mismatch");
    Vector y(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      double s = b[i];
      for (std::size_t j = 0; j < i; ++j) s -= l_[i * n_ + j] * y[j];
      y[i] = s / l_[i * n_ + i];
    }
    return y;
  }

  /// Solves L^T x = y.
  Vector solve_upper(const Vector& y) const {
    if (y.size() != n_) throw DimensionMismatch("solve_upper: size mismatch");
    Vector x(n_);
    for (std::size_t ii = n_; ii-- > 0;) {
      double s = y[ii];
      for (std::size_t j = ii + 1; j < n_; ++j) s -= l_[j * n_ + ii] * x[j];
      x[ii] = s / l_[ii * n_ + ii];
    }
    return x;
  }

  /// Solves L L^T x = b.
  Vector solve(const Vector& b) const { return solve_upper(solve_lower(b)); }

  SymMatrix reconstruct() const {
    SymMatrix m(n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k <= j; ++k) s += l_[i * n_ + k] * l_[j * n_ + k];
        m.set(i, j, s);
      }
    return m;
  }

 private:
  std::size_t n_;
  std::vector<double> l_;
};

/// Cholesky factorization M = L L^T. Pivot tolerance is relative to the
/// largest diagonal entry; failing it reports NotPositiveDefinite.
inline CholeskyFactor cholesky(const SymMatrix& m) {
  const std::size_t n = m.order();
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(m(i, i)));
  const double tol = 1e-12 * std::max(max_diag, 1e-300);

  CholeskyFactor f(n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = m(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= f.at(j, k) * f.at(j, k);
    if (d <= tol)
      throw NotPositiveDefinite("cholesky: pivot " + std::to_string(j) +
                                " below tolerance");
    const double lj = std::sqrt(d);
    f.at(j, j) = lj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= f.at(i, k) * f.at(j, k);
      f.at(i, j) = s / lj;
    }
  }
  return f;
}

struct EigDecomposition {
  Vector eigenvalues;        // ascending
  std::vector<Vector> eigenvectors;  // eigenvectors[k] pairs with eigenvalues[k]

  SymMatrix reconstruct() const {
    const std::size_t n = eigenvalues.size();
    SymMatrix m(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k)
          s += eigenvalues[k] * eigenvectors[k][i] * eigenvectors[k][j];
        m.set(i, j, s);
      }
    return m;
  }
};

namespace detail {

/// Cyclic Jacobi sweep engine on dense row-major storage. Rotations
/// accumulate into q (caller initializes it, typically to identity).
inline void jacobi_sweeps(std::vector<double>& a, std::vector<double>& q,
                          std::size_t n, double thresh, int max_sweeps = 100) {
  auto off_norm = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a[i * n + j] * a[i * n + j];
    return std::sqrt(s);
  };

  int sweep = 0;
  while (off_norm() > thresh) {
    if (++sweep > max_sweeps)
      throw NoConvergence("sym_eig: Jacobi sweep limit exceeded");
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t r = p + 1; r < n; ++r) {
        const double apq = a[p * n + r];
        if (std::abs(apq) <= thresh / (n * n + 1.0)) continue;
        const double app = a[p * n + p];
        const double aqq = a[r * n + r];
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p];
          const double akq = a[k * n + r];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + r] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k];
          const double aqk = a[r * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[r * n + k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double qkp = q[k * n + p];
          const double qkq = q[k * n + r];
          q[k * n + p] = c * qkp - s * qkq;
          q[k * n + r] = s * qkp + c * qkq;
        }
      }
    }
  }
}

}  // namespace detail

/// Symmetric eigendecomposition by cyclic Jacobi sweeps.
/// Sweep limit 100; off-diagonal threshold 1e-12 * ||M||_F.
inline EigDecomposition sym_eig(const SymMatrix& m) {
  const std::size_t n = m.order();
  std::vector<double> a(m.raw());
  std::vector<double> q(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) q[i * n + i] = 1.0;

  const double thresh = 1e-12 * std::max(m.frobenius_norm(), 1e-300);
  detail::jacobi_sweeps(a, q, n, thresh);

  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
    return a[i * n + i] < a[j * n + j];
  });

  EigDecomposition e;
  e.eigenvalues.resize(n);
  e.eigenvectors.resize(n, Vector(n));
  for (std::size_t k = 0; k < n; ++k) {
    e.eigenvalues[k] = a[idx[k] * n + idx[k]];
    for (std::size_t i = 0; i < n; ++i) e.eigenvectors[k][i] = q[i * n + idx[k]];
  }
  return e;
}

/// Frobenius-nearest PSD matrix: eigendecompose and clamp negatives to zero.
inline SymMatrix psd_project(const SymMatrix& m) {
  EigDecomposition e = sym_eig(m);
  bool all_nonneg = true;
  for (double v : e.eigenvalues)
    if (v < 0.0) all_nonneg = false;
  if (all_nonneg) return m;
  for (double& v : e.eigenvalues) v = std::max(v, 0.0);
  return e.reconstruct();
}

inline double h_inner(const SymMatrix& h, const Vector& x, const Vector& y) {
  return dot(x, h.apply(y));
}

inline double h_norm_sq(const SymMatrix& h, const Vector& x) {
  return h_inner(h, x, x);
}

/// LU solve with partial pivoting for small dense unsymmetric systems,
/// here only (H + M) resolvent systems. Throws on numerically singular input.
inline Vector lu_solve(std::vector<double> a, std::size_t n, Vector b,
                       const std::string& who = "lu_solve") {
  if (b.size() != n) throw DimensionMismatch(who + ": size mismatch");
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a[i * n + k]) > std::abs(a[piv * n + k])) piv = i;
    if (std::abs(a[piv * n + k]) < 1e-14)
      throw std::runtime_error(who + ": singular system");
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[piv * n + j]);
      std::swap(b[k], b[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a[i * n + k] / a[k * n + k];
      for (std::size_t j = k; j < n; ++j) a[i * n + j] -= f * a[k * n + j];
      b[i] -= f * b[k];
    }
  }
  Vector x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= a[ii * n + j] * x[j];
    x[ii] = s / a[ii * n + ii];
  }
  return x;
}

}  // namespace rppa
