#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "frkn/errors.hpp"

namespace frkn {

/// Small dense row-major matrix. Everything in this library is tiny
/// (n <= s+2), so no blocking, no views, just a flat vector.
class DenseMatrix {
 public:
  DenseMatrix() = default;

  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(rows * cols, fill) {
    if (rows == 0 || cols == 0) {
      throw InvalidInput("numeric", "matrix dimensions must be >= 1");
    }
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  const std::vector<double>& data() const noexcept { return a_; }

  DenseMatrix transposed() const {
    DenseMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  /// Max absolute row sum.
  double norm_inf() const {
    double best = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < cols_; ++j) s += std::abs((*this)(i, j));
      best = std::max(best, s);
    }
    return best;
  }

  /// Max absolute column sum.
  double norm_one() const {
    double best = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < rows_; ++i) s += std::abs((*this)(i, j));
      best = std::max(best, s);
    }
    return best;
  }

  bool all_finite() const {
    for (double v : a_)
      if (!std::isfinite(v)) return false;
    return true;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> a_;
};

inline DenseMatrix operator*(const DenseMatrix& x, const DenseMatrix& y) {
  if (x.cols() != y.rows()) throw InvalidInput("numeric", "matmul shape mismatch");
  DenseMatrix z(x.rows(), y.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t k = 0; k < x.cols(); ++k) {
      const double xv = x(i, k);
      if (xv == 0.0) continue;
      for (std::size_t j = 0; j < y.cols(); ++j) z(i, j) += xv * y(k, j);
    }
  return z;
}

inline std::vector<double> matvec(const DenseMatrix& m, std::span<const double> x) {
  if (m.cols() != x.size()) throw InvalidInput("numeric", "matvec shape mismatch");
  std::vector<double> y(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

inline double norm_inf(std::span<const double> v) {
  double best = 0.0;
  for (double x : v) best = std::max(best, std::abs(x));
  return best;
}

namespace detail {

inline constexpr double kPivotFloor = 1e-300;

/// Packed LU factorization with partial pivoting. Total: a pivot below the
/// floor sets `singular` instead of continuing with a zeroed pivot.
struct LuFactorization {
  DenseMatrix lu;
  std::vector<std::size_t> perm;
  int sign = 1;
  bool singular = false;

  double det() const {
    if (singular) return 0.0;
    double d = static_cast<double>(sign);
    for (std::size_t i = 0; i < lu.rows(); ++i) d *= lu(i, i);
    return d;
  }

  // pre: !singular
  void solve_in_place(std::vector<double>& x) const {
    const std::size_t n = lu.rows();
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = x[perm[i]];
    for (std::size_t i = 1; i < n; ++i) {
      double s = b[i];
      for (std::size_t j = 0; j < i; ++j) s -= lu(i, j) * b[j];
      b[i] = s;
    }
    for (std::size_t i = n; i-- > 0;) {
      double s = b[i];
      for (std::size_t j = i + 1; j < n; ++j) s -= lu(i, j) * b[j];
      b[i] = s / lu(i, i);
    }
    x = std::move(b);
  }
};

inline LuFactorization lu_factor(const DenseMatrix& a) {
  if (a.rows() != a.cols()) throw InvalidInput("numeric", "lu_factor needs a square matrix");
  if (!a.all_finite()) throw InvalidInput("numeric", "lu_factor given non-finite entries");
  const std::size_t n = a.rows();
  LuFactorization f;
  f.lu = a;
  f.perm.resize(n);
  for (std::size_t i = 0; i < n; ++i) f.perm[i] = i;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(f.lu(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(f.lu(i, k));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best < kPivotFloor) {
      f.singular = true;
      return f;
    }
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(f.lu(k, j), f.lu(piv, j));
      std::swap(f.perm[k], f.perm[piv]);
      f.sign = -f.sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double m = f.lu(i, k) / f.lu(k, k);
      f.lu(i, k) = m;
      for (std::size_t j = k + 1; j < n; ++j) f.lu(i, j) -= m * f.lu(k, j);
    }
  }
  return f;
}

/// One-sample reciprocal condition probe: 1 / (||a||_1 * ||a^{-1}e||_1).
inline double rcond_probe(const DenseMatrix& a, const LuFactorization& f) {
  if (f.singular) return 0.0;
  std::vector<double> w(a.rows(), 1.0);
  f.solve_in_place(w);
  double s = 0.0;
  for (double v : w) s += std::abs(v);
  const double kappa = a.norm_one() * s;
  if (!(kappa > 0.0) || !std::isfinite(kappa)) return 0.0;
  return 1.0 / kappa;
}

}  // namespace detail

struct SolveReport {
  DenseMatrix solution;
  double rcond_estimate = 0.0;
  bool singular_flag = false;
};

/// Solve a * x = rhs (rhs may have several columns) by LU with partial
/// pivoting. Throws SingularMatrix when a pivot magnitude falls below
/// 1e-300; the failure is reported rather than masked with a tiny substitute pivot.
inline SolveReport lu_solve(const DenseMatrix& a, const DenseMatrix& rhs) {
  if (a.rows() != a.cols()) throw InvalidInput("numeric", "lu_solve needs a square matrix");
  if (rhs.rows() != a.rows()) throw InvalidInput("numeric", "lu_solve rhs row mismatch");
  if (!rhs.all_finite()) throw InvalidInput("numeric", "lu_solve given non-finite rhs");

  auto f = detail::lu_factor(a);
  if (f.singular) {
    throw SingularMatrix("pivot magnitude below 1e-300 during factorization");
  }

  SolveReport rep;
  rep.solution = DenseMatrix(rhs.rows(), rhs.cols());
  std::vector<double> col(a.rows());
  for (std::size_t j = 0; j < rhs.cols(); ++j) {
    for (std::size_t i = 0; i < rhs.rows(); ++i) col[i] = rhs(i, j);
    f.solve_in_place(col);
    for (std::size_t i = 0; i < rhs.rows(); ++i) rep.solution(i, j) = col[i];
  }
  rep.rcond_estimate = detail::rcond_probe(a, f);
  rep.singular_flag = false;
  return rep;
}

/// Determinant via LU; 0 when a pivot falls below the floor.
inline double determinant(const DenseMatrix& a) { return detail::lu_factor(a).det(); }

/// Reciprocal condition estimate; 0 for (numerically) singular input.
inline double rcond_estimate(const DenseMatrix& a) {
  auto f = detail::lu_factor(a);
  return detail::rcond_probe(a, f);
}

/// Spectral radius of a real 2x2 matrix from trace and determinant. For a
/// complex pair (negative discriminant) |lambda|^2 = det, so no complex
/// arithmetic is needed.
inline double spectral_radius_2x2(const DenseMatrix& m) {
  if (m.rows() != 2 || m.cols() != 2) {
    throw InvalidInput("numeric", "spectral_radius_2x2 needs a 2x2 matrix");
  }
  const double tr = m(0, 0) + m(1, 1);
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  const double disc = tr * tr - 4.0 * det;
  if (disc >= 0.0) {
    const double root = std::sqrt(disc);
    return std::max(std::abs(tr + root), std::abs(tr - root)) / 2.0;
  }
  return std::sqrt(std::abs(det));
}

struct Bracket {
  double lo;
  double hi;
};

/// Scalar Newton iteration with an optional bisection fallback on a
/// caller-supplied bracket. Returns x with |residual(x)| <= tol.
inline double newton_scalar(const std::function<double(double)>& residual,
                            const std::function<double(double)>& derivative,
                            double guess, double tol, int max_iter,
                            std::optional<Bracket> bracket = std::nullopt) {
  if (!(tol > 0.0)) throw InvalidInput("numeric", "newton_scalar needs tol > 0");

  auto polish = [&](double x, double r) {
    // one extra update pushes the residual from just under tol to the
    // rounding floor
    const double d = derivative(x);
    if (d != 0.0 && std::isfinite(d)) {
      const double next = x - r / d;
      if (std::isfinite(next) && std::abs(residual(next)) < std::abs(r)) return next;
    }
    return x;
  };

  double x = guess;
  for (int it = 0; it < max_iter; ++it) {
    const double r = residual(x);
    if (std::abs(r) <= tol) return polish(x, r);
    const double d = derivative(x);
    if (d == 0.0 || !std::isfinite(d)) break;
    const double next = x - r / d;
    if (!std::isfinite(next) || next == x) break;
    x = next;
  }
  if (const double r = residual(x); std::abs(r) <= tol) return polish(x, r);

  if (bracket) {
    double lo = bracket->lo;
    double hi = bracket->hi;
    if (lo > hi) std::swap(lo, hi);
    double flo = residual(lo);
    double fhi = residual(hi);
    if (std::abs(flo) <= tol) return lo;
    if (std::abs(fhi) <= tol) return hi;
    if (flo * fhi < 0.0) {
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = residual(mid);
        if (std::abs(fm) <= tol) return mid;
        if (flo * fm < 0.0) {
          hi = mid;
          fhi = fm;
        } else {
          lo = mid;
          flo = fm;
        }
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(mid))) {
          break;
        }
      }
    }
  }
  throw NoConvergence("newton_scalar: no root to tolerance " + std::to_string(tol) +
                      (bracket ? " (bracket exhausted)" : " (no bracket supplied)"));
}

/// Exact value of integral_0^1 xi^j * prod_i (xi - c_i) dxi, by expanding
/// the product into monomial coefficients and integrating term by term.
inline double integrate_monomial_product(std::span<const double> c, int j) {
  if (j < 0) throw InvalidInput("numeric", "integrate_monomial_product needs j >= 0");
  std::vector<double> poly{1.0};  // coefficients, ascending powers
  for (double root : c) {
    std::vector<double> next(poly.size() + 1, 0.0);
    for (std::size_t k = 0; k < poly.size(); ++k) {
      next[k + 1] += poly[k];
      next[k] -= root * poly[k];
    }
    poly = std::move(next);
  }
  double total = 0.0;
  for (std::size_t k = 0; k < poly.size(); ++k) {
    total += poly[k] / static_cast<double>(k + j + 1);
  }
  return total;
}

}  // namespace frkn
