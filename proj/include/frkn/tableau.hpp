#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "frkn/basis.hpp"
#include "frkn/errors.hpp"
#include "frkn/numeric.hpp"

namespace frkn {

/// Collocation nodes, pairwise distinct, typically in [0,1].
class NodeVector {
 public:
  explicit NodeVector(std::vector<double> entries) : c_(std::move(entries)) {
    if (c_.empty()) throw InvalidInput("tableau", "node vector must be nonempty");
    for (std::size_t i = 0; i < c_.size(); ++i) {
      if (!std::isfinite(c_[i])) throw InvalidInput("tableau", "node values must be finite");
      for (std::size_t j = i + 1; j < c_.size(); ++j) {
        if (std::abs(c_[i] - c_[j]) <= 1e-12) {
          throw InvalidInput("tableau", "node values must be pairwise distinct");
        }
      }
    }
  }

  /// Gauss-Legendre nodes mapped to [0,1]; s = 2 gives 1/2 -+ sqrt(3)/6.
  static NodeVector gauss(std::size_t s) {
    if (s < 1) throw InvalidInput("tableau", "gauss nodes need s >= 1");
    std::vector<double> nodes(s);
    for (std::size_t i = 0; i < s; ++i) {
      // root of Legendre P_s via Newton from the Chebyshev-angle guess
      double x = std::cos(M_PI * (4.0 * (i + 1) - 1.0) / (4.0 * s + 2.0));
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (std::size_t k = 2; k <= s; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        const double ps = (s == 1) ? x : p1;
        const double prev = (s == 1) ? 1.0 : p0;
        const double dp = s * (x * ps - prev) / (x * x - 1.0);
        const double dx = ps / dp;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      nodes[i] = 0.5 * (1.0 + x);
    }
    std::sort(nodes.begin(), nodes.end());
    return NodeVector(std::move(nodes));
  }

  std::size_t size() const noexcept { return c_.size(); }
  double operator[](std::size_t i) const { return c_[i]; }
  const std::vector<double>& values() const noexcept { return c_; }
  operator std::span<const double>() const noexcept { return c_; }

 private:
  std::vector<double> c_;
};

struct ExtendedWeights {
  double d0 = 0.0;         // weight on f(t_n, y_n)
  std::vector<double> d;   // weights on the stage evaluations
};

/// FRKN coefficients at a given step size. For separable bases these are
/// time-independent, so one tableau per h is all a fixed-step run needs.
struct Tableau {
  NodeVector c;
  DenseMatrix A;
  std::vector<double> b;
  std::vector<double> d;
  double h = 0.0;
  std::optional<ExtendedWeights> extended;
  std::string basis_name;
  bool fallback_used = false;

  std::size_t stages() const noexcept { return c.size(); }
};

struct DeriveOptions {
  double rcond_floor = 1e-12;
  /// Below this |frequency * h| the fitted linear systems lose too many
  /// digits to cancellation and the classical tableau for the same nodes
  /// is used instead (the fitted coefficients converge to it anyway).
  double nu_switch = 1e-4;
  bool allow_fallback = true;
};

Tableau derive_tableau(const BasisSpec& basis, const NodeVector& c, double t, double h,
                       const DeriveOptions& opts = {});

namespace detail {

/// Dense Gaussian elimination with partial pivoting in long double, for
/// the extended-weight system whose conditioning grows like 1/(freq*h)^2.
inline bool solve_long_double(std::vector<std::vector<long double>>& m,
                              std::vector<long double>& rhs) {
  const std::size_t n = rhs.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(m[i][k]) > std::abs(m[piv][k])) piv = i;
    }
    if (std::abs(m[piv][k]) < 1e-300L) return false;
    std::swap(m[piv], m[k]);
    std::swap(rhs[piv], rhs[k]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const long double f = m[i][k] / m[k][k];
      m[i][k] = 0.0L;
      for (std::size_t j = k + 1; j < n; ++j) m[i][j] -= f * m[k][j];
      rhs[i] -= f * rhs[k];
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    long double s = rhs[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= m[i][j] * rhs[j];
    rhs[i] = s / m[i][i];
  }
  return true;
}

inline std::vector<double> solve_against_ft(const DenseMatrix& ft, std::span<const double> rhs) {
  DenseMatrix r(rhs.size(), 1);
  for (std::size_t i = 0; i < rhs.size(); ++i) r(i, 0) = rhs[i];
  auto rep = lu_solve(ft, r);
  std::vector<double> x(rhs.size());
  for (std::size_t i = 0; i < rhs.size(); ++i) x[i] = rep.solution(i, 0);
  return x;
}

}  // namespace detail

/// Derive A(h), b(h), d(h) from the defining relations by posing every
/// system against F^T and solving with the LU kernel; no inverse is formed.
inline Tableau derive_tableau(const BasisSpec& basis, const NodeVector& c, double t, double h,
                              const DeriveOptions& opts) {
  const std::size_t s = basis.size();
  if (c.size() != s) throw InvalidInput("tableau", "node count must equal basis size");
  if (h == 0.0 || !std::isfinite(h)) throw InvalidInput("tableau", "step h must be nonzero");

  if (opts.allow_fallback) {
    if (const auto freq = basis.fitting_frequency()) {
      if (std::abs(*freq * h) < opts.nu_switch) {
        DeriveOptions inner = opts;
        inner.allow_fallback = false;
        Tableau tab = derive_tableau(poly_basis(s), c, 0.0, 1.0, inner);
        tab.h = h;
        tab.basis_name = basis.name();
        tab.fallback_used = true;
        return tab;
      }
    }
  }

  auto [E, F] = collocation_matrices(basis, std::span<const double>(c.values()), t, h);
  // Existence of the coefficients needs F nonsingular; E enters only the
  // wellposedness of the collocation solution and is intrinsically
  // ill-conditioned at small h for larger s, so it is not gated here.
  const double rc_F = rcond_estimate(F);
  if (!(rc_F > opts.rcond_floor)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "collocation condition failed at t=%g h=%g (rcond_F=%.3e)", t,
                  h, rc_F);
    throw CollocationFailure(buf);
  }

  const DenseMatrix ft = F.transposed();

  // E = h^2 A F, posed as F^T A^T = E^T / h^2
  DenseMatrix et(s, s);
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j) et(i, j) = E(j, i) / (h * h);
  DenseMatrix at;
  try {
    at = lu_solve(ft, et).solution;
  } catch (const SingularMatrix&) {
    throw CollocationFailure("F^T factorization broke down despite rcond check");
  }

  std::vector<double> rb(s), rd(s);
  for (std::size_t k = 0; k < s; ++k) {
    rb[k] = (basis.u(k, t + h) - basis.u(k, t) - h * basis.u1(k, t)) / (h * h);
    rd[k] = (basis.u1(k, t + h) - basis.u1(k, t)) / h;
  }

  Tableau tab{c, DenseMatrix(s, s), {}, {}, h, std::nullopt, basis.name(), false};
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j) tab.A(i, j) = at(j, i);
  tab.b = detail::solve_against_ft(ft, rb);
  tab.d = detail::solve_against_ft(ft, rd);
  return tab;
}

/// The closed-form two-stage tableau fitted to {sin(wt), cos(wt)} at
/// nu = w h, with every entry the Cramer solution of the defining 2x2
/// systems. All denominators are nu^2 sin((c1-c2) nu) (or nu sin(...) for
/// the d row).
inline Tableau closed_form_frkn2g(const NodeVector& c, double nu) {
  if (c.size() != 2) throw InvalidInput("tableau", "closed form needs exactly 2 nodes");
  if (nu == 0.0 || !std::isfinite(nu)) throw InvalidInput("tableau", "nu must be nonzero");
  const double c1 = c[0];
  const double c2 = c[1];
  const double sd = std::sin((c1 - c2) * nu);
  if (std::abs(sd) < 1e-12) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "sin((c1-c2)nu) = %.3e vanishes at nu=%.17g", sd, nu);
    throw DenominatorVanishes(buf);
  }
  const double s1 = std::sin(c1 * nu), s2 = std::sin(c2 * nu);
  const double k1 = std::cos(c1 * nu), k2 = std::cos(c2 * nu);
  const double den_a = nu * nu * sd;
  const double den_d = nu * sd;

  Tableau tab{c, DenseMatrix(2, 2), std::vector<double>(2), std::vector<double>(2),
              nu, std::nullopt, "frkn2g-closed-form", false};
  tab.A(0, 0) = (c1 * nu * k2 - s2 - std::sin((c1 - c2) * nu)) / den_a;
  tab.A(0, 1) = (s1 - c1 * nu * k1) / den_a;
  tab.A(1, 0) = (c2 * nu * k2 - s2) / den_a;
  tab.A(1, 1) = (s1 - c2 * nu * k1 + std::sin((c2 - c1) * nu)) / den_a;
  tab.b[0] = (nu * k2 - s2 - std::sin((1.0 - c2) * nu)) / den_a;
  tab.b[1] = (s1 - nu * k1 + std::sin((1.0 - c1) * nu)) / den_a;
  tab.d[0] = (k2 - std::cos((1.0 - c2) * nu)) / den_d;
  tab.d[1] = (std::cos((1.0 - c1) * nu) - k1) / den_d;
  return tab;
}

/// Extended derivative weights (d0, d): the quadrature
///   y'(h) ~ y'(0) + h [ d0 w(0) + sum_i d_i w(c_i h) ]
/// made exact on {u_k''} augmented with p'' for the lowest-degree monomial
/// p = t^m / m! (m >= 2) that keeps the system nonsingular. The extra node
/// at 0 and the extra exactness condition raise the derivative update's
/// local order by one.
inline ExtendedWeights derive_extended_d(const BasisSpec& basis, const NodeVector& c, double h,
                                         const DeriveOptions& opts = {}) {
  const std::size_t s = basis.size();
  if (c.size() != s) throw InvalidInput("tableau", "node count must equal basis size");
  if (h == 0.0 || !std::isfinite(h)) throw InvalidInput("tableau", "step h must be nonzero");

  if (opts.allow_fallback) {
    if (const auto freq = basis.fitting_frequency()) {
      if (std::abs(*freq * h) < opts.nu_switch) {
        DeriveOptions inner = opts;
        inner.allow_fallback = false;
        return derive_extended_d(poly_basis(s), c, 1.0, inner);
      }
    }
  }

  const std::size_t n = s + 1;
  for (int m = 2; m <= static_cast<int>(s) + 6; ++m) {
    DenseMatrix sys(n, n);
    DenseMatrix rhs(n, 1);
    for (std::size_t k = 0; k < s; ++k) {
      sys(k, 0) = basis.u2(k, 0.0);
      for (std::size_t i = 0; i < s; ++i) sys(k, i + 1) = basis.u2(k, c[i] * h);
      rhs(k, 0) = (basis.u1(k, h) - basis.u1(k, 0.0)) / h;
    }
    // p = t^m / m!: p''(t) = t^{m-2} / (m-2)!, p'(h) - p'(0) = h^{m-1}/(m-1)!
    double fact = 1.0;
    for (int j = 2; j <= m - 2; ++j) fact *= j;
    auto pdd = [m, fact](double t) {
      return (m == 2) ? 1.0 : std::pow(t, m - 2) / fact;
    };
    sys(s, 0) = pdd(0.0);
    for (std::size_t i = 0; i < s; ++i) sys(s, i + 1) = pdd(c[i] * h);
    rhs(s, 0) = std::pow(h, m - 2) / (fact * (m - 1));

    if (rcond_estimate(sys) <= opts.rcond_floor) continue;

    if (basis.has_extended_precision()) {
      // re-assemble and solve in long double: the double path loses about
      // eps/(freq*h)^2 here, which shows up as an error floor in the
      // extended methods' convergence tables
      std::vector<std::vector<long double>> ml(n, std::vector<long double>(n));
      std::vector<long double> rl(n);
      const long double hl = h;
      for (std::size_t k = 0; k < s; ++k) {
        ml[k][0] = basis.u2l(k, 0.0L);
        for (std::size_t i = 0; i < s; ++i)
          ml[k][i + 1] = basis.u2l(k, static_cast<long double>(c[i]) * hl);
        rl[k] = (basis.u1l(k, hl) - basis.u1l(k, 0.0L)) / hl;
      }
      const long double factl = fact;
      auto pddl = [m, factl](long double t) {
        return (m == 2) ? 1.0L : std::pow(t, static_cast<long double>(m - 2)) / factl;
      };
      ml[s][0] = pddl(0.0L);
      for (std::size_t i = 0; i < s; ++i) ml[s][i + 1] = pddl(static_cast<long double>(c[i]) * hl);
      rl[s] = std::pow(hl, static_cast<long double>(m - 2)) / (factl * (m - 1));
      if (detail::solve_long_double(ml, rl)) {
        ExtendedWeights w;
        w.d0 = static_cast<double>(rl[0]);
        w.d.resize(s);
        for (std::size_t i = 0; i < s; ++i) w.d[i] = static_cast<double>(rl[i + 1]);
        return w;
      }
    }

    auto rep = lu_solve(sys, rhs);
    ExtendedWeights w;
    w.d0 = rep.solution(0, 0);
    w.d.resize(s);
    for (std::size_t i = 0; i < s; ++i) w.d[i] = rep.solution(i + 1, 0);
    return w;
  }
  throw AugmentedSingular(
      "no monomial augmentation yields a nonsingular extended-weight system "
      "(duplicated quadrature node?)");
}

struct OrthogonalityReport {
  bool satisfied = false;
  std::vector<double> residuals;
};

/// residual_j = integral_0^1 xi^j prod_i (xi - c_i) dxi for j = 0..q-1;
/// all of them vanish exactly when the nodes buy q extra orders.
inline OrthogonalityReport verify_orthogonality(const NodeVector& c, int q, double tol = 1e-13) {
  if (q < 1) throw InvalidInput("tableau", "orthogonality check needs q >= 1");
  OrthogonalityReport rep;
  rep.satisfied = true;
  for (int j = 0; j < q; ++j) {
    const double r = integrate_monomial_product(c.values(), j);
    rep.residuals.push_back(r);
    if (std::abs(r) > tol) rep.satisfied = false;
  }
  return rep;
}

namespace detail {

inline void json_number(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

inline void json_vector(std::string& out, std::span<const double> v) {
  out += '[';
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    json_number(out, v[i]);
  }
  out += ']';
}

}  // namespace detail

/// Deterministic JSON export, 17 significant digits, fixed field order.
inline std::string tableau_to_json(const Tableau& tab) {
  std::string out = "{\"s\":" + std::to_string(tab.stages());
  out += ",\"c\":";
  detail::json_vector(out, tab.c.values());
  out += ",\"A\":[";
  for (std::size_t i = 0; i < tab.stages(); ++i) {
    if (i) out += ',';
    out += '[';
    for (std::size_t j = 0; j < tab.stages(); ++j) {
      if (j) out += ',';
      detail::json_number(out, tab.A(i, j));
    }
    out += ']';
  }
  out += "],\"b\":";
  detail::json_vector(out, tab.b);
  out += ",\"d\":";
  detail::json_vector(out, tab.d);
  out += ",\"h\":";
  detail::json_number(out, tab.h);
  out += ",\"extended\":";
  if (tab.extended) {
    out += "{\"d0x\":";
    detail::json_number(out, tab.extended->d0);
    out += ",\"dx\":";
    detail::json_vector(out, tab.extended->d);
    out += '}';
  } else {
    out += "null";
  }
  out += ",\"basis\":\"" + tab.basis_name + "\"";
  out += ",\"fallback_used\":";
  out += tab.fallback_used ? "true" : "false";
  out += '}';
  return out;
}

}  // namespace frkn
