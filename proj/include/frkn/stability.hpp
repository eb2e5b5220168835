#pragma once

#include <cmath>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "frkn/basis.hpp"
#include "frkn/errors.hpp"
#include "frkn/numeric.hpp"
#include "frkn/tableau.hpp"

namespace frkn {

/// The 2x2 propagator of (y_n, h y_n') applied to y'' = lambda y with
/// z = lambda h^2.
struct StabilityMatrix {
  DenseMatrix m;
  double z = 0.0;
  double h = 0.0;
  double rho = 0.0;
  double trace = 0.0;
  double det = 0.0;
};

namespace detail {

inline StabilityMatrix finish_stability(DenseMatrix m, double z, double h) {
  StabilityMatrix sm;
  sm.trace = m(0, 0) + m(1, 1);
  sm.det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  sm.rho = spectral_radius_2x2(m);
  sm.m = std::move(m);
  sm.z = z;
  sm.h = h;
  return sm;
}

}  // namespace detail

/// Coefficient form: entries built from b, d and the resolvent applied to
/// e and c (two solves, no explicit inverse).
inline StabilityMatrix stability_matrix_coeff(const Tableau& tab, double z,
                                              double rcond_floor = 1e-12) {
  const std::size_t s = tab.stages();
  DenseMatrix res(s, s);
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j) res(i, j) = (i == j ? 1.0 : 0.0) - z * tab.A(i, j);
  if (rcond_estimate(res) <= rcond_floor) {
    throw ResolventSingular("I - zA numerically singular at z = " + std::to_string(z));
  }
  DenseMatrix rhs(s, 2);
  for (std::size_t i = 0; i < s; ++i) {
    rhs(i, 0) = 1.0;
    rhs(i, 1) = tab.c[i];
  }
  auto rep = lu_solve(res, rhs);
  double be = 0.0, bc = 0.0, de = 0.0, dc = 0.0;
  for (std::size_t i = 0; i < s; ++i) {
    be += tab.b[i] * rep.solution(i, 0);
    bc += tab.b[i] * rep.solution(i, 1);
    de += tab.d[i] * rep.solution(i, 0);
    dc += tab.d[i] * rep.solution(i, 1);
  }
  DenseMatrix m(2, 2);
  m(0, 0) = 1.0 + z * be;
  m(0, 1) = 1.0 + z * bc;
  m(1, 0) = z * de;
  m(1, 1) = 1.0 + z * dc;
  return detail::finish_stability(std::move(m), z, tab.h);
}

/// Basis form: the same propagator from the collocation solution of
/// y'' = lambda y. W is assembled from the augmented-vector evaluators
/// (u(ch), u''(ch), u'(0)); no matrix exponential is ever formed.
inline StabilityMatrix stability_matrix_basis(const BasisSpec& basis, const NodeVector& c,
                                              double h, double z, double rcond_floor = 1e-12) {
  if (!basis.certificate()) {
    throw MissingCertificate("stability_matrix_basis needs a separable basis");
  }
  const std::size_t s = basis.size();
  if (c.size() != s) throw InvalidInput("stability", "node count must equal basis size");
  if (h == 0.0 || !std::isfinite(h)) throw InvalidInput("stability", "step h must be nonzero");

  const std::size_t n = s + 2;
  DenseMatrix w(n, n);
  const auto u_zero = basis.eval_uvec(0.0);
  const auto du_zero = basis.eval_uvec_d1(0.0);
  for (std::size_t r = 0; r < n; ++r) {
    w(r, 0) = u_zero[r];
    w(r, 1) = du_zero[r];
  }
  for (std::size_t i = 0; i < s; ++i) {
    const auto ui = basis.eval_uvec(c[i] * h);
    const auto ddi = basis.eval_uvec_d2(c[i] * h);
    for (std::size_t r = 0; r < n; ++r) w(r, i + 2) = h * h * ddi[r] - z * ui[r];
  }
  if (rcond_estimate(w) <= rcond_floor) {
    throw WSingular("W numerically singular at z = " + std::to_string(z) +
                    ", h = " + std::to_string(h));
  }

  const auto uh = basis.eval_uvec(h);
  const auto duh = basis.eval_uvec_d1(h);
  DenseMatrix rhs(n, 2);
  for (std::size_t r = 0; r < n; ++r) {
    rhs(r, 0) = uh[r];
    rhs(r, 1) = duh[r];
  }
  auto rep = lu_solve(w, rhs);
  DenseMatrix m(2, 2);
  m(0, 0) = rep.solution(0, 0);
  m(0, 1) = rep.solution(1, 0) / h;
  m(1, 0) = h * rep.solution(0, 1);
  m(1, 1) = rep.solution(1, 1);
  return detail::finish_stability(std::move(m), z, h);
}

enum class RegionClass { stable, periodic, unstable };

inline const char* region_class_name(RegionClass c) {
  switch (c) {
    case RegionClass::stable: return "stable";
    case RegionClass::periodic: return "periodic";
    default: return "unstable";
  }
}

/// stable: rho < 1 - tol. periodic: rho = 1 within tol and the eigenvalues
/// form a complex pair (discriminant strictly negative, with a margin so a
/// defective rho = 1 point is not misread as periodic).
inline RegionClass classify_sample(double rho, double trace, double det, double tol_boundary) {
  if (rho < 1.0 - tol_boundary) return RegionClass::stable;
  if (std::abs(rho - 1.0) <= tol_boundary && (trace * trace - 4.0 * det) < -1e-12) {
    return RegionClass::periodic;
  }
  return RegionClass::unstable;
}

struct RegionSample {
  double nu = 0.0;
  double z = 0.0;
  double rho = std::numeric_limits<double>::quiet_NaN();
  RegionClass cls = RegionClass::unstable;
  bool derivation_failed = false;
};

struct RegionScan {
  std::vector<double> nu_grid;
  std::vector<double> z_grid;
  std::vector<RegionSample> samples;  // nu-major layout

  const RegionSample& at(std::size_t inu, std::size_t iz) const {
    return samples[inu * z_grid.size() + iz];
  }
};

namespace detail {

inline unsigned scan_thread_count(std::size_t jobs) {
  unsigned n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  if (const char* env = std::getenv("FRKN_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) n = static_cast<unsigned>(v);
  }
  if (n > jobs) n = static_cast<unsigned>(jobs);
  return std::max(1u, n);
}

}  // namespace detail

/// Sample rho over a (nu, z) grid. One tableau per nu, reused across the
/// z sweep. Failed derivations mark the whole nu column unstable with the
/// flag set; per-sample resolvent failures are flagged the same way.
/// Columns are scanned in parallel (FRKN_THREADS caps the fan-out) into
/// preallocated slots, so the result does not depend on the thread count.
inline RegionScan scan_region(const BasisSpec& basis, const NodeVector& c,
                              std::vector<double> nu_grid, std::vector<double> z_grid,
                              double tol_boundary = 1e-10, const DeriveOptions& opts = {}) {
  RegionScan scan;
  scan.nu_grid = std::move(nu_grid);
  scan.z_grid = std::move(z_grid);
  scan.samples.assign(scan.nu_grid.size() * scan.z_grid.size(), RegionSample{});

  const double freq = basis.fitting_frequency().value_or(1.0);
  auto run_column = [&](std::size_t inu) {
    const double nu = scan.nu_grid[inu];
    const double h = nu / freq;
    RegionSample* out = scan.samples.data() + inu * scan.z_grid.size();
    Tableau tab{NodeVector({0.5}), DenseMatrix(1, 1), {}, {}, 0.0, std::nullopt, "", false};
    bool have_tab = false;
    try {
      tab = derive_tableau(basis, c, 0.0, h, opts);
      have_tab = true;
    } catch (const Error&) {
      have_tab = false;
    }
    for (std::size_t iz = 0; iz < scan.z_grid.size(); ++iz) {
      RegionSample s;
      s.nu = nu;
      s.z = scan.z_grid[iz];
      if (have_tab) {
        try {
          const auto sm = stability_matrix_coeff(tab, s.z);
          s.rho = sm.rho;
          s.cls = classify_sample(sm.rho, sm.trace, sm.det, tol_boundary);
        } catch (const Error&) {
          s.derivation_failed = true;
        }
      } else {
        s.derivation_failed = true;
      }
      out[iz] = s;
    }
  };

  const unsigned nthreads = detail::scan_thread_count(scan.nu_grid.size());
  if (nthreads <= 1 || scan.nu_grid.size() <= 1) {
    for (std::size_t i = 0; i < scan.nu_grid.size(); ++i) run_column(i);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (unsigned t = 0; t < nthreads; ++t) {
      pool.emplace_back([&, t]() {
        for (std::size_t i = t; i < scan.nu_grid.size(); i += nthreads) run_column(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  return scan;
}

/// "nu,z,rho,class" rows, 12 significant digits.
inline void write_region_csv(std::ostream& os, const RegionScan& scan) {
  os << "nu,z,rho,class\n";
  char buf[96];
  for (const auto& s : scan.samples) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%s\n", s.nu, s.z, s.rho,
                  region_class_name(s.cls));
    os << buf;
  }
}

/// "z,rho" rows for a single nu, 12 significant digits.
inline void write_radius_csv(std::ostream& os, std::span<const double> z,
                             std::span<const double> rho) {
  if (z.size() != rho.size()) throw InvalidInput("stability", "z/rho length mismatch");
  os << "z,rho\n";
  char buf[64];
  for (std::size_t i = 0; i < z.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", z[i], rho[i]);
    os << buf;
  }
}

}  // namespace frkn
