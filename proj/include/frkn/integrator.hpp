#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "frkn/basis.hpp"
#include "frkn/errors.hpp"
#include "frkn/tableau.hpp"

namespace frkn {

/// Special second-order IVP y'' = f(t, y) with initial state and slope,
/// plus an optional exact-solution oracle for error measurement.
struct OdeSystem2 {
  std::size_t dim = 0;
  std::function<void(double, const std::vector<double>&, std::vector<double>&)> rhs;
  std::vector<double> y0;
  std::vector<double> yp0;
  std::function<void(double, std::vector<double>&, std::vector<double>&)> exact;  // may be empty

  bool has_exact() const noexcept { return static_cast<bool>(exact); }
};

enum class DerivativeUpdate { standard, extended };
enum class CoefficientPolicy { frozen_per_h, per_step_t };

struct IntegratorConfig {
  double stage_tol = 1e-14;  // mixed absolute/relative
  int max_stage_iters = 100;
  DerivativeUpdate variant = DerivativeUpdate::standard;
  CoefficientPolicy policy = CoefficientPolicy::frozen_per_h;
  DeriveOptions derive;
};

struct StageSolveResult {
  std::vector<std::vector<double>> stages;    // s x dim
  std::vector<std::vector<double>> f_stages;  // rhs evaluated at the stages
  int iterations = 0;
  bool converged = false;
};

/// Fixed-point solve of Y_i = y_n + c_i h y'_n + h^2 sum_j A_ij f(t_n + c_j h, Y_j),
/// started from the free-motion guess Y_i = y_n + c_i h y'_n. Terminates when
/// max |Y_new - Y_old| <= tol (1 + |Y_new|) over all stages and components.
inline StageSolveResult stage_solve(const Tableau& tab, const OdeSystem2& sys, double t_n,
                                    const std::vector<double>& y_n,
                                    const std::vector<double>& yp_n, double h,
                                    const IntegratorConfig& cfg = {}) {
  const std::size_t s = tab.stages();
  const std::size_t dim = sys.dim;

  StageSolveResult res;
  res.stages.assign(s, std::vector<double>(dim));
  res.f_stages.assign(s, std::vector<double>(dim));
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < dim; ++j)
      res.stages[i][j] = y_n[j] + tab.c[i] * h * yp_n[j];

  std::vector<std::vector<double>> next(s, std::vector<double>(dim));
  for (int iter = 1; iter <= cfg.max_stage_iters; ++iter) {
    for (std::size_t i = 0; i < s; ++i) {
      sys.rhs(t_n + tab.c[i] * h, res.stages[i], res.f_stages[i]);
    }
    bool done = true;
    for (std::size_t i = 0; i < s; ++i) {
      for (std::size_t j = 0; j < dim; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < s; ++k) acc += tab.A(i, k) * res.f_stages[k][j];
        const double v = y_n[j] + tab.c[i] * h * yp_n[j] + h * h * acc;
        // negated form so a NaN iterate counts as "not settled"
        if (!(std::abs(v - res.stages[i][j]) <= cfg.stage_tol * (1.0 + std::abs(v)))) done = false;
        next[i][j] = v;
      }
    }
    std::swap(res.stages, next);
    res.iterations = iter;
    if (done) {
      // refresh rhs at the accepted stage values
      for (std::size_t i = 0; i < s; ++i)
        sys.rhs(t_n + tab.c[i] * h, res.stages[i], res.f_stages[i]);
      res.converged = true;
      return res;
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "stage iteration did not converge in %d sweeps at t=%.6g h=%.6g",
                cfg.max_stage_iters, t_n, h);
  throw StageNoConvergence(buf);
}

struct StepResult {
  std::vector<double> y_next;
  std::vector<double> yp_next;
  std::vector<std::vector<double>> stages;
  int iterations = 0;
  bool converged = false;
};

/// One FRKN step. The extended variant replaces the derivative update with
/// the (d0, d) quadrature that spends one extra rhs evaluation at (t_n, y_n).
inline StepResult step(const Tableau& tab, const OdeSystem2& sys, double t_n,
                       const std::vector<double>& y_n, const std::vector<double>& yp_n, double h,
                       const IntegratorConfig& cfg = {}) {
  if (cfg.variant == DerivativeUpdate::extended && !tab.extended) {
    throw InvalidInput("integrator", "extended update requested but tableau has no extended weights");
  }
  auto ss = stage_solve(tab, sys, t_n, y_n, yp_n, h, cfg);

  const std::size_t s = tab.stages();
  const std::size_t dim = sys.dim;
  StepResult out;
  out.y_next.resize(dim);
  out.yp_next.resize(dim);
  out.iterations = ss.iterations;
  out.converged = ss.converged;

  for (std::size_t j = 0; j < dim; ++j) {
    double qb = 0.0;
    for (std::size_t i = 0; i < s; ++i) qb += tab.b[i] * ss.f_stages[i][j];
    out.y_next[j] = y_n[j] + h * yp_n[j] + h * h * qb;
  }
  if (cfg.variant == DerivativeUpdate::standard) {
    for (std::size_t j = 0; j < dim; ++j) {
      double qd = 0.0;
      for (std::size_t i = 0; i < s; ++i) qd += tab.d[i] * ss.f_stages[i][j];
      out.yp_next[j] = yp_n[j] + h * qd;
    }
  } else {
    std::vector<double> f0(dim);
    sys.rhs(t_n, y_n, f0);
    const auto& ext = *tab.extended;
    for (std::size_t j = 0; j < dim; ++j) {
      double qd = ext.d0 * f0[j];
      for (std::size_t i = 0; i < s; ++i) qd += ext.d[i] * ss.f_stages[i][j];
      out.yp_next[j] = yp_n[j] + h * qd;
    }
  }
  out.stages = std::move(ss.stages);
  return out;
}

struct TrajectoryPoint {
  double t;
  std::vector<double> y;
  std::vector<double> yp;
};

using Trajectory = std::vector<TrajectoryPoint>;

/// Fixed-step integration over [t0, t0 + length] with n = round(length/h)
/// steps, using an already-derived tableau.
inline Trajectory integrate(const Tableau& tab, const OdeSystem2& sys, double t0, double length,
                            double h, const IntegratorConfig& cfg = {}) {
  if (!(h > 0.0)) throw InvalidInput("integrator", "step h must be positive");
  const double steps_exact = length / h;
  if (!(steps_exact >= 0.0) || steps_exact > 1e9) {
    throw InvalidInput("integrator", "step count out of range");
  }
  const long long n = std::llround(steps_exact);

  Trajectory traj;
  traj.reserve(static_cast<std::size_t>(n) + 1);
  traj.push_back({t0, sys.y0, sys.yp0});
  std::vector<double> y = sys.y0, yp = sys.yp0;
  for (long long k = 0; k < n; ++k) {
    const double t_n = t0 + static_cast<double>(k) * h;
    StepResult r;
    try {
      r = step(tab, sys, t_n, y, yp, h, cfg);
    } catch (const Error& e) {
      throw StageNoConvergence("step " + std::to_string(k) + " failed: " + e.detail());
    }
    y = std::move(r.y_next);
    yp = std::move(r.yp_next);
    traj.push_back({t0 + static_cast<double>(k + 1) * h, y, yp});
  }
  return traj;
}

/// Derive-and-integrate. Frozen policy derives the tableau once per h at
/// t = 0 (separable coefficients are time-independent); per-step policy
/// re-derives at each t_n for bases without that property.
inline Trajectory integrate(const BasisSpec& basis, const NodeVector& c, const OdeSystem2& sys,
                            double t0, double length, double h, const IntegratorConfig& cfg = {}) {
  if (cfg.policy == CoefficientPolicy::frozen_per_h) {
    Tableau tab = derive_tableau(basis, c, 0.0, h, cfg.derive);
    if (cfg.variant == DerivativeUpdate::extended) {
      tab.extended = derive_extended_d(basis, c, h, cfg.derive);
    }
    return integrate(tab, sys, t0, length, h, cfg);
  }
  if (cfg.variant == DerivativeUpdate::extended) {
    throw InvalidInput("integrator", "extended update supports the frozen coefficient policy only");
  }
  if (!(h > 0.0)) throw InvalidInput("integrator", "step h must be positive");
  const double steps_exact = length / h;
  if (!(steps_exact >= 0.0) || steps_exact > 1e9) {
    throw InvalidInput("integrator", "step count out of range");
  }
  const long long n = std::llround(steps_exact);

  Trajectory traj;
  traj.reserve(static_cast<std::size_t>(n) + 1);
  traj.push_back({t0, sys.y0, sys.yp0});
  std::vector<double> y = sys.y0, yp = sys.yp0;
  for (long long k = 0; k < n; ++k) {
    const double t_n = t0 + static_cast<double>(k) * h;
    Tableau tab = derive_tableau(basis, c, t_n, h, cfg.derive);
    auto r = step(tab, sys, t_n, y, yp, h, cfg);
    y = std::move(r.y_next);
    yp = std::move(r.yp_next);
    traj.push_back({t0 + static_cast<double>(k + 1) * h, y, yp});
  }
  return traj;
}

/// "t,y1..yd,yp1..ypd" with 17 significant digits, one row per sample.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  if (traj.empty()) return;
  const std::size_t dim = traj.front().y.size();
  os << "t";
  for (std::size_t j = 0; j < dim; ++j) os << ",y" << (j + 1);
  for (std::size_t j = 0; j < dim; ++j) os << ",yp" << (j + 1);
  os << "\n";
  char buf[40];
  for (const auto& p : traj) {
    std::snprintf(buf, sizeof buf, "%.17g", p.t);
    os << buf;
    for (std::size_t j = 0; j < dim; ++j) {
      std::snprintf(buf, sizeof buf, ",%.17g", p.y[j]);
      os << buf;
    }
    for (std::size_t j = 0; j < dim; ++j) {
      std::snprintf(buf, sizeof buf, ",%.17g", p.yp[j]);
      os << buf;
    }
    os << "\n";
  }
}

}  // namespace frkn
