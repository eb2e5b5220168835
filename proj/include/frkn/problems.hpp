#pragma once

#include <cmath>
#include <string>

#include "frkn/errors.hpp"
#include "frkn/integrator.hpp"
#include "frkn/numeric.hpp"

namespace frkn {

struct KeplerParams {
  double e = 0.5;       // eccentricity, 0 <= e < 1
  double tol = 1e-14;   // residual tolerance for the anomaly solve
  int max_iter = 50;

  void validate() const {
    if (!(e >= 0.0 && e < 1.0)) throw InvalidParams("eccentricity must satisfy 0 <= e < 1");
    if (!(tol > 0.0)) throw InvalidParams("kepler tolerance must be positive");
  }
};

/// Eccentric anomaly: the root of u - e sin(u) = t. Newton from u = t with
/// derivative 1 - e cos(u) >= 1 - e > 0; bisection bracket [t - e, t + e].
inline double kepler_u(double t, const KeplerParams& p) {
  p.validate();
  const double e = p.e;
  return newton_scalar([e, t](double u) { return u - e * std::sin(u) - t; },
                       [e](double u) { return 1.0 - e * std::cos(u); }, t, p.tol, p.max_iter,
                       Bracket{t - e, t + e});
}

struct TwoBodyState {
  double y1, y2, y1p, y2p;
};

/// Exact two-body trajectory through the eccentric anomaly:
///   y1 = cos u - e, y2 = sqrt(1-e^2) sin u, with u' = 1/(1 - e cos u).
inline TwoBodyState twobody_exact(double t, const KeplerParams& p) {
  const double u = kepler_u(t, p);
  const double su = std::sin(u);
  const double cu = std::cos(u);
  const double udot = 1.0 / (1.0 - p.e * cu);
  const double root = std::sqrt(1.0 - p.e * p.e);
  return {cu - p.e, root * su, -su * udot, root * cu * udot};
}

/// Planar Kepler problem y'' = -y / r^3, r = |y|, in the standard
/// eccentric-orbit normalization.
inline OdeSystem2 twobody_system(const KeplerParams& p) {
  p.validate();
  OdeSystem2 sys;
  sys.dim = 2;
  sys.rhs = [](double, const std::vector<double>& y, std::vector<double>& acc) {
    acc.resize(2);
    const double r2 = y[0] * y[0] + y[1] * y[1];
    const double r = std::sqrt(r2);
    if (r < 1e-12) throw OriginSingularity("trajectory reached r < 1e-12");
    const double inv_r3 = 1.0 / (r2 * r);
    acc[0] = -y[0] * inv_r3;
    acc[1] = -y[1] * inv_r3;
  };
  sys.y0 = {1.0 - p.e, 0.0};
  sys.yp0 = {0.0, std::sqrt((1.0 + p.e) / (1.0 - p.e))};
  sys.exact = [p](double t, std::vector<double>& y, std::vector<double>& yp) {
    const auto st = twobody_exact(t, p);
    y = {st.y1, st.y2};
    yp = {st.y1p, st.y2p};
  };
  return sys;
}

/// Scalar test problem y'' = lambda y with a closed-form oracle.
inline OdeSystem2 linear_system(double lambda, double y0, double yp0) {
  OdeSystem2 sys;
  sys.dim = 1;
  sys.rhs = [lambda](double, const std::vector<double>& y, std::vector<double>& acc) {
    acc.resize(1);
    acc[0] = lambda * y[0];
  };
  sys.y0 = {y0};
  sys.yp0 = {yp0};
  sys.exact = [lambda, y0, yp0](double t, std::vector<double>& y, std::vector<double>& yp) {
    y.resize(1);
    yp.resize(1);
    if (lambda < 0.0) {
      const double w = std::sqrt(-lambda);
      y[0] = y0 * std::cos(w * t) + yp0 * std::sin(w * t) / w;
      yp[0] = -y0 * w * std::sin(w * t) + yp0 * std::cos(w * t);
    } else if (lambda > 0.0) {
      const double w = std::sqrt(lambda);
      y[0] = y0 * std::cosh(w * t) + yp0 * std::sinh(w * t) / w;
      yp[0] = y0 * w * std::sinh(w * t) + yp0 * std::cosh(w * t);
    } else {
      y[0] = y0 + yp0 * t;
      yp[0] = yp0;
    }
  };
  return sys;
}

}  // namespace frkn
