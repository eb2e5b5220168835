#include <catch2/catch.hpp>

#include <cmath>
#include <sstream>

#include "frkn/integrator.hpp"
#include "frkn/problems.hpp"
#include "frkn/tableau.hpp"

using frkn::NodeVector;

namespace {

frkn::BasisSpec trig1() { return frkn::builtin_basis("trig", {{"omega", 1.0}, {"n", 1.0}}); }

}  // namespace

TEST_CASE("zero acceleration gives free motion in one sweep") {
  frkn::OdeSystem2 sys;
  sys.dim = 1;
  sys.rhs = [](double, const std::vector<double>&, std::vector<double>& a) {
    a.assign(1, 0.0);
  };
  sys.y0 = {2.0};
  sys.yp0 = {3.0};

  auto tab = frkn::derive_tableau(trig1(), NodeVector::gauss(2), 0.0, 0.1);
  auto ss = frkn::stage_solve(tab, sys, 0.0, sys.y0, sys.yp0, 0.1);
  CHECK(ss.iterations == 1);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(ss.stages[i][0] == Approx(2.0 + tab.c[i] * 0.1 * 3.0));
  }

  auto r = frkn::step(tab, sys, 0.0, sys.y0, sys.yp0, 0.1);
  CHECK(r.y_next[0] == Approx(2.3));
  CHECK(r.yp_next[0] == Approx(3.0));
}

TEST_CASE("fitted stages and step reproduce the cosine exactly") {
  auto sys = frkn::linear_system(-1.0, 1.0, 0.0);
  const double h = 0.5;
  auto tab = frkn::derive_tableau(trig1(), NodeVector::gauss(2), 0.0, h);
  auto ss = frkn::stage_solve(tab, sys, 0.0, sys.y0, sys.yp0, h);
  REQUIRE(ss.converged);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(ss.stages[i][0] == Approx(std::cos(tab.c[i] * h)).margin(1e-12));
  }

  // implicit equations hold at the reported tolerance
  for (std::size_t i = 0; i < 2; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < 2; ++k) acc += tab.A(i, k) * (-ss.stages[k][0]);
    const double resid = ss.stages[i][0] - (1.0 + tab.c[i] * h * 0.0 + h * h * acc);
    CHECK(std::abs(resid) <= 10.0 * 1e-14 * (1.0 + std::abs(ss.stages[i][0])));
  }

  for (double hh : {0.2, 0.8, 1.5}) {
    auto tab_h = frkn::derive_tableau(trig1(), NodeVector::gauss(2), 0.0, hh);
    auto r = frkn::step(tab_h, sys, 0.0, sys.y0, sys.yp0, hh);
    CHECK(r.y_next[0] == Approx(std::cos(hh)).margin(1e-11));
    CHECK(r.yp_next[0] == Approx(-std::sin(hh)).margin(1e-11));
  }
}

TEST_CASE("mis-fitted basis leaves a small but nonzero one-step error") {
  auto sys = frkn::linear_system(-4.0, 1.0, 0.0);  // solution cos(2t)
  const double h = 0.1;
  auto tab = frkn::derive_tableau(trig1(), NodeVector::gauss(2), 0.0, h);
  auto r = frkn::step(tab, sys, 0.0, sys.y0, sys.yp0, h);
  const double err = std::abs(r.y_next[0] - std::cos(0.2));
  CHECK(err > 1e-12);
  CHECK(err < 1e-4);
}

TEST_CASE("exactness extends to in-span inhomogeneous problems") {
  // y'' = -sin t has solutions 1 + t + sin t in span{1, t, sin, cos}
  frkn::OdeSystem2 sys;
  sys.dim = 1;
  sys.rhs = [](double t, const std::vector<double>&, std::vector<double>& a) {
    a.assign(1, -std::sin(t));
  };
  sys.y0 = {1.0};
  sys.yp0 = {2.0};  // 1 + cos 0
  const double h = 0.7;
  auto tab = frkn::derive_tableau(trig1(), NodeVector::gauss(2), 0.0, h);
  auto r = frkn::step(tab, sys, 0.0, sys.y0, sys.yp0, h);
  CHECK(r.y_next[0] == Approx(1.0 + h + std::sin(h)).margin(1e-12));
  CHECK(r.yp_next[0] == Approx(1.0 + std::cos(h)).margin(1e-12));
}

TEST_CASE("integrate keeps the fitted problem exact over many steps") {
  auto sys = frkn::linear_system(-1.0, 1.0, 0.0);
  auto traj = frkn::integrate(trig1(), NodeVector::gauss(2), sys, 0.0, 20.0, 0.5);
  REQUIRE(traj.size() == 41);
  double worst = 0.0;
  for (const auto& p : traj) {
    worst = std::max(worst, std::abs(p.y[0] - std::cos(p.t)));
    worst = std::max(worst, std::abs(p.yp[0] + std::sin(p.t)));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("two-body stages converge quickly at moderate step sizes") {
  auto sys = frkn::twobody_system(frkn::KeplerParams{0.5});
  auto tab = frkn::derive_tableau(trig1(), NodeVector::gauss(2), 0.0, 0.25);
  auto ss = frkn::stage_solve(tab, sys, 0.0, sys.y0, sys.yp0, 0.25);
  CHECK(ss.converged);
  CHECK(ss.iterations <= 20);
}

TEST_CASE("stage iteration reports divergence") {
  // step far too large for the Lipschitz constant
  frkn::OdeSystem2 stiff;
  stiff.dim = 1;
  stiff.rhs = [](double, const std::vector<double>& y, std::vector<double>& a) {
    a.assign(1, -1e6 * y[0]);
  };
  stiff.y0 = {1.0};
  stiff.yp0 = {0.0};
  auto tab = frkn::derive_tableau(frkn::poly_basis(2), NodeVector::gauss(2), 0.0, 1.0);
  CHECK_THROWS_AS(frkn::stage_solve(tab, stiff, 0.0, stiff.y0, stiff.yp0, 1.0),
                  frkn::StageNoConvergence);
}

TEST_CASE("derivative update orders: s+1 generic, s+2 extended") {
  // nonzero initial slope so the solution has no parity that could cancel
  // the leading error term at t = 0
  auto sys = frkn::linear_system(-4.0, 1.0, 1.0);
  NodeVector c({0.2, 1.0});
  auto slope_for = [&](frkn::DerivativeUpdate variant) {
    std::vector<double> hs = {0.2, 0.1, 0.05, 0.025};
    std::vector<double> errs;
    for (double h : hs) {
      frkn::IntegratorConfig cfg;
      cfg.variant = variant;
      auto tab = frkn::derive_tableau(trig1(), c, 0.0, h);
      if (variant == frkn::DerivativeUpdate::extended) {
        tab.extended = frkn::derive_extended_d(trig1(), c, h);
      }
      auto r = frkn::step(tab, sys, 0.0, sys.y0, sys.yp0, h, cfg);
      std::vector<double> ye, ype;
      sys.exact(h, ye, ype);
      errs.push_back(std::abs(r.yp_next[0] - ype[0]));
    }
    // least-squares slope of log err against log h
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < hs.size(); ++i) {
      const double x = std::log(hs[i]);
      const double y = std::log(errs[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double n = static_cast<double>(hs.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  };
  CHECK(slope_for(frkn::DerivativeUpdate::standard) == Approx(3.0).margin(0.35));
  CHECK(slope_for(frkn::DerivativeUpdate::extended) == Approx(4.0).margin(0.35));
}

TEST_CASE("per-step policy matches frozen coefficients for separable bases") {
  auto sys = frkn::linear_system(-1.0, 1.0, 0.0);
  frkn::IntegratorConfig frozen;
  frkn::IntegratorConfig per_step;
  per_step.policy = frkn::CoefficientPolicy::per_step_t;
  auto a = frkn::integrate(trig1(), NodeVector::gauss(2), sys, 0.0, 5.0, 0.5, frozen);
  auto b = frkn::integrate(trig1(), NodeVector::gauss(2), sys, 0.0, 5.0, 0.5, per_step);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].y[0] == Approx(b[i].y[0]).margin(1e-9));
    CHECK(a[i].yp[0] == Approx(b[i].yp[0]).margin(1e-9));
  }
}

TEST_CASE("trajectory CSV shape") {
  auto sys = frkn::twobody_system(frkn::KeplerParams{0.5});
  auto traj = frkn::integrate(trig1(), NodeVector::gauss(2), sys, 0.0, 1.0, 0.5);
  std::ostringstream os;
  frkn::write_trajectory_csv(os, traj);
  const std::string text = os.str();
  CHECK(text.rfind("t,y1,y2,yp1,yp2\n", 0) == 0);
  // header + initial sample + 2 steps
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
}

TEST_CASE("integrate propagates the failing step index") {
  frkn::OdeSystem2 stiff;
  stiff.dim = 1;
  stiff.rhs = [](double t, const std::vector<double>& y, std::vector<double>& a) {
    a.assign(1, (t < 1.0 ? -1.0 : -1e8) * y[0]);
  };
  stiff.y0 = {1.0};
  stiff.yp0 = {0.0};
  auto tab = frkn::derive_tableau(frkn::poly_basis(2), NodeVector::gauss(2), 0.0, 0.5);
  try {
    frkn::integrate(tab, stiff, 0.0, 5.0, 0.5);
    FAIL("expected StageNoConvergence");
  } catch (const frkn::StageNoConvergence& e) {
    CHECK(std::string(e.detail()).find("step 2") != std::string::npos);
  }
}
