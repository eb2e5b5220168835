#pragma once

#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "frkn/errors.hpp"
#include "frkn/numeric.hpp"

namespace frkn {

/// Certificate that the augmented vector (1, t, u_1, ..., u_s) evolves as
/// u(t) = exp(S t) u0 for a constant matrix S. Used to validate
/// separability numerically; all evaluation goes through the function
/// triples directly, never through a matrix exponential.
struct SeparableCertificate {
  DenseMatrix S;            // (s+2) x (s+2)
  std::vector<double> u0;   // value of the augmented vector at t = 0
};

/// A set of s fitting functions with hand-coded first and second
/// derivatives. The augmented vector prepends {1, t}.
class BasisSpec {
 public:
  using Fn = std::function<double(double)>;
  using FnL = std::function<long double(long double)>;

  BasisSpec(std::string name, std::vector<Fn> u, std::vector<Fn> du, std::vector<Fn> ddu,
            std::map<std::string, double> params = {},
            std::optional<SeparableCertificate> certificate = std::nullopt)
      : name_(std::move(name)),
        u_(std::move(u)),
        du_(std::move(du)),
        ddu_(std::move(ddu)),
        params_(std::move(params)),
        certificate_(std::move(certificate)) {
    if (u_.empty() || u_.size() != du_.size() || u_.size() != ddu_.size()) {
      throw InvalidParams("basis needs s >= 1 functions with matching derivative families");
    }
  }

  /// Optional extended-precision derivative evaluators. Derivations whose
  /// linear systems lose digits to cancellation at small frequency*h (the
  /// extended-weight solve) use these when present; everything else stays
  /// on the double path. Catalog bases install them automatically.
  void set_extended_precision(std::vector<FnL> du, std::vector<FnL> ddu) {
    if (du.size() != u_.size() || ddu.size() != u_.size()) {
      throw InvalidParams("extended-precision family size mismatch");
    }
    dul_ = std::move(du);
    ddul_ = std::move(ddu);
  }

  bool has_extended_precision() const noexcept { return !dul_.empty(); }
  long double u1l(std::size_t k, long double t) const { return dul_[k](t); }
  long double u2l(std::size_t k, long double t) const { return ddul_[k](t); }

  std::size_t size() const noexcept { return u_.size(); }
  const std::string& name() const noexcept { return name_; }
  const std::map<std::string, double>& params() const noexcept { return params_; }
  const std::optional<SeparableCertificate>& certificate() const noexcept { return certificate_; }

  double u(std::size_t k, double t) const { return u_[k](t); }
  double u1(std::size_t k, double t) const { return du_[k](t); }
  double u2(std::size_t k, double t) const { return ddu_[k](t); }

  /// The fitting frequency when the basis has one ("omega" or "w").
  std::optional<double> fitting_frequency() const {
    if (auto it = params_.find("omega"); it != params_.end()) return it->second;
    if (auto it = params_.find("w"); it != params_.end()) return it->second;
    return std::nullopt;
  }

  /// (1, t, u_1(t), ..., u_s(t))
  std::vector<double> eval_uvec(double t) const {
    std::vector<double> v(size() + 2);
    v[0] = 1.0;
    v[1] = t;
    for (std::size_t k = 0; k < size(); ++k) v[k + 2] = u_[k](t);
    return v;
  }

  /// (0, 1, u_1'(t), ..., u_s'(t))
  std::vector<double> eval_uvec_d1(double t) const {
    std::vector<double> v(size() + 2);
    v[0] = 0.0;
    v[1] = 1.0;
    for (std::size_t k = 0; k < size(); ++k) v[k + 2] = du_[k](t);
    return v;
  }

  /// (0, 0, u_1''(t), ..., u_s''(t))
  std::vector<double> eval_uvec_d2(double t) const {
    std::vector<double> v(size() + 2);
    for (std::size_t k = 0; k < size(); ++k) v[k + 2] = ddu_[k](t);
    return v;
  }

 private:
  std::string name_;
  std::vector<Fn> u_, du_, ddu_;
  std::vector<FnL> dul_, ddul_;
  std::map<std::string, double> params_;
  std::optional<SeparableCertificate> certificate_;
};

namespace detail {

inline std::string format_param(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

inline int require_count(const std::map<std::string, double>& params, const std::string& key,
                         int fallback, int min_value = 1) {
  double v = fallback;
  if (auto it = params.find(key); it != params.end()) v = it->second;
  const double r = std::round(v);
  if (!(std::abs(v - r) < 1e-9) || r < min_value) {
    throw InvalidParams("parameter '" + key + "' must be an integer >= " +
                        std::to_string(min_value));
  }
  return static_cast<int>(r);
}

inline double require_frequency(const std::map<std::string, double>& params,
                                const std::string& key, double fallback) {
  double v = fallback;
  if (auto it = params.find(key); it != params.end()) v = it->second;
  if (v == 0.0 || !std::isfinite(v)) {
    throw InvalidParams("parameter '" + key + "' must be a nonzero finite frequency");
  }
  return v;
}

/// c * t^e with the convention 0 * t^e == 0, so vanished leading terms of
/// differentiated envelopes cannot turn into 0 * inf at t = 0.
inline double coef_pow(double c, double t, double e) {
  if (c == 0.0) return 0.0;
  return c * std::pow(t, e);
}

inline long double coef_pow_l(long double c, long double t, long double e) {
  if (c == 0.0L) return 0.0L;
  return c * std::pow(t, e);
}

}  // namespace detail

/// {t^2, ..., t^{s+1}}: the classical algebraic collocation basis.
inline BasisSpec poly_basis(std::size_t s) {
  if (s < 1) throw InvalidParams("poly basis needs s >= 1");
  std::vector<BasisSpec::Fn> u, du, ddu;
  for (std::size_t k = 0; k < s; ++k) {
    const double p = static_cast<double>(k + 2);
    u.push_back([p](double t) { return std::pow(t, p); });
    du.push_back([p](double t) { return p * std::pow(t, p - 1.0); });
    ddu.push_back([p](double t) { return p * (p - 1.0) * std::pow(t, p - 2.0); });
  }
  std::vector<BasisSpec::FnL> dul, ddul;
  for (std::size_t k = 0; k < s; ++k) {
    const long double p = static_cast<long double>(k + 2);
    dul.push_back([p](long double t) { return p * std::pow(t, p - 1.0L); });
    ddul.push_back([p](long double t) { return p * (p - 1.0L) * std::pow(t, p - 2.0L); });
  }
  // components of the augmented vector are t^k, k = 0..s+1
  DenseMatrix S(s + 2, s + 2);
  for (std::size_t k = 1; k < s + 2; ++k) S(k, k - 1) = static_cast<double>(k);
  std::vector<double> u0(s + 2, 0.0);
  u0[0] = 1.0;
  BasisSpec spec("poly:s=" + std::to_string(s), std::move(u), std::move(du), std::move(ddu),
                 {{"s", static_cast<double>(s)}},
                 SeparableCertificate{std::move(S), std::move(u0)});
  spec.set_extended_precision(std::move(dul), std::move(ddul));
  return spec;
}

/// {sin(f_1 t), cos(f_1 t), ..., sin(f_q t), cos(f_q t)} for distinct
/// nonzero frequencies.
inline BasisSpec trig_basis(const std::vector<double>& freqs, std::string name = {},
                            std::map<std::string, double> params = {}) {
  if (freqs.empty()) throw InvalidParams("trig basis needs at least one frequency");
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    if (freqs[i] == 0.0 || !std::isfinite(freqs[i])) {
      throw InvalidParams("trig basis frequency must be nonzero and finite");
    }
    for (std::size_t j = i + 1; j < freqs.size(); ++j) {
      if (freqs[i] == freqs[j]) throw InvalidParams("trig basis has a duplicate frequency");
    }
  }
  std::vector<BasisSpec::Fn> u, du, ddu;
  std::vector<BasisSpec::FnL> dul, ddul;
  for (double f : freqs) {
    u.push_back([f](double t) { return std::sin(f * t); });
    du.push_back([f](double t) { return f * std::cos(f * t); });
    ddu.push_back([f](double t) { return -f * f * std::sin(f * t); });
    u.push_back([f](double t) { return std::cos(f * t); });
    du.push_back([f](double t) { return -f * std::sin(f * t); });
    ddu.push_back([f](double t) { return -f * f * std::cos(f * t); });
    const long double fl = f;
    dul.push_back([fl](long double t) { return fl * std::cos(fl * t); });
    ddul.push_back([fl](long double t) { return -fl * fl * std::sin(fl * t); });
    dul.push_back([fl](long double t) { return -fl * std::sin(fl * t); });
    ddul.push_back([fl](long double t) { return -fl * fl * std::cos(fl * t); });
  }
  const std::size_t s = u.size();
  DenseMatrix S(s + 2, s + 2);
  S(1, 0) = 1.0;
  std::vector<double> u0(s + 2, 0.0);
  u0[0] = 1.0;
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    const std::size_t r = 2 + 2 * i;  // sin row; cos row is r+1
    S(r, r + 1) = freqs[i];
    S(r + 1, r) = -freqs[i];
    u0[r + 1] = 1.0;
  }
  if (name.empty()) {
    name = "trig:omega=" + detail::format_param(freqs[0]) + ",n=" + std::to_string(freqs.size());
    params = {{"omega", freqs[0]}, {"n", static_cast<double>(freqs.size())}};
  }
  BasisSpec spec(std::move(name), std::move(u), std::move(du), std::move(ddu), std::move(params),
                 SeparableCertificate{std::move(S), std::move(u0)});
  spec.set_extended_precision(std::move(dul), std::move(ddul));
  return spec;
}

/// {sin(k w t), cos(k w t)}_{k=1..m} joined with {t^2, ..., t^n}.
inline BasisSpec mixed_basis(double omega, int m, int n) {
  if (omega == 0.0 || !std::isfinite(omega)) throw InvalidParams("mixed basis needs omega != 0");
  if (m < 1 || n < 1) throw InvalidParams("mixed basis needs m >= 1 and n >= 1");
  std::vector<BasisSpec::Fn> u, du, ddu;
  std::vector<BasisSpec::FnL> dul, ddul;
  std::vector<double> freqs;
  for (int k = 1; k <= m; ++k) freqs.push_back(k * omega);
  for (double f : freqs) {
    u.push_back([f](double t) { return std::sin(f * t); });
    du.push_back([f](double t) { return f * std::cos(f * t); });
    ddu.push_back([f](double t) { return -f * f * std::sin(f * t); });
    u.push_back([f](double t) { return std::cos(f * t); });
    du.push_back([f](double t) { return -f * std::sin(f * t); });
    ddu.push_back([f](double t) { return -f * f * std::cos(f * t); });
    const long double fl = f;
    dul.push_back([fl](long double t) { return fl * std::cos(fl * t); });
    ddul.push_back([fl](long double t) { return -fl * fl * std::sin(fl * t); });
    dul.push_back([fl](long double t) { return -fl * std::sin(fl * t); });
    ddul.push_back([fl](long double t) { return -fl * fl * std::cos(fl * t); });
  }
  for (int k = 2; k <= n; ++k) {
    const double p = k;
    u.push_back([p](double t) { return std::pow(t, p); });
    du.push_back([p](double t) { return p * std::pow(t, p - 1.0); });
    ddu.push_back([p](double t) { return p * (p - 1.0) * std::pow(t, p - 2.0); });
    const long double pl = k;
    dul.push_back([pl](long double t) { return pl * std::pow(t, pl - 1.0L); });
    ddul.push_back([pl](long double t) { return pl * (pl - 1.0L) * std::pow(t, pl - 2.0L); });
  }
  const std::size_t s = u.size();
  DenseMatrix S(s + 2, s + 2);
  S(1, 0) = 1.0;
  std::vector<double> u0(s + 2, 0.0);
  u0[0] = 1.0;
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    const std::size_t r = 2 + 2 * i;
    S(r, r + 1) = freqs[i];
    S(r + 1, r) = -freqs[i];
    u0[r + 1] = 1.0;
  }
  // polynomial block: component t^k differentiates into the one before it
  const std::size_t poly_base = 2 + 2 * freqs.size();
  for (int k = 2; k <= n; ++k) {
    const std::size_t row = poly_base + static_cast<std::size_t>(k - 2);
    const std::size_t col = (k == 2) ? 1 : row - 1;
    S(row, col) = static_cast<double>(k);
  }
  BasisSpec spec("mixed:omega=" + detail::format_param(omega) + ",m=" + std::to_string(m) +
                     ",n=" + std::to_string(n),
                 std::move(u), std::move(du), std::move(ddu),
                 {{"omega", omega}, {"m", static_cast<double>(m)}, {"n", static_cast<double>(n)}},
                 SeparableCertificate{std::move(S), std::move(u0)});
  spec.set_extended_precision(std::move(dul), std::move(ddul));
  return spec;
}

/// {t^p sin(w t), t^p cos(w t)}_{p=0..n}: trig with a polynomial envelope.
inline BasisSpec trig_poly_envelope_basis(double omega, int n) {
  if (omega == 0.0 || !std::isfinite(omega)) throw InvalidParams("trigpoly_env basis needs omega != 0");
  if (n < 1) throw InvalidParams("trigpoly_env basis needs n >= 1");
  std::vector<BasisSpec::Fn> u, du, ddu;
  std::vector<BasisSpec::FnL> dul, ddul;
  const double w = omega;
  for (int p = 0; p <= n; ++p) {
    const double dp = p;
    u.push_back([w, dp](double t) { return std::pow(t, dp) * std::sin(w * t); });
    du.push_back([w, dp](double t) {
      return detail::coef_pow(dp, t, dp - 1.0) * std::sin(w * t) +
             w * std::pow(t, dp) * std::cos(w * t);
    });
    ddu.push_back([w, dp](double t) {
      return detail::coef_pow(dp * (dp - 1.0), t, dp - 2.0) * std::sin(w * t) +
             detail::coef_pow(2.0 * dp * w, t, dp - 1.0) * std::cos(w * t) -
             w * w * std::pow(t, dp) * std::sin(w * t);
    });
    u.push_back([w, dp](double t) { return std::pow(t, dp) * std::cos(w * t); });
    du.push_back([w, dp](double t) {
      return detail::coef_pow(dp, t, dp - 1.0) * std::cos(w * t) -
             w * std::pow(t, dp) * std::sin(w * t);
    });
    ddu.push_back([w, dp](double t) {
      return detail::coef_pow(dp * (dp - 1.0), t, dp - 2.0) * std::cos(w * t) -
             detail::coef_pow(2.0 * dp * w, t, dp - 1.0) * std::sin(w * t) -
             w * w * std::pow(t, dp) * std::cos(w * t);
    });
    const long double wl = omega;
    const long double pl = p;
    dul.push_back([wl, pl](long double t) {
      return detail::coef_pow_l(pl, t, pl - 1.0L) * std::sin(wl * t) +
             wl * std::pow(t, pl) * std::cos(wl * t);
    });
    ddul.push_back([wl, pl](long double t) {
      return detail::coef_pow_l(pl * (pl - 1.0L), t, pl - 2.0L) * std::sin(wl * t) +
             detail::coef_pow_l(2.0L * pl * wl, t, pl - 1.0L) * std::cos(wl * t) -
             wl * wl * std::pow(t, pl) * std::sin(wl * t);
    });
    dul.push_back([wl, pl](long double t) {
      return detail::coef_pow_l(pl, t, pl - 1.0L) * std::cos(wl * t) -
             wl * std::pow(t, pl) * std::sin(wl * t);
    });
    ddul.push_back([wl, pl](long double t) {
      return detail::coef_pow_l(pl * (pl - 1.0L), t, pl - 2.0L) * std::cos(wl * t) -
             detail::coef_pow_l(2.0L * pl * wl, t, pl - 1.0L) * std::sin(wl * t) -
             wl * wl * std::pow(t, pl) * std::cos(wl * t);
    });
  }
  const std::size_t s = u.size();
  DenseMatrix S(s + 2, s + 2);
  S(1, 0) = 1.0;
  std::vector<double> u0(s + 2, 0.0);
  u0[0] = 1.0;
  // block p holds (t^p sin, t^p cos) at rows 2+2p, 3+2p
  for (int p = 0; p <= n; ++p) {
    const std::size_t rs = 2 + 2 * static_cast<std::size_t>(p);
    const std::size_t rc = rs + 1;
    S(rs, rc) = w;
    S(rc, rs) = -w;
    if (p > 0) {
      S(rs, rs - 2) = static_cast<double>(p);  // p t^{p-1} sin
      S(rc, rc - 2) = static_cast<double>(p);  // p t^{p-1} cos
    }
    if (p == 0) u0[rc] = 1.0;
  }
  BasisSpec spec("trigpoly_env:omega=" + detail::format_param(omega) + ",n=" + std::to_string(n),
                 std::move(u), std::move(du), std::move(ddu),
                 {{"omega", omega}, {"n", static_cast<double>(n)}},
                 SeparableCertificate{std::move(S), std::move(u0)});
  spec.set_extended_precision(std::move(dul), std::move(ddul));
  return spec;
}

/// {t^2, ..., t^n} joined with {t^j exp(w t), t^j exp(-w t)}_{j=0..m}.
inline BasisSpec exp_poly_basis(double w, int n, int m) {
  if (w == 0.0 || !std::isfinite(w)) throw InvalidParams("expoly basis needs w != 0");
  if (n < 1 || m < 0) throw InvalidParams("expoly basis needs n >= 1 and m >= 0");
  std::vector<BasisSpec::Fn> u, du, ddu;
  std::vector<BasisSpec::FnL> dul, ddul;
  for (int k = 2; k <= n; ++k) {
    const double p = k;
    u.push_back([p](double t) { return std::pow(t, p); });
    du.push_back([p](double t) { return p * std::pow(t, p - 1.0); });
    ddu.push_back([p](double t) { return p * (p - 1.0) * std::pow(t, p - 2.0); });
    const long double pl = k;
    dul.push_back([pl](long double t) { return pl * std::pow(t, pl - 1.0L); });
    ddul.push_back([pl](long double t) { return pl * (pl - 1.0L) * std::pow(t, pl - 2.0L); });
  }
  for (int j = 0; j <= m; ++j) {
    const double dj = j;
    for (double sgn : {1.0, -1.0}) {
      const double a = sgn * w;
      u.push_back([dj, a](double t) { return std::pow(t, dj) * std::exp(a * t); });
      du.push_back([dj, a](double t) {
        return (detail::coef_pow(dj, t, dj - 1.0) + a * std::pow(t, dj)) * std::exp(a * t);
      });
      ddu.push_back([dj, a](double t) {
        return (detail::coef_pow(dj * (dj - 1.0), t, dj - 2.0) +
                detail::coef_pow(2.0 * dj * a, t, dj - 1.0) + a * a * std::pow(t, dj)) *
               std::exp(a * t);
      });
      const long double djl = j;
      const long double al = a;
      dul.push_back([djl, al](long double t) {
        return (detail::coef_pow_l(djl, t, djl - 1.0L) + al * std::pow(t, djl)) * std::exp(al * t);
      });
      ddul.push_back([djl, al](long double t) {
        return (detail::coef_pow_l(djl * (djl - 1.0L), t, djl - 2.0L) +
                detail::coef_pow_l(2.0L * djl * al, t, djl - 1.0L) + al * al * std::pow(t, djl)) *
               std::exp(al * t);
      });
    }
  }
  const std::size_t s = u.size();
  DenseMatrix S(s + 2, s + 2);
  S(1, 0) = 1.0;
  std::vector<double> u0(s + 2, 0.0);
  u0[0] = 1.0;
  for (int k = 2; k <= n; ++k) {
    const std::size_t row = static_cast<std::size_t>(k);
    S(row, row - 1) = static_cast<double>(k);
  }
  // exponential block: pairs (t^j e^{wt}, t^j e^{-wt}) at rows n+1+2j, n+2+2j
  const std::size_t exp_base = static_cast<std::size_t>(n) + 1;
  for (int j = 0; j <= m; ++j) {
    const std::size_t rp = exp_base + 2 * static_cast<std::size_t>(j);
    const std::size_t rm = rp + 1;
    S(rp, rp) = w;
    S(rm, rm) = -w;
    if (j > 0) {
      S(rp, rp - 2) = static_cast<double>(j);
      S(rm, rm - 2) = static_cast<double>(j);
    } else {
      u0[rp] = 1.0;
      u0[rm] = 1.0;
    }
  }
  BasisSpec spec("expoly:w=" + detail::format_param(w) + ",n=" + std::to_string(n) +
                     ",m=" + std::to_string(m),
                 std::move(u), std::move(du), std::move(ddu),
                 {{"w", w}, {"n", static_cast<double>(n)}, {"m", static_cast<double>(m)}},
                 SeparableCertificate{std::move(S), std::move(u0)});
  spec.set_extended_precision(std::move(dul), std::move(ddul));
  return spec;
}

/// Catalog dispatcher. Kinds: poly, trig, mixed, trigpoly_env, expoly.
/// The "trig" kind generates harmonics k*omega for k = 1..n.
inline BasisSpec builtin_basis(const std::string& kind,
                               const std::map<std::string, double>& params = {}) {
  auto check_keys = [&](std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : params) {
      (void)value;
      bool ok = false;
      for (const char* a : allowed)
        if (key == a) ok = true;
      if (!ok) throw InvalidParams("unknown parameter '" + key + "' for basis kind '" + kind + "'");
    }
  };
  if (kind == "poly") {
    check_keys({"s"});
    return poly_basis(static_cast<std::size_t>(detail::require_count(params, "s", 2)));
  }
  if (kind == "trig") {
    check_keys({"omega", "n"});
    const double omega = detail::require_frequency(params, "omega", 1.0);
    const int n = detail::require_count(params, "n", 1);
    std::vector<double> freqs;
    for (int k = 1; k <= n; ++k) freqs.push_back(k * omega);
    return trig_basis(freqs,
                      "trig:omega=" + detail::format_param(omega) + ",n=" + std::to_string(n),
                      {{"omega", omega}, {"n", static_cast<double>(n)}});
  }
  if (kind == "mixed") {
    check_keys({"omega", "m", "n"});
    return mixed_basis(detail::require_frequency(params, "omega", 1.0),
                       detail::require_count(params, "m", 1), detail::require_count(params, "n", 2));
  }
  if (kind == "trigpoly_env") {
    check_keys({"omega", "n"});
    return trig_poly_envelope_basis(detail::require_frequency(params, "omega", 1.0),
                                    detail::require_count(params, "n", 1));
  }
  if (kind == "expoly") {
    check_keys({"w", "n", "m"});
    return exp_poly_basis(detail::require_frequency(params, "w", 1.0),
                          detail::require_count(params, "n", 2),
                          detail::require_count(params, "m", 1, 0));
  }
  throw InvalidParams("unknown basis kind '" + kind + "'");
}

/// Parse a basis config string such as "trig:omega=1,n=1" (case-insensitive).
inline BasisSpec parse_basis_config(std::string config) {
  for (char& c : config) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  std::string kind = config;
  std::map<std::string, double> params;
  if (const auto colon = config.find(':'); colon != std::string::npos) {
    kind = config.substr(0, colon);
    std::string rest = config.substr(colon + 1);
    std::size_t pos = 0;
    while (pos < rest.size()) {
      std::size_t comma = rest.find(',', pos);
      if (comma == std::string::npos) comma = rest.size();
      const std::string item = rest.substr(pos, comma - pos);
      const std::size_t eq = item.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 >= item.size()) {
        throw InvalidParams("malformed basis parameter '" + item + "'");
      }
      const std::string key = item.substr(0, eq);
      char* end = nullptr;
      const double value = std::strtod(item.c_str() + eq + 1, &end);
      if (end != item.c_str() + item.size()) {
        throw InvalidParams("malformed basis parameter value in '" + item + "'");
      }
      params[key] = value;
      pos = comma + 1;
    }
  }
  return builtin_basis(kind, params);
}

struct CollocationReport {
  double det_E = 0.0;
  double det_F = 0.0;
  double rcond_E = 0.0;
  double rcond_F = 0.0;
  bool satisfied = false;
};

/// E and F at (t, h): row i, column k with
///   E(i,k) = u_k(t + c_i h) - u_k(t) - c_i h u_k'(t)
///   F(i,k) = u_k''(t + c_i h)
inline std::pair<DenseMatrix, DenseMatrix> collocation_matrices(const BasisSpec& basis,
                                                                std::span<const double> c,
                                                                double t, double h) {
  const std::size_t s = basis.size();
  if (c.size() != s) throw InvalidParams("node count must equal basis size");
  DenseMatrix E(s, s), F(s, s);
  for (std::size_t k = 0; k < s; ++k) {
    const double ut = basis.u(k, t);
    const double dut = basis.u1(k, t);
    for (std::size_t i = 0; i < s; ++i) {
      const double ti = t + c[i] * h;
      E(i, k) = basis.u(k, ti) - ut - c[i] * h * dut;
      F(i, k) = basis.u2(k, ti);
    }
  }
  return {std::move(E), std::move(F)};
}

/// Nonsingularity is judged by the reciprocal condition estimate, not the
/// raw determinant, since the latter scales like a power of h.
inline CollocationReport check_collocation(const BasisSpec& basis, std::span<const double> c,
                                           double t, double h, double threshold = 1e-12) {
  auto [E, F] = collocation_matrices(basis, c, t, h);
  CollocationReport rep;
  rep.det_E = determinant(E);
  rep.det_F = determinant(F);
  rep.rcond_E = rcond_estimate(E);
  rep.rcond_F = rcond_estimate(F);
  rep.satisfied = rep.rcond_E > threshold && rep.rcond_F > threshold;
  return rep;
}

/// Max over the grid of ||u'(t) - S u(t)||_inf for the certificate's S.
inline double check_separability(const BasisSpec& basis, std::span<const double> grid) {
  if (!basis.certificate()) {
    throw MissingCertificate("basis '" + basis.name() + "' has no separable certificate");
  }
  const auto& cert = *basis.certificate();
  double worst = 0.0;
  for (double t : grid) {
    const auto v = basis.eval_uvec(t);
    const auto dv = basis.eval_uvec_d1(t);
    const auto sv = matvec(cert.S, v);
    for (std::size_t i = 0; i < v.size(); ++i) {
      worst = std::max(worst, std::abs(dv[i] - sv[i]));
    }
  }
  return worst;
}

}  // namespace frkn
