#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "frkn/basis.hpp"
#include "frkn/errors.hpp"
#include "frkn/integrator.hpp"
#include "frkn/problems.hpp"
#include "frkn/stability.hpp"
#include "frkn/tableau.hpp"

namespace frkn {

/// The six benchmarked methods. Suffix G means Gauss nodes, otherwise
/// c = (0.2, 1); suffix x means the extended derivative update; FRKN uses
/// the unit-frequency trig basis, RKN the polynomial one.
enum class Method { FRKN2G, RKN2G, FRKN2, FRKN2x, RKN2, RKN2x };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::FRKN2G: return "FRKN2G";
    case Method::RKN2G: return "RKN2G";
    case Method::FRKN2: return "FRKN2";
    case Method::FRKN2x: return "FRKN2x";
    case Method::RKN2: return "RKN2";
    default: return "RKN2x";
  }
}

inline Method parse_method(const std::string& name) {
  for (Method m : {Method::FRKN2G, Method::RKN2G, Method::FRKN2, Method::FRKN2x, Method::RKN2,
                   Method::RKN2x}) {
    if (name == method_name(m)) return m;
  }
  throw InvalidInput("harness", "unknown method '" + name + "'");
}

struct MethodDef {
  BasisSpec basis;
  NodeVector nodes;
  DerivativeUpdate variant;
};

inline MethodDef make_method(Method m) {
  const bool fitted = (m == Method::FRKN2G || m == Method::FRKN2 || m == Method::FRKN2x);
  const bool gauss = (m == Method::FRKN2G || m == Method::RKN2G);
  const bool extended = (m == Method::FRKN2x || m == Method::RKN2x);
  return MethodDef{
      fitted ? builtin_basis("trig", {{"omega", 1.0}, {"n", 1.0}}) : poly_basis(2),
      gauss ? NodeVector::gauss(2) : NodeVector({0.2, 1.0}),
      extended ? DerivativeUpdate::extended : DerivativeUpdate::standard,
  };
}

struct ErrorRow {
  double h = 0.0;
  double dy1 = 0.0;  // log10 max-norm errors per component
  double dy2 = 0.0;
  double order1 = std::numeric_limits<double>::quiet_NaN();  // vs previous row
  double order2 = std::numeric_limits<double>::quiet_NaN();
};

struct ErrorTable {
  std::string method_label;
  double e = 0.0;
  std::vector<ErrorRow> rows;
};

/// Integrate the two-body problem over [0, 20] for each h, measure
/// log10 of the max error against the anomaly oracle at the step points.
inline ErrorTable run_error_table(Method m, double e, std::span<const double> h_list,
                                  const IntegratorConfig& base_cfg = {}) {
  ErrorTable table;
  table.method_label = method_name(m);
  table.e = e;

  const auto def = make_method(m);
  const KeplerParams kp{e};
  const auto sys = twobody_system(kp);

  for (double h : h_list) {
    IntegratorConfig cfg = base_cfg;
    cfg.variant = def.variant;
    Trajectory traj;
    try {
      traj = integrate(def.basis, def.nodes, sys, 0.0, 20.0, h, cfg);
    } catch (const Error& err) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s at h=%.10g: %s", table.method_label.c_str(), h,
                    err.detail().c_str());
      throw StageNoConvergence(buf);
    }
    double worst1 = 0.0, worst2 = 0.0;
    for (const auto& p : traj) {
      const auto ex = twobody_exact(p.t, kp);
      worst1 = std::max(worst1, std::abs(p.y[0] - ex.y1));
      worst2 = std::max(worst2, std::abs(p.y[1] - ex.y2));
    }
    ErrorRow row;
    row.h = h;
    row.dy1 = std::log10(worst1);
    row.dy2 = std::log10(worst2);
    if (!table.rows.empty()) {
      const auto& prev = table.rows.back();
      const double span = std::log10(prev.h) - std::log10(h);
      row.order1 = (prev.dy1 - row.dy1) / span;
      row.order2 = (prev.dy2 - row.dy2) / span;
    }
    table.rows.push_back(row);
  }
  return table;
}

struct OrderEstimate {
  double order1 = 0.0;
  double order2 = 0.0;
};

/// Least-squares slope of the log10 errors against log10 h over the last
/// four rows (the asymptotic regime; early rows can be pre-asymptotic).
inline OrderEstimate empirical_order(const ErrorTable& table) {
  const std::size_t n = table.rows.size();
  if (n < 3) throw InsufficientRows("empirical_order needs at least 3 rows");
  const std::size_t use = std::min<std::size_t>(4, n);
  const std::size_t first = n - use;

  auto slope = [&](auto value) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = first; i < n; ++i) {
      const double x = std::log10(table.rows[i].h);
      const double y = value(table.rows[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double k = static_cast<double>(use);
    return (k * sxy - sx * sy) / (k * sxx - sx * sx);
  };
  return {slope([](const ErrorRow& r) { return r.dy1; }),
          slope([](const ErrorRow& r) { return r.dy2; })};
}

/// "h,dy1,dy2,order1,order2" rows; first row's orders print as nan.
inline void write_error_table_csv(std::ostream& os, const ErrorTable& table) {
  os << "h,dy1,dy2,order1,order2\n";
  char buf[160];
  for (const auto& r : table.rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", r.h, r.dy1, r.dy2, r.order1,
                  r.order2);
    os << buf;
  }
}

inline std::string error_table_to_json(const ErrorTable& table) {
  char buf[64];
  // strict JSON: non-finite values (the first row has no order yet) print
  // as null, not nan
  auto num = [&buf](double v) -> std::string {
    if (!std::isfinite(v)) return "null";
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  };
  std::string out = "{\"method\":\"" + table.method_label + "\",\"e\":" + num(table.e);
  out += ",\"rows\":[";
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    if (i) out += ',';
    out += "{\"h\":" + num(r.h) + ",\"dy1\":" + num(r.dy1) + ",\"dy2\":" + num(r.dy2) +
           ",\"order1\":" + num(r.order1) + ",\"order2\":" + num(r.order2) + "}";
  }
  out += "]";
  if (table.rows.size() >= 3) {
    const auto est = empirical_order(table);
    out += ",\"order1\":" + num(est.order1) + ",\"order2\":" + num(est.order2);
  }
  out += "}";
  return out;
}

/// "{method}_e{e}.csv"
inline std::string error_table_filename(const ErrorTable& table) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_e%g.csv", table.method_label.c_str(), table.e);
  return buf;
}

/// Region scan for a named method, written as CSV. IO failures surface the
/// path in the error.
inline void emit_region_data(Method m, std::vector<double> nu_grid, std::vector<double> z_grid,
                             const std::string& path, double tol_boundary = 1e-10) {
  const auto def = make_method(m);
  auto scan = scan_region(def.basis, def.nodes, std::move(nu_grid), std::move(z_grid),
                          tol_boundary);
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  write_region_csv(os, scan);
  os.flush();
  if (!os) throw IoError("write failed for '" + path + "'");
}

}  // namespace frkn
