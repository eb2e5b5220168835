// Command-line front end: tableau derivation, IVP integration, convergence
// tables, stability scans, and node orthogonality checks, with
// machine-readable CSV/JSON output.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "frkn/frkn.hpp"

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// "1/256" or "0.5"
double parse_real(const std::string& text) {
  const auto slash = text.find('/');
  try {
    if (slash == std::string::npos) return std::stod(text);
    const double num = std::stod(text.substr(0, slash));
    const double den = std::stod(text.substr(slash + 1));
    if (den == 0.0) throw UsageError("zero denominator in '" + text + "'");
    return num / den;
  } catch (const std::invalid_argument&) {
    throw UsageError("cannot parse number '" + text + "'");
  } catch (const std::out_of_range&) {
    throw UsageError("number out of range '" + text + "'");
  }
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t next = text.find(sep, pos);
    if (next == std::string::npos) next = text.size();
    out.push_back(text.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

// Comma list of rationals; "..." continues the geometric progression of
// the two preceding entries until the following entry is reached, so the
// dyadic table grids can be written as "1/2,1/4,...,1/256".
std::vector<double> parse_real_list(const std::string& text) {
  const auto items = split(text, ',');
  std::vector<double> values;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i] == "...") {
      if (values.size() < 2 || i + 1 >= items.size()) {
        throw UsageError("'...' needs two entries before it and one after");
      }
      const double ratio = values.back() / values[values.size() - 2];
      const double stop = parse_real(items[i + 1]);
      if (!(ratio > 0.0) || ratio == 1.0) throw UsageError("'...' progression is not geometric");
      double v = values.back() * ratio;
      int guard = 0;
      while (std::abs(v - stop) > 1e-9 * std::abs(stop)) {
        values.push_back(v);
        v *= ratio;
        if (++guard > 64) throw UsageError("'...' does not reach its bound");
      }
    } else if (!items[i].empty()) {
      values.push_back(parse_real(items[i]));
    }
  }
  if (values.empty()) throw UsageError("empty number list");
  return values;
}

frkn::NodeVector parse_nodes(const std::string& text, std::size_t s) {
  if (text == "gauss") return frkn::NodeVector::gauss(s);
  auto values = parse_real_list(text);
  if (values.size() != s) {
    throw UsageError("node count " + std::to_string(values.size()) + " does not match s = " +
                     std::to_string(s));
  }
  return frkn::NodeVector(std::move(values));
}

// step width from exactly one of --h / --nu
double resolve_step(const frkn::BasisSpec& basis, const std::string& h_text,
                    const std::string& nu_text) {
  if (h_text.empty() == nu_text.empty()) {
    throw UsageError("give exactly one of --h or --nu");
  }
  if (!h_text.empty()) return parse_real(h_text);
  const auto freq = basis.fitting_frequency();
  if (!freq) throw UsageError("--nu needs a basis with a fitting frequency; use --h");
  return parse_real(nu_text) / *freq;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw frkn::IoError("cannot open '" + path + "' for writing");
      path_ = path;
    }
  }
  std::ostream& stream() { return path_.empty() ? std::cout : file_; }
  void finish() {
    stream().flush();
    if (!path_.empty() && !file_) throw frkn::IoError("write failed for '" + path_ + "'");
  }

 private:
  std::ofstream file_;
  std::string path_;
};

// "%.4e" with the exponent's zero padding stripped: -6.6667e-02 -> -6.6667e-2
std::string short_sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4e", v);
  std::string s = buf;
  const auto e = s.find('e');
  if (e != std::string::npos) {
    std::size_t d = e + 2;  // past sign
    while (d + 1 < s.size() && s[d] == '0') s.erase(d, 1);
  }
  return s;
}

struct TableauArgs {
  std::string basis, nodes, h, nu, variant = "standard", format = "json", output;
};

int run_tableau(const TableauArgs& a) {
  auto basis = frkn::parse_basis_config(a.basis);
  auto c = parse_nodes(a.nodes, basis.size());
  const double h = resolve_step(basis, a.h, a.nu);
  if (a.format != "json") throw UsageError("tableau output supports --format json only");

  auto tab = frkn::derive_tableau(basis, c, 0.0, h);
  if (a.variant == "extended") {
    tab.extended = frkn::derive_extended_d(basis, c, h);
  } else if (a.variant != "standard") {
    throw UsageError("--variant must be standard or extended");
  }
  Output out(a.output);
  out.stream() << frkn::tableau_to_json(tab) << "\n";
  out.finish();
  return 0;
}

struct IntegrateArgs {
  std::string problem = "twobody", basis, nodes, h, T = "20", t0 = "0";
  std::string variant = "standard", policy = "frozen", output;
  double e = 0.5, lambda = -1.0, y0 = 1.0, yp0 = 0.0;
};

int run_integrate(const IntegrateArgs& a) {
  auto basis = frkn::parse_basis_config(a.basis);
  auto c = parse_nodes(a.nodes, basis.size());
  const double h = parse_real(a.h);
  const double length = parse_real(a.T);
  const double t0 = parse_real(a.t0);

  frkn::OdeSystem2 sys;
  if (a.problem == "twobody") {
    sys = frkn::twobody_system(frkn::KeplerParams{a.e});
  } else if (a.problem == "linear") {
    sys = frkn::linear_system(a.lambda, a.y0, a.yp0);
  } else {
    throw UsageError("--problem must be twobody or linear");
  }

  frkn::IntegratorConfig cfg;
  if (a.variant == "extended") {
    cfg.variant = frkn::DerivativeUpdate::extended;
  } else if (a.variant != "standard") {
    throw UsageError("--variant must be standard or extended");
  }
  if (a.policy == "per-step") {
    cfg.policy = frkn::CoefficientPolicy::per_step_t;
  } else if (a.policy != "frozen") {
    throw UsageError("--policy must be frozen or per-step");
  }

  auto traj = frkn::integrate(basis, c, sys, t0, length, h, cfg);
  Output out(a.output);
  frkn::write_trajectory_csv(out.stream(), traj);
  out.finish();
  return 0;
}

struct ConvergeArgs {
  std::string method, h_list, format = "csv", output;
  double e = 0.5;
};

int run_converge(const ConvergeArgs& a) {
  const auto method = frkn::parse_method(a.method);
  const auto hs = parse_real_list(a.h_list);
  auto table = frkn::run_error_table(method, a.e, hs);
  Output out(a.output);
  if (a.format == "csv") {
    frkn::write_error_table_csv(out.stream(), table);
  } else if (a.format == "json") {
    out.stream() << frkn::error_table_to_json(table) << "\n";
  } else {
    throw UsageError("--format must be csv or json");
  }
  out.finish();
  return 0;
}

struct StabilityArgs {
  std::string basis, nodes, mode = "region", nu_list, nu;
  std::string z_min = "-12", z_max = "-0.01", z_step = "0.01";
  double tol_boundary = 1e-10;
  std::string output;
};

std::vector<double> build_z_grid(const StabilityArgs& a) {
  const double lo = parse_real(a.z_min);
  const double hi = parse_real(a.z_max);
  const double step = parse_real(a.z_step);
  if (!(step > 0.0) || !(lo <= hi)) throw UsageError("need z-min <= z-max and z-step > 0");
  if (hi > 0.0) throw UsageError("stability scans live on the negative z axis");
  std::vector<double> grid;
  for (double z = hi; z >= lo - 1e-12; z -= step) grid.push_back(z);
  return grid;
}

int run_stability(const StabilityArgs& a) {
  auto basis = frkn::parse_basis_config(a.basis);
  auto c = parse_nodes(a.nodes, basis.size());
  auto z_grid = build_z_grid(a);

  Output out(a.output);
  if (a.mode == "region") {
    if (a.nu_list.empty()) throw UsageError("region mode needs --nu-list");
    auto scan = frkn::scan_region(basis, c, parse_real_list(a.nu_list), z_grid, a.tol_boundary);
    frkn::write_region_csv(out.stream(), scan);
  } else if (a.mode == "radius") {
    if (a.nu.empty()) throw UsageError("radius mode needs --nu");
    auto scan = frkn::scan_region(basis, c, {parse_real(a.nu)}, z_grid, a.tol_boundary);
    std::vector<double> rho(scan.z_grid.size());
    for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = scan.at(0, i).rho;
    frkn::write_radius_csv(out.stream(), scan.z_grid, rho);
  } else {
    throw UsageError("--mode must be region or radius");
  }
  out.finish();
  return 0;
}

struct OrthogonalityArgs {
  std::string nodes;
  int q = 1;
  std::string output;
};

int run_orthogonality(const OrthogonalityArgs& a) {
  auto values = parse_real_list(a.nodes);
  const auto rep = frkn::verify_orthogonality(frkn::NodeVector(std::move(values)), a.q);
  Output out(a.output);
  out.stream() << (rep.satisfied ? "true" : "false");
  for (std::size_t j = 0; j < rep.residuals.size(); ++j) {
    out.stream() << " residual" << j << "=" << short_sci(rep.residuals[j]);
  }
  out.stream() << "\n";
  out.finish();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"functionally fitted Runge-Kutta-Nystrom toolkit"};
  app.set_help_flag("--help", "print help and exit");  // keep --h free for the step size
  app.require_subcommand(1);

  TableauArgs ta;
  auto* tableau = app.add_subcommand("tableau", "derive method coefficients for a basis");
  tableau->add_option("--basis", ta.basis, "basis config, e.g. trig:omega=1,n=1")->required();
  tableau->add_option("--nodes", ta.nodes, "'gauss' or comma list, e.g. 0.2,1")->required();
  tableau->add_option("--h", ta.h, "step size (rational like 1/256 accepted)");
  tableau->add_option("--nu", ta.nu, "frequency*step; needs a fitted basis");
  tableau->add_option("--variant", ta.variant, "standard|extended");
  tableau->add_option("--format", ta.format, "json");
  tableau->add_option("--output", ta.output, "output file (default stdout)");

  IntegrateArgs ia;
  auto* integrate = app.add_subcommand("integrate", "fixed-step integration of an IVP");
  integrate->add_option("--problem", ia.problem, "twobody|linear");
  integrate->add_option("--e", ia.e, "two-body eccentricity");
  integrate->add_option("--lambda", ia.lambda, "linear test parameter");
  integrate->add_option("--y0", ia.y0, "linear initial value");
  integrate->add_option("--yp0", ia.yp0, "linear initial slope");
  integrate->add_option("--basis", ia.basis, "basis config")->required();
  integrate->add_option("--nodes", ia.nodes, "'gauss' or comma list")->required();
  integrate->add_option("--h", ia.h, "step size")->required();
  integrate->add_option("--T", ia.T, "interval length (default 20)");
  integrate->add_option("--t0", ia.t0, "start time (default 0)");
  integrate->add_option("--variant", ia.variant, "standard|extended");
  integrate->add_option("--policy", ia.policy, "frozen|per-step");
  integrate->add_option("--output", ia.output, "output file (default stdout)");

  ConvergeArgs ca;
  auto* converge = app.add_subcommand("converge", "two-body convergence table for a method");
  converge->add_option("--method", ca.method, "FRKN2G|RKN2G|FRKN2|FRKN2x|RKN2|RKN2x")->required();
  converge->add_option("--e", ca.e, "eccentricity")->required();
  converge->add_option("--h-list", ca.h_list, "comma list; '...' continues the progression")
      ->required();
  converge->add_option("--format", ca.format, "csv|json");
  converge->add_option("--output", ca.output, "output file (default stdout)");

  StabilityArgs sa;
  auto* stability = app.add_subcommand("stability", "spectral-radius scans on the negative axis");
  stability->add_option("--basis", sa.basis, "basis config")->required();
  stability->add_option("--nodes", sa.nodes, "'gauss' or comma list")->required();
  stability->add_option("--mode", sa.mode, "region|radius");
  stability->add_option("--nu-list", sa.nu_list, "nu grid for region mode");
  stability->add_option("--nu", sa.nu, "single nu for radius mode");
  stability->add_option("--z-min", sa.z_min, "left end of the z grid (default -12)");
  stability->add_option("--z-max", sa.z_max, "right end of the z grid (default -0.01)");
  stability->add_option("--z-step", sa.z_step, "z grid spacing (default 0.01)");
  stability->add_option("--tol-boundary", sa.tol_boundary, "rho = 1 classification band");
  stability->add_option("--output", sa.output, "output file (default stdout)");

  OrthogonalityArgs oa;
  auto* ortho = app.add_subcommand("orthogonality", "node orthogonality residuals");
  ortho->add_option("--nodes", oa.nodes, "comma list of collocation nodes")->required();
  ortho->add_option("--q", oa.q, "number of conditions to check (default 1)");
  ortho->add_option("--output", oa.output, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      return app.exit(e);
    }
    app.exit(e);
    return 2;
  }

  try {
    if (*tableau) return run_tableau(ta);
    if (*integrate) return run_integrate(ia);
    if (*converge) return run_converge(ca);
    if (*stability) return run_stability(sa);
    if (*ortho) return run_orthogonality(oa);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const frkn::InvalidParams& e) {
    std::cerr << "usage error: " << e.detail() << "\n";
    return 2;
  } catch (const frkn::InvalidInput& e) {
    std::cerr << "usage error: " << e.detail() << "\n";
    return 2;
  } catch (const frkn::Error& e) {
    std::cerr << "ERROR " << e.code() << " " << e.module() << " " << e.detail() << "\n";
    return 1;
  }
  return 2;
}
