#pragma once

// Command-line front end: JSON run configuration, subcommands, report files, exit codes.

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "robin/analysis.hpp"
#include "robin/bvlimit.hpp"
#include "robin/eigensolver_p.hpp"
#include "robin/error.hpp"
#include "robin/geometry.hpp"
#include "robin/io.hpp"
#include "robin/radial.hpp"

namespace robin::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kNonconvergence = 2, kVerifyFailure = 3 };

using Json = io::Json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"eigen", "limit",  "cheeger",     "sweep",
                                              "verify", "blowup", "demo-figure1"};
  return names;
}

inline const std::vector<std::string>& verify_check_names() {
  static const std::vector<std::string> names{
      "ball-formula", "gamma-limit",  "gamma-limit-grid", "shell-ratio", "fk1",     "fk2",
      "upper-by-constants", "cheeger-lower", "cheeger-power", "blow-up"};
  return names;
}

/// Checks run by `verify` when the config lists none.
inline std::vector<std::string> default_verify_checks() {
  return {"ball-formula", "gamma-limit",   "shell-ratio",   "fk1",    "fk2",
          "upper-by-constants", "cheeger-lower", "cheeger-power", "blow-up"};
}

struct Domain {
  std::optional<DomainSpec> spec;
  std::optional<io::Mask> mask;
  /// The domain block as given (mask path resolved).
  Json echo;

  GridDomain grid(double h) const {
    if (mask) return io::grid_from_mask(*mask);
    return rasterize(*spec, h);
  }
  double spacing(double h) const { return mask ? mask->h : h; }
  const Ball* ball() const { return spec ? std::get_if<Ball>(&spec->shape()) : nullptr; }
};

struct SolverConfig {
  double h = 1.0 / 64.0;
  double p = 2.0;
  double beta = 1.0;
  /// "auto" (radial for balls, grid otherwise), "grid" or "radial".
  std::string method = "auto";
  RadialOptions radial;
  EigenOptions eigen;
  LimitOptions limit;
};

struct SweepConfig {
  std::vector<double> p_list;
  double tol = 0.05;
  int fit_rows = 4;
  std::optional<double> reference;
};

struct VerifyConfig {
  std::vector<std::string> checks = default_verify_checks();
  /// Names from the domain library used by the Faber-Krahn checks.
  std::vector<std::string> domains;
  std::vector<double> fk_betas{-0.5, -0.25, 0.5, 1.0, 2.0};
  std::vector<double> cheeger_p{1.2, 1.5, 2.0, 3.0};
  std::vector<double> cheeger_betas{0.5, 1.0, 2.0, 5.0};
  double h = 1.0 / 32.0;
  double blowup_h = 1.0 / 128.0;
  double sweep_h = 1.0 / 64.0;
  double rel_tol = 0.05;
};

struct BlowupConfig {
  std::vector<double> eps_list{0.25, 0.125, 0.0625, 0.03125};
};

struct DemoConfig {
  double side = 1.0;
  double corner = 0.1;
  std::vector<double> radii{0.5, 0.4, 0.3, 0.2, 0.15, 0.12, 0.105};
};

struct OutputConfig {
  std::filesystem::path directory = ".";
  bool json = true;
  bool csv = true;
};

struct RunConfig {
  std::string command;
  std::optional<Domain> domain;
  SolverConfig solver;
  SweepConfig sweep;
  VerifyConfig verify;
  BlowupConfig blowup;
  DemoConfig demo;
  OutputConfig output;
  Json echo;
};

namespace detail {

inline void check_keys(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError("unknown key \"" + it.key() + "\" in " + where);
  }
}

inline double number(const Json& obj, const std::string& key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(where + "." + key + " must be finite");
  return x;
}

inline double number_or(const Json& obj, const std::string& key, double fallback, const std::string& where) {
  return obj.contains(key) ? number(obj, key, where) : fallback;
}

inline int integer_or(const Json& obj, const std::string& key, int fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(where + "." + key + " must be an integer");
  return v.get<int>();
}

inline std::vector<double> number_list(const Json& obj, const std::string& key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_array()) throw ConfigError(where + "." + key + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number() || !std::isfinite(x.get<double>())) {
      throw ConfigError(where + "." + key + " must contain finite numbers only");
    }
    out.push_back(x.get<double>());
  }
  return out;
}

inline std::vector<std::string> string_list(const Json& obj, const std::string& key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_array()) throw ConfigError(where + "." + key + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& x : v) {
    if (!x.is_string()) throw ConfigError(where + "." + key + " must contain strings only");
    out.push_back(x.get<std::string>());
  }
  return out;
}

inline std::string string_or(const Json& obj, const std::string& key, const std::string& fallback,
                             const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_string()) throw ConfigError(where + "." + key + " must be a string");
  return obj.at(key).get<std::string>();
}

inline void require_decreasing_p(const std::vector<double>& p, const std::string& where, std::size_t min_size) {
  if (p.size() < min_size) {
    throw ConfigError(where + " needs at least " + std::to_string(min_size) + " exponents");
  }
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (!(p[k] > 1.0)) throw ConfigError(where + ": every p must exceed 1");
    if (k > 0 && !(p[k] < p[k - 1])) throw ConfigError(where + " must be strictly decreasing");
  }
}

inline Domain parse_domain(const Json& j, const std::filesystem::path& base) {
  const std::string where = "domain";
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    throw ConfigError("domain needs a string \"kind\"");
  }
  const std::string kind = j.at("kind").get<std::string>();
  Domain d;
  d.echo = j;
  if (kind == "ball") {
    check_keys(j, {"kind", "radius", "dim"}, where);
    d.spec = DomainSpec::ball(number(j, "radius", where), integer_or(j, "dim", 2, where));
  } else if (kind == "annulus") {
    check_keys(j, {"kind", "inner", "outer", "dim"}, where);
    d.spec = DomainSpec::annulus(number(j, "inner", where), number(j, "outer", where),
                                 integer_or(j, "dim", 2, where));
  } else if (kind == "rectangle") {
    check_keys(j, {"kind", "width", "height"}, where);
    d.spec = DomainSpec::rectangle(number(j, "width", where), number(j, "height", where));
  } else if (kind == "rounded_rectangle") {
    check_keys(j, {"kind", "width", "height", "corner"}, where);
    d.spec = DomainSpec::rounded_rectangle(number(j, "width", where), number(j, "height", where),
                                           number(j, "corner", where));
  } else if (kind == "ellipse") {
    check_keys(j, {"kind", "semi_x", "semi_y"}, where);
    d.spec = DomainSpec::ellipse(number(j, "semi_x", where), number(j, "semi_y", where));
  } else if (kind == "polygon") {
    check_keys(j, {"kind", "vertices"}, where);
    const auto& v = j.at("vertices");
    if (!v.is_array()) throw ConfigError("domain.vertices must be an array of [x, y] pairs");
    std::vector<Point> pts;
    for (const auto& q : v) {
      if (!q.is_array() || q.size() != 2 || !q[0].is_number() || !q[1].is_number()) {
        throw ConfigError("domain.vertices must be an array of [x, y] pairs");
      }
      pts.push_back({q[0].get<double>(), q[1].get<double>()});
    }
    d.spec = DomainSpec::polygon(std::move(pts));
  } else if (kind == "library") {
    check_keys(j, {"kind", "name"}, where);
    const std::string name = string_or(j, "name", "", where);
    for (const auto& nd : domain_library()) {
      if (nd.name == name) d.spec = nd.spec;
    }
    if (!d.spec) throw ConfigError("unknown library domain \"" + name + "\"");
  } else if (kind == "mask") {
    check_keys(j, {"kind", "path"}, where);
    const std::filesystem::path p = string_or(j, "path", "", where);
    const auto full = p.is_absolute() ? p : base / p;
    d.mask = io::read_mask(full);
    d.echo["path"] = full.string();
  } else {
    throw ConfigError("unknown domain kind \"" + kind + "\"");
  }
  return d;
}

inline void parse_solver(const Json& j, SolverConfig& s) {
  const std::string where = "solver";
  check_keys(j,
             {"h", "p", "beta", "method", "tol", "ode_tol", "lambda_tol", "residual_tol", "max_iter",
              "memory", "seed", "coercivity_probes", "smoothing_stages", "stage_iter", "limit_method",
              "limit_tol", "gap_tol", "max_outer", "max_inner"},
             where);
  s.h = number_or(j, "h", s.h, where);
  s.p = number_or(j, "p", s.p, where);
  s.beta = number_or(j, "beta", s.beta, where);
  s.method = string_or(j, "method", s.method, where);
  s.radial.tol = number_or(j, "tol", s.radial.tol, where);
  s.radial.ode_tol = number_or(j, "ode_tol", s.radial.ode_tol, where);
  s.eigen.lambda_tol = number_or(j, "lambda_tol", s.eigen.lambda_tol, where);
  s.eigen.residual_tol = number_or(j, "residual_tol", s.eigen.residual_tol, where);
  s.eigen.max_iter = integer_or(j, "max_iter", s.eigen.max_iter, where);
  s.eigen.memory = integer_or(j, "memory", s.eigen.memory, where);
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw ConfigError("solver.seed must be a nonnegative integer");
    s.eigen.seed = j.at("seed").get<unsigned>();
  }
  s.eigen.coercivity_probes = integer_or(j, "coercivity_probes", s.eigen.coercivity_probes, where);
  s.eigen.smoothing_stages = integer_or(j, "smoothing_stages", s.eigen.smoothing_stages, where);
  s.eigen.stage_iter = integer_or(j, "stage_iter", s.eigen.stage_iter, where);
  const std::string lm = string_or(j, "limit_method", "max-flow", where);
  if (lm == "max-flow") {
    s.limit.method = LimitMethod::MaxFlow;
  } else if (lm == "primal-dual") {
    s.limit.method = LimitMethod::PrimalDual;
  } else {
    throw ConfigError("solver.limit_method must be \"max-flow\" or \"primal-dual\"");
  }
  s.limit.tol = number_or(j, "limit_tol", s.limit.tol, where);
  s.limit.gap_tol = number_or(j, "gap_tol", s.limit.gap_tol, where);
  s.limit.max_outer = integer_or(j, "max_outer", s.limit.max_outer, where);
  s.limit.max_inner = integer_or(j, "max_inner", s.limit.max_inner, where);
}

inline void validate_solver(const SolverConfig& s) {
  if (!(s.h > 0.0)) throw ConfigError("solver.h must be positive");
  if (s.method != "auto" && s.method != "grid" && s.method != "radial") {
    throw ConfigError("solver.method must be \"auto\", \"grid\" or \"radial\"");
  }
  if (!(s.radial.tol > 0.0) || !(s.radial.ode_tol > 0.0)) throw ConfigError("radial tolerances must be positive");
  if (!(s.eigen.lambda_tol > 0.0) || !(s.eigen.residual_tol > 0.0)) {
    throw ConfigError("eigen tolerances must be positive");
  }
  if (s.eigen.max_iter < 1 || s.eigen.memory < 1 || s.eigen.coercivity_probes < 1 ||
      s.eigen.smoothing_stages < 0 || s.eigen.stage_iter < 1) {
    throw ConfigError("iteration counts must be positive");
  }
  if (!(s.limit.tol > 0.0) || !(s.limit.gap_tol > 0.0) || s.limit.max_outer < 1 || s.limit.max_inner < 1) {
    throw ConfigError("limit solver settings must be positive");
  }
}

inline void require_beta_above_minus_one(double beta) {
  if (!(beta > -1.0)) {
    throw ConfigError("beta = " + io::format_double(beta) +
                      " is not above -1: the Rayleigh quotient is unbounded below there");
  }
}

}  // namespace detail

/// Parses and validates a configuration for `command`. Unknown keys are rejected; relative mask
/// paths resolve against `base`.
inline RunConfig parse_config(const std::string& command, const Json& j, const std::filesystem::path& base = ".") {
  using namespace detail;
  if (std::find(command_names().begin(), command_names().end(), command) == command_names().end()) {
    throw ConfigError("unknown command \"" + command + "\"");
  }
  check_keys(j, {"domain", "solver", "sweep", "verify", "blowup", "demo", "output"}, "config");
  RunConfig c;
  c.command = command;
  c.echo = j;
  if (j.contains("domain")) c.domain = parse_domain(j.at("domain"), base);
  if (j.contains("solver")) parse_solver(j.at("solver"), c.solver);
  validate_solver(c.solver);
  if (j.contains("output")) {
    const auto& o = j.at("output");
    check_keys(o, {"directory", "formats"}, "output");
    if (o.contains("directory")) c.output.directory = string_or(o, "directory", ".", "output");
    if (o.contains("formats")) {
      c.output.json = c.output.csv = false;
      for (const auto& f : string_list(o, "formats", "output")) {
        if (f == "json") {
          c.output.json = true;
        } else if (f == "csv") {
          c.output.csv = true;
        } else {
          throw ConfigError("output.formats entries must be \"json\" or \"csv\"");
        }
      }
    }
  }
  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    check_keys(s, {"p_list", "tol", "fit_rows", "reference"}, "sweep");
    if (s.contains("p_list")) c.sweep.p_list = number_list(s, "p_list", "sweep");
    c.sweep.tol = number_or(s, "tol", c.sweep.tol, "sweep");
    c.sweep.fit_rows = integer_or(s, "fit_rows", c.sweep.fit_rows, "sweep");
    if (s.contains("reference")) c.sweep.reference = number(s, "reference", "sweep");
  }
  if (j.contains("verify")) {
    const auto& v = j.at("verify");
    check_keys(v, {"checks", "domains", "fk_betas", "cheeger_p", "cheeger_betas", "h", "blowup_h", "sweep_h",
                   "rel_tol"},
               "verify");
    if (v.contains("checks")) c.verify.checks = string_list(v, "checks", "verify");
    if (v.contains("domains")) c.verify.domains = string_list(v, "domains", "verify");
    if (v.contains("fk_betas")) c.verify.fk_betas = number_list(v, "fk_betas", "verify");
    if (v.contains("cheeger_p")) c.verify.cheeger_p = number_list(v, "cheeger_p", "verify");
    if (v.contains("cheeger_betas")) c.verify.cheeger_betas = number_list(v, "cheeger_betas", "verify");
    c.verify.h = number_or(v, "h", c.verify.h, "verify");
    c.verify.blowup_h = number_or(v, "blowup_h", c.verify.blowup_h, "verify");
    c.verify.sweep_h = number_or(v, "sweep_h", c.verify.sweep_h, "verify");
    c.verify.rel_tol = number_or(v, "rel_tol", c.verify.rel_tol, "verify");
  }
  if (j.contains("blowup")) {
    const auto& b = j.at("blowup");
    check_keys(b, {"eps_list"}, "blowup");
    if (b.contains("eps_list")) c.blowup.eps_list = number_list(b, "eps_list", "blowup");
  }
  if (j.contains("demo")) {
    const auto& d = j.at("demo");
    check_keys(d, {"side", "corner", "radii"}, "demo");
    c.demo.side = number_or(d, "side", c.demo.side, "demo");
    c.demo.corner = number_or(d, "corner", c.demo.corner, "demo");
    if (d.contains("radii")) c.demo.radii = number_list(d, "radii", "demo");
  }

  // Command-specific preconditions, checked before any solve.
  const auto& s = c.solver;
  auto need_domain = [&]() {
    if (!c.domain) throw ConfigError("command \"" + command + "\" needs a domain block");
  };
  auto need_planar = [&]() {
    need_domain();
    if (c.domain->spec && c.domain->spec->dimension() != 2) {
      throw ConfigError("grid solvers need a planar domain (dim = 2)");
    }
  };
  if (command == "eigen") {
    need_domain();
    if (!(s.p > 1.0)) throw ConfigError("solver.p must exceed 1");
    require_beta_above_minus_one(s.beta);
    const bool radial = s.method == "radial" || (s.method == "auto" && c.domain->ball());
    if (radial && !c.domain->ball()) throw ConfigError("the radial method needs a ball domain");
    if (!radial) need_planar();
  } else if (command == "limit") {
    need_planar();
    require_beta_above_minus_one(s.beta);
  } else if (command == "cheeger") {
    need_planar();
  } else if (command == "sweep") {
    need_domain();
    require_beta_above_minus_one(s.beta);
    require_decreasing_p(c.sweep.p_list, "sweep.p_list", 3);
    if (!(c.sweep.tol > 0.0)) throw ConfigError("sweep.tol must be positive");
    if (c.sweep.fit_rows < 3) throw ConfigError("sweep.fit_rows must be at least 3");
    if (!c.domain->ball()) need_planar();
    if (c.domain->mask) throw ConfigError("sweep needs a parametric domain");
  } else if (command == "verify") {
    const auto& v = c.verify;
    for (const auto& name : v.checks) {
      const auto& known = verify_check_names();
      if (std::find(known.begin(), known.end(), name) == known.end()) {
        throw ConfigError("unknown verify check \"" + name + "\"");
      }
    }
    for (const auto& name : v.domains) {
      bool found = false;
      for (const auto& nd : domain_library()) found = found || nd.name == name;
      if (!found) throw ConfigError("unknown library domain \"" + name + "\"");
    }
    for (double b : v.fk_betas) require_beta_above_minus_one(b);
    for (double b : v.cheeger_betas) {
      if (!(b > 0.0)) throw ConfigError("verify.cheeger_betas must be positive");
    }
    for (double p : v.cheeger_p) {
      if (!(p > 1.0)) throw ConfigError("verify.cheeger_p entries must exceed 1");
    }
    if (!(v.h > 0.0) || !(v.blowup_h > 0.0) || !(v.sweep_h > 0.0) || !(v.rel_tol > 0.0)) {
      throw ConfigError("verify spacings and tolerance must be positive");
    }
  } else if (command == "blowup") {
    need_planar();
    if (!(s.beta < -1.0)) throw ConfigError("blowup needs solver.beta < -1");
    const double h = c.domain->spacing(s.h);
    const auto& e = c.blowup.eps_list;
    if (e.empty()) throw ConfigError("blowup.eps_list is empty");
    for (std::size_t k = 0; k < e.size(); ++k) {
      if (!(e[k] >= 2.0 * h * (1.0 - 1e-12))) throw ConfigError("blowup.eps_list entries must be at least 2h");
      if (k > 0 && !(e[k] < e[k - 1])) throw ConfigError("blowup.eps_list must be strictly decreasing");
    }
  } else if (command == "demo-figure1") {
    const auto& d = c.demo;
    if (!(d.side > 0.0) || !(d.corner > 0.0) || !(d.corner < 0.5 * d.side)) {
      throw ConfigError("demo needs side > 0 and 0 < corner < side/2");
    }
    if (d.radii.empty()) throw ConfigError("demo.radii is empty");
    for (double r : d.radii) {
      if (!(r > d.corner && r <= 0.5 * d.side)) throw ConfigError("demo.radii must lie in (corner, side/2]");
    }
  }
  return c;
}

/// One verify verdict row.
struct Verdict {
  std::string check;
  std::string id;
  std::string domain;
  double beta = std::numeric_limits<double>::quiet_NaN();
  double p = std::numeric_limits<double>::quiet_NaN();
  double left = 0.0;
  double right = 0.0;
  /// "<=", ">=", "<" or "=".
  std::string direction;
  double slack = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct Outcome {
  int code = kOk;
  Json report;
  /// File name -> contents.
  std::map<std::string, std::string> files;
};

namespace detail {

inline Json domain_json(const RunConfig& c) { return c.domain ? c.domain->echo : Json(nullptr); }

inline Json grid_json(const GridDomain& g) {
  Json j;
  j["h"] = g.spacing();
  j["nx"] = g.nx();
  j["ny"] = g.ny();
  j["cells"] = g.size();
  j["area"] = g.area();
  j["boundary_measure"] = g.boundary_measure();
  return j;
}

inline Json set_json(const SetMeasures& m) {
  Json j;
  j["perimeter"] = m.perimeter;
  j["contact"] = m.contact;
  j["area"] = m.area;
  return j;
}

inline Verdict from_inequality(const std::string& check, const InequalityReport& r, const std::string& domain,
                               double beta, double p) {
  return {check, r.id, domain, beta, p, r.left, r.right, r.direction, r.slack, r.tolerance, r.pass};
}

inline Verdict closeness(const std::string& check, const std::string& id, const std::string& domain, double beta,
                         double p, double value, double target, double tolerance) {
  Verdict v{check, id, domain, beta, p, value, target, "=", -std::abs(value - target), tolerance, false};
  v.pass = v.slack >= -tolerance;
  return v;
}

inline Json verdict_json(const Verdict& v) {
  Json j;
  j["check"] = v.check;
  j["id"] = v.id;
  j["domain"] = v.domain;
  j["beta"] = v.beta;
  j["p"] = v.p;
  j["left"] = v.left;
  j["direction"] = v.direction;
  j["right"] = v.right;
  j["slack"] = v.slack;
  j["tolerance"] = v.tolerance;
  j["pass"] = v.pass;
  return j;
}

inline Json sweep_json(const SweepReport& r) {
  Json j;
  j["method"] = r.method;
  j["beta"] = r.beta;
  j["h"] = r.h;
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"p", row.p}, {"lambda", row.lambda}, {"residual", row.residual}, {"converged", row.converged}});
  }
  j["rows"] = rows;
  j["fit"] = {{"limit", r.fit.limit},
              {"coeff", r.fit.coeff},
              {"exponent", r.fit.exponent},
              {"rms", r.fit.rms},
              {"points", r.fit.points}};
  j["lambda_star"] = r.lambda_star;
  j["reference"] = r.reference;
  j["relative_error"] = r.relative_error;
  j["last_point_error"] = r.last_point_error;
  j["tolerance"] = r.tolerance;
  j["fit_pass"] = r.fit_pass;
  j["fallback_pass"] = r.fallback_pass;
  j["within_envelope"] = r.within_envelope;
  j["pass"] = r.pass;
  return j;
}

inline io::CsvTable sweep_table(const SweepReport& r) {
  io::CsvTable t({"p", "lambda", "residual", "converged"});
  for (const auto& row : r.rows) t.row().add(row.p).add(row.lambda).add(row.residual).add(row.converged);
  return t;
}

inline std::string mask_for(const GridDomain& g, const CellSet& set) { return io::mask_text(io::set_mask(g, set)); }

inline SweepOptions sweep_options(const RunConfig& c, double h) {
  SweepOptions o;
  o.h = h;
  o.tol = c.sweep.tol;
  o.fit_rows = c.sweep.fit_rows;
  o.reference = c.sweep.reference;
  o.eigen = c.solver.eigen;
  o.limit = c.solver.limit;
  o.radial = c.solver.radial;
  return o;
}

inline Outcome cmd_eigen(const RunConfig& c) {
  const auto& s = c.solver;
  Outcome out;
  Json& r = out.report;
  r["domain"] = domain_json(c);
  r["p"] = s.p;
  r["beta"] = s.beta;
  const Ball* ball = c.domain->ball();
  const bool radial = s.method == "radial" || (s.method == "auto" && ball);
  bool converged = true;
  if (radial) {
    const auto prof = shoot_radial_eigen(ball->dim, ball->radius, s.p, s.beta, s.radial);
    converged = std::abs(prof.mismatch) <= 1e-6 * std::max(1.0, std::abs(s.beta));
    r["method"] = "radial";
    r["lambda"] = prof.lambda;
    r["boundary_residual"] = prof.boundary_residual;
    r["mismatch"] = prof.mismatch;
    r["bisection_steps"] = prof.bisection_steps;
    r["converged"] = converged;
    io::CsvTable t({"r", "psi", "dpsi"});
    for (std::size_t k = 0; k < prof.r.size(); ++k) t.row().add(prof.r[k]).add(prof.psi[k]).add(prof.dpsi[k]);
    out.files["eigen_profile.csv"] = t.str();
  } else {
    const GridDomain g = c.domain->grid(s.h);
    EigenOptions o = s.eigen;
    o.record_trace = false;
    const auto res = minimize_Jp(g, s.p, s.beta, o);
    converged = res.converged;
    r["method"] = "grid";
    r["grid"] = grid_json(g);
    r["lambda"] = res.lambda;
    r["residual"] = res.residual;
    r["iterations"] = res.iterations;
    r["trace_constant"] = res.trace_constant;
    r["constant_field_bound"] = s.beta * g.boundary_measure() / g.area();
    r["converged"] = converged;
    out.files["eigen_field.csv"] = io::field_table(g, res.u, "u").str();
  }
  out.code = converged ? kOk : kNonconvergence;
  return out;
}

inline void limit_report(Outcome& out, const GridDomain& g, const LimitResult& res, const std::string& prefix) {
  Json& r = out.report;
  r["grid"] = grid_json(g);
  r["lambda"] = res.lambda;
  r["level"] = res.level;
  r["set"] = set_json(res.measures);
  r["s_trace"] = res.s_trace;
  r["outer_iterations"] = res.outer_iterations;
  r["inner_iterations"] = res.inner_iterations;
  r["subproblem_bound"] = res.subproblem_bound;
  r["converged"] = res.converged;
  out.files[prefix + "_field.csv"] = io::field_table(g, res.v, "v").str();
  out.files[prefix + "_set.mask"] = mask_for(g, res.set);
  out.code = res.converged ? kOk : kNonconvergence;
}

inline Outcome cmd_limit(const RunConfig& c) {
  Outcome out;
  out.report["domain"] = domain_json(c);
  out.report["beta"] = c.solver.beta;
  out.report["method"] = c.solver.limit.method == LimitMethod::MaxFlow ? "max-flow" : "primal-dual";
  if (const Ball* b = c.domain->ball()) {
    out.report["ball_value"] = ball_limit_eigenvalue(b->dim, b->radius, c.solver.beta);
  }
  const GridDomain g = c.domain->grid(c.solver.h);
  limit_report(out, g, minimize_J(g, c.solver.beta, c.solver.limit), "limit");
  return out;
}

inline Outcome cmd_cheeger(const RunConfig& c) {
  Outcome out;
  out.report["domain"] = domain_json(c);
  out.report["method"] = c.solver.limit.method == LimitMethod::MaxFlow ? "max-flow" : "primal-dual";
  const GridDomain g = c.domain->grid(c.solver.h);
  limit_report(out, g, minimize_J(g, 1.0, c.solver.limit), "cheeger");
  return out;
}

inline Outcome cmd_sweep(const RunConfig& c) {
  Outcome out;
  const auto rep = gamma_sweep(*c.domain->spec, c.solver.beta, c.sweep.p_list, sweep_options(c, c.solver.h));
  out.report["domain"] = domain_json(c);
  out.report["sweep"] = sweep_json(rep);
  out.files["sweep.csv"] = sweep_table(rep).str();
  out.code = rep.pass ? kOk : kVerifyFailure;
  return out;
}

inline Outcome cmd_blowup(const RunConfig& c) {
  Outcome out;
  const GridDomain g = c.domain->grid(c.solver.h);
  const auto steps = blow_up_sequence(g, c.solver.beta, c.blowup.eps_list);
  out.report["domain"] = domain_json(c);
  out.report["beta"] = c.solver.beta;
  out.report["grid"] = grid_json(g);
  Json rows = Json::array();
  io::CsvTable t({"eps", "J", "bound", "layer_area"});
  bool decreasing = true;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const auto& st = steps[k];
    rows.push_back({{"eps", st.eps}, {"J", st.value}, {"bound", st.bound}, {"layer_area", st.layer_area}});
    t.row().add(st.eps).add(st.value).add(st.bound).add(st.layer_area);
    if (k > 0 && !(st.value < steps[k - 1].value)) decreasing = false;
  }
  out.report["steps"] = rows;
  out.report["strictly_decreasing"] = decreasing;
  out.files["blowup.csv"] = t.str();
  return out;
}

inline Outcome cmd_demo(const RunConfig& c) {
  Outcome out;
  const auto vals = demo_beta_minus_one(c.demo.corner, c.demo.radii, c.demo.side);
  out.report["side"] = c.demo.side;
  out.report["corner"] = c.demo.corner;
  out.report["beta"] = -1.0;
  Json rows = Json::array();
  io::CsvTable t({"radius", "R"});
  for (const auto& v : vals) {
    rows.push_back({{"radius", v.radius}, {"R", v.value}});
    t.row().add(v.radius).add(v.value);
  }
  out.report["values"] = rows;
  // Limit of the family as the radius shrinks to the corner radius.
  out.report["limit_value"] = -1.0 / c.demo.corner;
  out.files["demo-figure1.csv"] = t.str();
  return out;
}

inline bool wants(const VerifyConfig& v, const std::string& name) {
  return std::find(v.checks.begin(), v.checks.end(), name) != v.checks.end();
}

inline Outcome cmd_verify(const RunConfig& c) {
  const auto& v = c.verify;
  std::vector<Verdict> verdicts;
  Json sweeps = Json::array();
  CheckOptions co;
  co.h = v.h;
  co.rel_tol = v.rel_tol;
  co.eigen = c.solver.eigen;
  co.eigen.record_trace = false;
  co.limit = c.solver.limit;
  co.radial = c.solver.radial;

  if (wants(v, "ball-formula")) {
    const GridDomain g = rasterize(DomainSpec::ball(1.0), v.h);
    for (double beta : {-0.5, 0.5, 2.0}) {
      const double value = minimize_J(g, beta, c.solver.limit).lambda;
      const double target = ball_limit_eigenvalue(2, 1.0, beta);
      verdicts.push_back(closeness("ball-formula", "ball-limit", "ball", beta, std::nan(""), value, target,
                                   v.rel_tol * std::abs(target)));
    }
  }
  if (wants(v, "gamma-limit")) {
    SweepOptions o;
    o.tol = 0.01;
    o.radial = c.solver.radial;
    const std::vector<double> ps{1.5, 1.25, 1.1, 1.05, 1.02};
    const auto rep = gamma_sweep(DomainSpec::ball(1.0), 0.5, ps, o);
    sweeps.push_back(sweep_json(rep));
    Verdict vd = closeness("gamma-limit", "sweep-limit", "ball", 0.5, std::nan(""), rep.lambda_star, rep.reference,
                           o.tol * std::abs(rep.reference));
    vd.pass = rep.pass;
    verdicts.push_back(vd);
  }
  if (wants(v, "gamma-limit-grid")) {
    SweepOptions o;
    o.h = v.sweep_h;
    o.tol = 0.08;
    o.eigen = co.eigen;
    o.eigen.max_iter = std::min(o.eigen.max_iter, 12000);
    o.limit = c.solver.limit;
    o.reference = 2.0 + std::sqrt(std::numbers::pi);
    const std::vector<double> ps{1.1, 1.05, 1.03, 1.02, 1.01};
    const auto rep = gamma_sweep(DomainSpec::rectangle(1.0, 1.0), 2.0, ps, o);
    sweeps.push_back(sweep_json(rep));
    Verdict vd = closeness("gamma-limit-grid", "sweep-limit", "unit-square", 2.0, std::nan(""), rep.lambda_star,
                           rep.reference, o.tol * std::abs(rep.reference));
    vd.pass = rep.pass;
    verdicts.push_back(vd);
  }
  if (wants(v, "shell-ratio")) {
    for (int dim : {2, 3, 4}) {
      for (double beta : {-0.9, -0.5, 0.0, 0.5, 1.0, 5.0}) {
        const auto m = minimize_shell_ratio(dim, beta);
        Verdict vd = closeness("shell-ratio", "shell-min-at-zero", "shell-N" + std::to_string(dim), beta,
                               std::nan(""), m.value, beta, 0.0);
        vd.pass = vd.pass && m.t == 0.0;
        verdicts.push_back(vd);
      }
    }
  }
  const bool fk = wants(v, "fk1") || wants(v, "fk2") || wants(v, "upper-by-constants");
  if (fk) {
    for (const auto& nd : domain_library()) {
      if (!v.domains.empty() && std::find(v.domains.begin(), v.domains.end(), nd.name) == v.domains.end()) continue;
      for (double beta : v.fk_betas) {
        if (beta >= 0.0 && !wants(v, "fk1")) continue;
        if (beta < 0.0 && !wants(v, "fk2") && !wants(v, "upper-by-constants")) continue;
        for (const auto& r : check_faber_krahn(nd.spec, beta, co)) {
          if (!wants(v, r.id)) continue;
          verdicts.push_back(from_inequality(r.id, r, nd.name, beta, std::nan("")));
        }
      }
    }
  }
  if (wants(v, "cheeger-lower") || wants(v, "cheeger-power")) {
    auto keep = [&](const std::vector<InequalityReport>& reps, const std::string& dom, double beta, double p) {
      for (const auto& r : reps) {
        if (wants(v, r.id)) verdicts.push_back(from_inequality(r.id, r, dom, beta, p));
      }
    };
    for (double beta : v.cheeger_betas) {
      for (double p : v.cheeger_p) keep(check_cheeger_bound(DomainSpec::ball(1.0), p, beta, co), "ball", beta, p);
    }
    const GridDomain g = rasterize(DomainSpec::rectangle(1.0, 1.0), v.h);
    const double cheeger = cheeger_constant(g, c.solver.limit);
    for (double beta : v.cheeger_betas) {
      const double limit = minimize_J(g, beta, c.solver.limit).lambda;
      std::vector<double> ps = v.cheeger_p;
      std::sort(ps.begin(), ps.end(), std::greater<>());
      ScalarField warm;
      for (double p : ps) {
        const auto res = minimize_Jp(g, p, beta, co.eigen, warm);
        warm = res.u;
        keep(check_cheeger_bound(res.lambda, limit, cheeger, p, beta, v.rel_tol), "unit-square", beta, p);
      }
    }
  }
  if (wants(v, "blow-up")) {
    const GridDomain g = rasterize(DomainSpec::rectangle(1.0, 1.0), v.blowup_h);
    const std::vector<double> eps{0.25, 0.125, 0.0625, 0.03125};
    const auto steps = blow_up_sequence(g, -1.5, eps);
    for (std::size_t k = 1; k < steps.size(); ++k) {
      Verdict vd{"blow-up", "decreasing", "unit-square", -1.5, std::nan(""), steps[k].value,
                 steps[k - 1].value, "<", steps[k - 1].value - steps[k].value, 0.0, false};
      vd.pass = vd.slack > 0.0;
      verdicts.push_back(vd);
    }
    Verdict last{"blow-up", "below-minus-ten", "unit-square", -1.5, std::nan(""), steps.back().value, -10.0,
                 "<", -10.0 - steps.back().value, 0.0, false};
    last.pass = last.slack > 0.0;
    verdicts.push_back(last);
  }

  Outcome out;
  Json rows = Json::array();
  io::CsvTable t({"check", "id", "domain", "beta", "p", "left", "direction", "right", "slack", "tolerance", "pass"});
  bool all = true;
  for (const auto& vd : verdicts) {
    rows.push_back(verdict_json(vd));
    t.row().add(vd.check).add(vd.id).add(vd.domain).add(vd.beta).add(vd.p).add(vd.left).add(vd.direction);
    t.add(vd.right).add(vd.slack).add(vd.tolerance).add(vd.pass);
    all = all && vd.pass;
  }
  out.report["checks"] = v.checks;
  out.report["verdicts"] = rows;
  out.report["sweeps"] = sweeps;
  out.report["pass"] = all;
  out.files["verify.csv"] = t.str();
  out.code = all ? kOk : kVerifyFailure;
  return out;
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace detail

/// Runs a parsed configuration; solver exceptions propagate.
inline Outcome execute(const RunConfig& c) {
  Outcome out;
  if (c.command == "eigen") {
    out = detail::cmd_eigen(c);
  } else if (c.command == "limit") {
    out = detail::cmd_limit(c);
  } else if (c.command == "cheeger") {
    out = detail::cmd_cheeger(c);
  } else if (c.command == "sweep") {
    out = detail::cmd_sweep(c);
  } else if (c.command == "verify") {
    out = detail::cmd_verify(c);
  } else if (c.command == "blowup") {
    out = detail::cmd_blowup(c);
  } else {
    out = detail::cmd_demo(c);
  }
  Json head;
  head["command"] = c.command;
  head["timestamp"] = detail::utc_timestamp();
  head["exit_code"] = out.code;
  for (auto it = out.report.begin(); it != out.report.end(); ++it) head[it.key()] = it.value();
  head["config"] = c.echo;
  out.report = std::move(head);
  return out;
}

/// Writes the report and extra files. JSON is always written for a nonconverged run.
inline void write_outcome(const Outcome& out, const std::string& command, const OutputConfig& o) {
  if (o.json || out.code == kNonconvergence) {
    io::write_atomic(o.directory / (command + ".json"), io::to_json_text(out.report));
  }
  for (const auto& [name, content] : out.files) {
    const bool is_csv = name.size() > 4 && name.compare(name.size() - 4, 4, ".csv") == 0;
    if (is_csv && !o.csv) continue;
    io::write_atomic(o.directory / name, content);
  }
}

/// Loads, validates, runs and writes; returns the process exit code.
inline int run_command(const std::string& command, const std::filesystem::path& config_path,
                       const std::optional<std::filesystem::path>& out_dir, const std::optional<std::string>& format,
                       std::ostream& err = std::cerr) {
  RunConfig cfg;
  try {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot read config file " + config_path.string());
    Json j;
    try {
      j = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    cfg = parse_config(command, j, config_path.parent_path().empty() ? "." : config_path.parent_path());
    if (out_dir) cfg.output.directory = *out_dir;
    if (format) {
      if (*format == "json") {
        cfg.output.json = true;
        cfg.output.csv = false;
      } else if (*format == "csv") {
        cfg.output.json = false;
        cfg.output.csv = true;
      } else if (*format == "both") {
        cfg.output.json = cfg.output.csv = true;
      } else {
        throw ConfigError("--format must be json, csv or both");
      }
    }
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  try {
    const Outcome out = execute(cfg);
    write_outcome(out, command, cfg.output);
    if (out.code == kNonconvergence) err << command << ": solver did not converge (results marked converged:false)\n";
    if (out.code == kVerifyFailure) err << command << ": at least one verdict failed\n";
    return out.code;
  } catch (const CoercivityError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << "\n";
    return kNonconvergence;
  } catch (const UnboundedProblem& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DegenerateRaster& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const InvalidArgument& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNonconvergence;
  }
}

/// Process entry point: `robin <command> --config PATH [--out DIR] [--format json|csv|both]`.
inline int run(int argc, char** argv) {
  CLI::App app{"Robin p-Laplacian eigenvalues, their p -> 1 limit, and Cheeger constants"};
  app.require_subcommand(1);
  std::string config;
  std::string out_dir;
  std::string format;
  for (const auto& name : command_names()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "JSON run configuration")->required();
    sub->add_option("--out", out_dir, "output directory (overrides output.directory)");
    sub->add_option("--format", format, "json, csv or both")->check(CLI::IsMember({"json", "csv", "both"}));
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  return run_command(command, config, out_dir.empty() ? std::nullopt : std::optional<std::filesystem::path>(out_dir),
                     format.empty() ? std::nullopt : std::optional<std::string>(format));
}

}  // namespace robin::cli
