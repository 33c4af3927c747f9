#pragma once

// Checks that tie the solvers together: p -> 1 sweeps, Faber-Krahn comparisons,
// Cheeger-type lower bounds, the H functional, and the beta = -1 corner family.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "robin/bvlimit.hpp"
#include "robin/eigensolver_p.hpp"
#include "robin/geometry.hpp"
#include "robin/radial.hpp"

namespace robin {

struct SweepRow {
  double p = 0.0;
  double lambda = 0.0;
  double residual = 0.0;
  bool converged = false;
};

/// Least-squares fit lambda(p) = limit + coeff * (p-1)^exponent.
struct PowerFit {
  double limit = 0.0;
  double coeff = 0.0;
  double exponent = 1.0;
  double rms = 0.0;
  int points = 0;
};

struct SweepOptions {
  /// Grid spacing for non-ball domains.
  double h = 1.0 / 64.0;
  /// Relative pass tolerance for the extrapolated limit.
  double tol = 0.05;
  /// Rows (from the p -> 1 end) used by the fit; at least 3.
  int fit_rows = 4;
  /// Overrides the computed reference limit.
  std::optional<double> reference;
  EigenOptions eigen;
  LimitOptions limit;
  RadialOptions radial;
};

struct SweepReport {
  DomainSpec spec = DomainSpec::ball(1.0);
  double beta = 0.0;
  /// "radial" for balls, "grid" otherwise.
  std::string method;
  double h = 0.0;
  std::vector<SweepRow> rows;
  PowerFit fit;
  double lambda_star = 0.0;
  double reference = 0.0;
  double relative_error = 0.0;
  double last_point_error = 0.0;
  double tolerance = 0.0;
  bool fit_pass = false;
  bool fallback_pass = false;
  bool pass = false;
  /// lambda_star within [min, max] of the sweep values and the reference, padded by the fit rms.
  bool within_envelope = false;
};

namespace detail {

/// For fixed exponent a, linear least squares of y on (1, x^a); returns the residual sum of squares.
inline double fit_linear(std::span<const double> x, std::span<const double> y, double a, double& c0,
                         double& c1) {
  const std::size_t n = x.size();
  double s1 = 0, sz = 0, szz = 0, sy = 0, szy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = std::pow(x[i], a);
    s1 += 1.0;
    sz += z;
    szz += z * z;
    sy += y[i];
    szy += z * y[i];
  }
  const double det = s1 * szz - sz * sz;
  if (std::abs(det) < 1e-300) {
    c1 = 0.0;
    c0 = sy / s1;
  } else {
    c0 = (szz * sy - sz * szy) / det;
    c1 = (s1 * szy - sz * sy) / det;
  }
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - c0 - c1 * std::pow(x[i], a);
    rss += r * r;
  }
  return rss;
}

}  // namespace detail

/// Fits lambda = limit + coeff * (p-1)^exponent, exponent in [0.05, 3], by a scan over the
/// exponent refined with golden-section search; limit and coeff by linear least squares.
inline PowerFit fit_power_law(std::span<const double> p, std::span<const double> lambda) {
  if (p.size() != lambda.size() || p.size() < 3) throw InvalidArgument("fit needs at least 3 points");
  std::vector<double> x(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] > 1.0)) throw InvalidArgument("fit needs p > 1");
    x[i] = p[i] - 1.0;
  }
  double c0 = 0, c1 = 0;
  auto rss = [&](double a) { return detail::fit_linear(x, lambda, a, c0, c1); };
  const double lo = 0.05;
  const double hi = 3.0;
  const int scan = 300;
  int best = 0;
  double best_v = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= scan; ++k) {
    const double v = rss(lo + (hi - lo) * k / scan);
    if (v < best_v) {
      best_v = v;
      best = k;
    }
  }
  double a = lo + (hi - lo) * std::max(0, best - 1) / scan;
  double b = lo + (hi - lo) * std::min(scan, best + 1) / scan;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  for (int it = 0; it < 100 && b - a > 1e-12; ++it) {
    if (rss(c) < rss(d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - phi * (b - a);
    d = a + phi * (b - a);
  }
  PowerFit f;
  f.exponent = 0.5 * (a + b);
  const double r = rss(f.exponent);
  f.limit = c0;
  f.coeff = c1;
  f.rms = std::sqrt(r / static_cast<double>(x.size()));
  f.points = static_cast<int>(x.size());
  return f;
}

/// lambda(p) along a decreasing list of exponents (radial solver for balls, warm-started grid
/// solves otherwise), the extrapolated p -> 1 limit, and its comparison with the p = 1 value.
inline SweepReport gamma_sweep(const DomainSpec& spec, double beta, std::span<const double> p_list,
                               const SweepOptions& opts = {}) {
  if (!(beta > -1.0)) throw UnboundedProblem("sweep requires beta > -1");
  if (p_list.size() < 3) throw InvalidArgument("sweep needs at least 3 exponents");
  for (std::size_t k = 0; k < p_list.size(); ++k) {
    if (!(p_list[k] > 1.0)) throw InvalidArgument("every p must exceed 1");
    if (k > 0 && !(p_list[k] < p_list[k - 1])) throw InvalidArgument("p_list must be strictly decreasing");
  }
  if (opts.fit_rows < 3) throw InvalidArgument("fit needs at least 3 rows");
  SweepReport rep;
  rep.spec = spec;
  rep.beta = beta;
  rep.tolerance = opts.tol;
  if (const auto* ball = std::get_if<Ball>(&spec.shape())) {
    rep.method = "radial";
    for (double p : p_list) {
      const auto prof = shoot_radial_eigen(ball->dim, ball->radius, p, beta, opts.radial);
      rep.rows.push_back({p, prof.lambda, std::abs(prof.mismatch), true});
    }
    rep.reference = opts.reference.value_or(ball_limit_eigenvalue(ball->dim, ball->radius, beta));
  } else {
    rep.method = "grid";
    rep.h = opts.h;
    const GridDomain grid = rasterize(spec, opts.h);
    const auto results = warm_start_path(grid, beta, p_list, opts.eigen);
    for (const auto& r : results) rep.rows.push_back({r.p, r.lambda, r.residual, r.converged});
    rep.reference = opts.reference.has_value() ? *opts.reference : minimize_J(grid, beta, opts.limit).lambda;
  }
  const std::size_t used = std::min(rep.rows.size(), static_cast<std::size_t>(opts.fit_rows));
  std::vector<double> ps;
  std::vector<double> ls;
  for (std::size_t k = rep.rows.size() - used; k < rep.rows.size(); ++k) {
    ps.push_back(rep.rows[k].p);
    ls.push_back(rep.rows[k].lambda);
  }
  if (beta == 0.0) {
    rep.fit.points = static_cast<int>(used);
    rep.lambda_star = 0.0;
  } else {
    rep.fit = fit_power_law(ps, ls);
    rep.lambda_star = rep.fit.limit;
  }
  const double last = rep.rows.back().lambda;
  const double ref = rep.reference;
  if (ref != 0.0) {
    rep.relative_error = std::abs(rep.lambda_star - ref) / std::abs(ref);
    rep.last_point_error = std::abs(last - ref) / std::abs(ref);
  } else {
    rep.relative_error = std::abs(rep.lambda_star);
    rep.last_point_error = std::abs(last);
  }
  rep.fit_pass = rep.relative_error <= opts.tol;
  rep.fallback_pass = rep.last_point_error <= 2.0 * opts.tol;
  rep.pass = rep.fit_pass || rep.fallback_pass;
  double lo = ref;
  double hi = ref;
  for (const auto& r : rep.rows) {
    lo = std::min(lo, r.lambda);
    hi = std::max(hi, r.lambda);
  }
  // The fitted model is only resolved to its own residual.
  const double pad = std::max(1e-12 * std::max(1.0, std::abs(hi)), rep.fit.rms);
  rep.within_envelope = rep.lambda_star >= lo - pad && rep.lambda_star <= hi + pad;
  return rep;
}

/// One inequality check. slack > 0 means the inequality holds strictly; the verdict allows
/// slack down to -tolerance.
struct InequalityReport {
  std::string id;
  double left = 0.0;
  double right = 0.0;
  /// "<=" or ">=": the claimed relation left (direction) right.
  std::string direction;
  double slack = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

inline InequalityReport make_inequality(std::string id, double left, double right, bool less_equal,
                                        double tolerance) {
  InequalityReport r;
  r.id = std::move(id);
  r.left = left;
  r.right = right;
  r.direction = less_equal ? "<=" : ">=";
  r.slack = less_equal ? right - left : left - right;
  r.tolerance = tolerance;
  r.pass = r.slack >= -tolerance;
  return r;
}

struct CheckOptions {
  double h = 1.0 / 64.0;
  /// Relative slack granted to grid-side quantities.
  double rel_tol = 0.05;
  EigenOptions eigen;
  LimitOptions limit;
  RadialOptions radial;
};

/// Compares Lambda(Omega, beta) with the equimeasurable ball: >= for beta >= 0, <= for beta < 0,
/// plus Lambda(Omega, beta) <= beta P(Omega)/|Omega| for beta < 0 (exact P and |Omega| on the right).
inline std::vector<InequalityReport> check_faber_krahn(const DomainSpec& spec, double beta,
                                                       const CheckOptions& opts = {}) {
  if (!(beta > -1.0)) throw UnboundedProblem("Faber-Krahn comparison requires beta > -1");
  if (spec.dimension() != 2) throw InvalidArgument("grid comparisons are planar only");
  const DomainSpec star = equimeasurable_ball(spec);
  const auto& ball = std::get<Ball>(star.shape());
  const double ball_value = ball_limit_eigenvalue(2, ball.radius, beta);
  const GridDomain grid = rasterize(spec, opts.h);
  const double value = minimize_J(grid, beta, opts.limit).lambda;
  std::vector<InequalityReport> out;
  const double tol = opts.rel_tol * std::abs(ball_value);
  if (beta >= 0.0) {
    out.push_back(make_inequality("fk1", value, ball_value, false, tol));
  } else {
    out.push_back(make_inequality("fk2", value, ball_value, true, tol));
    const double constants = beta * perimeter(spec) / volume(spec);
    out.push_back(
        make_inequality("upper-by-constants", value, constants, true, opts.rel_tol * std::abs(constants)));
  }
  return out;
}

/// H(E, psi) for constant psi: (psi P_Omega(E) + beta |dE cap dOmega| - (p-1) psi^{p/(p-1)} |E|) / |E|.
inline double evaluate_H(const SetMeasures& m, double psi, double beta, double p) {
  if (!(m.area > 0.0)) throw InvalidArgument("set is empty");
  if (!(psi > 0.0)) throw InvalidArgument("psi must be positive");
  if (!(p > 1.0)) throw InvalidArgument("p must exceed 1");
  return (psi * m.perimeter + beta * m.contact - (p - 1.0) * std::pow(psi, p / (p - 1.0)) * m.area) /
         m.area;
}

inline double evaluate_H(const GridDomain& grid, const CellSet& set, double psi, double beta, double p) {
  return evaluate_H(set_measures(grid, set), psi, beta, p);
}

/// The two lower bounds for given values of lambda(p, beta), Lambda(beta) and the Cheeger constant:
///   lambda >= Lambda b - (p-1) b^{p/(p-1)} with b = max(1, beta), and
///   lambda >= (h/p)^p whenever beta >= (h/p)^{p-1}.
inline std::vector<InequalityReport> check_cheeger_bound(double lambda, double limit, double cheeger,
                                                         double p, double beta, double rel_tol) {
  if (!(beta > 0.0)) throw InvalidArgument("Cheeger-type bounds require beta > 0");
  if (!(p > 1.0)) throw InvalidArgument("p must exceed 1");
  const double b = std::max(1.0, beta);
  const double lower = limit * b - (p - 1.0) * std::pow(b, p / (p - 1.0));
  std::vector<InequalityReport> out;
  out.push_back(make_inequality("cheeger-lower", lambda, lower, false, rel_tol * std::abs(lower)));
  if (beta >= std::pow(cheeger / p, p - 1.0)) {
    const double power = std::pow(cheeger / p, p);
    out.push_back(make_inequality("cheeger-power", lambda, power, false, rel_tol * power));
  }
  return out;
}

/// Cheeger-type bounds on a domain: balls use the radial eigenvalue and the closed-form p = 1
/// values; other domains use grid values of lambda, Lambda and h on one grid.
inline std::vector<InequalityReport> check_cheeger_bound(const DomainSpec& spec, double p, double beta,
                                                         const CheckOptions& opts = {}) {
  if (!(beta > 0.0)) throw InvalidArgument("Cheeger-type bounds require beta > 0");
  if (!(p > 1.0)) throw InvalidArgument("p must exceed 1");
  if (const auto* ball = std::get_if<Ball>(&spec.shape())) {
    const double lambda = shoot_radial_eigen(ball->dim, ball->radius, p, beta, opts.radial).lambda;
    const double limit = ball_limit_eigenvalue(ball->dim, ball->radius, beta);
    const double cheeger = ball->dim / ball->radius;
    return check_cheeger_bound(lambda, limit, cheeger, p, beta, opts.rel_tol);
  }
  const GridDomain grid = rasterize(spec, opts.h);
  const double lambda = minimize_Jp(grid, p, beta, opts.eigen).lambda;
  const double limit = minimize_J(grid, beta, opts.limit).lambda;
  const double cheeger = beta >= 1.0 ? limit : cheeger_constant(grid, opts.limit);
  return check_cheeger_bound(lambda, limit, cheeger, p, beta, opts.rel_tol);
}

struct CornerValue {
  double radius = 0.0;
  double value = 0.0;
};

/// R(E, -1) along the corner family of the rounded square [0,side]^2 with corner radius rho.
inline std::vector<CornerValue> demo_beta_minus_one(double rho, std::span<const double> radii,
                                                    double side = 1.0) {
  if (!(rho > 0.0 && rho <= 0.5 * side)) throw InvalidArgument("corner radius must lie in (0, side/2]");
  std::vector<CornerValue> out;
  for (double r : radii) {
    out.push_back({r, evaluate_R(RoundedCornerSet{side, rho, r}, -1.0)});
  }
  return out;
}

struct NamedDomain {
  std::string name;
  DomainSpec spec;
};

/// Planar test domains of area pi.
inline std::vector<NamedDomain> domain_library() {
  const double pi = std::numbers::pi;
  const double side = std::sqrt(pi);
  // Rounded square with corner radius side/4: area side^2 (1 - (4 - pi)/16).
  const double rside = std::sqrt(pi / (1.0 - (4.0 - pi) / 16.0));
  return {
      {"square", DomainSpec::rectangle(side, side)},
      {"rectangle-2x1", DomainSpec::rectangle(std::sqrt(2.0 * pi), std::sqrt(0.5 * pi))},
      {"ellipse", DomainSpec::ellipse(1.5, 1.0 / 1.5)},
      {"rounded-square", DomainSpec::rounded_rectangle(rside, rside, 0.25 * rside)},
  };
}

}  // namespace robin
