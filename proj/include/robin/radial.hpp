#pragma once

// Balls and spherical shells in any dimension N >= 2: the radial shooting
// solver for p > 1 and the closed-form p = 1 quantities.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "robin/error.hpp"

namespace robin {

struct RadialOptions {
  /// Bisection stops once the eigenvalue bracket is narrower than tol * max(1, |lambda|).
  double tol = 1e-10;
  /// Local error tolerance of the adaptive integrator.
  double ode_tol = 1e-12;
  /// Integration starts at start_fraction * R using the series expansion at the origin.
  double start_fraction = 1e-6;
  int max_bracket_expansions = 8;
  /// Points of the returned profile (uniform in r, including 0 and R).
  int profile_points = 1001;
};

/// First radial eigenfunction on B_R: samples of psi and psi' plus the eigenvalue.
struct RadialProfile {
  int dim = 2;
  double radius = 1.0;
  double p = 2.0;
  double beta = 0.0;
  double lambda = 0.0;
  /// |psi'(R)| - |beta|^{1/(p-1)} psi(R), evaluated on the normalized profile.
  double boundary_residual = 0.0;
  /// The same condition in Riccati form, z(R) + beta with z = |psi'|^{p-2} psi' / psi^{p-1}.
  /// Stays O(1) where boundary_residual overflows (p near 1, |beta| > 1).
  double mismatch = 0.0;
  int bisection_steps = 0;
  std::vector<double> r;
  std::vector<double> psi;
  std::vector<double> dpsi;
};

namespace detail {

inline double signed_pow(double x, double e) {
  return x < 0 ? -std::pow(-x, e) : std::pow(x, e);
}

// With z = |psi'|^{p-2} psi' / psi^{p-1} the radial eigen-equation becomes the Riccati equation
//   z' = -(N-1) z / r - lambda - (p-1) |z|^{p/(p-1)},   psi'/psi = sign(z) |z|^{1/(p-1)},
// and the Robin condition at r = R reads z(R) = -beta.
struct RiccatiSystem {
  int dim;
  double p;
  double lambda;

  void operator()(const std::array<double, 2>& x, std::array<double, 2>& dxdr, double r) const {
    const double z = x[0];
    dxdr[0] = -(dim - 1) * z / r - lambda - (p - 1.0) * std::pow(std::abs(z), p / (p - 1.0));
    dxdr[1] = signed_pow(z, 1.0 / (p - 1.0));
  }
};

struct ShotResult {
  bool blew_up = false;
  double z_end = 0.0;
};

/// Integrates (z, log psi) from the series start to each requested radius.
/// `on_sample` is called at every radius in `samples` (ascending, within (r0, R]).
template <class Sample>
ShotResult shoot(int dim, double R, double p, double lambda, double beta, const RadialOptions& opts,
                 const std::vector<double>& samples, Sample&& on_sample) {
  namespace odeint = boost::numeric::odeint;
  using State = std::array<double, 2>;
  const double r0 = opts.start_fraction * R;
  // Series at the origin: z ~ -lambda r / N, log psi ~ -((p-1)/p) (lambda/N)^{1/(p-1)} r^{p/(p-1)}.
  const double z0 = -lambda * r0 / dim;
  const double w0 = -((p - 1.0) / p) * signed_pow(lambda / dim, 1.0 / (p - 1.0)) *
                    std::pow(r0, p / (p - 1.0));
  State x{z0, w0};
  RiccatiSystem sys{dim, p, lambda};
  auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(opts.ode_tol, opts.ode_tol);
  // Beyond this the profile has reached zero inside the ball (lambda above the eigenvalue).
  const double blow_cap = std::max(1e8, 1e4 * std::pow(std::abs(beta) + 1.0, 2.0));
  double r = r0;
  double dr = R * 1e-4;
  std::size_t next = 0;
  ShotResult out;
  auto step_to = [&](double target) {
    while (r < target) {
      double trial = std::min(dr, target - r);
      const double before = r;
      auto res = stepper.try_step(sys, x, r, trial);
      if (res == odeint::success) {
        dr = trial;
        if (!std::isfinite(x[0]) || x[0] < -blow_cap) return false;
      } else {
        dr = trial;
        if (dr < 1e-15 * R) {
          // The step controller can no longer resolve the solution: the profile is collapsing.
          if (x[0] < 0) return false;
          throw SolverError("radial ODE step failure at r = " + std::to_string(before));
        }
      }
    }
    return true;
  };
  for (; next < samples.size(); ++next) {
    if (!step_to(samples[next])) {
      out.blew_up = true;
      out.z_end = -std::numeric_limits<double>::infinity();
      return out;
    }
    on_sample(samples[next], x[0], x[1]);
  }
  if (!step_to(R)) {
    out.blew_up = true;
    out.z_end = -std::numeric_limits<double>::infinity();
    return out;
  }
  out.z_end = x[0];
  return out;
}

inline void require_radial_args(int dim, double R, double p) {
  if (dim < 2) throw InvalidArgument("dimension must be at least 2");
  if (!(R > 0.0)) throw InvalidArgument("radius must be positive");
  if (!(p > 1.0)) throw InvalidArgument("p must exceed 1");
}

}  // namespace detail

/// Robin boundary mismatch z(R; lambda) + beta. Decreasing in lambda;
/// -inf once lambda exceeds the Dirichlet threshold.
inline double radial_mismatch(int dim, double R, double p, double beta, double lambda,
                              const RadialOptions& opts = {}) {
  detail::require_radial_args(dim, R, p);
  if (lambda == 0.0) return beta;
  auto shot = detail::shoot(dim, R, p, lambda, beta, opts, {}, [](double, double, double) {});
  return shot.z_end + beta;
}

/// First Robin eigenvalue of the p-Laplacian on B_R by shooting on the radial ODE.
/// The profile is normalized with psi(0) = 1 for beta >= 0 and psi(R) = 1 for beta < 0.
inline RadialProfile shoot_radial_eigen(int dim, double R, double p, double beta,
                                        const RadialOptions& opts = {}) {
  detail::require_radial_args(dim, R, p);
  if (!(opts.tol > 0.0)) throw InvalidArgument("tolerance must be positive");
  RadialProfile out;
  out.dim = dim;
  out.radius = R;
  out.p = p;
  out.beta = beta;
  const int n = std::max(2, opts.profile_points);
  out.r.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) out.r[static_cast<std::size_t>(k)] = R * k / (n - 1);

  if (beta == 0.0) {
    out.lambda = 0.0;
    out.psi.assign(out.r.size(), 1.0);
    out.dpsi.assign(out.r.size(), 0.0);
    return out;
  }

  auto g = [&](double lambda) { return radial_mismatch(dim, R, p, beta, lambda, opts); };
  // The constant test function gives lambda <= beta N / R.
  double lo = 0.0;
  double hi = 0.0;
  if (beta > 0) {
    hi = beta * dim / R;
    int k = 0;
    while (g(hi) > 0) {
      if (++k > opts.max_bracket_expansions) {
        throw SolverError("radial eigenvalue bracket not found");
      }
      hi *= 2.0;
    }
  } else {
    lo = 2.0 * beta * dim / R;
    int k = 0;
    while (g(lo) <= 0) {
      if (++k > opts.max_bracket_expansions) {
        throw SolverError("radial eigenvalue bracket not found");
      }
      lo *= 2.0;
    }
  }
  int steps = 0;
  while (hi - lo > opts.tol * std::max(1.0, std::abs(0.5 * (lo + hi)))) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (g(mid) > 0) {
      lo = mid;
    } else {
      hi = mid;
    }
    ++steps;
  }
  out.lambda = 0.5 * (lo + hi);
  out.bisection_steps = steps;

  // Profile pass.
  std::vector<double> samples(out.r.begin() + 1, out.r.end());
  std::vector<double> logpsi{0.0};
  std::vector<double> zs{0.0};
  auto profile_at = [&](double lambda) {
    logpsi.assign(1, 0.0);
    zs.assign(1, 0.0);
    return detail::shoot(dim, R, p, lambda, beta, opts, samples, [&](double, double z, double w) {
      zs.push_back(z);
      logpsi.push_back(w);
    });
  };
  // Near p = 1 with |beta| > 1 the boundary layer is too thin for the midpoint to be
  // integrable; the lower bracket end always is (its mismatch is positive).
  if (profile_at(out.lambda).blew_up && profile_at(lo).blew_up) {
    throw SolverError("radial profile collapsed at the computed eigenvalue");
  }
  out.mismatch = zs.back() + beta;
  const double anchor = beta > 0 ? logpsi.front() : logpsi.back();
  out.psi.resize(out.r.size());
  out.dpsi.resize(out.r.size());
  for (std::size_t k = 0; k < out.r.size(); ++k) {
    const double psi = std::exp(logpsi[k] - anchor);
    out.psi[k] = psi;
    out.dpsi[k] = psi * detail::signed_pow(zs[k], 1.0 / (p - 1.0));
  }
  const double exponent = 1.0 / (p - 1.0);
  out.boundary_residual =
      std::abs(out.dpsi.back()) - std::pow(std::abs(beta), exponent) * out.psi.back();
  return out;
}

/// f(t) = (t^{N-1} + beta) / (1 - t^N): the shell quotient in units of N/R.
inline double shell_ratio(double t, int dim, double beta) {
  if (!(t >= 0.0 && t < 1.0)) throw InvalidArgument("shell ratio needs 0 <= t < 1");
  if (dim < 2) throw InvalidArgument("dimension must be at least 2");
  return (std::pow(t, dim - 1) + beta) / (1.0 - std::pow(t, dim));
}

struct ShellMinimum {
  double t = 0.0;
  double value = 0.0;
};

/// Global minimum of f over [0,1) by a dense scan followed by golden-section refinement.
inline ShellMinimum minimize_shell_ratio(int dim, double beta, int scan_points = 100000) {
  if (!(beta > -1.0)) throw InvalidArgument("shell minimization requires beta > -1");
  if (scan_points < 3) throw InvalidArgument("scan needs at least 3 points");
  int best = 0;
  double best_val = shell_ratio(0.0, dim, beta);
  for (int k = 1; k < scan_points; ++k) {
    const double v = shell_ratio(static_cast<double>(k) / scan_points, dim, beta);
    if (v < best_val) {
      best_val = v;
      best = k;
    }
  }
  double a = std::max(0, best - 1) / static_cast<double>(scan_points);
  double b = std::min(scan_points - 1, best + 1) / static_cast<double>(scan_points);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
    if (shell_ratio(c, dim, beta) < shell_ratio(d, dim, beta)) {
      b = d;
    } else {
      a = c;
    }
    c = b - phi * (b - a);
    d = a + phi * (b - a);
  }
  ShellMinimum out{0.5 * (a + b), shell_ratio(0.5 * (a + b), dim, beta)};
  // Compare against the scan winner and the endpoint explicitly.
  const double tb = best / static_cast<double>(scan_points);
  if (best_val <= out.value) out = {tb, best_val};
  const double f0 = shell_ratio(0.0, dim, beta);
  if (f0 <= out.value) out = {0.0, f0};
  return out;
}

/// R(E, beta) of the shell {r < |x| < R} inside B_R (formula with beta taken as given).
inline double shell_R_value(double r, double R, int dim, double beta) {
  if (!(R > 0.0)) throw InvalidArgument("radius must be positive");
  if (!(r >= 0.0 && r < R)) throw InvalidArgument("shell needs 0 <= r < R");
  return (dim / R) * shell_ratio(r / R, dim, beta);
}

/// Limit eigenvalue of the ball: min(beta,1) N / R.
inline double ball_limit_eigenvalue(int dim, double R, double beta) {
  if (!(beta > -1.0)) throw UnboundedProblem("ball limit eigenvalue requires beta > -1");
  if (dim < 2) throw InvalidArgument("dimension must be at least 2");
  if (!(R > 0.0)) throw InvalidArgument("radius must be positive");
  return std::min(beta, 1.0) * dim / R;
}

}  // namespace robin
