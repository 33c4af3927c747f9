#pragma once

// First Robin eigenvalue of the p-Laplacian on a rasterized planar domain by
// monotone descent on the discrete Rayleigh quotient.

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "robin/field.hpp"
#include "robin/geometry.hpp"

namespace robin {

struct EigenOptions {
  /// Stop when |lambda_k - lambda_{k-1}| <= lambda_tol * max(1,|lambda|) ...
  double lambda_tol = 1e-10;
  /// ... and the relative Euler-Lagrange residual is below residual_tol.
  double residual_tol = 1e-5;
  int max_iter = 20000;
  /// Quasi-Newton memory.
  int memory = 12;
  /// Seed for the coercivity probes (beta < 0).
  unsigned seed = 12345;
  int coercivity_probes = 200;
  /// For p < 2: number of smoothing stages run before the exact quotient, their starting
  /// smoothing (relative to the field's gradient scale) and per-stage iteration cap.
  int smoothing_stages = 4;
  double smoothing_start = 0.1;
  int stage_iter = 2000;
  /// Keep the full lambda trace in the result.
  bool record_trace = true;
};

struct EigenResult {
  double p = 2.0;
  double beta = 0.0;
  double lambda = 0.0;
  /// Minimizer normalized to sum h^2 |u|^p = 1 with nonnegative mean.
  ScalarField u;
  /// ||dN - lambda dD|| / (||dN|| + |lambda| ||dD||) at the returned field.
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Discrete trace constant estimate (only computed for beta < 0, NaN otherwise).
  double trace_constant = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> lambda_trace;
};

namespace detail {

inline double spow(double x, double e) { return x < 0 ? -std::pow(-x, e) : std::pow(x, e); }

/// Numerator and denominator of J_p and their gradients.
struct QuotientParts {
  double num = 0.0;
  double den = 0.0;
  std::vector<double> dnum;
  std::vector<double> dden;
};

inline void quotient_parts(const GridDomain& grid, std::span<const double> u, double p, double beta,
                           QuotientParts& out, bool with_gradient, double eps2 = 0.0) {
  const std::size_t n = grid.size();
  const double h = grid.spacing();
  const double h2 = h * h;
  if (with_gradient) {
    out.dnum.assign(n, 0.0);
    out.dden.assign(n, 0.0);
  }
  double grad_energy = 0.0;
  double boundary = 0.0;
  double mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(i);
    const int e = grid.neighbor(c, kE);
    const int nn = grid.neighbor(c, kN);
    const double gx = e >= 0 ? (u[static_cast<std::size_t>(e)] - u[i]) / h : 0.0;
    const double gy = nn >= 0 ? (u[static_cast<std::size_t>(nn)] - u[i]) / h : 0.0;
    const double g2 = gx * gx + gy * gy + eps2;
    if (g2 > 0.0) {
      const double gp = p == 2.0 ? g2 : std::pow(g2, 0.5 * p);
      grad_energy += h2 * gp;
      if (with_gradient) {
        // d/du of h^2 |g|^p = h^2 p |g|^{p-2} g . dg/du
        const double q = h2 * p * (p == 2.0 ? 1.0 : gp / g2) / h;
        if (e >= 0) {
          out.dnum[static_cast<std::size_t>(e)] += q * gx;
          out.dnum[i] -= q * gx;
        }
        if (nn >= 0) {
          out.dnum[static_cast<std::size_t>(nn)] += q * gy;
          out.dnum[i] -= q * gy;
        }
      }
    }
    const double a = std::abs(u[i]);
    const double ap = p == 2.0 ? a * a : std::pow(a, p);
    mass += h2 * ap;
    const double bw = grid.boundary_weight(c);
    if (bw != 0.0) boundary += bw * ap;
    if (with_gradient) {
      const double d = p * spow(u[i], p - 1.0);
      out.dden[i] = h2 * d;
      if (bw != 0.0) out.dnum[i] += beta * bw * d;
    }
  }
  out.num = grad_energy + beta * boundary;
  out.den = mass;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double relative_residual(const QuotientParts& q, double lambda) {
  double r2 = 0.0;
  for (std::size_t i = 0; i < q.dnum.size(); ++i) {
    const double r = q.dnum[i] - lambda * q.dden[i];
    r2 += r * r;
  }
  const double scale = norm2(q.dnum) + std::abs(lambda) * norm2(q.dden);
  return scale > 0.0 ? std::sqrt(r2) / scale : 0.0;
}

inline void normalize_lp(const GridDomain& grid, std::vector<double>& u, double p) {
  const double m = volume_integral(grid, u, p);
  if (!(m > 0.0)) throw InvalidArgument("field is identically zero");
  const double s = std::pow(m, -1.0 / p);
  double mean = 0.0;
  for (double x : u) mean += x;
  const double sign = mean < 0 ? -1.0 : 1.0;
  for (double& x : u) x *= sign * s;
}

}  // namespace detail

/// Discrete J_p: (sum h^2 |grad u|^p + beta sum_faces w |u|^p) / sum h^2 |u|^p, with forward
/// differences between interior cells and no gradient contribution across the boundary.
inline double rayleigh_quotient_p(const GridDomain& grid, std::span<const double> u, double p,
                                  double beta) {
  require_field(grid, u);
  if (!(p > 1.0)) throw InvalidArgument("p must exceed 1");
  detail::QuotientParts q;
  detail::quotient_parts(grid, u, p, beta, q, false);
  if (!(q.den > 0.0)) throw InvalidArgument("Rayleigh quotient of the zero field");
  return q.num / q.den;
}

/// Largest ratio sum_faces w|v| / (TV_h(v) + sum h^2 |v|) over boundary-concentrated
/// piecewise-constant probes; a grid-level stand-in for the trace constant.
inline double estimate_trace_constant(const GridDomain& grid, int probes, unsigned seed) {
  const auto depth = boundary_depth(grid);
  const Point c = centroid(grid);
  std::vector<double> angle(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point x = grid.center(static_cast<int>(i));
    angle[i] = std::atan2(x.y - c.y, x.x - c.x) + std::numbers::pi;
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> depth_dist(1, 4);
  std::uniform_int_distribution<int> pieces_dist(1, 4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> v(grid.size());
  double best = 0.0;
  const double two_pi = 2.0 * std::numbers::pi;
  for (int k = 0; k < probes; ++k) {
    const int d = depth_dist(rng);
    const double start = two_pi * unit(rng);
    // First probe of each batch of 8 covers the whole boundary band.
    const double width = (k % 8 == 0) ? two_pi : two_pi * (0.125 + 0.875 * unit(rng));
    const int pieces = pieces_dist(rng);
    std::vector<double> values(static_cast<std::size_t>(pieces));
    for (double& x : values) x = 0.5 + unit(rng);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      v[i] = 0.0;
      if (depth[i] == 0 || depth[i] > d) continue;
      double rel = angle[i] - start;
      rel -= two_pi * std::floor(rel / two_pi);
      if (rel >= width) continue;
      const auto piece = std::min<std::size_t>(static_cast<std::size_t>(pieces - 1),
                                               static_cast<std::size_t>(rel / width * pieces));
      v[i] = values[piece];
    }
    const double b = boundary_integral(grid, v);
    if (b <= 0.0) continue;
    const double ratio = b / (total_variation(grid, v) + volume_integral(grid, v));
    best = std::max(best, ratio);
  }
  return best;
}

/// Minimizes J_p on the grid by limited-memory quasi-Newton descent with Armijo backtracking
/// (step halving from 1); every accepted step decreases the quotient.
/// `initial` (optional) warm-starts the iteration.
inline EigenResult minimize_Jp(const GridDomain& grid, double p, double beta,
                               const EigenOptions& opts = {}, std::span<const double> initial = {}) {
  if (!(p > 1.0)) throw InvalidArgument("p must exceed 1");
  if (!(beta > -1.0)) throw UnboundedProblem("beta must exceed -1 for the grid eigenvalue problem");
  const std::size_t n = grid.size();
  EigenResult res;
  res.p = p;
  res.beta = beta;

  if (beta == 0.0) {
    res.u.assign(n, 1.0);
    detail::normalize_lp(grid, res.u, p);
    res.lambda = 0.0;
    res.converged = true;
    if (opts.record_trace) res.lambda_trace.push_back(0.0);
    return res;
  }
  if (beta < 0.0) {
    res.trace_constant = estimate_trace_constant(grid, opts.coercivity_probes, opts.seed);
    if (!(1.0 + beta * res.trace_constant > 0.0)) {
      throw CoercivityError("grid too coarse for this negative beta: 1 + beta*c1_h <= 0 (c1_h = " +
                            std::to_string(res.trace_constant) + ")");
    }
  }

  std::vector<double> u(n, 1.0);
  if (!initial.empty()) {
    require_field(grid, initial);
    u.assign(initial.begin(), initial.end());
  } else if (beta < 0.0) {
    const Point c = centroid(grid);
    double rmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Point x = grid.center(static_cast<int>(i));
      rmax = std::max(rmax, std::hypot(x.x - c.x, x.y - c.y));
    }
    for (std::size_t i = 0; i < n; ++i) {
      const Point x = grid.center(static_cast<int>(i));
      const double r = std::hypot(x.x - c.x, x.y - c.y) / rmax;
      u[i] = 1.0 + r * r;
    }
  }
  detail::normalize_lp(grid, u, p);

  detail::QuotientParts q;
  double eps2 = 0.0;
  auto evaluate = [&](std::span<const double> x, bool grad) {
    detail::quotient_parts(grid, x, p, beta, q, grad, eps2);
    return q.num / q.den;
  };
  auto gradient_of_J = [&](double J, std::vector<double>& g) {
    g.resize(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = (q.dnum[i] - J * q.dden[i]) / q.den;
  };

  std::deque<std::vector<double>> S;
  std::deque<std::vector<double>> Y;
  std::deque<double> rho;
  std::vector<double> dir(n);
  std::vector<double> trial(n);
  std::vector<double> g;
  std::vector<double> g_new;
  std::vector<double> alpha(static_cast<std::size_t>(opts.memory));
  double J = 0.0;
  double resid = 0.0;
  int it = 0;

  // Quasi-Newton descent on the (possibly smoothed) quotient. Returns true when the stopping
  // test fired, false when the budget ran out or no further decrease was possible.
  auto descend = [&](int budget, double res_tol, double change_tol) {
    S.clear();
    Y.clear();
    rho.clear();
    J = evaluate(u, true);
    resid = detail::relative_residual(q, J);
    gradient_of_J(J, g);
    double last_change = std::numeric_limits<double>::infinity();
    for (int k = 0; k < budget; ++k, ++it) {
      if (resid < res_tol && last_change <= change_tol * std::max(1.0, std::abs(J))) return true;
      // Two-loop recursion.
      for (std::size_t i = 0; i < n; ++i) dir[i] = -g[i];
      const std::size_t m = S.size();
      for (std::size_t j = m; j-- > 0;) {
        alpha[j] = rho[j] * detail::dot(S[j], dir);
        for (std::size_t i = 0; i < n; ++i) dir[i] -= alpha[j] * Y[j][i];
      }
      double gamma = 1.0;
      if (m > 0) {
        gamma = detail::dot(S[m - 1], Y[m - 1]) / detail::dot(Y[m - 1], Y[m - 1]);
      } else {
        // First step: move a fraction of the field norm.
        const double gn = detail::norm2(g);
        const double un = detail::norm2(u);
        gamma = gn > 0 ? 1e-2 * un / gn : 1.0;
      }
      for (std::size_t i = 0; i < n; ++i) dir[i] *= gamma;
      for (std::size_t j = 0; j < m; ++j) {
        const double b = rho[j] * detail::dot(Y[j], dir);
        for (std::size_t i = 0; i < n; ++i) dir[i] += S[j][i] * (alpha[j] - b);
      }
      double slope = detail::dot(g, dir);
      if (!(slope < 0.0)) {
        S.clear();
        Y.clear();
        rho.clear();
        const double gn = detail::norm2(g);
        const double un = detail::norm2(u);
        for (std::size_t i = 0; i < n; ++i) dir[i] = -g[i] * (gn > 0 ? 1e-2 * un / gn : 1.0);
        slope = detail::dot(g, dir);
        if (!(slope < 0.0)) return false;
      }
      // Armijo backtracking, halving from the full step.
      double t = 1.0;
      double J_new = J;
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls) {
        for (std::size_t i = 0; i < n; ++i) trial[i] = u[i] + t * dir[i];
        J_new = evaluate(trial, false);
        if (std::isfinite(J_new) && J_new <= J + 1e-4 * t * slope) {
          accepted = true;
          break;
        }
        t *= 0.5;
      }
      if (!accepted) {
        if (S.empty()) return false;  // steepest descent cannot decrease further
        S.clear();
        Y.clear();
        rho.clear();
        continue;
      }
      J_new = evaluate(trial, true);
      gradient_of_J(J_new, g_new);
      std::vector<double> s(n);
      std::vector<double> y(n);
      for (std::size_t i = 0; i < n; ++i) {
        s[i] = trial[i] - u[i];
        y[i] = g_new[i] - g[i];
      }
      const double sy = detail::dot(s, y);
      if (sy > 1e-300) {
        S.push_back(std::move(s));
        Y.push_back(std::move(y));
        rho.push_back(1.0 / sy);
        if (static_cast<int>(S.size()) > opts.memory) {
          S.pop_front();
          Y.pop_front();
          rho.pop_front();
        }
      }
      last_change = std::abs(J - J_new);
      u.swap(trial);
      g.swap(g_new);
      J = J_new;
      resid = detail::relative_residual(q, J);
      if (opts.record_trace) res.lambda_trace.push_back(J);
      // Keep the iterate on a bounded scale; J is 0-homogeneous.
      // The smoothing scales with the field so the smoothed quotient is unchanged.
      if (q.den > 16.0 || q.den < 1.0 / 16.0) {
        eps2 *= std::pow(q.den, -2.0 / p);
        detail::normalize_lp(grid, u, p);
        J = evaluate(u, true);
        gradient_of_J(J, g);
        S.clear();
        Y.clear();
        rho.clear();
      }
    }
    return resid < res_tol && last_change <= change_tol * std::max(1.0, std::abs(J));
  };

  // For p < 2 the density |g|^p is stiff near g = 0. Descend first on (|g|^2 + eps^2)^{p/2}
  // with eps shrinking geometrically; the smoothed quotient dominates the exact one, so the
  // recorded sequence stays nonincreasing across stages.
  if (p < 2.0 && opts.smoothing_stages > 0) {
    double mean_abs = 0.0;
    for (double x : u) mean_abs += std::abs(x);
    mean_abs /= static_cast<double>(n);
    const double scale = mean_abs / std::sqrt(grid.area());
    for (int s = 0; s < opts.smoothing_stages; ++s) {
      const double eps = scale * opts.smoothing_start * std::pow(0.1, s);
      eps2 = eps * eps;
      descend(opts.stage_iter, 1e-3, 1e-8);
    }
    eps2 = 0.0;
  }
  const int remaining = std::max(0, opts.max_iter - it);
  const bool converged = descend(remaining, opts.residual_tol, opts.lambda_tol);
  detail::normalize_lp(grid, u, p);
  J = evaluate(u, true);
  if (opts.record_trace) res.lambda_trace.push_back(J);
  res.lambda = J;
  res.residual = detail::relative_residual(q, J);
  res.u = std::move(u);
  res.iterations = it;
  res.converged = converged;
  return res;
}


/// Solves along a decreasing list of exponents, each solve warm-started from the previous minimizer.
inline std::vector<EigenResult> warm_start_path(const GridDomain& grid, double beta,
                                                std::span<const double> p_list,
                                                const EigenOptions& opts = {}) {
  if (p_list.empty()) throw InvalidArgument("p_list is empty");
  for (std::size_t k = 0; k < p_list.size(); ++k) {
    if (!(p_list[k] > 1.0)) throw InvalidArgument("every p must exceed 1");
    if (k > 0 && !(p_list[k] < p_list[k - 1])) {
      throw InvalidArgument("p_list must be strictly decreasing");
    }
  }
  std::vector<EigenResult> out;
  out.reserve(p_list.size());
  for (double p : p_list) {
    if (out.empty()) {
      out.push_back(minimize_Jp(grid, p, beta, opts));
    } else {
      out.push_back(minimize_Jp(grid, p, beta, opts, out.back().u));
    }
  }
  return out;
}

}  // namespace robin
