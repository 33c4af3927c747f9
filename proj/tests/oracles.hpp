#pragma once

// Reference computations written independently of the library code paths they check.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "robin/geometry.hpp"

namespace oracle {

/// First positive root x of beta J0(x) - x J1(x) on (0, j_{0,1}); lambda = (x/R)^2 for the
/// p = 2 Robin problem on the unit disk scaled to radius R. Requires beta > 0.
inline double bessel_robin_eigenvalue(double beta, double R = 1.0) {
  const double b = beta * R;
  auto f = [b](double x) { return b * std::cyl_bessel_j(0.0, x) - x * std::cyl_bessel_j(1.0, x); };
  double lo = 0.0;
  double hi = 2.404825557695773;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  const double x = 0.5 * (lo + hi);
  return x * x / (R * R);
}

/// Smallest generalized eigenvalue of the p = 2 grid quotient, assembled directly as a dense
/// matrix pair: forward-difference Laplacian between interior neighbours plus beta on boundary
/// weights, over the lumped mass h^2 I.
inline double grid_p2_eigenvalue(const robin::GridDomain& g, double beta) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  const double h = g.spacing();
  for (Eigen::Index c = 0; c < n; ++c) {
    const auto [i, j] = g.coords(static_cast<int>(c));
    for (auto [di, dj] : {std::pair{1, 0}, std::pair{0, 1}}) {
      const int m = g.index(i + di, j + dj);
      if (m < 0) continue;
      // h^2 ((u_m - u_c)/h)^2 = (u_m - u_c)^2
      A(c, c) += 1.0;
      A(m, m) += 1.0;
      A(c, m) -= 1.0;
      A(m, c) -= 1.0;
    }
    A(c, c) += beta * g.boundary_weight(static_cast<int>(c));
  }
  A /= h * h;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  return es.eigenvalues()(0);
}

/// Perimeter of a cell set counted directly: unit-length axis faces against cells outside the
/// set but inside the grid. Only valid for sets whose boundary is axis-aligned at scale >= 2 cells
/// where the stencil is exact; used on rectangles.
inline double axis_face_count(const robin::GridDomain& g, const std::vector<std::uint8_t>& set) {
  double faces = 0.0;
  for (std::size_t c = 0; c < set.size(); ++c) {
    if (!set[c]) continue;
    const auto [i, j] = g.coords(static_cast<int>(c));
    for (auto [di, dj] : {std::pair{1, 0}, std::pair{-1, 0}, std::pair{0, 1}, std::pair{0, -1}}) {
      const int m = g.index(i + di, j + dj);
      if (m >= 0 && !set[static_cast<std::size_t>(m)]) faces += 1.0;
    }
  }
  return faces * g.spacing();
}

/// Brute-force minimum of a set ratio over every nonempty subset of a tiny grid.
template <class Ratio>
double brute_force_min(std::size_t n, Ratio ratio) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::uint8_t> set(n);
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    for (std::size_t k = 0; k < n; ++k) set[k] = (mask >> k) & 1u;
    best = std::min(best, ratio(set));
  }
  return best;
}

/// Cheeger constant of the unit square: the rounded-corner optimum 1/rho with
/// (4 - pi) rho^2 - 4 rho + 1 = 0 (smaller root), i.e. 2 + sqrt(pi).
inline double square_cheeger() {
  const double a = 4.0 - std::numbers::pi;
  const double rho = (4.0 - std::sqrt(16.0 - 4.0 * a)) / (2.0 * a);
  return 1.0 / rho;
}

/// Random fields in [0,1] with a few smooth bumps and noise.
inline std::vector<double> random_field(const robin::GridDomain& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> v(g.size());
  const auto c0 = g.center(0);
  const double L = g.spacing() * std::max(g.nx(), g.ny());
  const double cx = c0.x + L * unit(rng), cy = c0.y + L * unit(rng), w = 0.1 + unit(rng);
  const double noise = unit(rng);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto x = g.center(static_cast<int>(i));
    const double d2 = (x.x - cx) * (x.x - cx) + (x.y - cy) * (x.y - cy);
    v[i] = (1.0 - noise) * std::exp(-d2 / (w * w)) + noise * unit(rng);
  }
  return v;
}

}  // namespace oracle
