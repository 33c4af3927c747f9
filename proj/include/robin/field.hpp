#pragma once

// Cell-centred fields on a GridDomain and the discrete integrals built on them.

#include <cmath>
#include <span>
#include <vector>

#include "robin/geometry.hpp"

namespace robin {

/// One real value per interior cell of a GridDomain, in the grid's cell order.
using ScalarField = std::vector<double>;

inline void require_field(const GridDomain& grid, std::span<const double> v) {
  if (v.size() != grid.size()) throw InvalidArgument("field size does not match the grid");
}

/// Discrete relative total variation: sum over stencil edges of w_e |v_a - v_b|.
/// For a 0/1 field this is the stencil perimeter of the set inside the domain.
inline double total_variation(const GridDomain& grid, std::span<const double> v) {
  require_field(grid, v);
  double tv = 0.0;
  for (const auto& e : grid.edges()) {
    tv += e.weight * std::abs(v[static_cast<std::size_t>(e.a)] - v[static_cast<std::size_t>(e.b)]);
  }
  return tv;
}

/// sum over boundary faces of weight * |v(owning cell)|^q.
inline double boundary_integral(const GridDomain& grid, std::span<const double> v, double q = 1.0) {
  require_field(grid, v);
  double s = 0.0;
  const auto bw = grid.boundary_weights();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (bw[i] != 0.0) s += bw[i] * (q == 1.0 ? std::abs(v[i]) : std::pow(std::abs(v[i]), q));
  }
  return s;
}

/// sum over cells of h^2 |v|^q.
inline double volume_integral(const GridDomain& grid, std::span<const double> v, double q = 1.0) {
  require_field(grid, v);
  double s = 0.0;
  for (double x : v) s += q == 1.0 ? std::abs(x) : std::pow(std::abs(x), q);
  return grid.cell_area() * s;
}

/// BFS depth (in cells) from the boundary layer; cells owning a boundary face have depth 1.
inline std::vector<int> boundary_depth(const GridDomain& grid) {
  std::vector<int> depth(grid.size(), 0);
  std::vector<int> frontier;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.boundary_weight(static_cast<int>(i)) > 0.0) {
      depth[i] = 1;
      frontier.push_back(static_cast<int>(i));
    }
  }
  int level = 1;
  while (!frontier.empty()) {
    std::vector<int> next;
    for (int c : frontier) {
      for (int n = 0; n < 4; ++n) {
        const int m = grid.neighbor(c, static_cast<Neighbor>(n));
        if (m >= 0 && depth[static_cast<std::size_t>(m)] == 0) {
          depth[static_cast<std::size_t>(m)] = level + 1;
          next.push_back(m);
        }
      }
    }
    frontier = std::move(next);
    ++level;
  }
  return depth;
}

/// Area centroid of the interior cells.
inline Point centroid(const GridDomain& grid) {
  Point c{0.0, 0.0};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point p = grid.center(static_cast<int>(i));
    c.x += p.x;
    c.y += p.y;
  }
  c.x /= static_cast<double>(grid.size());
  c.y /= static_cast<double>(grid.size());
  return c;
}

}  // namespace robin
