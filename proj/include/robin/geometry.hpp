#pragma once

// Domains, exact measures, and grid rasterization with boundary bookkeeping.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <queue>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "robin/error.hpp"

namespace robin {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Ball {
  double radius = 1.0;
  int dim = 2;
};

struct Annulus {
  double inner = 0.5;
  double outer = 1.0;
  int dim = 2;
};

/// Axis-aligned, occupying [0,width] x [0,height].
struct Rectangle {
  double width = 1.0;
  double height = 1.0;
};

/// Rectangle [0,width] x [0,height] with four circular corners of radius `corner`.
struct RoundedRectangle {
  double width = 1.0;
  double height = 1.0;
  double corner = 0.25;
};

/// Centered at the origin.
struct Ellipse {
  double semi_x = 1.0;
  double semi_y = 1.0;
};

struct Polygon {
  std::vector<Point> vertices;
};

/// Unit-ball volume in R^N.
inline double unit_ball_volume(int dim) {
  const double n = dim;
  return std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0 + 1.0);
}

namespace detail {

inline double cross(Point a, Point b, Point c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

inline bool segments_intersect(Point p1, Point p2, Point q1, Point q2) {
  const double d1 = cross(q1, q2, p1);
  const double d2 = cross(q1, q2, p2);
  const double d3 = cross(p1, p2, q1);
  const double d4 = cross(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  auto on_segment = [](Point a, Point b, Point c) {
    return std::min(a.x, b.x) <= c.x && c.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= c.y &&
           c.y <= std::max(a.y, b.y);
  };
  return (d1 == 0 && on_segment(q1, q2, p1)) || (d2 == 0 && on_segment(q1, q2, p2)) ||
         (d3 == 0 && on_segment(p1, p2, q1)) || (d4 == 0 && on_segment(p1, p2, q2));
}

inline double signed_area(const std::vector<Point>& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point& a = v[i];
    const Point& b = v[(i + 1) % v.size()];
    s += a.x * b.y - b.x * a.y;
  }
  return 0.5 * s;
}

inline double point_segment_distance(Point p, Point a, Point b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

inline void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidArgument(std::string(what) + " must be a positive finite length");
  }
}

}  // namespace detail

/// Parametric geometry descriptor. Construction validates the shape invariants.
class DomainSpec {
 public:
  using Shape = std::variant<Ball, Annulus, Rectangle, RoundedRectangle, Ellipse, Polygon>;

  explicit DomainSpec(Shape shape) : shape_(std::move(shape)) { validate(); }

  static DomainSpec ball(double radius, int dim = 2) { return DomainSpec(Ball{radius, dim}); }
  static DomainSpec annulus(double inner, double outer, int dim = 2) {
    return DomainSpec(Annulus{inner, outer, dim});
  }
  static DomainSpec rectangle(double w, double h) { return DomainSpec(Rectangle{w, h}); }
  static DomainSpec rounded_rectangle(double w, double h, double rho) {
    return DomainSpec(RoundedRectangle{w, h, rho});
  }
  static DomainSpec ellipse(double a, double b) { return DomainSpec(Ellipse{a, b}); }
  static DomainSpec polygon(std::vector<Point> vertices) {
    return DomainSpec(Polygon{std::move(vertices)});
  }

  const Shape& shape() const { return shape_; }

  template <class T>
  bool is() const {
    return std::holds_alternative<T>(shape_);
  }

  int dimension() const {
    if (auto* b = std::get_if<Ball>(&shape_)) return b->dim;
    if (auto* a = std::get_if<Annulus>(&shape_)) return a->dim;
    return 2;
  }

  std::string_view kind() const {
    static constexpr std::array<std::string_view, 6> names{
        "ball", "annulus", "rectangle", "rounded_rectangle", "ellipse", "polygon"};
    return names[shape_.index()];
  }

  /// Boundary regularity class, kept as metadata only.
  std::string_view smoothness() const {
    switch (shape_.index()) {
      case 0:
      case 1:
      case 4:
        return "smooth";
      case 3:
        return "C1";
      default:
        return "lipschitz";
    }
  }

  /// Open-set membership; planar shapes only.
  bool contains(Point p) const {
    return std::visit([&](const auto& s) { return contains_impl(s, p); }, shape_);
  }

  /// Outward unit normal at the boundary point closest to `p` (planar shapes only).
  Point outward_normal(Point p) const {
    return std::visit([&](const auto& s) { return normal_impl(s, p); }, shape_);
  }

  /// Bounding box as {xmin, ymin, xmax, ymax}.
  std::array<double, 4> bounds() const {
    return std::visit([](const auto& s) { return bounds_impl(s); }, shape_);
  }

 private:
  void validate() const {
    std::visit([](const auto& s) { validate_impl(s); }, shape_);
  }

  static void validate_dim(int dim) {
    if (dim < 2) throw InvalidArgument("dimension must be at least 2");
  }
  static void validate_impl(const Ball& s) {
    detail::require_positive(s.radius, "ball radius");
    validate_dim(s.dim);
  }
  static void validate_impl(const Annulus& s) {
    detail::require_positive(s.inner, "annulus inner radius");
    detail::require_positive(s.outer, "annulus outer radius");
    if (!(s.inner < s.outer)) throw InvalidArgument("annulus requires inner < outer");
    validate_dim(s.dim);
  }
  static void validate_impl(const Rectangle& s) {
    detail::require_positive(s.width, "rectangle width");
    detail::require_positive(s.height, "rectangle height");
  }
  static void validate_impl(const RoundedRectangle& s) {
    detail::require_positive(s.width, "rounded rectangle width");
    detail::require_positive(s.height, "rounded rectangle height");
    detail::require_positive(s.corner, "corner radius");
    if (s.corner > 0.5 * std::min(s.width, s.height)) {
      throw InvalidArgument("corner radius must not exceed min(width,height)/2");
    }
  }
  static void validate_impl(const Ellipse& s) {
    detail::require_positive(s.semi_x, "ellipse semi-axis");
    detail::require_positive(s.semi_y, "ellipse semi-axis");
  }
  static void validate_impl(const Polygon& s) {
    const auto& v = s.vertices;
    if (v.size() < 3) throw InvalidArgument("polygon needs at least 3 vertices");
    for (const auto& p : v) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw InvalidArgument("polygon vertex is not finite");
      }
    }
    if (std::abs(detail::signed_area(v)) <= 0.0) throw InvalidArgument("polygon has zero area");
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
        if (adjacent) continue;
        if (detail::segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n])) {
          throw InvalidArgument("polygon is not simple");
        }
      }
    }
  }

  static void require_planar(int dim) {
    if (dim != 2) throw InvalidArgument("point queries need a planar (N=2) domain");
  }

  static bool contains_impl(const Ball& s, Point p) {
    require_planar(s.dim);
    return p.x * p.x + p.y * p.y < s.radius * s.radius;
  }
  static bool contains_impl(const Annulus& s, Point p) {
    require_planar(s.dim);
    const double r2 = p.x * p.x + p.y * p.y;
    return s.inner * s.inner < r2 && r2 < s.outer * s.outer;
  }
  static bool contains_impl(const Rectangle& s, Point p) {
    return 0.0 < p.x && p.x < s.width && 0.0 < p.y && p.y < s.height;
  }
  static bool contains_impl(const RoundedRectangle& s, Point p) {
    if (!(0.0 < p.x && p.x < s.width && 0.0 < p.y && p.y < s.height)) return false;
    const double rho = s.corner;
    const double cx = p.x < rho ? rho : (p.x > s.width - rho ? s.width - rho : p.x);
    const double cy = p.y < rho ? rho : (p.y > s.height - rho ? s.height - rho : p.y);
    if (cx == p.x || cy == p.y) return true;
    return std::hypot(p.x - cx, p.y - cy) < rho;
  }
  static bool contains_impl(const Ellipse& s, Point p) {
    const double u = p.x / s.semi_x;
    const double w = p.y / s.semi_y;
    return u * u + w * w < 1.0;
  }
  static bool contains_impl(const Polygon& s, Point p) {
    bool inside = false;
    const auto& v = s.vertices;
    for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
      if ((v[i].y > p.y) != (v[j].y > p.y)) {
        const double x = v[j].x + (p.y - v[j].y) * (v[i].x - v[j].x) / (v[i].y - v[j].y);
        if (p.x < x) inside = !inside;
      }
    }
    return inside;
  }

  static Point unit(double x, double y) {
    const double n = std::hypot(x, y);
    if (n == 0.0) return {1.0, 0.0};
    return {x / n, y / n};
  }
  static Point nearest_side_normal(double x, double y, double w, double h) {
    const std::array<double, 4> d{x, w - x, y, h - y};
    const auto k = std::min_element(d.begin(), d.end()) - d.begin();
    static constexpr std::array<Point, 4> n{Point{-1, 0}, Point{1, 0}, Point{0, -1}, Point{0, 1}};
    return n[static_cast<std::size_t>(k)];
  }

  static Point normal_impl(const Ball&, Point p) { return unit(p.x, p.y); }
  static Point normal_impl(const Annulus& s, Point p) {
    const Point u = unit(p.x, p.y);
    if (std::hypot(p.x, p.y) > 0.5 * (s.inner + s.outer)) return u;
    return {-u.x, -u.y};
  }
  static Point normal_impl(const Rectangle& s, Point p) {
    return nearest_side_normal(p.x, p.y, s.width, s.height);
  }
  static Point normal_impl(const RoundedRectangle& s, Point p) {
    const double rho = s.corner;
    const bool cx = p.x < rho || p.x > s.width - rho;
    const bool cy = p.y < rho || p.y > s.height - rho;
    if (cx && cy) {
      const double ox = p.x < rho ? rho : s.width - rho;
      const double oy = p.y < rho ? rho : s.height - rho;
      return unit(p.x - ox, p.y - oy);
    }
    return nearest_side_normal(p.x, p.y, s.width, s.height);
  }
  static Point normal_impl(const Ellipse& s, Point p) {
    return unit(p.x / (s.semi_x * s.semi_x), p.y / (s.semi_y * s.semi_y));
  }
  static Point normal_impl(const Polygon& s, Point p) {
    const auto& v = s.vertices;
    const double orient = detail::signed_area(v) > 0 ? 1.0 : -1.0;
    double best = std::numeric_limits<double>::infinity();
    Point n{1, 0};
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Point a = v[i];
      const Point b = v[(i + 1) % v.size()];
      const double d = detail::point_segment_distance(p, a, b);
      if (d < best) {
        best = d;
        // Counter-clockwise boundary: the outward normal is the edge direction turned clockwise.
        n = unit(orient * (b.y - a.y), -orient * (b.x - a.x));
      }
    }
    return n;
  }

  static std::array<double, 4> bounds_impl(const Ball& s) {
    return {-s.radius, -s.radius, s.radius, s.radius};
  }
  static std::array<double, 4> bounds_impl(const Annulus& s) {
    return {-s.outer, -s.outer, s.outer, s.outer};
  }
  static std::array<double, 4> bounds_impl(const Rectangle& s) { return {0, 0, s.width, s.height}; }
  static std::array<double, 4> bounds_impl(const RoundedRectangle& s) {
    return {0, 0, s.width, s.height};
  }
  static std::array<double, 4> bounds_impl(const Ellipse& s) {
    return {-s.semi_x, -s.semi_y, s.semi_x, s.semi_y};
  }
  static std::array<double, 4> bounds_impl(const Polygon& s) {
    std::array<double, 4> b{std::numeric_limits<double>::infinity(),
                            std::numeric_limits<double>::infinity(),
                            -std::numeric_limits<double>::infinity(),
                            -std::numeric_limits<double>::infinity()};
    for (const auto& p : s.vertices) {
      b[0] = std::min(b[0], p.x);
      b[1] = std::min(b[1], p.y);
      b[2] = std::max(b[2], p.x);
      b[3] = std::max(b[3], p.y);
    }
    return b;
  }

  Shape shape_;
};

/// Exact Lebesgue measure |Omega| (length^N).
inline double volume(const DomainSpec& spec) {
  struct V {
    double operator()(const Ball& s) const { return unit_ball_volume(s.dim) * std::pow(s.radius, s.dim); }
    double operator()(const Annulus& s) const {
      return unit_ball_volume(s.dim) * (std::pow(s.outer, s.dim) - std::pow(s.inner, s.dim));
    }
    double operator()(const Rectangle& s) const { return s.width * s.height; }
    double operator()(const RoundedRectangle& s) const {
      return s.width * s.height - (4.0 - std::numbers::pi) * s.corner * s.corner;
    }
    double operator()(const Ellipse& s) const { return std::numbers::pi * s.semi_x * s.semi_y; }
    double operator()(const Polygon& s) const { return std::abs(detail::signed_area(s.vertices)); }
  };
  return std::visit(V{}, spec.shape());
}

/// Exact boundary measure P(Omega) (length^{N-1}).
inline double perimeter(const DomainSpec& spec) {
  struct P {
    double operator()(const Ball& s) const {
      return s.dim * unit_ball_volume(s.dim) * std::pow(s.radius, s.dim - 1);
    }
    double operator()(const Annulus& s) const {
      return s.dim * unit_ball_volume(s.dim) *
             (std::pow(s.outer, s.dim - 1) + std::pow(s.inner, s.dim - 1));
    }
    double operator()(const Rectangle& s) const { return 2.0 * (s.width + s.height); }
    double operator()(const RoundedRectangle& s) const {
      return 2.0 * (s.width + s.height) - 8.0 * s.corner + 2.0 * std::numbers::pi * s.corner;
    }
    double operator()(const Ellipse& s) const {
      const double a = std::max(s.semi_x, s.semi_y);
      const double b = std::min(s.semi_x, s.semi_y);
      const double k = std::sqrt(1.0 - (b * b) / (a * a));
      return 4.0 * a * std::comp_ellint_2(k);
    }
    double operator()(const Polygon& s) const {
      double total = 0.0;
      const auto& v = s.vertices;
      for (std::size_t i = 0; i < v.size(); ++i) {
        const Point a = v[i];
        const Point b = v[(i + 1) % v.size()];
        total += std::hypot(b.x - a.x, b.y - a.y);
      }
      return total;
    }
  };
  return std::visit(P{}, spec.shape());
}

/// The centered ball with the same measure as `spec`.
inline DomainSpec equimeasurable_ball(const DomainSpec& spec) {
  const int n = spec.dimension();
  const double r = std::pow(volume(spec) / unit_ball_volume(n), 1.0 / n);
  return DomainSpec::ball(r, n);
}

/// Cardinal directions used for cell faces, and the eight-neighbour stencil.
enum class Direction : std::uint8_t { East = 0, North = 1, West = 2, South = 3 };

enum Neighbor : int { kE = 0, kN, kW, kS, kNE, kNW, kSE, kSW, kNeighborCount };

inline constexpr std::array<std::array<int, 2>, kNeighborCount> kNeighborOffsets{{
    {1, 0}, {0, 1}, {-1, 0}, {0, -1}, {1, 1}, {-1, 1}, {1, -1}, {-1, -1}}};

struct BoundaryFace {
  int cell = -1;
  Direction dir = Direction::East;
  /// Surface measure carried by this face (exactly h for faces on axis-aligned boundary).
  double weight = 0.0;
  Point midpoint;
  Point normal;
};

/// Pair of interior cells joined by a perimeter-stencil edge.
struct StencilEdge {
  int a = -1;
  int b = -1;
  double weight = 0.0;
};

/// Perimeter-stencil weights per unit spacing: axis and diagonal edges.
/// Chosen so that grid-aligned and 45-degree interfaces are measured exactly.
inline constexpr double kAxisWeight = std::numbers::sqrt2 - 1.0;
inline constexpr double kDiagonalWeight = 1.0 - 1.0 / std::numbers::sqrt2;

/// Rasterized domain: interior cells, boundary faces, and the eight-neighbour
/// stencil carrying the discrete relative perimeter.
class GridDomain {
 public:
  /// Builds a grid from an explicit cell mask (row-major, i fastest). Boundary
  /// faces carry weight h each; no geometric normals are available.
  static GridDomain from_mask(int nx, int ny, double h, std::span<const std::uint8_t> mask,
                              Point origin = {0.0, 0.0}) {
    if (static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) != mask.size()) {
      throw InvalidArgument("mask size does not match grid dimensions");
    }
    GridDomain g(nx, ny, h, origin);
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        if (mask[static_cast<std::size_t>(j) * nx + i]) g.add_cell(i, j);
      }
    }
    g.finish(nullptr);
    return g;
  }

  double spacing() const { return h_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  Point origin() const { return origin_; }
  std::size_t size() const { return cells_.size(); }
  double cell_area() const { return h_ * h_; }

  /// |Omega|_h.
  double area() const { return cell_area() * static_cast<double>(cells_.size()); }
  /// |dOmega|_h, the sum of boundary-face weights.
  double boundary_measure() const { return boundary_measure_; }
  std::size_t face_count() const { return faces_.size(); }

  std::array<int, 2> coords(int cell) const { return cells_[static_cast<std::size_t>(cell)]; }
  Point center(int cell) const {
    const auto [i, j] = coords(cell);
    return {origin_.x + (i + 0.5) * h_, origin_.y + (j + 0.5) * h_};
  }
  /// Interior index of grid cell (i,j), or -1.
  int index(int i, int j) const {
    if (i < 0 || j < 0 || i >= nx_ || j >= ny_) return -1;
    return index_[static_cast<std::size_t>(j) * nx_ + i];
  }
  int neighbor(int cell, Neighbor n) const {
    return neighbors_[static_cast<std::size_t>(cell)][static_cast<std::size_t>(n)];
  }
  /// Sum of boundary-face weights owned by `cell` (zero for cells off the boundary).
  double boundary_weight(int cell) const { return boundary_weight_[static_cast<std::size_t>(cell)]; }
  std::span<const double> boundary_weights() const { return boundary_weight_; }
  std::span<const BoundaryFace> faces() const { return faces_; }
  std::span<const StencilEdge> edges() const { return edges_; }

  /// Full-box mask, 1 for interior cells.
  std::vector<std::uint8_t> mask() const {
    std::vector<std::uint8_t> m(index_.size(), 0);
    for (std::size_t k = 0; k < index_.size(); ++k) m[k] = index_[k] >= 0 ? 1 : 0;
    return m;
  }

  bool connected() const {
    if (cells_.empty()) return false;
    std::vector<char> seen(cells_.size(), 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    std::size_t count = 1;
    while (!q.empty()) {
      const int c = q.front();
      q.pop();
      for (int n = 0; n < 4; ++n) {
        const int m = neighbors_[static_cast<std::size_t>(c)][static_cast<std::size_t>(n)];
        if (m >= 0 && !seen[static_cast<std::size_t>(m)]) {
          seen[static_cast<std::size_t>(m)] = 1;
          ++count;
          q.push(m);
        }
      }
    }
    return count == cells_.size();
  }

 private:
  friend GridDomain rasterize(const DomainSpec& spec, double h);

  GridDomain(int nx, int ny, double h, Point origin)
      : h_(h), nx_(nx), ny_(ny), origin_(origin),
        index_(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny), -1) {
    if (!(h > 0.0) || nx <= 0 || ny <= 0) throw InvalidArgument("grid needs h > 0 and a nonempty box");
  }

  void add_cell(int i, int j) {
    index_[static_cast<std::size_t>(j) * nx_ + i] = static_cast<int>(cells_.size());
    cells_.push_back({i, j});
  }

  bool inside(int i, int j) const { return index(i, j) >= 0; }

  void finish(const DomainSpec* spec) {
    const std::size_t n = cells_.size();
    neighbors_.assign(n, {});
    for (std::size_t c = 0; c < n; ++c) {
      const auto [i, j] = cells_[c];
      for (int k = 0; k < kNeighborCount; ++k) {
        neighbors_[c][static_cast<std::size_t>(k)] =
            index(i + kNeighborOffsets[static_cast<std::size_t>(k)][0],
                  j + kNeighborOffsets[static_cast<std::size_t>(k)][1]);
      }
    }
    build_faces(spec);
    build_edges();
  }

  void build_faces(const DomainSpec* spec) {
    boundary_weight_.assign(cells_.size(), 0.0);
    boundary_measure_ = 0.0;
    faces_.clear();
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      for (int d = 0; d < 4; ++d) {
        if (neighbors_[c][static_cast<std::size_t>(d)] >= 0) continue;
        BoundaryFace f;
        f.cell = static_cast<int>(c);
        f.dir = static_cast<Direction>(d);
        const Point ctr = center(static_cast<int>(c));
        const double ox = kNeighborOffsets[static_cast<std::size_t>(d)][0];
        const double oy = kNeighborOffsets[static_cast<std::size_t>(d)][1];
        f.midpoint = {ctr.x + 0.5 * h_ * ox, ctr.y + 0.5 * h_ * oy};
        f.normal = {ox, oy};
        f.weight = h_;
        if (spec != nullptr) {
          // Locate the boundary crossing between this center and the outside neighbour.
          double lo = 0.0;
          double hi = 1.0;
          for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (spec->contains({ctr.x + mid * h_ * ox, ctr.y + mid * h_ * oy})) {
              lo = mid;
            } else {
              hi = mid;
            }
          }
          const Point q{ctr.x + lo * h_ * ox, ctr.y + lo * h_ * oy};
          f.normal = spec->outward_normal(q);
          // A staircase face of direction e stands in for |n.e|/(|n_x|+|n_y|) of true boundary.
          f.weight = h_ / (std::abs(f.normal.x) + std::abs(f.normal.y));
        }
        boundary_measure_ += f.weight;
        faces_.push_back(f);
      }
    }
    if (spec != nullptr) {
      // The local weights approximate the curve length each face stands for; distribute the
      // exact perimeter in those proportions.
      const double factor = perimeter(*spec) / boundary_measure_;
      for (auto& f : faces_) f.weight *= factor;
    }
    boundary_measure_ = 0.0;
    for (const auto& f : faces_) {
      boundary_weight_[static_cast<std::size_t>(f.cell)] += f.weight;
      boundary_measure_ += f.weight;
    }
  }

  // Axis edge (a,b) with side offsets; adds half a diagonal weight for every
  // diagonal of the adjacent 2x2 blocks that is cut off by the domain boundary.
  double axis_edge_weight(int i, int j, int di, int dj) const {
    // (di,dj) is the edge direction; (si,sj) the perpendicular side direction.
    const int si = dj;
    const int sj = di;
    int missing = 0;
    for (int side : {1, -1}) {
      missing += inside(i + side * si, j + side * sj) ? 0 : 1;
      missing += inside(i + di + side * si, j + dj + side * sj) ? 0 : 1;
    }
    return h_ * (kAxisWeight + 0.5 * kDiagonalWeight * missing);
  }

  void build_edges() {
    edges_.clear();
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      const auto [i, j] = cells_[c];
      const auto& nb = neighbors_[c];
      const int a = static_cast<int>(c);
      if (nb[kE] >= 0) edges_.push_back({a, nb[kE], axis_edge_weight(i, j, 1, 0)});
      if (nb[kN] >= 0) edges_.push_back({a, nb[kN], axis_edge_weight(i, j, 0, 1)});
      if (nb[kNE] >= 0) edges_.push_back({a, nb[kNE], h_ * kDiagonalWeight});
      if (nb[kNW] >= 0) edges_.push_back({a, nb[kNW], h_ * kDiagonalWeight});
    }
  }

  double h_;
  int nx_;
  int ny_;
  Point origin_;
  std::vector<int> index_;
  std::vector<std::array<int, 2>> cells_;
  std::vector<std::array<int, kNeighborCount>> neighbors_;
  std::vector<BoundaryFace> faces_;
  std::vector<double> boundary_weight_;
  double boundary_measure_ = 0.0;
  std::vector<StencilEdge> edges_;
};

/// Cell-center rasterization. A cell is interior iff its center lies in the open domain.
/// Throws DegenerateRaster on an empty or disconnected mask.
inline GridDomain rasterize(const DomainSpec& spec, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("grid spacing must be positive");
  if (spec.dimension() != 2) throw InvalidArgument("grid rasterization is planar only (N=2)");
  if (auto* poly = std::get_if<Polygon>(&spec.shape())) {
    const auto& v = poly->vertices;
    for (std::size_t a = 0; a < v.size(); ++a) {
      for (std::size_t b = a + 1; b < v.size(); ++b) {
        if (std::hypot(v[a].x - v[b].x, v[a].y - v[b].y) < h) {
          throw DegenerateRaster("polygon has vertices closer than the grid spacing");
        }
      }
    }
  }
  const auto box = spec.bounds();
  const double w = box[2] - box[0];
  const double hh = box[3] - box[1];
  const int nx = std::max(1, static_cast<int>(std::ceil(w / h - 1e-9)));
  const int ny = std::max(1, static_cast<int>(std::ceil(hh / h - 1e-9)));
  const Point origin{0.5 * (box[0] + box[2]) - 0.5 * nx * h, 0.5 * (box[1] + box[3]) - 0.5 * ny * h};
  GridDomain g(nx, ny, h, origin);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const Point c{origin.x + (i + 0.5) * h, origin.y + (j + 0.5) * h};
      if (spec.contains(c)) g.add_cell(i, j);
    }
  }
  if (g.size() == 0) throw DegenerateRaster("rasterized domain is empty; reduce h");
  g.finish(&spec);
  if (!g.connected()) throw DegenerateRaster("rasterized domain is disconnected; reduce h");
  return g;
}

}  // namespace robin
