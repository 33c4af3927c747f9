#pragma once

// The p = 1 problem: the relaxed functional J, the set functional R(E, beta),
// Dinkelbach minimization of the ratio, Cheeger constants, level sets, and the
// boundary-layer sequence for beta < -1.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/boykov_kolmogorov_max_flow.hpp>

#include "robin/error.hpp"
#include "robin/field.hpp"
#include "robin/geometry.hpp"
#include "robin/radial.hpp"

namespace robin {

/// min(beta, 1): the boundary weight of the p = 1 functional.
inline double clamp_beta(double beta) { return std::min(beta, 1.0); }

/// Binary subset of the interior cells of a GridDomain (one 0/1 entry per cell).
using CellSet = std::vector<std::uint8_t>;

/// Spherical shell {inner < |x| < outer} inside the ball of radius outer.
struct Shell {
  double inner = 0.0;
  double outer = 1.0;
  int dim = 2;
};

/// Corner piece of the rounded square [0,side]^2 with corner radius `corner`: the region between
/// the rounded corner and a circle of radius `radius` tangent to the two sides meeting there.
struct RoundedCornerSet {
  double side = 1.0;
  double corner = 0.1;
  double radius = 0.5;
};

using SubsetIndicator = std::variant<CellSet, Shell, RoundedCornerSet>;

/// Relative perimeter, contact with the domain boundary, and area of a set.
struct SetMeasures {
  double perimeter = 0.0;
  double contact = 0.0;
  double area = 0.0;
};

namespace detail {

/// Compressed per-cell adjacency of the perimeter stencil.
struct Adjacency {
  std::vector<std::size_t> offset;
  std::vector<int> neighbor;
  std::vector<double> weight;

  explicit Adjacency(const GridDomain& grid) {
    const std::size_t n = grid.size();
    offset.assign(n + 1, 0);
    for (const auto& e : grid.edges()) {
      ++offset[static_cast<std::size_t>(e.a) + 1];
      ++offset[static_cast<std::size_t>(e.b) + 1];
    }
    for (std::size_t i = 0; i < n; ++i) offset[i + 1] += offset[i];
    neighbor.resize(offset[n]);
    weight.resize(offset[n]);
    std::vector<std::size_t> fill(offset.begin(), offset.end() - 1);
    for (const auto& e : grid.edges()) {
      auto& fa = fill[static_cast<std::size_t>(e.a)];
      neighbor[fa] = e.b;
      weight[fa++] = e.weight;
      auto& fb = fill[static_cast<std::size_t>(e.b)];
      neighbor[fb] = e.a;
      weight[fb++] = e.weight;
    }
  }
};

inline void require_set(const GridDomain& grid, const CellSet& set) {
  if (set.size() != grid.size()) throw InvalidArgument("set size does not match the grid");
}

}  // namespace detail

inline SetMeasures set_measures(const GridDomain& grid, const CellSet& set) {
  detail::require_set(grid, set);
  SetMeasures m;
  for (const auto& e : grid.edges()) {
    if (set[static_cast<std::size_t>(e.a)] != set[static_cast<std::size_t>(e.b)]) {
      m.perimeter += e.weight;
    }
  }
  const auto bw = grid.boundary_weights();
  std::size_t count = 0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (set[i]) {
      m.contact += bw[i];
      ++count;
    }
  }
  m.area = grid.cell_area() * static_cast<double>(count);
  return m;
}

/// (P + min(beta,1) * contact) / area.
inline double set_ratio(const SetMeasures& m, double beta) {
  if (!(m.area > 0.0)) throw InvalidArgument("set is empty");
  return (m.perimeter + clamp_beta(beta) * m.contact) / m.area;
}

/// Discrete J: (TV_h(v) + min(beta,1) sum_faces w |v|) / sum h^2 |v|.
inline double evaluate_J(const GridDomain& grid, std::span<const double> v, double beta) {
  require_field(grid, v);
  const double den = volume_integral(grid, v);
  if (!(den > 0.0)) throw InvalidArgument("J of the zero field");
  return (total_variation(grid, v) + clamp_beta(beta) * boundary_integral(grid, v)) / den;
}

inline double evaluate_R(const GridDomain& grid, const CellSet& set, double beta) {
  return set_ratio(set_measures(grid, set), beta);
}

inline double evaluate_R(const Shell& shell, double beta) {
  return shell_R_value(shell.inner, shell.outer, shell.dim, clamp_beta(beta));
}

inline SetMeasures set_measures(const RoundedCornerSet& s) {
  if (!(s.side > 0.0 && s.corner > 0.0)) throw InvalidArgument("side and corner must be positive");
  if (!(s.radius > s.corner && s.radius <= 0.5 * s.side)) {
    throw InvalidArgument("corner-set radius must lie in (corner, side/2]");
  }
  const double pi = std::numbers::pi;
  SetMeasures m;
  m.perimeter = 0.5 * pi * s.radius;
  m.contact = 2.0 * (s.radius - s.corner) + 0.5 * pi * s.corner;
  m.area = (1.0 - 0.25 * pi) * (s.radius * s.radius - s.corner * s.corner);
  return m;
}

inline double evaluate_R(const RoundedCornerSet& s, double beta) {
  return set_ratio(set_measures(s), beta);
}

inline double evaluate_R(const GridDomain& grid, const SubsetIndicator& set, double beta) {
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, CellSet>) {
          return evaluate_R(grid, s, beta);
        } else {
          return evaluate_R(s, beta);
        }
      },
      set);
}

struct LevelSet {
  /// The set is {v > t}.
  double t = 0.0;
  CellSet set;
  double value = 0.0;
  SetMeasures measures;
};

/// Scans every distinct positive value of v and returns the super-level set {v > t} of least R.
/// Cells enter in decreasing order of v; perimeter, contact and area are updated incrementally.
inline LevelSet extract_level_set(const GridDomain& grid, std::span<const double> v, double beta) {
  require_field(grid, v);
  const std::size_t n = grid.size();
  std::vector<int> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return v[static_cast<std::size_t>(a)] > v[static_cast<std::size_t>(b)];
  });
  const detail::Adjacency adj(grid);
  const auto bw = grid.boundary_weights();
  const double b_hat = clamp_beta(beta);
  const double h2 = grid.cell_area();
  CellSet in(n, 0);
  SetMeasures cur;
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_count = 0;
  SetMeasures best_m;
  std::size_t k = 0;
  while (k < n) {
    const double level = v[static_cast<std::size_t>(order[k])];
    if (!(level > 0.0)) break;
    std::size_t end = k;
    while (end < n && v[static_cast<std::size_t>(order[end])] == level) {
      const auto c = static_cast<std::size_t>(order[end]);
      for (std::size_t a = adj.offset[c]; a < adj.offset[c + 1]; ++a) {
        cur.perimeter += in[static_cast<std::size_t>(adj.neighbor[a])] ? -adj.weight[a] : adj.weight[a];
      }
      in[c] = 1;
      cur.contact += bw[c];
      cur.area += h2;
      ++end;
    }
    k = end;
    const double r = (cur.perimeter + b_hat * cur.contact) / cur.area;
    if (r < best) {
      best = r;
      best_count = k;
      best_m = cur;
    }
  }
  if (best_count == 0) throw InvalidArgument("all level sets are empty");
  LevelSet out;
  const double upper = v[static_cast<std::size_t>(order[best_count - 1])];
  const double lower = best_count < n ? std::max(0.0, v[static_cast<std::size_t>(order[best_count])]) : 0.0;
  out.t = 0.5 * (upper + lower);
  out.set.assign(n, 0);
  for (std::size_t j = 0; j < best_count; ++j) out.set[static_cast<std::size_t>(order[j])] = 1;
  // Recount exactly rather than trusting the running sums.
  out.measures = set_measures(grid, out.set);
  out.value = set_ratio(out.measures, beta);
  return out;
}

enum class LimitMethod { PrimalDual, MaxFlow };

struct LimitOptions {
  LimitMethod method = LimitMethod::MaxFlow;
  /// Outer stop: the subproblem minimum is >= -tol * scale.
  double tol = 1e-9;
  /// Primal-dual gap target for each subproblem, relative to the problem scale.
  double gap_tol = 1e-6;
  int max_outer = 100;
  /// Primal-dual iteration cap per subproblem.
  int max_inner = 50000;
  /// Primal-dual iterations between gap checks and threshold scans.
  int check_every = 50;
};

struct LimitResult {
  double beta = 0.0;
  /// R of the best thresholded set.
  double lambda = 0.0;
  double level = 0.0;
  CellSet set;
  SetMeasures measures;
  /// Relaxed minimizer in [0,1].
  ScalarField v;
  /// Dinkelbach ratios s_k; strictly decreasing.
  std::vector<double> s_trace;
  int outer_iterations = 0;
  int inner_iterations = 0;
  bool converged = false;
  /// Final subproblem lower bound (dual value, or exact minimum for max-flow).
  double subproblem_bound = 0.0;
};

namespace detail {

/// Min over binary x of sum_e w_e |x_a - x_b| + sum_i c_i x_i by a minimum s-t cut.
/// Returns the minimizing set and its objective value.
inline double min_cut_subproblem(const GridDomain& grid, std::span<const double> c, CellSet& set) {
  using Traits = boost::adjacency_list_traits<boost::vecS, boost::vecS, boost::directedS>;
  using Graph = boost::adjacency_list<
      boost::vecS, boost::vecS, boost::directedS,
      boost::property<boost::vertex_index_t, long,
                      boost::property<boost::vertex_color_t, boost::default_color_type,
                                      boost::property<boost::vertex_distance_t, long,
                                                      boost::property<boost::vertex_predecessor_t,
                                                                      Traits::edge_descriptor>>>>,
      boost::property<boost::edge_capacity_t, double,
                      boost::property<boost::edge_residual_capacity_t, double,
                                      boost::property<boost::edge_reverse_t, Traits::edge_descriptor>>>>;
  const std::size_t n = grid.size();
  Graph g(n + 2);
  const auto src = static_cast<Graph::vertex_descriptor>(n);
  const auto snk = static_cast<Graph::vertex_descriptor>(n + 1);
  auto cap = boost::get(boost::edge_capacity, g);
  auto rev = boost::get(boost::edge_reverse, g);
  auto add_pair = [&](std::size_t a, std::size_t b, double ab, double ba) {
    auto e1 = boost::add_edge(a, b, g).first;
    auto e2 = boost::add_edge(b, a, g).first;
    cap[e1] = ab;
    cap[e2] = ba;
    rev[e1] = e2;
    rev[e2] = e1;
  };
  for (const auto& e : grid.edges()) {
    add_pair(static_cast<std::size_t>(e.a), static_cast<std::size_t>(e.b), e.weight, e.weight);
  }
  // x_i = 1 on the source side: paying c_i > 0 cuts i->t, paying -c_i for x_i = 0 cuts s->i.
  double offset = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (c[i] > 0.0) {
      add_pair(i, snk, c[i], 0.0);
    } else if (c[i] < 0.0) {
      add_pair(src, i, -c[i], 0.0);
      offset += c[i];
    }
  }
  const double flow = boost::boykov_kolmogorov_max_flow(g, src, snk);
  auto color = boost::get(boost::vertex_color, g);
  set.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    set[i] = color[i] == boost::black_color ? 1 : 0;
  }
  return flow + offset;
}

/// Diagonally preconditioned primal-dual iterations for
/// min over v in [0,1]^n of sum_e w_e |v_a - v_b| + sum_i c_i v_i, with K v = (w_e (v_a - v_b))_e
/// and dual y in [-1,1]^E. Warm-starts from (v, y); `on_check` is called every check_every
/// iterations with (primal, dual) and returns true to stop.
template <class OnCheck>
int primal_dual_subproblem(const GridDomain& grid, std::span<const double> c, std::vector<double>& v,
                           std::vector<double>& y, int max_iter, int check_every, OnCheck&& on_check) {
  const auto edges = grid.edges();
  const std::size_t n = grid.size();
  const std::size_t m = edges.size();
  std::vector<double> tau(n, 0.0);
  for (const auto& e : edges) {
    tau[static_cast<std::size_t>(e.a)] += e.weight;
    tau[static_cast<std::size_t>(e.b)] += e.weight;
  }
  for (double& t : tau) t = t > 0.0 ? 1.0 / t : 1.0 / grid.spacing();
  std::vector<double> kty(n);
  std::vector<double> vbar(n);
  auto apply_kt = [&]() {
    std::fill(kty.begin(), kty.end(), 0.0);
    for (std::size_t k = 0; k < m; ++k) {
      const double f = edges[k].weight * y[k];
      kty[static_cast<std::size_t>(edges[k].a)] += f;
      kty[static_cast<std::size_t>(edges[k].b)] -= f;
    }
  };
  int it = 0;
  while (it < max_iter) {
    for (int inner = 0; inner < check_every && it < max_iter; ++inner, ++it) {
      apply_kt();
      for (std::size_t i = 0; i < n; ++i) {
        const double nv = std::clamp(v[i] - tau[i] * (kty[i] + c[i]), 0.0, 1.0);
        vbar[i] = 2.0 * nv - v[i];
        v[i] = nv;
      }
      // sigma_e * w_e = 1/2.
      for (std::size_t k = 0; k < m; ++k) {
        const double d = vbar[static_cast<std::size_t>(edges[k].a)] - vbar[static_cast<std::size_t>(edges[k].b)];
        y[k] = std::clamp(y[k] + 0.5 * d, -1.0, 1.0);
      }
    }
    apply_kt();
    double primal = 0.0;
    double dual = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      primal += edges[k].weight *
                std::abs(v[static_cast<std::size_t>(edges[k].a)] - v[static_cast<std::size_t>(edges[k].b)]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      primal += c[i] * v[i];
      dual += std::min(0.0, kty[i] + c[i]);
    }
    if (on_check(primal, dual)) break;
  }
  return it;
}

}  // namespace detail

/// Minimizes J (equivalently R over subsets) on the grid by Dinkelbach iteration
/// s_{k+1} = min_t R({v_k > t}), where v_k minimizes TV(v) + min(beta,1) sum_faces w v - s_k sum h^2 v
/// over 0 <= v <= 1. The subproblem is solved either by primal-dual iterations or exactly by a
/// minimum cut (the perimeter stencil is a graph with nonnegative weights).
inline LimitResult minimize_J(const GridDomain& grid, double beta, const LimitOptions& opts = {}) {
  if (!(beta > -1.0)) {
    throw UnboundedProblem("beta must exceed -1: the p = 1 quotient is unbounded below otherwise");
  }
  if (!(opts.tol > 0.0) || !(opts.gap_tol > 0.0) || opts.max_outer < 1 || opts.max_inner < 1 ||
      opts.check_every < 1) {
    throw InvalidArgument("invalid limit solver options");
  }
  const std::size_t n = grid.size();
  const double b_hat = clamp_beta(beta);
  const double h2 = grid.cell_area();
  const auto bw = grid.boundary_weights();

  LimitResult res;
  res.beta = beta;
  CellSet best_set(n, 1);
  SetMeasures best_m = set_measures(grid, best_set);
  double s = set_ratio(best_m, beta);
  double best_t = 0.5;
  res.s_trace.push_back(s);
  res.v.assign(n, 1.0);
  if (b_hat == 0.0) {
    // J >= 0 with equality at constants.
    res.lambda = 0.0;
    res.set = std::move(best_set);
    res.measures = best_m;
    res.level = best_t;
    res.converged = true;
    return res;
  }

  const double scale = std::abs(b_hat) * grid.boundary_measure() + std::abs(s) * grid.area();
  std::vector<double> c(n);
  std::vector<double> y(grid.edges().size(), 0.0);
  bool converged = false;
  for (int outer = 0; outer < opts.max_outer && !converged; ++outer) {
    ++res.outer_iterations;
    for (std::size_t i = 0; i < n; ++i) c[i] = b_hat * bw[i] - s * h2;
    double next_s = s;
    if (opts.method == LimitMethod::MaxFlow) {
      CellSet set;
      const double value = detail::min_cut_subproblem(grid, c, set);
      res.subproblem_bound = value;
      const bool nonempty = std::find(set.begin(), set.end(), std::uint8_t{1}) != set.end();
      if (value >= -opts.tol * scale || !nonempty) {
        converged = true;
        break;
      }
      const SetMeasures m = set_measures(grid, set);
      const double r = set_ratio(m, beta);
      for (std::size_t i = 0; i < n; ++i) res.v[i] = set[i];
      if (r < s) {
        next_s = r;
        best_set = std::move(set);
        best_m = m;
      }
    } else {
      double bound = -std::numeric_limits<double>::infinity();
      double gap = std::numeric_limits<double>::infinity();
      LevelSet best_level;
      bool improved = false;
      res.inner_iterations += detail::primal_dual_subproblem(
          grid, c, res.v, y, opts.max_inner, opts.check_every, [&](double primal, double dual) {
            bound = dual;
            gap = primal - dual;
            return dual >= -opts.tol * scale || gap <= opts.gap_tol * scale;
          });
      res.subproblem_bound = bound;
      if (std::any_of(res.v.begin(), res.v.end(), [](double x) { return x > 0.0; })) {
        best_level = extract_level_set(grid, res.v, beta);
        if (best_level.value < s) {
          improved = true;
          next_s = best_level.value;
          best_set = best_level.set;
          best_m = best_level.measures;
          best_t = best_level.t;
        }
      }
      if (bound >= -opts.tol * scale) {
        converged = true;
        break;
      }
      if (!improved) {
        // Every level set has nonnegative subproblem value, so by the coarea identity the
        // subproblem minimum lies within the final gap of zero.
        converged = gap <= opts.gap_tol * scale;
        break;
      }
    }
    if (!(next_s < s)) {
      // No strict decrease: the subproblem minimum is numerically zero.
      converged = opts.method == LimitMethod::MaxFlow;
      break;
    }
    s = next_s;
    res.s_trace.push_back(s);
  }
  res.converged = converged;
  res.set = std::move(best_set);
  res.measures = best_m;
  res.lambda = set_ratio(res.measures, beta);
  res.level = best_t;
  if (opts.method == LimitMethod::MaxFlow) {
    res.v.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) res.v[i] = res.set[i];
  }
  return res;
}

/// Discrete Cheeger constant: the p = 1 problem with full boundary weight.
inline double cheeger_constant(const GridDomain& grid, const LimitOptions& opts = {}) {
  return minimize_J(grid, 1.0, opts).lambda;
}

struct BlowUpStep {
  double eps = 0.0;
  /// J of the indicator of the boundary layer {dist(x, boundary) < eps}.
  double value = 0.0;
  /// ((1 + beta) |boundary| + eps) / |layer|.
  double bound = 0.0;
  double layer_area = 0.0;
};

/// Indicators of boundary layers of shrinking width; for beta < -1 their J values decrease without
/// bound. Layer membership uses the distance from cell centers to the boundary face segments.
inline std::vector<BlowUpStep> blow_up_sequence(const GridDomain& grid, double beta,
                                                std::span<const double> eps_list) {
  if (!(beta < -1.0)) throw InvalidArgument("blow-up sequence requires beta < -1");
  if (eps_list.empty()) throw InvalidArgument("empty layer-width list");
  const double h = grid.spacing();
  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    if (!(eps_list[k] >= 2.0 * h * (1.0 - 1e-12))) {
      throw InvalidArgument("layer width below 2h cannot be resolved");
    }
    if (k > 0 && !(eps_list[k] < eps_list[k - 1])) {
      throw InvalidArgument("layer widths must be strictly decreasing");
    }
  }
  std::vector<std::pair<Point, Point>> segments;
  for (const auto& f : grid.faces()) {
    const bool vertical = f.dir == Direction::East || f.dir == Direction::West;
    const Point a{f.midpoint.x - (vertical ? 0.0 : 0.5 * h), f.midpoint.y - (vertical ? 0.5 * h : 0.0)};
    const Point b{f.midpoint.x + (vertical ? 0.0 : 0.5 * h), f.midpoint.y + (vertical ? 0.5 * h : 0.0)};
    segments.emplace_back(a, b);
  }
  std::vector<double> dist(grid.size(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point x = grid.center(static_cast<int>(i));
    for (const auto& [a, b] : segments) {
      dist[i] = std::min(dist[i], detail::point_segment_distance(x, a, b));
    }
  }
  std::vector<BlowUpStep> out;
  std::vector<double> v(grid.size());
  for (double eps : eps_list) {
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = dist[i] < eps ? 1.0 : 0.0;
    BlowUpStep step;
    step.eps = eps;
    step.layer_area = volume_integral(grid, v);
    if (!(step.layer_area > 0.0)) throw InvalidArgument("empty boundary layer");
    step.value = evaluate_J(grid, v, beta);
    step.bound = ((1.0 + beta) * grid.boundary_measure() + eps) / step.layer_area;
    out.push_back(step);
  }
  return out;
}

}  // namespace robin
