#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "robin/bvlimit.hpp"
#include "robin/error.hpp"
#include "robin/radial.hpp"

using namespace robin;

namespace {

GridDomain square(double h) { return rasterize(DomainSpec::rectangle(1.0, 1.0), h); }

CellSet left_half(const GridDomain& g) {
  CellSet s(g.size(), 0);
  for (std::size_t c = 0; c < g.size(); ++c) s[c] = g.coords(static_cast<int>(c))[0] < g.nx() / 2;
  return s;
}

}  // namespace

TEST(EvaluateJ, ConstantsAndHomogeneity) {
  const auto g = rasterize(DomainSpec::ball(1.0), 1.0 / 32);
  std::vector<double> one(g.size(), 1.0);
  for (double beta : {-0.5, 0.3, 1.0, 4.0}) {
    EXPECT_NEAR(evaluate_J(g, one, beta), clamp_beta(beta) * g.boundary_measure() / g.area(), 1e-12);
  }
  std::mt19937_64 rng(11);
  const auto v = oracle::random_field(g, rng);
  const double base = evaluate_J(g, v, 0.4);
  for (double c : {-2.0, -1.0, 0.01, 9.0}) {
    std::vector<double> cv(v);
    for (double& x : cv) x *= c;
    EXPECT_NEAR(evaluate_J(g, cv, 0.4), base, 1e-12 * std::abs(base));
  }
  std::vector<double> zero(g.size(), 0.0);
  EXPECT_THROW(evaluate_J(g, zero, 0.4), InvalidArgument);
}

TEST(EvaluateJ, ShellIndicatorNearClosedForm) {
  const auto g = rasterize(DomainSpec::ball(1.0), 1.0 / 256);
  std::vector<double> v(g.size());
  for (std::size_t c = 0; c < v.size(); ++c) {
    const auto x = g.center(static_cast<int>(c));
    v[c] = std::hypot(x.x, x.y) > 0.5 ? 1.0 : 0.0;
  }
  const double ref = shell_R_value(0.5, 1.0, 2, 1.0);
  EXPECT_NEAR(evaluate_J(g, v, 1.0) / ref, 1.0, 0.05);
}

TEST(EvaluateR, WholeBall) {
  const auto g = rasterize(DomainSpec::ball(1.0), 1.0 / 64);
  CellSet all(g.size(), 1);
  EXPECT_NEAR(evaluate_R(g, all, 0.5), 0.5 * g.boundary_measure() / g.area(), 1e-12);
  EXPECT_NEAR(evaluate_R(g, all, 0.5), 1.0, 0.01);
}

TEST(EvaluateR, HalfSquareByFaceCount) {
  const auto g = square(1.0 / 16);
  const auto half = left_half(g);
  const auto m = set_measures(g, half);
  EXPECT_NEAR(m.perimeter, oracle::axis_face_count(g, half), 1e-12);
  EXPECT_NEAR(m.perimeter, 1.0, 1e-12);
  EXPECT_NEAR(m.contact, 2.0, 1e-12);
  EXPECT_NEAR(m.area, 0.5, 1e-12);
  EXPECT_NEAR(evaluate_R(g, half, 1.0), 6.0, 1e-12);
  EXPECT_NEAR(evaluate_R(g, SubsetIndicator{half}, 1.0), 6.0, 1e-12);
  EXPECT_THROW(evaluate_R(g, CellSet(g.size(), 0), 1.0), InvalidArgument);
}

TEST(EvaluateR, StripsAgreeWithFaceCount) {
  // Straight interfaces are exact; corners inside the domain are not.
  const auto g = square(1.0 / 8);
  for (int i0 = 0; i0 < 8; ++i0) {
    for (int j1 = 1; j1 <= 8; ++j1) {
      if (i0 > 0 && j1 < 8) continue;
      CellSet s(g.size(), 0);
      for (std::size_t c = 0; c < g.size(); ++c) {
        const auto [i, j] = g.coords(static_cast<int>(c));
        s[c] = i >= i0 && j < j1;
      }
      EXPECT_NEAR(set_measures(g, s).perimeter, oracle::axis_face_count(g, s), 1e-12) << i0 << " " << j1;
    }
  }
}

TEST(EvaluateR, ParametricSets) {
  EXPECT_NEAR(evaluate_R(Shell{0.5, 1.0, 2}, 1.0), 4.0, 1e-14);
  // Radius side/2: the circle is inscribed in the square.
  const RoundedCornerSet inscribed{1.0, 0.1, 0.5};
  const auto m = set_measures(inscribed);
  const double rc = 0.5, rho = 0.1;
  EXPECT_NEAR(m.perimeter, std::numbers::pi * rc / 2.0, 1e-14);
  EXPECT_NEAR(m.contact, 2.0 * (rc - rho) + std::numbers::pi * rho / 2.0, 1e-14);
  EXPECT_NEAR(m.area, (1.0 - std::numbers::pi / 4.0) * (rc * rc - rho * rho), 1e-14);
  EXPECT_NEAR(evaluate_R(inscribed, -1.0), -2.0 / (rc + rho), 1e-12);
}

TEST(EvaluateR, RoundedCornerSetMatchesRaster) {
  // Rasterize the corner piece near (0,0) on a fine grid and count faces.
  const RoundedCornerSet s{1.0, 0.1, 0.3};
  const double h = 1.0 / 1024;
  const auto g = rasterize(DomainSpec::rectangle(0.5, 0.5), h);
  const auto o = g.center(0);
  CellSet set(g.size(), 0);
  for (std::size_t c = 0; c < g.size(); ++c) {
    const auto x = g.center(static_cast<int>(c));
    const double px = x.x - o.x + 0.5 * h, py = x.y - o.y + 0.5 * h;
    const bool outside_big = std::hypot(px - s.radius, py - s.radius) > s.radius && px < s.radius && py < s.radius;
    const bool inside_corner = !(px < s.corner && py < s.corner) ||
                               std::hypot(px - s.corner, py - s.corner) <= s.corner;
    set[c] = outside_big && inside_corner;
  }
  const auto exact = set_measures(s);
  EXPECT_NEAR(set_measures(g, set).area / exact.area, 1.0, 0.02);
}

TEST(ExtractLevelSet, BinaryFieldReturnsItself) {
  const auto g = square(1.0 / 16);
  const auto half = left_half(g);
  std::vector<double> v(half.begin(), half.end());
  const auto ls = extract_level_set(g, v, 1.0);
  EXPECT_EQ(ls.set, half);
  EXPECT_GT(ls.t, 0.0);
  EXPECT_LT(ls.t, 1.0);
}

TEST(ExtractLevelSet, TwoPlateaus) {
  const auto g = square(1.0 / 16);
  const auto half = left_half(g);
  std::vector<double> v(g.size());
  for (std::size_t c = 0; c < v.size(); ++c) v[c] = half[c] ? 0.9 : 0.3;
  for (double beta : {0.2, 1.0}) {
    const double r_half = evaluate_R(g, half, beta);
    const double r_all = evaluate_R(g, CellSet(g.size(), 1), beta);
    const auto ls = extract_level_set(g, v, beta);
    EXPECT_NEAR(ls.value, std::min(r_half, r_all), 1e-12);
  }
}

TEST(ExtractLevelSet, CoareaInequalityOnRandomFields) {
  std::mt19937_64 rng(5);
  for (const auto& spec : {DomainSpec::rectangle(1.0, 1.0), DomainSpec::ball(1.0)}) {
    const auto g = rasterize(spec, 1.0 / 24);
    for (int k = 0; k < 100; ++k) {
      const auto v = oracle::random_field(g, rng);
      for (double beta : {-0.5, 0.5, 2.0}) {
        EXPECT_GE(evaluate_J(g, v, beta) + 1e-12, extract_level_set(g, v, beta).value);
      }
    }
  }
}

TEST(MinimizeJ, MatchesBruteForceOnTinyGrids) {
  std::vector<std::uint8_t> mask{0, 1, 1, 0, 1, 1, 1, 1, 1, 1, 1, 1, 0, 1, 1, 1};
  const auto g = GridDomain::from_mask(4, 4, 0.25, mask);
  for (double beta : {-0.6, 0.0, 0.3, 1.0}) {
    const double brute = oracle::brute_force_min(g.size(), [&](const CellSet& s) { return evaluate_R(g, s, beta); });
    for (auto method : {LimitMethod::MaxFlow, LimitMethod::PrimalDual}) {
      LimitOptions o;
      o.method = method;
      const auto r = minimize_J(g, beta, o);
      EXPECT_NEAR(r.lambda, brute, 1e-6 * (1.0 + std::abs(brute))) << beta;
      EXPECT_TRUE(r.converged);
    }
  }
}

TEST(MinimizeJ, BallNearClosedForm) {
  const auto g = rasterize(DomainSpec::ball(1.0), 1.0 / 64);
  for (double beta : {-0.5, 0.5, 2.0}) {
    const auto r = minimize_J(g, beta);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.lambda / ball_limit_eigenvalue(2, 1.0, beta), 1.0, 0.05);
    EXPECT_NEAR(r.lambda, evaluate_R(g, r.set, beta), 1e-12);
    for (std::size_t k = 1; k < r.s_trace.size(); ++k) EXPECT_LT(r.s_trace[k], r.s_trace[k - 1]);
  }
  // beta = 0.5: the full disk is optimal.
  const auto r = minimize_J(g, 0.5);
  std::size_t count = 0;
  for (auto c : r.set) count += c;
  EXPECT_GT(count, g.size() * 95 / 100);
}

TEST(MinimizeJ, PrimalDualAgreesWithMaxFlow) {
  const auto g = rasterize(DomainSpec::ellipse(1.0, 0.6), 1.0 / 24);
  for (double beta : {-0.3, 0.5, 1.5}) {
    LimitOptions pd;
    pd.method = LimitMethod::PrimalDual;
    const double a = minimize_J(g, beta).lambda;
    const double b = minimize_J(g, beta, pd).lambda;
    EXPECT_NEAR(a, b, 1e-6 * std::abs(a)) << beta;
  }
}

TEST(MinimizeJ, NeverAboveCandidateSets) {
  const auto g = rasterize(DomainSpec::ball(1.0), 1.0 / 32);
  for (double beta : {-0.5, 0.4, 1.0}) {
    const double lam = minimize_J(g, beta).lambda;
    std::vector<CellSet> cands;
    cands.emplace_back(g.size(), 1);
    for (double r0 : {0.3, 0.6, 0.9}) {
      CellSet in(g.size(), 0), shell(g.size(), 0);
      for (std::size_t c = 0; c < g.size(); ++c) {
        const auto x = g.center(static_cast<int>(c));
        const double r = std::hypot(x.x, x.y);
        in[c] = r < r0;
        shell[c] = r >= r0;
      }
      cands.push_back(in);
      cands.push_back(shell);
    }
    CellSet half(g.size(), 0);
    for (std::size_t c = 0; c < g.size(); ++c) half[c] = g.center(static_cast<int>(c)).x < 0;
    cands.push_back(half);
    for (const auto& s : cands) EXPECT_LE(lam, evaluate_R(g, s, beta) + 1e-12);
  }
}

TEST(MinimizeJ, BetaZeroAndClamping) {
  const auto g = square(1.0 / 16);
  const auto z = minimize_J(g, 0.0);
  EXPECT_EQ(z.lambda, 0.0);
  for (double x : z.v) EXPECT_EQ(x, 1.0);
  const double one = minimize_J(g, 1.0).lambda;
  std::mt19937_64 rng(2);
  const auto v = oracle::random_field(g, rng);
  for (double beta : {1.0, 1.5, 3.0, 100.0}) {
    EXPECT_EQ(minimize_J(g, beta).lambda, one);
    EXPECT_EQ(evaluate_J(g, v, beta), evaluate_J(g, v, 1.0));
  }
  EXPECT_EQ(cheeger_constant(g), one);
  EXPECT_LE(minimize_J(g, 0.5).lambda, one);
  EXPECT_THROW(minimize_J(g, -1.0), UnboundedProblem);
  EXPECT_THROW(minimize_J(g, -3.0), UnboundedProblem);
}

TEST(CheegerConstant, BallAndSquare) {
  EXPECT_NEAR(cheeger_constant(rasterize(DomainSpec::ball(1.0), 1.0 / 64)) / 2.0, 1.0, 0.05);
  EXPECT_NEAR(cheeger_constant(square(1.0 / 64)) / oracle::square_cheeger(), 1.0, 0.05);
  EXPECT_NEAR(oracle::square_cheeger(), 2.0 + std::sqrt(std::numbers::pi), 1e-12);
}

TEST(BlowUp, SquareSequence) {
  const auto g = square(1.0 / 64);
  const auto first = blow_up_sequence(g, -2.0, std::vector<double>{0.25});
  EXPECT_LT(first.front().value, 0.0);
  // Layer of width 1/4: P_Omega = inner square perimeter 2, contact 4, area 3/4.
  EXPECT_NEAR(first.front().value, (2.0 - 2.0 * 4.0) / (1.0 - 0.25), 0.05);
  EXPECT_NEAR(first.front().layer_area, 0.75, 1e-12);
  const std::vector<double> eps{0.25, 0.125, 0.0625, 0.03125};
  const auto seq = blow_up_sequence(g, -1.5, eps);
  for (std::size_t k = 1; k < seq.size(); ++k) EXPECT_LT(seq[k].value, seq[k - 1].value);
  EXPECT_THROW(blow_up_sequence(g, -0.5, eps), InvalidArgument);
  EXPECT_THROW(blow_up_sequence(g, -1.5, std::vector<double>{1.0 / 128}), InvalidArgument);
  EXPECT_THROW(blow_up_sequence(g, -1.5, std::vector<double>{0.1, 0.2}), InvalidArgument);
}
