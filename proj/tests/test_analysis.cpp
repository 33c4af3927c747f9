#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "robin/analysis.hpp"
#include "robin/error.hpp"

using namespace robin;
constexpr double kPi = std::numbers::pi;

TEST(FitPowerLaw, RecoversSyntheticModel) {
  std::vector<double> p{1.5, 1.3, 1.2, 1.1, 1.05, 1.02};
  std::vector<double> l;
  for (double x : p) l.push_back(2.5 - 0.8 * std::pow(x - 1.0, 0.7));
  const auto f = fit_power_law(p, l);
  EXPECT_NEAR(f.limit, 2.5, 1e-6);
  EXPECT_NEAR(f.exponent, 0.7, 1e-4);
  EXPECT_NEAR(f.coeff, -0.8, 1e-4);
}

TEST(GammaSweep, BallRadial) {
  const std::vector<double> ps{1.5, 1.25, 1.1, 1.05, 1.02};
  SweepOptions o;
  o.tol = 0.01;
  const auto rep = gamma_sweep(DomainSpec::ball(1.0), 0.5, ps, o);
  EXPECT_EQ(rep.method, "radial");
  EXPECT_TRUE(rep.pass);
  EXPECT_NEAR(rep.lambda_star, 1.0, 0.01);
  EXPECT_TRUE(rep.within_envelope);
  for (std::size_t k = 1; k < rep.rows.size(); ++k) EXPECT_LT(rep.rows[k].p, rep.rows[k - 1].p);

  const auto neg = gamma_sweep(DomainSpec::ball(1.0), -0.5, ps, o);
  EXPECT_NEAR(neg.lambda_star, -1.0, 0.01);
  EXPECT_TRUE(neg.pass);

  const auto zero = gamma_sweep(DomainSpec::ball(1.0), 0.0, ps, o);
  for (const auto& row : zero.rows) EXPECT_EQ(row.lambda, 0.0);
  EXPECT_EQ(zero.lambda_star, 0.0);
  EXPECT_TRUE(zero.pass);
}

TEST(GammaSweep, GridBetaZero) {
  const std::vector<double> ps{1.5, 1.3, 1.2};
  SweepOptions o;
  o.h = 1.0 / 16;
  const auto rep = gamma_sweep(DomainSpec::rectangle(1.0, 1.0), 0.0, ps, o);
  EXPECT_EQ(rep.method, "grid");
  EXPECT_EQ(rep.lambda_star, 0.0);
  EXPECT_TRUE(rep.pass);
}

TEST(GammaSweep, Preconditions) {
  EXPECT_THROW(gamma_sweep(DomainSpec::ball(1.0), 0.5, std::vector<double>{1.5, 1.2}), InvalidArgument);
  EXPECT_THROW(gamma_sweep(DomainSpec::ball(1.0), 0.5, std::vector<double>{1.2, 1.5, 1.1}), InvalidArgument);
  EXPECT_THROW(gamma_sweep(DomainSpec::ball(1.0), -1.0, std::vector<double>{1.5, 1.2, 1.1}), UnboundedProblem);
}

TEST(FaberKrahn, SquareBothSigns) {
  CheckOptions o;
  o.h = 1.0 / 32;
  const auto sq = DomainSpec::rectangle(std::sqrt(kPi), std::sqrt(kPi));
  const auto pos = check_faber_krahn(sq, 0.5, o);
  ASSERT_EQ(pos.size(), 1u);
  EXPECT_EQ(pos[0].id, "fk1");
  EXPECT_TRUE(pos[0].pass);
  EXPECT_NEAR(pos[0].right, 1.0, 1e-12);

  const auto neg = check_faber_krahn(sq, -0.5, o);
  ASSERT_EQ(neg.size(), 2u);
  EXPECT_EQ(neg[0].id, "fk2");
  EXPECT_EQ(neg[1].id, "upper-by-constants");
  EXPECT_NEAR(neg[0].right, -1.0, 1e-12);
  EXPECT_NEAR(neg[1].right, -0.5 * 4.0 * std::sqrt(kPi) / kPi, 1e-12);
  EXPECT_TRUE(neg[0].pass);
  EXPECT_TRUE(neg[1].pass);
}

TEST(FaberKrahn, BallIsEqualityCase) {
  CheckOptions o;
  o.h = 1.0 / 64;
  for (double beta : {-0.5, 0.5, 2.0}) {
    const auto r = check_faber_krahn(DomainSpec::ball(1.0), beta, o);
    EXPECT_NEAR(r[0].left, r[0].right, 0.05 * std::abs(r[0].right));
  }
}

TEST(Inequality, VerdictFollowsDirection) {
  const auto le = make_inequality("x", 1.0, 1.02, true, 0.0);
  EXPECT_TRUE(le.pass);
  EXPECT_NEAR(le.slack, 0.02, 1e-15);
  EXPECT_FALSE(make_inequality("x", 1.1, 1.0, true, 0.05).pass);
  EXPECT_TRUE(make_inequality("x", 1.1, 1.0, true, 0.1 + 1e-12).pass);
  EXPECT_TRUE(make_inequality("x", 1.1, 1.0, false, 0.0).pass);
}

TEST(EvaluateH, Identities) {
  const auto g = rasterize(DomainSpec::rectangle(1.0, 1.0), 1.0 / 16);
  CellSet half(g.size(), 0);
  for (std::size_t c = 0; c < g.size(); ++c) half[c] = g.coords(static_cast<int>(c))[0] < g.nx() / 2;
  // Direct counts: P_Omega = 1, contact = 2, |E| = 1/2.
  EXPECT_NEAR(evaluate_H(g, half, 1.0, 1.0, 2.0), (1.0 + 2.0 - 0.5) / 0.5, 1e-12);

  CellSet all(g.size(), 1);
  for (double beta : {0.5, 2.0}) {
    for (double p : {1.5, 3.0}) {
      const double bt = std::max(1.0, beta);
      const double e = p / (p - 1.0);
      EXPECT_NEAR(evaluate_H(g, all, bt, beta, p), beta * g.boundary_measure() / g.area() - (p - 1.0) * std::pow(bt, e),
                  1e-12);
      // For beta > 0: H(E, bt) = bt R(E, beta) - (p-1) bt^{p/(p-1)} when bt = max(1, beta).
      EXPECT_NEAR(evaluate_H(g, half, bt, beta, p), bt * evaluate_R(g, half, beta) - (p - 1.0) * std::pow(bt, e),
                  1e-12);
    }
  }
  // Ball in itself with psi = (h/p)^{p-1}: H = ((1-p)/p^p... ) reproduces (h/p)^p when beta = psi.
  const double h = 2.0, p = 1.5;
  const double psi = std::pow(h / p, p - 1.0);
  const SetMeasures ball{0.0, 2.0 * kPi, kPi};
  EXPECT_NEAR(evaluate_H(ball, psi, psi, p), std::pow(h / p, p), 1e-12);
}

TEST(CheegerBound, BallExamples) {
  const auto r1 = check_cheeger_bound(DomainSpec::ball(1.0), 2.0, 1.0);
  ASSERT_EQ(r1.size(), 2u);
  EXPECT_EQ(r1[1].id, "cheeger-power");
  EXPECT_NEAR(r1[1].right, 1.0, 1e-12);
  EXPECT_NEAR(r1[1].left, oracle::bessel_robin_eigenvalue(1.0), 1e-6);
  EXPECT_TRUE(r1[0].pass && r1[1].pass);

  const auto r2 = check_cheeger_bound(DomainSpec::ball(1.0), 1.5, 2.0);
  EXPECT_NEAR(r2[0].right, 0.0, 1e-12);
  EXPECT_GT(r2[0].left, 0.0);
  EXPECT_TRUE(r2[0].pass);
  EXPECT_THROW(check_cheeger_bound(DomainSpec::ball(1.0), 2.0, 0.0), InvalidArgument);
}

TEST(DemoBetaMinusOne, Family) {
  const std::vector<double> radii{0.5, 0.4, 0.3, 0.2, 0.12};
  const auto vals = demo_beta_minus_one(0.1, radii);
  ASSERT_EQ(vals.size(), radii.size());
  EXPECT_NEAR(vals.front().value, -2.0 / 0.6, 1e-12);
  for (std::size_t k = 1; k < vals.size(); ++k) EXPECT_LT(vals[k].value, vals[k - 1].value);
  EXPECT_THROW(demo_beta_minus_one(0.1, std::vector<double>{0.1}), InvalidArgument);
}

TEST(DomainLibrary, AreaMatched) {
  const auto lib = domain_library();
  EXPECT_EQ(lib.size(), 4u);
  for (const auto& d : lib) EXPECT_NEAR(volume(d.spec), kPi, 1e-12) << d.name;
}
