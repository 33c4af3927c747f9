// Acceptance suite: one PASS/FAIL line per criterion, tolerances fixed below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "robin/analysis.hpp"
#include "robin/bvlimit.hpp"
#include "robin/eigensolver_p.hpp"
#include "robin/radial.hpp"

using namespace robin;

namespace {

constexpr double kPi = std::numbers::pi;

// Criterion 1
constexpr double kBallFormulaTol = 0.05;
// Criterion 2
constexpr double kRadialSweepTol = 0.01;
constexpr double kGridSweepTol = 0.08;
constexpr double kGridSweepH = 1.0 / 64;
constexpr int kGridSweepIter = 12000;
// Criterion 4
constexpr double kFaberKrahnSlack = 0.05;
constexpr double kFaberKrahnH = 1.0 / 64;
// Criterion 5
constexpr double kCheegerSlack = 0.05;
constexpr double kCheegerH = 1.0 / 64;
// Criterion 6
constexpr double kBlowUpH = 1.0 / 256;
constexpr double kBlowUpBound = -10.0;
// Criterion 7
constexpr double kOracleTol = 1e-6;
// Criterion 8
constexpr double kHomogeneityTol = 1e-12;
constexpr int kCoareaFields = 100;
constexpr double kPropertyH = 1.0 / 32;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string g(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

Outcome ball_formula() {
  Outcome o;
  const std::vector<double> hs{1.0 / 64, 1.0 / 128, 1.0 / 256};
  const std::vector<double> betas{-0.5, 0.5, 2.0};
  std::vector<std::vector<double>> err(betas.size());
  for (double h : hs) {
    const auto grid = rasterize(DomainSpec::ball(1.0), h);
    for (std::size_t b = 0; b < betas.size(); ++b) {
      const double target = ball_limit_eigenvalue(2, 1.0, betas[b]);
      err[b].push_back(rel(minimize_J(grid, betas[b]).lambda, target));
    }
  }
  for (std::size_t b = 0; b < betas.size(); ++b) {
    o.detail << " beta=" << g(betas[b]) << " err=";
    for (std::size_t k = 0; k < hs.size(); ++k) o.detail << (k ? "/" : "") << g(err[b][k]);
    o.require(err[b].back() <= kBallFormulaTol, "beta=" + g(betas[b]) + " error at h=1/256");
    for (std::size_t k = 1; k < hs.size(); ++k) {
      o.require(err[b][k] < err[b][k - 1], "beta=" + g(betas[b]) + " refinement not monotone");
    }
  }
  return o;
}

Outcome gamma_limit() {
  Outcome o;
  SweepOptions ro;
  ro.tol = kRadialSweepTol;
  const auto radial = gamma_sweep(DomainSpec::ball(1.0), 0.5, std::vector<double>{1.5, 1.25, 1.1, 1.05, 1.02}, ro);
  const double e1 = rel(radial.lambda_star, 1.0);
  o.detail << " ball lambda*=" << g(radial.lambda_star) << " err=" << g(e1);
  o.require(e1 <= kRadialSweepTol, "radial extrapolation");

  SweepOptions go;
  go.h = kGridSweepH;
  go.tol = kGridSweepTol;
  go.eigen.max_iter = kGridSweepIter;
  go.eigen.record_trace = false;
  go.reference = 2.0 + std::sqrt(kPi);
  const auto grid =
      gamma_sweep(DomainSpec::rectangle(1.0, 1.0), 2.0, std::vector<double>{1.1, 1.05, 1.03, 1.02, 1.01}, go);
  const double e2 = rel(grid.lambda_star, *go.reference);
  o.detail << "; square lambda*=" << g(grid.lambda_star) << " vs " << g(*go.reference) << " err=" << g(e2)
           << " (last row " << g(grid.rows.back().lambda) << ")";
  o.require(e2 <= kGridSweepTol, "grid extrapolation");
  return o;
}

Outcome shell_ratio_min() {
  Outcome o;
  int cases = 0;
  long samples = 0;
  for (int n : {2, 3, 4}) {
    for (double beta : {-0.9, -0.5, 0.0, 0.5, 1.0, 5.0}) {
      const auto m = minimize_shell_ratio(n, beta);
      o.require(m.t == 0.0 && m.value == beta, "N=" + std::to_string(n) + " beta=" + g(beta));
      for (int k = 1; k < 100000; ++k) {
        const double t = k / 100000.0;
        ++samples;
        if (!(shell_ratio(t, n, beta) - beta > 0.0)) {
          o.require(false, "f(t)-beta <= 0 at t=" + g(t));
          break;
        }
      }
      ++cases;
    }
  }
  o.detail << " " << cases << " (N,beta) pairs, " << samples << " scan samples";
  return o;
}

Outcome faber_krahn() {
  Outcome o;
  CheckOptions co;
  co.h = kFaberKrahnH;
  co.rel_tol = kFaberKrahnSlack;
  int n = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& d : domain_library()) {
    for (double beta : {0.5, 1.0, 2.0, -0.5, -0.25}) {
      for (const auto& r : check_faber_krahn(d.spec, beta, co)) {
        ++n;
        worst = std::min(worst, r.slack + r.tolerance);
        o.require(r.pass, d.name + " beta=" + g(beta) + " " + r.id + " " + g(r.left) + r.direction + g(r.right));
      }
    }
  }
  o.detail << " " << n << " verdicts, least margin " << g(worst);
  return o;
}

Outcome cheeger_bounds() {
  Outcome o;
  const std::vector<double> ps{3.0, 2.0, 1.5, 1.2};
  const std::vector<double> betas{0.5, 1.0, 2.0, 5.0};
  int lower = 0, power = 0;
  auto check = [&](const std::string& dom, double lambda, double limit, double cheeger, double p, double beta) {
    const double bt = std::max(1.0, beta);
    const double bound = limit * bt - (p - 1.0) * std::pow(bt, p / (p - 1.0));
    ++lower;
    o.require(lambda >= bound - kCheegerSlack * std::abs(bound),
              dom + " lower p=" + g(p) + " beta=" + g(beta) + ": " + g(lambda) + " < " + g(bound));
    if (beta >= std::pow(cheeger / p, p - 1.0)) {
      ++power;
      const double pw = std::pow(cheeger / p, p);
      o.require(lambda >= pw, dom + " power p=" + g(p) + " beta=" + g(beta) + ": " + g(lambda) + " < " + g(pw));
    }
  };
  for (double beta : betas) {
    for (double p : ps) {
      check("ball", shoot_radial_eigen(2, 1.0, p, beta).lambda, ball_limit_eigenvalue(2, 1.0, beta), 2.0, p, beta);
    }
  }
  const auto grid = rasterize(DomainSpec::rectangle(1.0, 1.0), kCheegerH);
  const double cheeger = cheeger_constant(grid);
  EigenOptions eo;
  eo.record_trace = false;
  for (double beta : betas) {
    const double limit = minimize_J(grid, beta).lambda;
    const auto path = warm_start_path(grid, beta, ps, eo);
    for (const auto& r : path) check("square", r.lambda, limit, cheeger, r.p, beta);
  }
  o.detail << " " << lower << " lower-bound and " << power << " power-bound checks; square h_h=" << g(cheeger);
  return o;
}

Outcome blow_up() {
  Outcome o;
  const auto grid = rasterize(DomainSpec::rectangle(1.0, 1.0), kBlowUpH);
  const auto steps = blow_up_sequence(grid, -1.5, std::vector<double>{0.25, 0.125, 0.0625, 0.03125});
  o.detail << " J:";
  for (std::size_t k = 0; k < steps.size(); ++k) {
    o.detail << " " << g(steps[k].value);
    if (k > 0) o.require(steps[k].value < steps[k - 1].value, "not strictly decreasing");
  }
  o.require(steps.back().value < kBlowUpBound, "last value not below -10");
  return o;
}

Outcome oracle_equivalence() {
  Outcome o;
  for (double beta : {0.5, 1.0, 5.0}) {
    const double a = shoot_radial_eigen(2, 1.0, 2.0, beta).lambda;
    const double b = oracle::bessel_robin_eigenvalue(beta);
    o.detail << " beta=" << g(beta) << " rel=" << g(rel(a, b));
    o.require(rel(a, b) <= kOracleTol, "beta=" + g(beta));
  }
  return o;
}

Outcome properties() {
  Outcome o;
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> scale(-5.0, 5.0);
  const std::vector<DomainSpec> specs{DomainSpec::rectangle(1.0, 1.0), DomainSpec::ball(1.0),
                                      DomainSpec::ellipse(1.5, 1.0 / 1.5)};
  int homog = 0, coarea = 0, mono = 0;
  for (const auto& spec : specs) {
    const auto grid = rasterize(spec, kPropertyH);
    // 0-homogeneity and sign invariance.
    for (int k = 0; k < 10; ++k) {
      const auto v = oracle::random_field(grid, rng);
      double c = scale(rng);
      if (c == 0.0) c = 1.0;
      std::vector<double> cv(v), nv(v);
      for (std::size_t i = 0; i < v.size(); ++i) {
        cv[i] *= c;
        nv[i] = -v[i];
      }
      for (double p : {1.2, 2.0, 3.0}) {
        const double a = rayleigh_quotient_p(grid, v, p, 0.7);
        o.require(rel(rayleigh_quotient_p(grid, cv, p, 0.7), a) <= kHomogeneityTol, "J_p scaling");
        o.require(rel(rayleigh_quotient_p(grid, nv, p, 0.7), a) <= kHomogeneityTol, "J_p sign");
        ++homog;
      }
      const double j = evaluate_J(grid, v, 0.4);
      o.require(rel(evaluate_J(grid, cv, 0.4), j) <= kHomogeneityTol, "J scaling");
      o.require(rel(evaluate_J(grid, nv, 0.4), j) <= kHomogeneityTol, "J sign");
      ++homog;
    }
    // Discrete coarea inequality.
    for (int k = 0; k < kCoareaFields; ++k) {
      const auto v = oracle::random_field(grid, rng);
      for (double beta : {-0.5, 0.5, 2.0}) {
        o.require(evaluate_J(grid, v, beta) + 1e-12 >= extract_level_set(grid, v, beta).value, "coarea");
        ++coarea;
      }
    }
    // beta-monotonicity and the constant-field upper bound.
    for (double p : {1.5, 2.0}) {
      double prev = -std::numeric_limits<double>::infinity();
      for (double beta : {-0.3, 0.2, 0.5, 1.0, 2.0}) {
        const double lam = minimize_Jp(grid, p, beta).lambda;
        o.require(lam >= prev - 1e-9 * std::abs(prev), "beta-monotonicity");
        o.require(lam <= beta * grid.boundary_measure() / grid.area() + 1e-12, "constant-field bound");
        prev = lam;
        ++mono;
      }
    }
    // beta-clamping.
    const auto v = oracle::random_field(grid, rng);
    const double one = minimize_J(grid, 1.0).lambda;
    for (double beta : {1.0, 1.7, 10.0}) {
      o.require(evaluate_J(grid, v, beta) == evaluate_J(grid, v, 1.0), "clamping of evaluate_J");
      o.require(minimize_J(grid, beta).lambda == one, "clamping of minimize_J");
    }
  }
  o.detail << " " << homog << " homogeneity, " << coarea << " coarea, " << mono << " eigenvalue checks on 3 grids";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"ball formula", ball_formula},         {"gamma limit", gamma_limit},
      {"shell ratio", shell_ratio_min},       {"Faber-Krahn", faber_krahn},
      {"Cheeger-type bounds", cheeger_bounds}, {"blow-up", blow_up},
      {"Bessel oracle", oracle_equivalence},  {"property suites", properties},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %zu (%s): %s |%s | %.1fs\n", k + 1, criteria[k].first.c_str(), o.pass ? "PASS" : "FAIL",
                o.detail.str().c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
