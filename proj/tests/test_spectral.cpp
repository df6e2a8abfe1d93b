#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "fdlab/errors.hpp"
#include "fdlab/fit.hpp"
#include "fdlab/spectral.hpp"

using namespace fdlab;

namespace {

SpectralProblem problem(double alpha, double d = 1.0, int n = 6, double m = 0.0) {
  SpectralProblem p;
  p.alpha = alpha;
  p.d = d;
  p.exps = derive_exponents(n, m);
  return p;
}

/// Reference: fixed-step RK4 in s = log r for (phi, r phi'), started from the
/// two-term series at r = 1e-3.
std::vector<std::array<double, 2>> rk4_reference(const SpectralProblem& p, const std::vector<double>& radii) {
  const int n = p.exps.n;
  const double mu = p.exps.mu;
  auto f = [&](double s, const std::array<double, 2>& y) {
    const double r = std::exp(s);
    const double dphi = y[1] / r;
    const double lap = (mu * r * dphi - p.alpha * y[0]) / (r * r + p.d);
    return std::array<double, 2>{y[1], y[1] + r * r * lap - (n - 1) * y[1]};
  };
  const double r0 = 1e-3;
  const double c2 = -p.alpha / (2.0 * n * p.d);
  std::array<double, 2> y{1.0 + c2 * r0 * r0, 2.0 * c2 * r0 * r0};
  double s = std::log(r0);
  const double h = 2e-4;
  std::vector<std::array<double, 2>> out;
  for (double target : radii) {
    const double st = std::log(target);
    while (s < st - 1e-15) {
      const double hh = std::min(h, st - s);
      const auto k1 = f(s, y);
      const auto k2 = f(s + hh / 2, {y[0] + hh / 2 * k1[0], y[1] + hh / 2 * k1[1]});
      const auto k3 = f(s + hh / 2, {y[0] + hh / 2 * k2[0], y[1] + hh / 2 * k2[1]});
      const auto k4 = f(s + hh, {y[0] + hh * k3[0], y[1] + hh * k3[1]});
      for (int i = 0; i < 2; ++i) y[i] += hh / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
      s += hh;
    }
    out.push_back({y[0], y[1] / target});
  }
  return out;
}

}  // namespace

TEST_CASE("integrate_phi agrees with an independent RK4 reference") {
  for (double alpha : {0.5, 0.75, 1.5}) {
    const auto p = problem(alpha, 2.0);
    const std::vector<double> radii{0.1, 1.0, 10.0, 50.0};
    IntegrateOptions opt;
    opt.output_radii = radii;
    opt.stop_at_zero = false;
    const auto sol = integrate_phi(p, 100.0, 1e-11, opt);
    const auto ref = rk4_reference(p, radii);
    REQUIRE(sol.r_nodes.size() == radii.size());
    for (std::size_t i = 0; i < radii.size(); ++i) {
      CHECK(sol.r_nodes[i] == radii[i]);
      CHECK(sol.phi[i] == doctest::Approx(ref[i][0]).epsilon(1e-8));
      CHECK(sol.dphi[i] == doctest::Approx(ref[i][1]).epsilon(1e-7));
    }
  }
}

TEST_CASE("dense output defect is at the level of the step tolerance") {
  const auto p = problem(0.75);
  for (double tol : {1e-8, 1e-10}) {
    const auto sol = integrate_phi(p, 1e4, tol);
    double worst = 0.0;
    for (double r : sol.step_midpoints()) worst = std::max(worst, sol.scaled_defect(r));
    CHECK(worst < 10.0 * tol);
  }
}

TEST_CASE("positive solutions below alpha_star, sign change above") {
  for (double alpha : {0.5, 0.9}) {
    const auto sol = integrate_phi(problem(alpha), 1e5, 1e-10);
    CHECK_FALSE(sol.first_zero);
    for (double v : sol.phi) CHECK(v > 0.0);
  }
  for (double alpha : {1.2, 2.0}) {
    const auto sol = integrate_phi(problem(alpha), 1e6, 1e-10);
    REQUIRE(sol.first_zero);
    const double r0 = *sol.first_zero;
    CHECK(sol.at(0.999 * r0).phi > 0.0);
    CHECK(std::abs(sol.at(r0).phi) < 1e-9);
  }
}

TEST_CASE("tail exponent equals l(alpha) - mu - 2") {
  const auto p = problem(0.75);
  IntegrateOptions opt;
  opt.tail_lo = 1e2;
  opt.tail_hi = 1e4;
  const auto sol = integrate_phi(p, 1e4, 1e-10, opt);
  REQUIRE(sol.tail);
  CHECK(sol.tail->exponent == doctest::Approx(0.5).epsilon(0.02));
  const auto e = p.exps;
  const auto p2 = problem(0.36);
  const auto sol2 = integrate_phi(p2, 1e5, 1e-10);
  REQUIRE(sol2.tail);
  CHECK(sol2.tail->exponent == doctest::Approx(l_of_alpha(0.36, e) - e.mu - 2.0).epsilon(0.03));
}

TEST_CASE("shape properties hold below alpha_star") {
  for (double alpha : {0.3, 0.75, 0.95}) {
    const auto p = problem(alpha, 1.5);
    const auto sol = integrate_phi(p, 1e5, 1e-11);
    const ShapeReport rep = check_shape_properties(sol, p);
    CHECK(rep.nodes_checked > 100);
    CHECK(rep.ok());
  }
  CHECK_THROWS_AS(check_shape_properties(integrate_phi(problem(1.2), 1e3, 1e-10), problem(1.2)), PreconditionError);
}

TEST_CASE("shape checks flag corrupted samples") {
  const auto p = problem(0.75);
  const auto sol = integrate_phi(p, 1e3, 1e-10);
  std::vector<double> phi = sol.phi;
  phi[phi.size() / 2] = -1e-3;
  const auto bad = SpectralSolution::from_samples(p, sol.r_nodes, phi, sol.dphi);
  const auto rep = check_shape_properties(bad, p);
  CHECK(rep.count(ShapeCheck::positivity) == 1);
  CHECK(rep.nodes_flagged() >= 1);
}

TEST_CASE("apply_L annihilates phi up to alpha phi") {
  const auto p = problem(0.75);
  const auto sol = integrate_phi(p, 1e3, 1e-11);
  std::vector<double> r, f, fr, frr;
  for (double x : log_space(1e-2, 5e2, 50)) {
    const auto s = sol.at(x);
    r.push_back(x);
    f.push_back(s.phi);
    fr.push_back(s.dphi);
    frr.push_back(s.ddphi);
  }
  const auto L = apply_L(r, f, fr, frr, p);
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double scale = std::abs(p.alpha * f[i]) + std::abs(p.exps.mu * r[i] * fr[i]);
    CHECK(std::abs(L[i] + p.alpha * f[i]) < 1e-8 * scale);
  }
}

TEST_CASE("comparison functions") {
  const auto p = problem(0.75, 2.0);
  const auto radii = log_space(1e-1, 1e4, 200);
  SUBCASE("W- residual has the closed form -d k (mu+2+k) W/(r^2+d)") {
    const auto w = ComparisonFunction::w_minus(p);
    CHECK(w.k == doctest::Approx(0.5));
    const auto res = comparison_residuals(w, p, radii);
    for (std::size_t i = 0; i < radii.size(); ++i) {
      const double r = radii[i];
      const double exact = -p.d * w.k * (p.exps.mu + 2.0 + w.k) * w.value(r) / (r * r + p.d);
      CHECK(res.residual[i] == doctest::Approx(exact).epsilon(1e-9));
      CHECK(res.residual[i] < 0.0);
    }
  }
  SUBCASE("W* is an exact power-law solution at leading order") {
    const auto ps = problem(1.0, 2.0);
    const auto w = ComparisonFunction::w_star(ps.exps);
    const auto res = comparison_residuals(w, ps, radii);
    // Only the d r^{-k-2} term survives.
    const double r = radii.back();
    CHECK(std::abs(res.residual.back()) / w.value(r) < 10.0 / (r * r));
  }
  SUBCASE("W+ turns positive beyond a finite crossover") {
    const auto w = ComparisonFunction::w_plus(p);
    const auto res = comparison_residuals(w, p, radii);
    REQUIRE(res.crossover);
    for (std::size_t i = 0; i < radii.size(); ++i) {
      if (radii[i] > *res.crossover) CHECK(res.residual[i] > 0.0);
    }
  }
  SUBCASE("derivatives match finite differences") {
    for (const auto& w : {ComparisonFunction::w_minus(p), ComparisonFunction::w_plus(p)}) {
      for (double r : {0.5, 2.0, 30.0}) {
        const double h = 1e-4 * r;
        CHECK(w.deriv(r) == doctest::Approx((w.value(r + h) - w.value(r - h)) / (2 * h)).epsilon(1e-6));
        CHECK(w.second(r) == doctest::Approx((w.deriv(r + h) - w.deriv(r - h)) / (2 * h)).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("preconditions") {
  CHECK_THROWS_AS(integrate_phi(problem(0.0), 1e3, 1e-10), PreconditionError);
  CHECK_THROWS_AS(integrate_phi(problem(0.5, -1.0), 1e3, 1e-10), PreconditionError);
  CHECK_THROWS_AS(integrate_phi(problem(0.5), 5.0, 1e-10), PreconditionError);
  CHECK_THROWS_AS(integrate_phi(problem(0.5), 1e3, 1e-3), PreconditionError);
  IntegrateOptions opt;
  opt.output_radii = {2.0, 1.0};
  CHECK_THROWS_AS(integrate_phi(problem(0.5), 1e3, 1e-10, opt), PreconditionError);
}
