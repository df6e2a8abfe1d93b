#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fdlab/errors.hpp"
#include "fdlab/rate_lab.hpp"

using namespace fdlab;

namespace {

const ExponentSet kExps = derive_exponents(6, 0.0);

std::vector<Sample> synthetic(double rate, double fast, double t_end) {
  std::vector<Sample> out;
  for (int k = 0; 0.05 * k <= t_end + 1e-12; ++k) {
    const double t = 0.05 * k;
    Sample s;
    s.t = t;
    s.distance.sup = 0.4 * (std::exp(-rate * t) + 3.0 * std::exp(-fast * t));
    s.distance.sup_above = s.distance.sup;
    out.push_back(s);
  }
  return out;
}

ExperimentPlan small_plan(InitialCase kind, double l, std::string id) {
  ExperimentPlan p;
  p.id = std::move(id);
  p.exps = kExps;
  p.initial.kind = kind;
  p.initial.l = l;
  p.solver = default_solver_config(p.initial, kExps, 400, 1.02, 100.0);
  p.t_end = 20.0;
  p.sensitivities = false;
  return p;
}

}  // namespace

TEST_CASE("fit recovers the slow rate past a fast transient") {
  const auto s = synthetic(0.75, 2.5, 30.0);
  const RateFit f = fit_decay(s, DistanceKind::two_sided, FitPolicy{});
  REQUIRE(f.ok);
  CHECK(f.rate == doctest::Approx(0.75).epsilon(0.01));
  CHECK(f.t1 < f.t2);
  CHECK(f.decades >= 2.0);
}

TEST_CASE("fit on an explicit window of a pure exponential is exact") {
  const auto s = synthetic(0.36, 0.36, 10.0);
  const RateFit f = fit_window(s, DistanceKind::above, 1.0, 9.0);
  REQUIRE(f.ok);
  CHECK(f.rate == doctest::Approx(0.36).epsilon(1e-12));
  CHECK(f.rms < 1e-12);
}

TEST_CASE("short horizons cannot form a window") {
  const auto s = synthetic(0.36, 2.0, 4.0);
  const RateFit f = fit_decay(s, DistanceKind::two_sided, FitPolicy{});
  CHECK_FALSE(f.ok);
  CHECK_FALSE(f.reason.empty());
}

TEST_CASE("figure 2 curve") {
  const std::vector<double> ls{4.001, 4.5, 5.0};
  const auto rows = figure2_sweep(kExps, ls);
  CHECK(rows[0].rate == doctest::Approx(0.001 * 1.999));
  CHECK(rows[1].rate == 0.75);
  CHECK(rows[2].rate == kExps.alpha_star);
  const auto fine = figure2_sweep(kExps, std::vector<double>{4.1, 4.3, 4.6, 4.9, 4.99});
  for (std::size_t i = 1; i < fine.size(); ++i) CHECK(fine[i].rate > fine[i - 1].rate);
}

TEST_CASE("one-sidedness") {
  const RadialGrid g = RadialGrid::geometric(400, 1.02, 50.0);
  State s;
  s.D = 1.0;
  s.theta.assign(g.r.size(), 0.0);
  for (std::size_t i = 0; i < 150; ++i) s.theta[i] = 0.1 * std::exp(-g.r[i]);
  CHECK(require_one_sided(s, g) == 1.0);
  s.theta[40] = 0.0;  // touches V_D at one radius
  CHECK_THROWS_AS(require_one_sided(s, g), PreconditionError);
  s.theta[40] = -1e-3;
  CHECK_THROWS_AS(require_one_sided(s, g), PreconditionError);
  for (auto& th : s.theta) th = -std::abs(th);
  s.theta[40] = -1e-3;
  CHECK(require_one_sided(s, g) == -1.0);

  ExperimentPlan two_sided = small_plan(InitialCase::case_i, 4.5, "x");
  CHECK_THROWS_AS(run_ceiling_experiment(two_sided), PreconditionError);
}

TEST_CASE("rate experiments validate their plan") {
  CHECK_THROWS_AS(run_rate_experiment(small_plan(InitialCase::gaussian, 4.5, "g")), PreconditionError);
  CHECK_THROWS_AS(run_rate_experiment(small_plan(InitialCase::case_i, 5.2, "l")), PreconditionError);
}

TEST_CASE("sweep merges reports by plan id regardless of scheduling") {
  std::vector<ExperimentPlan> plans{small_plan(InitialCase::case_i, 4.8, "b"),
                                    small_plan(InitialCase::case_iii, 4.5, "a")};
  plans[1].measure = DistanceKind::above;
  const auto par = run_sweep(plans, 2);
  const auto ser = run_sweep(plans, 1);
  REQUIRE(par.size() == 2);
  CHECK(par[0].plan_id == "a");
  CHECK(par[1].plan_id == "b");
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(par[i].fitted_rate == ser[i].fitted_rate);
    CHECK(par[i].t1 == ser[i].t1);
  }
}

TEST_CASE("entropy of the profile itself vanishes, and is nonnegative otherwise") {
  const ExponentSet e = derive_exponents(6, Rational::make(1, 4));
  const RadialGrid g = RadialGrid::geometric(600, 1.01, 100.0);
  State s;
  s.D = 1.0;
  s.theta.assign(g.r.size(), 0.0);
  CHECK(entropy_value(s, g, e).value == 0.0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> a(-0.5, 0.5), c(0.0, 4.0);
  for (int k = 0; k < 20; ++k) {
    const double amp = a(rng), centre = c(rng);
    for (std::size_t i = 0; i < g.r.size(); ++i) {
      s.theta[i] = (g.r[i] * g.r[i] + 1.0) * amp * std::exp(-std::pow(g.r[i] - centre, 2));
    }
    CHECK(entropy_value(s, g, e).value >= 0.0);
  }
  CHECK_THROWS_AS(entropy_value(s, g, kExps), PreconditionError);
  const std::vector<State> one{s};
  CHECK_THROWS_AS(entropy_diagnostic(one, g, kExps, 7.0), PreconditionError);
  CHECK(entropy_diagnostic(one, g, e, 5.0).outside_variational_basin);
  CHECK_FALSE(entropy_diagnostic(one, g, e, 7.0).outside_variational_basin);
}

TEST_CASE("entropy decays at least as fast as the sup-norm distance") {
  const ExponentSet e = derive_exponents(6, Rational::make(1, 4));
  InitialDataSpec spec;
  spec.kind = InitialCase::gaussian;
  spec.amplitude = 0.5;
  const SolverConfig cfg = default_solver_config(spec, e);
  Solver solver(cfg, e);
  std::vector<State> snaps;
  const auto res = evolve(build_initial(spec, cfg.grid, e), solver, 40.0, [&](const State& s) {
    const double k = s.t / 0.5;
    if (std::abs(k - std::round(k)) < 1e-9) snaps.push_back(s);
  });
  FitPolicy policy;
  policy.use_band = false;
  const RateFit sup = fit_decay(res.samples, DistanceKind::above, policy);
  REQUIRE(sup.ok);
  const auto diag = entropy_diagnostic(snaps, cfg.grid, e, std::numeric_limits<double>::infinity());
  CHECK(diag.sandwiched);
  CHECK_FALSE(diag.outside_variational_basin);
  REQUIRE(diag.fitted_rate);
  for (const auto& smp : diag.samples) CHECK(smp.value >= 0.0);
  CHECK(*diag.fitted_rate >= 0.9 * sup.rate);
}
