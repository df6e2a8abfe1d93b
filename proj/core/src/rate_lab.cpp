#include "fdlab/rate_lab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include "fdlab/errors.hpp"
#include "fdlab/fit.hpp"

namespace fdlab {
namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

// Least-squares slope of log e over samples with t in [a, b].
std::optional<double> local_slope(std::span<const Sample> s, DistanceKind kind, double a, double b, double floor) {
  std::vector<double> x, y;
  for (const auto& smp : s) {
    if (smp.t < a || smp.t > b) continue;
    const double e = distance_of(smp, kind);
    if (!(e > floor)) return std::nullopt;
    x.push_back(smp.t);
    y.push_back(std::log(e));
  }
  if (x.size() < 3) return std::nullopt;
  return -fit_line(x, y).slope;
}

double rel_change(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::optional<LemmaId> matching_certificate(const InitialDataSpec& spec) {
  switch (spec.kind) {
    case InitialCase::case_i: return LemmaId::L3_4;
    case InitialCase::case_ii: return LemmaId::L4_1;
    case InitialCase::case_iii: return LemmaId::L4_2;
    case InitialCase::gaussian: return spec.amplitude < 0.0 ? LemmaId::T12_upper : LemmaId::T12_lower;
  }
  return std::nullopt;
}

void attach_certificate(RateReport& rep, const ExperimentPlan& plan) {
  const auto id = matching_certificate(plan.initial);
  if (!id) return;
  BarrierParams bp;
  bp.D = plan.initial.D;
  if (plan.initial.kind != InitialCase::gaussian) {
    bp.l = plan.initial.l;
    bp.c = plan.initial.c;
    if (!(plan.initial.l < plan.exps.l_star)) {
      rep.certificate = to_string(*id);
      rep.note += (rep.note.empty() ? "" : "; ") + std::string("no certificate for l >= l_star");
      return;
    }
  }
  const CertificateReport cert = certify(*id, bp, plan.exps);
  rep.certificate = to_string(*id);
  rep.certificate_passed = cert.passed() && cert.predicates_hold();
}

struct RunOutput {
  RateFit fit;
  EvolveResult evo;
};

RunOutput run_once(const ExperimentPlan& plan, const RadialGrid& grid) {
  SolverConfig cfg = plan.solver;
  cfg.grid = grid;
  State s0 = build_initial(plan.initial, grid, plan.exps);
  Solver solver(cfg, plan.exps);
  RunOutput out;
  out.evo = evolve(std::move(s0), solver, plan.t_end);
  out.fit = fit_decay(out.evo.samples, plan.measure, plan.fit);
  return out;
}

RateReport run_plan(const ExperimentPlan& plan) {
  RateReport rep;
  rep.plan_id = plan.id;
  rep.initial_case = to_string(plan.initial.kind);
  rep.measure = to_string(plan.measure);
  rep.l = plan.initial.kind == InitialCase::gaussian ? 0.0 : plan.initial.l;

  const RunOutput base = run_once(plan, plan.solver.grid);
  rep.steps = base.evo.steps;
  rep.e0 = distance_of(base.evo.samples.front(), plan.measure);
  if (!base.fit.ok) {
    rep.inconclusive = true;
    rep.note = base.fit.reason;
    return rep;
  }
  rep.fitted_rate = base.fit.rate;
  rep.t1 = base.fit.t1;
  rep.t2 = base.fit.t2;
  rep.residual = base.fit.rms;
  rep.decades = base.fit.decades;
  for (const auto& s : base.evo.samples) {
    if (s.t < rep.t1 || s.t > rep.t2) continue;
    const double e = distance_of(s, plan.measure);
    if (e > 0.0) rep.tail_ratio = std::max(rep.tail_ratio, s.distance.tail_bound / e);
  }

  // Window shifted by +-20% of its length.
  const double len = rep.t2 - rep.t1;
  double shift = 0.0;
  for (double dir : {-0.2, 0.2}) {
    const double a = std::max(0.0, rep.t1 + dir * len);
    const double b = std::min(plan.t_end, rep.t2 + dir * len);
    const RateFit f = fit_window(base.evo.samples, plan.measure, a, b);
    if (f.ok) shift = std::max(shift, rel_change(f.rate, rep.fitted_rate));
  }
  rep.shift_sensitivity = shift;
  rep.robust = shift < 0.03;

  if (plan.sensitivities) {
    const RunOutput wide = run_once(plan, doubled_rmax(plan.solver.grid));
    const RunOutput fine = run_once(plan, doubled_n(plan.solver.grid));
    if (wide.fit.ok) rep.rmax_sensitivity = rel_change(wide.fit.rate, rep.fitted_rate);
    if (fine.fit.ok) rep.n_sensitivity = rel_change(fine.fit.rate, rep.fitted_rate);
    if (!rep.rmax_sensitivity || !rep.n_sensitivity) {
      rep.inconclusive = true;
      rep.note = "sensitivity rerun could not form a fit window";
    } else if (*rep.rmax_sensitivity >= 0.01 || *rep.n_sensitivity >= 0.01) {
      rep.inconclusive = true;
      rep.note = "grid sensitivity >= 1%";
    }
  }
  return rep;
}

}  // namespace

std::string to_string(DistanceKind k) {
  switch (k) {
    case DistanceKind::two_sided: return "sup|v-V_D|";
    case DistanceKind::above: return "sup(v-V_D)";
    case DistanceKind::below: return "sup(V_D-v)";
  }
  return "unknown";
}

double distance_of(const Sample& s, DistanceKind k) {
  switch (k) {
    case DistanceKind::two_sided: return s.distance.sup;
    case DistanceKind::above: return s.distance.sup_above;
    case DistanceKind::below: return s.distance.sup_below;
  }
  return 0.0;
}

RateFit fit_window(std::span<const Sample> samples, DistanceKind kind, double t1, double t2) {
  RateFit f;
  std::vector<double> x, y;
  for (const auto& s : samples) {
    if (s.t < t1 || s.t > t2) continue;
    const double e = distance_of(s, kind);
    if (!(e > 0.0)) continue;
    x.push_back(s.t);
    y.push_back(std::log(e));
  }
  if (x.size() < 3) {
    f.reason = "fewer than three samples in window";
    return f;
  }
  const LinearFit lf = fit_line(x, y);
  f.ok = true;
  f.rate = -lf.slope;
  f.rms = lf.rms;
  f.t1 = x.front();
  f.t2 = x.back();
  f.points = x.size();
  f.decades = (y.front() - y.back()) / std::numbers::ln10;
  return f;
}

RateFit fit_decay(std::span<const Sample> samples, DistanceKind kind, const FitPolicy& policy) {
  RateFit f;
  if (samples.size() < 3) {
    f.reason = "too few samples";
    return f;
  }
  const double e0 = distance_of(samples.front(), kind);
  if (!(e0 > 0.0)) {
    f.reason = "e(0) = 0";
    return f;
  }
  const double floor = policy.floor * e0;

  double t1 = samples.front().t;
  double t2 = samples.back().t;
  if (policy.use_band) {
    std::optional<double> enter;
    std::optional<double> leave;
    for (const auto& s : samples) {
      const double e = distance_of(s, kind);
      if (!enter && e <= policy.band_hi * e0) enter = s.t;
      if (e >= policy.band_lo * e0) leave = s.t;
    }
    if (!enter || !leave) {
      f.reason = "amplitude band never reached";
      return f;
    }
    t1 = *enter;
    t2 = *leave;
  }
  // Stop before round-off takes over.
  for (const auto& s : samples) {
    if (distance_of(s, kind) <= floor) {
      t2 = std::min(t2, s.t);
      break;
    }
  }

  // Transient: the window opens at the first t after which every unit-interval
  // slope up to t2 stays within the stabilization band around the slope at t.
  std::vector<double> ts, slopes;
  for (const auto& s : samples) {
    if (s.t + 1.0 > t2) break;
    const auto a = local_slope(samples, kind, s.t, s.t + 1.0, floor);
    if (!a) break;
    ts.push_back(s.t);
    slopes.push_back(*a);
  }
  std::optional<double> t_stable;
  double hi = -std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t j = slopes.size(); j-- > 0;) {
    hi = std::max(hi, slopes[j]);
    lo = std::min(lo, slopes[j]);
    const double tol = policy.stabilization * slopes[j];
    if (slopes[j] > 0.0 && hi - slopes[j] < tol && slopes[j] - lo < tol) t_stable = ts[j];
    else if (t_stable) break;
  }
  if (!t_stable) {
    f.reason = "running slope never stabilized";
    return f;
  }
  t1 = std::max(t1, *t_stable);
  if (!(t2 > t1)) {
    f.reason = "empty fit window";
    return f;
  }
  f = fit_window(samples, kind, t1, t2);
  if (f.ok && f.decades < policy.min_decades) {
    f.ok = false;
    f.reason = "fit window spans " + fmt(f.decades) + " < " + fmt(policy.min_decades) + " decades";
  }
  return f;
}

SolverConfig default_solver_config(const InitialDataSpec& spec, const ExponentSet& exps, std::size_t N, double g,
                                   double r_max) {
  SolverConfig cfg;
  cfg.grid = RadialGrid::geometric(N, g, r_max);
  cfg.boundary = BoundaryMode::robin;
  if (spec.kind == InitialCase::gaussian) {
    cfg.robin_k = 0.5 * (exps.n - exps.mu - 2.0);
  } else {
    cfg.robin_k = std::min(spec.l, exps.l_star) - exps.mu - 2.0;
  }
  return cfg;
}

RadialGrid doubled_rmax(const RadialGrid& grid) {
  const double g = grid.stretch;
  if (g == 1.0) return RadialGrid::geometric(2 * grid.N(), 1.0, 2.0 * grid.r_max);
  const auto extra = static_cast<std::size_t>(std::llround(std::log(2.0) / std::log(g)));
  // Keep h_1: the extended grid shares its first nodes with the original.
  const double h1 = grid.r[1];
  const std::size_t N = grid.N() + extra;
  const double r_max = h1 * std::expm1(static_cast<double>(N) * std::log(g)) / (g - 1.0);
  return RadialGrid::geometric(N, g, r_max);
}

RadialGrid doubled_n(const RadialGrid& grid) {
  return RadialGrid::geometric(2 * grid.N(), std::sqrt(grid.stretch), grid.r_max);
}

RateReport run_rate_experiment(const ExperimentPlan& plan) {
  if (plan.initial.kind == InitialCase::gaussian) {
    throw PreconditionError("rate experiments need case i, ii or iii data");
  }
  const ExponentSet& e = plan.exps;
  const double l = plan.initial.l;
  if (!(l > e.l_min() && l <= e.l_star)) {
    throw PreconditionError("l must lie in (mu+2, l_star] = (" + fmt(e.l_min()) + ", " + fmt(e.l_star) + "]");
  }
  RateReport rep = run_plan(plan);
  rep.target_rate = rate_of_l(l, e);
  if (!rep.inconclusive || rep.fitted_rate > 0.0) rep.rel_err = rel_change(rep.fitted_rate, *rep.target_rate);
  attach_certificate(rep, plan);
  return rep;
}

double require_one_sided(const State& s, const RadialGrid& grid) {
  std::size_t last = 0;
  bool any = false;
  for (std::size_t i = 0; i < s.theta.size(); ++i) {
    if (s.theta[i] != 0.0) {
      last = i;
      any = true;
    }
  }
  if (!any) throw PreconditionError("data coincide with V_D");
  const double sign = s.theta[0] > 0.0 ? 1.0 : -1.0;  // theta > 0 means v < V_D
  for (std::size_t i = 0; i <= last; ++i) {
    if (!(sign * s.theta[i] > 0.0)) {
      throw PreconditionError("data must be strictly one-sided; touches or crosses V_D at r=" + fmt(grid.r[i]));
    }
  }
  return sign;
}

RateReport run_ceiling_experiment(const ExperimentPlan& plan) {
  const State s0 = build_initial(plan.initial, plan.solver.grid, plan.exps);
  require_one_sided(s0, plan.solver.grid);
  ExperimentPlan p = plan;
  p.fit.use_band = false;
  RateReport rep = run_plan(p);
  rep.ceiling = 1.1 * plan.exps.alpha_star;

  // Reference: the same data fitted over the amplitude band.
  const RunOutput band = [&] {
    ExperimentPlan q = plan;
    q.fit.use_band = true;
    q.fit.stabilization = 1e300;
    RunOutput o;
    SolverConfig cfg = q.solver;
    Solver solver(cfg, q.exps);
    o.evo = evolve(s0, solver, q.t_end);
    o.fit = fit_decay(o.evo.samples, q.measure, q.fit);
    return o;
  }();
  if (band.fit.ok) rep.band_rate = band.fit.rate;
  attach_certificate(rep, plan);
  return rep;
}

std::vector<RateReport> run_sweep(const std::vector<ExperimentPlan>& plans, unsigned threads) {
  std::vector<RateReport> out(plans.size());
  std::vector<std::exception_ptr> errors(plans.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, plans.size())));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < plans.size(); i = next++) {
      try {
        out[i] = plans[i].initial.kind == InitialCase::gaussian ? run_ceiling_experiment(plans[i])
                                                               : run_rate_experiment(plans[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const RateReport& a, const RateReport& b) { return a.plan_id < b.plan_id; });
  return out;
}

std::vector<Figure2Row> figure2_sweep(const ExponentSet& exps, std::span<const double> l_grid) {
  std::vector<Figure2Row> rows;
  rows.reserve(l_grid.size());
  for (double l : l_grid) rows.push_back({l, rate_of_l(l, exps), std::nullopt});
  return rows;
}

EntropySample entropy_value(const State& s, const RadialGrid& grid, const ExponentSet& exps) {
  const double m = exps.m;
  if (m == 0.0) throw PreconditionError("entropy diagnostic is undefined for m = 0");
  const int n = exps.n;
  const double sphere = 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
  const auto& r = grid.r;
  std::vector<double> f(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double q = r[i] * r[i] + s.D;
    // w = v/V_D = (1 + theta/q)^{-mu/2}; w - 1 - (w^m - 1)/m without cancellation.
    const double lw = -0.5 * exps.mu * std::log1p(s.theta[i] / q);
    const double wm1 = std::expm1(lw);
    const double wmm1 = std::expm1(m * lw);
    double integrand = wm1 - wmm1 / m;
    if (std::abs(lw) < 1e-4) integrand = 0.5 * (1.0 - m) * lw * lw * (1.0 + (2.0 + m) / 3.0 * lw);
    const double vdm = std::pow(q, -0.5 * exps.mu * m);
    f[i] = integrand / (1.0 - m) * vdm * std::pow(r[i], n - 1);
  }
  double sum = 0.0;
  for (std::size_t i = 1; i < r.size(); ++i) sum += 0.5 * (f[i] + f[i - 1]) * (r[i] - r[i - 1]);
  EntropySample out;
  out.t = s.t;
  out.value = sphere * sum;
  // Tail: integrand ~ f_N (r/R)^{-p}, p from the last decade.
  const std::size_t N = r.size() - 1;
  std::size_t j = N;
  while (j > 1 && r[j] > 0.1 * r[N]) --j;
  if (f[N] > 0.0 && f[j] > 0.0) {
    const double p = -std::log(f[N] / f[j]) / std::log(r[N] / r[j]);
    out.tail = p > 1.0 ? sphere * f[N] * r[N] / (p - 1.0) : std::numeric_limits<double>::infinity();
  }
  return out;
}

EntropyDiagnostic entropy_diagnostic(std::span<const State> snapshots, const RadialGrid& grid,
                                     const ExponentSet& exps, double data_l) {
  if (exps.m == 0.0) throw PreconditionError("entropy diagnostic is undefined for m = 0");
  EntropyDiagnostic d;
  d.outside_variational_basin = !(data_l > exps.n);
  d.sandwiched = true;
  for (const auto& s : snapshots) {
    for (std::size_t i = 0; i < s.theta.size(); ++i) {
      if (!(s.zeta(i) > 0.0)) d.sandwiched = false;
    }
    d.samples.push_back(entropy_value(s, grid, exps));
  }
  if (!d.sandwiched) d.note = "V_D0 <= v <= V_D1 sandwich fails on the grid";
  if (d.outside_variational_basin) {
    d.note += std::string(d.note.empty() ? "" : "; ") + "outside variational basin (l <= n)";
  }
  std::vector<double> x, y;
  for (const auto& s : d.samples) {
    if (s.value > 0.0 && std::isfinite(s.value)) {
      x.push_back(s.t);
      y.push_back(std::log(s.value));
    }
  }
  if (x.size() >= 3) d.fitted_rate = -fit_line(x, y).slope;
  return d;
}

}  // namespace fdlab
