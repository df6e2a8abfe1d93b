#include "fdlab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fdlab/errors.hpp"

namespace fdlab {
namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

// (x^n - y^n)/n for x > y >= 0 without cancellation.
double shell_volume(double x, double y, int n) {
  double sum = 0.0;
  double xp = 1.0;
  for (int j = 0; j < n; ++j) {
    double term = xp;
    for (int k = j + 1; k < n; ++k) term *= y;
    sum += term;
    xp *= x;
  }
  return (x - y) * sum / n;
}

// theta for v = V_D (1 + eps), eps > -1.
double theta_of_relative(double r, double D, double eps, double mu) {
  return (r * r + D) * std::expm1(-(2.0 / mu) * std::log1p(eps));
}

// Tridiagonal solve; lower[0] and upper[n-1] are ignored. Overwrites rhs.
void thomas(std::vector<double>& lower, std::vector<double>& diag, std::vector<double>& upper,
            std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double w = lower[i] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
}

}  // namespace

std::vector<double> State::v(const RadialGrid& grid, const ExponentSet& exps) const {
  std::vector<double> out(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    out[i] = std::pow(grid.r[i] * grid.r[i] + zeta(i), -0.5 * exps.mu);
  }
  return out;
}

std::vector<double> State::deviation(const RadialGrid& grid, const ExponentSet& exps) const {
  std::vector<double> out(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double q = grid.r[i] * grid.r[i] + D;
    out[i] = std::pow(q, -0.5 * exps.mu) * std::expm1(-0.5 * exps.mu * std::log1p(theta[i] / q));
  }
  return out;
}

std::string to_string(InitialCase c) {
  switch (c) {
    case InitialCase::case_i: return "i";
    case InitialCase::case_ii: return "ii";
    case InitialCase::case_iii: return "iii";
    case InitialCase::gaussian: return "gaussian";
  }
  return "unknown";
}

std::string to_string(BoundaryMode m) { return m == BoundaryMode::robin ? "robin" : "dirichlet"; }

double cutoff_chi(double r) {
  if (r <= 0.5) return 0.0;
  if (r >= 1.0) return 1.0;
  const double s = 2.0 * r - 1.0;
  return s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

State build_initial(const InitialDataSpec& spec, const RadialGrid& grid, const ExponentSet& exps) {
  const double D = spec.D;
  const double mu = exps.mu;
  if (!(D > 0.0)) throw PreconditionError("D must be > 0 (got D=" + fmt(D) + ")");
  if (spec.kind != InitialCase::gaussian) {
    if (!(spec.c > 0.0)) throw PreconditionError("c must be > 0 (got c=" + fmt(spec.c) + ")");
    if (!(spec.l > exps.l_min())) {
      throw PreconditionError("l must be > mu+2=" + fmt(exps.l_min()) + " (got l=" + fmt(spec.l) + ")");
    }
  }
  if (spec.kind == InitialCase::case_i && !(spec.delta > 0.0 && spec.delta < D)) {
    throw PreconditionError("case i requires 0 < delta < D (got delta=" + fmt(spec.delta) + ", D=" + fmt(D) + ")");
  }
  if (spec.kind == InitialCase::gaussian && !(spec.amplitude > -1.0 && spec.amplitude != 0.0)) {
    throw PreconditionError("gaussian data requires amplitude a in (-1, 0) or a > 0 (got a=" + fmt(spec.amplitude) + ")");
  }

  State s;
  s.D = D;
  s.theta.resize(grid.r.size());
  for (std::size_t i = 0; i < grid.r.size(); ++i) {
    const double r = grid.r[i];
    const double q = r * r + D;
    const double bump = r > 0.0 ? spec.c * std::pow(r, -spec.l) * cutoff_chi(r) * std::pow(q, 0.5 * mu) : 0.0;
    double th = 0.0;
    switch (spec.kind) {
      case InitialCase::case_i:
        th = std::max(spec.delta - D, theta_of_relative(r, D, bump, mu));
        break;
      case InitialCase::case_ii: {
        // Clip by V_{2D}/2: zeta <= 2^{2/mu} (r^2 + 2D) - r^2.
        const double clip = std::pow(2.0, 2.0 / mu) * (r * r + 2.0 * D) - r * r - D;
        th = bump < 1.0 ? std::min(clip, theta_of_relative(r, D, -bump, mu)) : clip;
        break;
      }
      case InitialCase::case_iii:
        th = theta_of_relative(r, D, bump, mu);
        break;
      case InitialCase::gaussian:
        th = theta_of_relative(r, D, spec.amplitude * std::exp(-r * r), mu);
        break;
    }
    s.theta[i] = th;
  }

  const auto dev = s.deviation(grid, exps);
  constexpr double rel = 1e-10;
  for (std::size_t i = 0; i < grid.r.size(); ++i) {
    const double r = grid.r[i];
    if (!(r * r + s.zeta(i) > 0.0)) throw PreconditionError("initial data not positive at r=" + fmt(r));
    const double tail = r >= 1.0 ? spec.c * std::pow(r, -spec.l) : 0.0;
    auto fail = [&](const std::string& what) {
      throw PreconditionError("case " + to_string(spec.kind) + " initial data violate " + what + " at r=" + fmt(r));
    };
    switch (spec.kind) {
      case InitialCase::case_i:
        if (s.theta[i] < spec.delta - D - rel * (r * r + D)) fail("v0 <= V_delta");
        if (r >= 1.0 && std::abs(dev[i]) > tail * (1.0 + rel)) fail("|v0 - V_D| <= c r^-l");
        break;
      case InitialCase::case_ii:
        if (dev[i] > 0.0) fail("v0 <= V_D");
        if (r >= 1.0 && dev[i] > -tail * (1.0 - rel)) fail("v0 <= V_D - c r^-l");
        break;
      case InitialCase::case_iii:
        if (dev[i] < 0.0) fail("v0 >= V_D");
        if (r >= 1.0 && dev[i] < tail * (1.0 - rel)) fail("v0 >= V_D + c r^-l");
        break;
      case InitialCase::gaussian:
        break;
    }
  }
  return s;
}

Solver::Solver(SolverConfig config, ExponentSet exps)
    : config_(std::move(config)), exps_(exps), dt_(config_.dt_initial) {
  if (!(config_.dt_initial > 0.0 && config_.dt_max > 0.0 && config_.dt_min > 0.0)) {
    throw PreconditionError("time steps must be > 0");
  }
  if (!(config_.cadence > 0.0)) throw PreconditionError("output cadence must be > 0");
  if (!(config_.growth_cap >= 1.0)) throw PreconditionError("growth cap must be >= 1");
  if (config_.grid.r.size() < 3) throw PreconditionError("solver grid needs N >= 2");
  build_stencils();
}

void Solver::build_stencils() {
  const auto& r = config_.grid.r;
  const std::size_t N = r.size() - 1;
  const int n = exps_.n;
  a_.assign(N + 1, 0.0);
  b_.assign(N + 1, 0.0);
  p_.assign(N + 1, 0.0);
  q_.assign(N + 1, 0.0);
  s_.assign(N + 1, 0.0);

  const double h1 = r[1] - r[0];
  a_[0] = 2.0 * n / (h1 * h1);
  for (std::size_t i = 1; i < N; ++i) {
    const double hm = r[i] - r[i - 1];
    const double hp = r[i + 1] - r[i];
    const double rm = 0.5 * (r[i] + r[i - 1]);
    const double rp = 0.5 * (r[i] + r[i + 1]);
    const double vol = shell_volume(rp, rm, n);
    a_[i] = std::pow(rp, n - 1) / (hp * vol);
    b_[i] = std::pow(rm, n - 1) / (hm * vol);
    p_[i] = hm / (hp * (hp + hm));
    s_[i] = -hp / (hm * (hp + hm));
    q_[i] = -(p_[i] + s_[i]);
  }
  const double R = r[N];
  const double hm = R - r[N - 1];
  const double rm = 0.5 * (R + r[N - 1]);
  const double vol = shell_volume(R, rm, n);
  b_[N] = std::pow(rm, n - 1) / (hm * vol);
  robin_flux_ = config_.robin_k * std::pow(R, n - 2) / vol;
}

/// F_i = z Lap_i - H(G_i) with H(G) = mu (r G + G^2/2). The centered G is kept
/// while the cell is monotone (both off-diagonal derivatives >= 0); otherwise
/// H is replaced by the Godunov flux of the one-sided differences, which is
/// monotone for any z > 0.
Solver::CellTerms Solver::interior(std::size_t i, const std::vector<double>& th, double D) const {
  const double r = config_.grid.r[i];
  const double mu = exps_.mu;
  const double z = r * r + D + th[i];
  const double lap = a_[i] * (th[i + 1] - th[i]) - b_[i] * (th[i] - th[i - 1]);
  CellTerms c;
  const double g = p_[i] * th[i + 1] + q_[i] * th[i] + s_[i] * th[i - 1];
  const double adv = mu * (r + g);
  c.f = z * lap - mu * r * g - 0.5 * mu * g * g;
  c.jp = z * a_[i] - adv * p_[i];
  c.jm = z * b_[i] - adv * s_[i];
  c.jd = lap - z * (a_[i] + b_[i]) - adv * q_[i];
  if (c.jp >= 0.0 && c.jm >= 0.0) return c;

  c.upwind = true;
  auto H = [&](double G) { return mu * (r * G + 0.5 * G * G); };
  const double hm = config_.grid.r[i] - config_.grid.r[i - 1];
  const double hp = config_.grid.r[i + 1] - config_.grid.r[i];
  const double gm = (th[i] - th[i - 1]) / hm;
  const double gp = (th[i + 1] - th[i]) / hp;
  const double gs = -r;  // minimiser of H
  const double h_back = H(std::max(gm, gs));
  const double h_fwd = H(std::min(gp, gs));
  c.f = z * lap;
  c.jp = z * a_[i];
  c.jm = z * b_[i];
  c.jd = lap - z * (a_[i] + b_[i]);
  if (h_back >= h_fwd) {
    c.f -= h_back;
    if (gm > gs) {
      const double d = mu * (r + gm) / hm;
      c.jm += d;
      c.jd -= d;
    }
  } else {
    c.f -= h_fwd;
    if (gp < gs) {
      const double d = mu * (r + gp) / hp;
      c.jp -= d;
      c.jd += d;
    }
  }
  return c;
}

void Solver::rhs(const State& st, std::vector<double>& out) const {
  const auto& r = config_.grid.r;
  const auto& th = st.theta;
  const std::size_t N = r.size() - 1;
  const double mu = exps_.mu;
  out.resize(N + 1);
  out[0] = (r[0] * r[0] + st.zeta(0)) * a_[0] * (th[1] - th[0]);
  for (std::size_t i = 1; i < N; ++i) out[i] = interior(i, th, st.D).f;
  if (config_.boundary == BoundaryMode::dirichlet) {
    out[N] = 0.0;
  } else {
    const double R = r[N];
    const double lap = -robin_flux_ * th[N] - b_[N] * (th[N] - th[N - 1]);
    const double g = -config_.robin_k * th[N] / R;
    out[N] = (R * R + st.zeta(N)) * lap - mu * R * g - 0.5 * mu * g * g;
  }
}

bool Solver::newton(const State& st, double dt, std::vector<double>& th, StepStats& stats) const {
  const auto& r = config_.grid.r;
  const std::size_t N = r.size() - 1;
  const double mu = exps_.mu;
  const double D = st.D;
  std::vector<double> lower(N + 1), diag(N + 1), upper(N + 1), res(N + 1);
  th = st.theta;
  stats.newton_iterations = 0;
  stats.mmatrix_violations = 0;
  stats.upwind_cells = 0;

  for (int it = 1; it <= config_.newton_max; ++it) {
    stats.newton_iterations = it;
    std::size_t bad = 0;
    // Row 0: symmetric origin cell.
    {
      const double z = D + th[0];
      const double lap = a_[0] * (th[1] - th[0]);
      const double f = z * lap;
      res[0] = th[0] - st.theta[0] - dt * f;
      upper[0] = -dt * z * a_[0];
      diag[0] = 1.0 - dt * (lap - z * a_[0]);
      lower[0] = 0.0;
      if (z * a_[0] < 0.0) ++bad;
    }
    std::size_t upwind = 0;
    for (std::size_t i = 1; i < N; ++i) {
      const CellTerms c = interior(i, th, D);
      if (c.jp < 0.0) ++bad;
      if (c.jm < 0.0) ++bad;
      if (c.upwind) ++upwind;
      res[i] = th[i] - st.theta[i] - dt * c.f;
      upper[i] = -dt * c.jp;
      lower[i] = -dt * c.jm;
      diag[i] = 1.0 - dt * c.jd;
    }
    if (config_.boundary == BoundaryMode::dirichlet) {
      res[N] = th[N] - st.theta[N];
      lower[N] = 0.0;
      diag[N] = 1.0;
    } else {
      const double R = r[N];
      const double k = config_.robin_k;
      const double z = R * R + D + th[N];
      const double lap = -robin_flux_ * th[N] - b_[N] * (th[N] - th[N - 1]);
      const double g = -k * th[N] / R;
      const double f = z * lap - mu * R * g - 0.5 * mu * g * g;
      const double jm = z * b_[N];
      const double jd = lap - z * (robin_flux_ + b_[N]) + mu * (R + g) * k / R;
      if (jm < 0.0) ++bad;
      res[N] = th[N] - st.theta[N] - dt * f;
      lower[N] = -dt * jm;
      diag[N] = 1.0 - dt * jd;
    }
    upper[N] = 0.0;
    stats.mmatrix_violations = std::max(stats.mmatrix_violations, bad);
    stats.upwind_cells = std::max(stats.upwind_cells, upwind);

    for (auto& x : res) x = -x;
    thomas(lower, diag, upper, res);
    double dmax = 0.0;
    double tmax = 0.0;
    for (std::size_t i = 0; i <= N; ++i) {
      th[i] += res[i];
      dmax = std::max(dmax, std::abs(res[i]));
      tmax = std::max(tmax, std::abs(th[i]));
      if (!std::isfinite(th[i]) || !(r[i] * r[i] + D + th[i] > 0.0)) return false;
    }
    if (dmax <= config_.newton_tol * tmax || dmax == 0.0) return true;
  }
  return false;
}

StepStats Solver::step_fixed(State& st, double dt) {
  if (!(dt > 0.0)) throw PreconditionError("step_fixed requires dt > 0");
  StepStats stats;
  stats.dt = dt;
  std::vector<double> th;
  if (!newton(st, dt, th, stats)) {
    throw NumericalError("Newton iteration did not converge at t=" + fmt(st.t) + " with dt=" + fmt(dt), st.t);
  }
  st.theta = std::move(th);
  st.t += dt;
  return stats;
}

StepStats Solver::step(State& st) { return step_limited(st, std::numeric_limits<double>::infinity()); }

StepStats Solver::step_limited(State& st, double max_dt) {
  StepStats stats;
  std::vector<double> th;
  for (;;) {
    const double dt = std::min(dt_, max_dt);
    if (newton(st, dt, th, stats)) {
      st.theta = std::move(th);
      st.t += dt;
      stats.dt = dt;
      if (dt == dt_) {
        if (stats.newton_iterations <= config_.newton_target_lo) {
          dt_ = std::min(config_.dt_max, dt_ * config_.growth_cap);
        } else if (stats.newton_iterations > config_.newton_target_hi) {
          dt_ *= 0.7;
        }
      }
      return stats;
    }
    ++stats.rejected;
    dt_ = 0.5 * dt;
    if (dt_ < config_.dt_min) {
      double tmax = 0.0;
      for (double x : st.theta) tmax = std::max(tmax, std::abs(x));
      throw NumericalError("time step underflow: t=" + fmt(st.t) + " dt=" + fmt(dt_) +
                               " max|zeta-D|=" + fmt(tmax) + " N=" + std::to_string(st.theta.size() - 1),
                           st.t);
    }
  }
}

DistanceReport sup_distance(const State& s, const RadialGrid& grid, const ExponentSet& exps) {
  DistanceReport rep;
  const auto dev = s.deviation(grid, exps);
  for (std::size_t i = 0; i < dev.size(); ++i) {
    const double a = std::abs(dev[i]);
    if (a > rep.sup) {
      rep.sup = a;
      rep.argmax_r = grid.r[i];
    }
    rep.sup_above = std::max(rep.sup_above, dev[i]);
    rep.sup_below = std::max(rep.sup_below, -dev[i]);
  }
  const double R = grid.r.back();
  const double zN = s.zeta(s.theta.size() - 1);
  rep.tail_bound =
      0.5 * exps.mu * std::pow(R * R + std::min(zN, s.D), -0.5 * (exps.mu + 2.0)) * std::abs(s.theta.back());
  return rep;
}

EvolveResult evolve(State s, Solver& solver, double t_end, const std::function<void(const State&)>& on_sample) {
  EvolveResult out;
  const auto& grid = solver.config().grid;
  const double cadence = solver.config().cadence;
  auto record = [&]() {
    out.samples.push_back({s.t, sup_distance(s, grid, solver.exps())});
    if (on_sample) on_sample(s);
  };
  record();
  const double t0 = s.t;
  std::size_t k = 1;
  while (s.t < t_end * (1.0 - 1e-14)) {
    const double t_next = std::min(t_end, t0 + static_cast<double>(k) * cadence);
    const StepStats st = solver.step_limited(s, t_next - s.t);
    ++out.steps;
    out.rejected += st.rejected;
    out.newton_iterations += static_cast<std::size_t>(st.newton_iterations);
    out.mmatrix_violations += st.mmatrix_violations;
    out.upwind_cells += st.upwind_cells;
    if (s.t >= t_next * (1.0 - 1e-14)) {
      s.t = t_next;
      record();
      ++k;
    }
  }
  out.final_state = std::move(s);
  return out;
}

}  // namespace fdlab
