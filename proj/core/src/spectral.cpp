#include "fdlab/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "fdlab/errors.hpp"
#include "fdlab/fit.hpp"

namespace fdlab {
namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

using Vec2 = std::array<double, 2>;

Vec2 rhs(const SpectralProblem& p, double r, const Vec2& y) {
  return {y[1], p.second_derivative(r, y[0], y[1])};
}

Vec2 axpy(const Vec2& y, double h, std::initializer_list<std::pair<double, const Vec2*>> terms) {
  Vec2 out = y;
  for (const auto& [c, k] : terms) {
    out[0] += h * c * (*k)[0];
    out[1] += h * c * (*k)[1];
  }
  return out;
}

// Quintic Hermite interpolant on one step from values, first and second
// derivatives at both ends. Returns f, f', f'' at the query point.
struct Hermite5 {
  double f0, d0, s0, f1, d1, s1, h;

  std::array<double, 3> eval(double s) const {
    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
    const double H0 = 1 - 10 * s3 + 15 * s4 - 6 * s5;
    const double H1 = s - 6 * s3 + 8 * s4 - 3 * s5;
    const double H2 = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5;
    const double H3 = 0.5 * s3 - s4 + 0.5 * s5;
    const double H4 = -4 * s3 + 7 * s4 - 3 * s5;
    const double H5 = 10 * s3 - 15 * s4 + 6 * s5;

    const double dH0 = -30 * s2 + 60 * s3 - 30 * s4;
    const double dH1 = 1 - 18 * s2 + 32 * s3 - 15 * s4;
    const double dH2 = s - 4.5 * s2 + 6 * s3 - 2.5 * s4;
    const double dH3 = 1.5 * s2 - 4 * s3 + 2.5 * s4;
    const double dH4 = -12 * s2 + 28 * s3 - 15 * s4;
    const double dH5 = -dH0;

    const double ddH0 = -60 * s + 180 * s2 - 120 * s3;
    const double ddH1 = -36 * s + 96 * s2 - 60 * s3;
    const double ddH2 = 1 - 9 * s + 18 * s2 - 10 * s3;
    const double ddH3 = 3 * s - 12 * s2 + 10 * s3;
    const double ddH4 = -24 * s + 84 * s2 - 60 * s3;
    const double ddH5 = -ddH0;

    const double hd0 = h * d0, hd1 = h * d1, hs0 = h * h * s0, hs1 = h * h * s1;
    const double f = f0 * H0 + hd0 * H1 + hs0 * H2 + hs1 * H3 + hd1 * H4 + f1 * H5;
    const double df = f0 * dH0 + hd0 * dH1 + hs0 * dH2 + hs1 * dH3 + hd1 * dH4 + f1 * dH5;
    const double ddf = f0 * ddH0 + hd0 * ddH1 + hs0 * ddH2 + hs1 * ddH3 + hd1 * ddH4 + f1 * ddH5;
    return {f, df / h, ddf / (h * h)};
  }
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

void SpectralProblem::validate() const {
  if (!(alpha > 0.0)) throw PreconditionError("alpha must be > 0 (got alpha=" + fmt(alpha) + ")");
  if (!(d > 0.0)) throw PreconditionError("d must be > 0 (got d=" + fmt(d) + ")");
}

double SpectralProblem::third_derivative(double r, double y, double p) const {
  const double q = r * r + d;
  const double mu = exps.mu;
  const double nm1 = exps.n - 1;
  const double pp = second_derivative(r, y, p);
  const double num = mu * r * p - alpha * y;
  const double dnum = mu * p + mu * r * pp - alpha * p;
  return nm1 / (r * r) * p - nm1 / r * pp + (dnum * q - num * 2.0 * r) / (q * q);
}

PhiSample SpectralSolution::at(double r) const {
  if (knots_.empty()) throw PreconditionError("solution has no dense output");
  if (r < 0.0 || r > knots_.back().r) {
    throw PreconditionError("dense output requested outside [0, " + fmt(knots_.back().r) + "]: r=" + fmt(r));
  }
  const SpectralProblem& p = problem_;
  PhiSample s;
  s.r = r;
  if (r <= r_start_) {
    // Series start region: phi = 1 - alpha r^2/(2 n d).
    const double c = p.alpha / (p.exps.n * p.d);
    s.phi = 1.0 - 0.5 * c * r * r;
    s.dphi = -c * r;
    s.ddphi = -c;
    s.laplacian = r > 0.0 ? p.laplacian(r, s.phi, s.dphi) : -p.exps.n * c;
    return s;
  }
  auto it = std::lower_bound(knots_.begin(), knots_.end(), r, [](const Knot& k, double v) { return k.r < v; });
  if (it == knots_.begin()) ++it;
  const Knot& b = *it;
  const Knot& a = *(it - 1);
  const double h = b.r - a.r;
  const double sa = p.second_derivative(a.r, a.phi, a.dphi);
  const double sb = p.second_derivative(b.r, b.phi, b.dphi);
  const Hermite5 hp{a.phi, a.dphi, sa, b.phi, b.dphi, sb, h};
  const Hermite5 hd{a.dphi, sa, p.third_derivative(a.r, a.phi, a.dphi),
                    b.dphi, sb, p.third_derivative(b.r, b.phi, b.dphi), h};
  const double u = (r - a.r) / h;
  const auto fp = hp.eval(u);
  const auto fd = hd.eval(u);
  s.phi = fp[0];
  s.dphi = fd[0];
  s.ddphi = fd[1];
  s.laplacian = s.ddphi + (p.exps.n - 1) / r * s.dphi;
  return s;
}

double SpectralSolution::scaled_defect(double r) const {
  if (knots_.empty()) throw PreconditionError("solution has no dense output");
  if (!(r > r_start_) || r > knots_.back().r) throw PreconditionError("defect requested outside integration range");
  const SpectralProblem& p = problem_;
  const PhiSample f = at(r);
  const double t1 = (r * r + p.d) * f.laplacian;
  const double t2 = -p.exps.mu * r * f.dphi;
  const double t3 = p.alpha * f.phi;
  const double scale = std::abs(t1) + std::abs(t2) + std::abs(t3);
  return scale > 0.0 ? std::abs(t1 + t2 + t3) / scale : 0.0;
}

std::vector<double> SpectralSolution::step_midpoints() const {
  std::vector<double> out;
  for (std::size_t i = 1; i < knots_.size(); ++i) out.push_back(0.5 * (knots_[i - 1].r + knots_[i].r));
  return out;
}

SpectralSolution SpectralSolution::from_samples(const SpectralProblem& problem, std::vector<double> r,
                                                std::vector<double> phi, std::vector<double> dphi) {
  if (r.size() != phi.size() || r.size() != dphi.size()) {
    throw PreconditionError("from_samples: r, phi, dphi differ in length");
  }
  SpectralSolution s;
  s.problem_ = problem;
  s.r_end = r.empty() ? 0.0 : r.back();
  s.r_nodes = std::move(r);
  s.phi = std::move(phi);
  s.dphi = std::move(dphi);
  return s;
}

SpectralSolution integrate_phi(const SpectralProblem& problem, double r_max, double tol,
                               const IntegrateOptions& options) {
  problem.validate();
  const double sd = std::sqrt(problem.d);
  if (!(r_max >= 10.0 * sd)) {
    throw PreconditionError("r_max must be >= 10 sqrt(d)=" + fmt(10.0 * sd) + " (got " + fmt(r_max) + ")");
  }
  if (!(tol >= 1e-12 && tol <= 1e-4)) throw PreconditionError("tol must lie in [1e-12, 1e-4] (got " + fmt(tol) + ")");
  if (!std::is_sorted(options.output_radii.begin(), options.output_radii.end())) {
    throw PreconditionError("output radii must be ascending");
  }
  if (!options.output_radii.empty() && (options.output_radii.front() < 0.0 || options.output_radii.back() > r_max)) {
    throw PreconditionError("output radii must lie in [0, r_max]");
  }

  SpectralSolution sol;
  sol.problem_ = problem;
  const double r0 = 1e-6 * sd;
  sol.r_start_ = r0;

  const double c = problem.alpha / (problem.exps.n * problem.d);
  double r = r0;
  Vec2 y{1.0 - 0.5 * c * r0 * r0, -c * r0};
  sol.knots_.push_back({r, y[0], y[1]});

  const bool dense_record = options.output_radii.empty();
  std::size_t next_out = 0;
  auto emit = [&](double rr, double ph, double dph) {
    sol.r_nodes.push_back(rr);
    sol.phi.push_back(ph);
    sol.dphi.push_back(dph);
  };
  // Requested radii inside the series region.
  while (next_out < options.output_radii.size() && options.output_radii[next_out] <= r0) {
    const double rr = options.output_radii[next_out++];
    emit(rr, 1.0 - 0.5 * c * rr * rr, -c * rr);
  }
  if (dense_record) emit(r, y[0], y[1]);

  const double atol = 1e-300;
  // The dense-output defect scales like (h/(r+sqrt d))^5, so tie the step cap
  // to the tolerance.
  const double rel_cap = std::min(options.max_relative_step, 2.0 * std::pow(tol, 0.2));
  double h = r0;
  bool last_rejected = false;
  Vec2 k1 = rhs(problem, r, y);

  while (r < r_max) {
    const double h_cap = rel_cap * r;
    h = std::min(h, h_cap);
    bool lands_on_output = false;
    double target = r_max;
    if (next_out < options.output_radii.size()) target = std::min(target, options.output_radii[next_out]);
    if (r + h >= target) {
      h = target - r;
      lands_on_output = true;
    }
    if (h <= 1e-14 * r) {
      if (lands_on_output) {
        // Output radius coincides with the current position.
        if (next_out < options.output_radii.size() && options.output_radii[next_out] <= r * (1 + 1e-14)) {
          emit(options.output_radii[next_out], y[0], y[1]);
          ++next_out;
          continue;
        }
        if (target == r_max) break;
      }
      throw NumericalError("spectral integration: step-size underflow at r=" + fmt(r), r);
    }

    const Vec2 k2 = rhs(problem, r + c2 * h, axpy(y, h, {{a21, &k1}}));
    const Vec2 k3 = rhs(problem, r + c3 * h, axpy(y, h, {{a31, &k1}, {a32, &k2}}));
    const Vec2 k4 = rhs(problem, r + c4 * h, axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const Vec2 k5 = rhs(problem, r + c5 * h, axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const Vec2 k6 = rhs(problem, r + h, axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    const Vec2 y_new = axpy(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    const double r_new = lands_on_output ? target : r + h;
    const Vec2 k7 = rhs(problem, r_new, y_new);

    // Scaled error: phi against max(|phi|, (r+sqrt d)|phi'|) and phi' against
    // max(|phi'|, |phi|/(r+sqrt d)) so that power-law tails and sign changes
    // are both controlled relatively.
    const double len = r_new + sd;
    const double sc0 = atol + tol * std::max({std::abs(y[0]), std::abs(y_new[0]), len * std::abs(y_new[1])});
    const double sc1 = atol + tol * std::max({std::abs(y[1]), std::abs(y_new[1]), std::abs(y_new[0]) / len});
    double err0 = h * (e1 * k1[0] + e3 * k3[0] + e4 * k4[0] + e5 * k5[0] + e6 * k6[0] + e7 * k7[0]) / sc0;
    double err1 = h * (e1 * k1[1] + e3 * k3[1] + e4 * k4[1] + e5 * k5[1] + e6 * k6[1] + e7 * k7[1]) / sc1;
    const double err = std::sqrt(0.5 * (err0 * err0 + err1 * err1));

    if (!(err <= 1.0)) {
      ++sol.rejected_steps;
      const double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
      h *= std::min(1.0, fac);
      last_rejected = true;
      continue;
    }

    ++sol.accepted_steps;
    const double r_old = r;
    const Vec2 y_old = y;
    r = r_new;
    y = y_new;
    k1 = k7;
    sol.knots_.push_back({r, y[0], y[1]});

    const bool crossed = y_old[0] > 0.0 && y[0] <= 0.0;
    if (crossed) {
      const SpectralSolution& view = sol;
      auto f = [&](double rr) { return view.at(rr).phi; };
      auto stop = [](double a, double b) { return std::abs(b - a) <= 1e-12 * std::abs(b); };
      const auto bracket = y[0] == 0.0 ? std::make_pair(r, r) : boost::math::tools::bisect(f, r_old, r, stop);
      const double zero = 0.5 * (bracket.first + bracket.second);
      sol.first_zero = zero;
      if (options.stop_at_zero) {
        while (next_out < options.output_radii.size() && options.output_radii[next_out] <= zero) {
          const PhiSample s = sol.at(options.output_radii[next_out++]);
          emit(s.r, s.phi, s.dphi);
        }
        if (dense_record) emit(zero, 0.0, sol.at(zero).dphi);
        sol.r_end = zero;
        return sol;
      }
    }

    if (lands_on_output && next_out < options.output_radii.size() && r == options.output_radii[next_out]) {
      while (next_out < options.output_radii.size() && options.output_radii[next_out] == r) {
        emit(r, y[0], y[1]);
        ++next_out;
      }
    } else if (dense_record) {
      emit(r, y[0], y[1]);
    }

    double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
    fac = std::min(5.0, std::max(0.2, fac));
    if (last_rejected) fac = std::min(1.0, fac);
    last_rejected = false;
    // A step shortened to hit an output radius should not shrink the next one.
    h = std::max(h, r - r_old) * fac;
  }
  sol.r_end = r;

  if (!sol.first_zero) {
    const double hi = options.tail_hi.value_or(sol.r_end);
    const double lo = options.tail_lo.value_or(hi / 100.0);
    if (lo > r0 && hi > lo && hi <= sol.r_end) {
      const auto rs = log_space(lo, hi, 201);
      std::vector<double> lx(rs.size()), ly(rs.size());
      bool positive = true;
      for (std::size_t i = 0; i < rs.size(); ++i) {
        const double v = sol.at(rs[i]).phi;
        if (!(v > 0.0)) {
          positive = false;
          break;
        }
        lx[i] = std::log(rs[i]);
        ly[i] = std::log(v);
      }
      if (positive) {
        const LinearFit fit = fit_line(lx, ly);
        sol.tail = TailFit{-fit.slope, lo, hi, fit.rms};
      }
    }
  }
  return sol;
}

std::vector<double> apply_L(std::span<const double> r, std::span<const double> psi, std::span<const double> psi_r,
                            std::span<const double> psi_rr, const SpectralProblem& problem) {
  if (psi.size() != r.size() || psi_r.size() != r.size() || psi_rr.size() != r.size()) {
    throw PreconditionError("apply_L: field sizes differ");
  }
  std::vector<double> out(r.size());
  const double nm1 = problem.exps.n - 1;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(r[i] > 0.0)) throw PreconditionError("apply_L: node at r <= 0 (coordinate singularity)");
    out[i] = (r[i] * r[i] + problem.d) * (psi_rr[i] + nm1 / r[i] * psi_r[i]) - problem.exps.mu * r[i] * psi_r[i];
  }
  (void)psi;
  return out;
}

std::string to_string(ShapeCheck c) {
  switch (c) {
    case ShapeCheck::positivity: return "positivity";
    case ShapeCheck::monotonicity: return "monotonicity";
    case ShapeCheck::laplacian_sign: return "laplacian_sign";
    case ShapeCheck::log_derivative_upper: return "log_derivative_upper";
    case ShapeCheck::log_derivative_lower: return "log_derivative_lower";
  }
  return "unknown";
}

std::size_t ShapeReport::count(ShapeCheck c) const {
  return static_cast<std::size_t>(
      std::count_if(violations.begin(), violations.end(), [c](const ShapeViolation& v) { return v.check == c; }));
}

std::size_t ShapeReport::nodes_flagged() const {
  std::vector<double> rs;
  for (const auto& v : violations) rs.push_back(v.r);
  std::sort(rs.begin(), rs.end());
  return static_cast<std::size_t>(std::unique(rs.begin(), rs.end()) - rs.begin());
}

ShapeReport check_shape_properties(const SpectralSolution& sol, const SpectralProblem& problem) {
  problem.validate();
  const ExponentSet& e = problem.exps;
  if (!(problem.alpha < e.alpha_star)) {
    throw PreconditionError("check_shape_properties requires alpha < alpha_star=" + fmt(e.alpha_star));
  }
  constexpr double tol = 1e-8;
  const double k = l_of_alpha(problem.alpha, e) - e.mu - 2.0;
  const double sd = std::sqrt(problem.d);

  ShapeReport rep;
  for (std::size_t i = 0; i < sol.r_nodes.size(); ++i) {
    const double r = sol.r_nodes[i];
    if (!(r > 0.0)) continue;
    ++rep.nodes_checked;
    const double ph = sol.phi[i];
    const double dph = sol.dphi[i];
    auto flag = [&](ShapeCheck c, double v) { rep.violations.push_back({r, c, v}); };

    if (!(ph > 0.0)) flag(ShapeCheck::positivity, ph);
    if (dph > tol * std::abs(ph) / (r + sd)) flag(ShapeCheck::monotonicity, dph);

    const double t1 = e.mu * r * dph;
    const double t2 = -problem.alpha * ph;
    const double lap = (t1 + t2) / (r * r + problem.d);
    if (lap > tol * (std::abs(t1) + std::abs(t2)) / (r * r + problem.d)) flag(ShapeCheck::laplacian_sign, lap);

    if (ph > 0.0) {
      const double ratio = dph / ph;
      const double bound = k * r / (r * r + problem.d);
      if (ratio > tol * bound) flag(ShapeCheck::log_derivative_upper, ratio);
      if (ratio + bound < -tol * bound) flag(ShapeCheck::log_derivative_lower, ratio);
    }
  }
  return rep;
}

double ComparisonFunction::value(double r) const {
  switch (kind) {
    case ComparisonKind::w_minus: return std::pow(r * r + d, -k / 2.0);
    case ComparisonKind::w_plus: return std::pow(r, -k) - std::pow(r, -j);
    case ComparisonKind::w_star: return std::pow(r, -k);
  }
  return 0.0;
}

double ComparisonFunction::deriv(double r) const {
  switch (kind) {
    case ComparisonKind::w_minus: return -k * r * std::pow(r * r + d, -k / 2.0 - 1.0);
    case ComparisonKind::w_plus: return -k * std::pow(r, -k - 1.0) + j * std::pow(r, -j - 1.0);
    case ComparisonKind::w_star: return -k * std::pow(r, -k - 1.0);
  }
  return 0.0;
}

double ComparisonFunction::second(double r) const {
  switch (kind) {
    case ComparisonKind::w_minus: {
      const double q = r * r + d;
      return k * (k + 2.0) * r * r * std::pow(q, -k / 2.0 - 2.0) - k * std::pow(q, -k / 2.0 - 1.0);
    }
    case ComparisonKind::w_plus: return k * (k + 1.0) * std::pow(r, -k - 2.0) - j * (j + 1.0) * std::pow(r, -j - 2.0);
    case ComparisonKind::w_star: return k * (k + 1.0) * std::pow(r, -k - 2.0);
  }
  return 0.0;
}

ComparisonFunction ComparisonFunction::w_minus(const SpectralProblem& problem) {
  problem.validate();
  ComparisonFunction f;
  f.kind = ComparisonKind::w_minus;
  f.k = l_of_alpha(problem.alpha, problem.exps) - problem.exps.mu - 2.0;
  f.d = problem.d;
  return f;
}

ComparisonFunction ComparisonFunction::w_plus(const SpectralProblem& problem, std::optional<double> beta) {
  problem.validate();
  const ExponentSet& e = problem.exps;
  if (!(problem.alpha < e.alpha_star)) throw PreconditionError("W+ requires alpha < alpha_star");
  const double b = beta.value_or(problem.alpha + 0.05 * (e.alpha_star - problem.alpha));
  if (!(b > problem.alpha) || !(b <= e.alpha_star)) {
    throw PreconditionError("W+ requires alpha < beta <= alpha_star (got beta=" + fmt(b) + ")");
  }
  ComparisonFunction f;
  f.kind = ComparisonKind::w_plus;
  f.beta = b;
  f.k = l_of_alpha(problem.alpha, e) - e.mu - 2.0;
  f.j = l_of_alpha(b, e) - e.mu - 2.0;
  if (!(f.j < f.k + 2.0)) {
    throw PreconditionError("W+ requires j < k+2 (got j=" + fmt(f.j) + ", k=" + fmt(f.k) + "); reduce beta - alpha");
  }
  return f;
}

ComparisonFunction ComparisonFunction::w_star(const ExponentSet& exps) {
  ComparisonFunction f;
  f.kind = ComparisonKind::w_star;
  f.k = (exps.n - exps.mu - 2.0) / 2.0;
  return f;
}

ComparisonResiduals comparison_residuals(const ComparisonFunction& f, const SpectralProblem& problem,
                                         std::span<const double> radii) {
  problem.validate();
  ComparisonResiduals out;
  out.r.assign(radii.begin(), radii.end());
  std::vector<double> w(radii.size()), wr(radii.size()), wrr(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) {
    w[i] = f.value(radii[i]);
    wr[i] = f.deriv(radii[i]);
    wrr[i] = f.second(radii[i]);
  }
  out.residual = apply_L(radii, w, wr, wrr, problem);
  for (std::size_t i = 0; i < radii.size(); ++i) out.residual[i] += problem.alpha * w[i];

  if (f.kind == ComparisonKind::w_plus) {
    for (std::size_t i = radii.size(); i-- > 0;) {
      if (!(out.residual[i] > 0.0)) {
        out.crossover = radii[i];
        break;
      }
    }
    if (!out.crossover && !radii.empty()) out.crossover = 0.0;
  }
  return out;
}

}  // namespace fdlab
