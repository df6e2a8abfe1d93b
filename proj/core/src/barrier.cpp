#include "fdlab/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/tools/minima.hpp>

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

constexpr double safety = 1.1;

double default_l(const ExponentSet& e) { return 0.5 * (e.l_min() + e.l_star); }

double tail_alpha(const BarrierParams& p, const ExponentSet& e, double* l_out) {
  const double l = p.l.value_or(default_l(e));
  if (!(l > e.l_min() && l < e.l_star)) {
    throw PreconditionError("l must lie in (mu+2, l_star) = (" + fmt(e.l_min()) + ", " + fmt(e.l_star) +
                            ") (got l=" + fmt(l) + ")");
  }
  if (l_out) *l_out = l;
  return rate_of_l(l, e);
}

double inner_delta(const BarrierParams& p) {
  const double delta = p.delta.value_or(0.5 * p.D);
  if (!(delta > 0.0 && delta < p.D)) {
    throw PreconditionError("delta must lie in (0, D) (got delta=" + fmt(delta) + ", D=" + fmt(p.D) + ")");
  }
  return delta;
}

SpectralSolution shape_solution(double alpha, double d, const ExponentSet& e, double r_max, double tol,
                                bool stop_at_zero = false) {
  SpectralProblem prob{alpha, d, e};
  IntegrateOptions opt;
  opt.stop_at_zero = stop_at_zero;
  return integrate_phi(prob, std::max(r_max, 10.0 * std::sqrt(d)), tol, opt);
}

// Largest l0 with (l0-mu-2)/(n-l0) <= 0.9 q,
// q = delta/(mu (D - delta)).
double l0_from_delta(double D, double delta, const ExponentSet& e) {
  const double q = 0.9 * delta / (e.mu * (D - delta));
  return (e.l_min() + q * e.n) / (1.0 + q);
}

// Amplitude B with v0^{-2/mu} >= r^2 + D - B psi for every admissible v0 with
// v0 <= V_delta and v0 <= V_D + c r^{-l} on r >= 1.
double data_amplitude(const SpectralSolution& psi, double D, double delta, double c, double l, const ExponentSet& e,
                      double r_lo, double r_hi) {
  double best = 0.0;
  for (double r : log_space(r_lo, r_hi, 4001)) {
    double gap = D - delta;
    if (r >= 1.0) gap = std::min(gap, 2.0 * c / e.mu * std::pow(r * r + D, 0.5 * (e.mu + 2.0)) * std::pow(r, -l));
    best = std::max(best, gap / psi.at(r).phi);
  }
  return safety * best;
}

void require_grid(const BarrierParams& p) {
  if (p.space_nodes < 1000) throw PreconditionError("certificate grid needs >= 1000 space nodes");
  if (p.time_samples < 20) throw PreconditionError("certificate grid needs >= 20 time samples");
  if (!(p.r_min > 0.0 && p.r_max > p.r_min)) throw PreconditionError("certificate radii must satisfy 0 < r_min < r_max");
  if (!(p.t_span > 0.0)) throw PreconditionError("certificate time span must be > 0");
  if (!(p.D > 0.0)) throw PreconditionError("D must be > 0 (got D=" + fmt(p.D) + ")");
}

}  // namespace

std::vector<double> apply_P(const SpaceTimeField& w, std::span<const double> r, double t, double h,
                            const ExponentSet& exps) {
  if (!(h > 0.0)) throw PreconditionError("apply_P: spacing must be > 0");
  const double m = exps.m;
  const double mu = exps.mu;
  const double n = exps.n;
  std::vector<double> out(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double ri = r[i];
    if (!(ri - h > 0.0)) throw PreconditionError("apply_P: stencil reaches r <= 0 at r=" + fmt(ri));
    const double wm = w.value(ri - h, t);
    const double w0 = w.value(ri, t);
    const double wp = w.value(ri + h, t);
    if (!(wm > 0.0 && w0 > 0.0 && wp > 0.0)) throw PreconditionError("apply_P: w must be > 0 (r=" + fmt(ri) + ")");
    const double wr = (wp - wm) / (2.0 * h);
    const double wrr = (wp - 2.0 * w0 + wm) / (h * h);
    const double wpow = std::pow(w0, m - 1.0);
    const double flux_r = wpow * wrr + (m - 1.0) * wpow / w0 * wr * wr;
    out[i] = w.dt(ri, t) - (flux_r + (n - 1.0) / ri * wpow * wr) - mu * ri * wr - mu * n * w0;
  }
  return out;
}

ReducedResidual reduced_residual(double r, double y, double y_prime, const ShapeSample& s, double D,
                                 const ExponentSet& exps) {
  const double t1 = (r * r + D) * s.lap;
  const double t2 = -exps.mu * r * s.psi_r;
  const double t3 = -(y_prime / y) * s.psi;
  const double t4 = y * s.psi * s.lap;
  const double t5 = -y * 0.5 * exps.mu * s.psi_r * s.psi_r;
  return {t1 + t2 + t3 + t4 + t5,
          std::max({std::abs(t1), std::abs(t2), std::abs(t3), std::abs(t4), std::abs(t5)})};
}

std::vector<double> A_D_residual(double y, double y_prime, std::span<const double> r, std::span<const double> psi,
                                 std::span<const double> psi_r, std::span<const double> psi_rr, double D,
                                 const ExponentSet& exps) {
  if (y == 0.0) throw PreconditionError("A_D_residual: y = 0 (y'/y undefined); use apply_P");
  if (psi.size() != r.size() || psi_r.size() != r.size() || psi_rr.size() != r.size()) {
    throw PreconditionError("A_D_residual: field sizes differ");
  }
  std::vector<double> out(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(r[i] > 0.0)) throw PreconditionError("A_D_residual: node at r <= 0");
    const ShapeSample s{psi[i], psi_r[i], psi_rr[i] + (exps.n - 1) / r[i] * psi_r[i]};
    out[i] = reduced_residual(r[i], y, y_prime, s, D, exps).value;
  }
  return out;
}

double identity_rhs(double r, double y, double y_prime, const ShapeSample& s, double D, const ExponentSet& exps) {
  const double z = r * r + D + y * s.psi;
  if (y == 0.0) return 0.0;
  return 0.5 * exps.mu * y * std::pow(z, -0.5 * (exps.mu + 2.0)) *
         reduced_residual(r, y, y_prime, s, D, exps).value;
}

std::string to_string(LemmaId id) {
  switch (id) {
    case LemmaId::L3_1: return "L3.1";
    case LemmaId::L3_2: return "L3.2";
    case LemmaId::L3_3: return "L3.3";
    case LemmaId::L3_4: return "L3.4";
    case LemmaId::L3_5: return "L3.5";
    case LemmaId::L4_1: return "L4.1";
    case LemmaId::L4_2: return "L4.2";
    case LemmaId::T12_upper: return "T1.2-upper";
    case LemmaId::T12_lower: return "T1.2-lower";
  }
  return "unknown";
}

std::optional<LemmaId> parse_lemma_id(std::string_view text) {
  for (LemmaId id : {LemmaId::L3_1, LemmaId::L3_2, LemmaId::L3_3, LemmaId::L3_4, LemmaId::L3_5, LemmaId::L4_1,
                     LemmaId::L4_2, LemmaId::T12_upper, LemmaId::T12_lower}) {
    if (text == to_string(id)) return id;
  }
  return std::nullopt;
}

std::string to_string(BarrierRole role) {
  return role == BarrierRole::supersolution ? "supersolution" : "subsolution";
}

double Barrier::y(double t) const { return sign * amplitude * std::exp(-eta * (t - t_lo)); }

ShapeSample Barrier::shape(double r) const {
  if (spectral) {
    const PhiSample s = spectral->at(r);
    const SpectralProblem& p = spectral->problem();
    return {s.phi, s.dphi, p.laplacian(r, s.phi, s.dphi)};
  }
  const double k = power_k;
  const double psi = std::pow(r, -k);
  return {psi, -k * psi / r, k * (k + 2.0 - exps.n) * psi / (r * r)};
}

double Barrier::pressure(double r, double t) const { return r * r + D + y(t) * shape(r).psi; }

double Barrier::smooth_value(double r, double t) const {
  const double z = pressure(r, t);
  return z > 0.0 ? std::pow(z, -0.5 * exps.mu) : std::numeric_limits<double>::infinity();
}

double Barrier::value(double r, double t) const {
  const double w = smooth_value(r, t);
  switch (clamp) {
    case Clamp::none: return w;
    case Clamp::min_with: return std::min(w, std::pow(r * r + clamp_D, -0.5 * exps.mu));
    case Clamp::max_with: return std::max(w, std::pow(r * r + clamp_D, -0.5 * exps.mu));
  }
  return w;
}

SpaceTimeField Barrier::smooth_field() const {
  SpaceTimeField f;
  f.value = [this](double r, double t) { return smooth_value(r, t); };
  f.dt = [this](double r, double t) {
    const double z = pressure(r, t);
    return -0.5 * exps.mu * std::pow(z, -0.5 * exps.mu - 1.0) * y_prime(t) * shape(r).psi;
  };
  return f;
}

bool Barrier::in_active_set(double r, double t) const {
  const double z = pressure(r, t);
  switch (clamp) {
    case Clamp::none: return z > 0.0;
    case Clamp::min_with: return z > r * r + clamp_D;
    case Clamp::max_with: return z < r * r + clamp_D && z > 0.0;
  }
  return false;
}

double Barrier::required_sign() const {
  const double p_sign = role == BarrierRole::supersolution ? 1.0 : -1.0;
  return p_sign * sign;
}

bool Barrier::predicates_hold() const { return !first_failed_predicate(); }

std::optional<std::string> Barrier::first_failed_predicate() const {
  for (const auto& p : predicates) {
    if (!p.holds()) return p.name;
  }
  return std::nullopt;
}

Barrier build_barrier(LemmaId lemma, const BarrierParams& p, const ExponentSet& e) {
  require_grid(p);
  Barrier b;
  b.lemma = lemma;
  b.exps = e;
  b.D = p.D;
  b.r_lo = p.r_min;
  b.r_hi = p.r_max;
  b.t_lo = 0.0;
  b.t_hi = p.t_span;
  b.space_nodes = p.space_nodes;
  b.time_samples = p.time_samples;
  const double mu = e.mu;
  const double n = e.n;
  auto echo = [&](const std::string& k, double v) { b.echo.emplace_back(k, v); };
  echo("n", n);
  echo("m", e.m);
  echo("D", p.D);

  switch (lemma) {
    case LemmaId::L3_1:
    case LemmaId::L3_2:
    case LemmaId::L3_3: {
      const double delta = inner_delta(p);
      double l = p.l.value_or(default_l(e));
      double alpha = 0.0;
      if (lemma == LemmaId::L3_3) {
        alpha = tail_alpha(p, e, &l);
      } else if (lemma == LemmaId::L3_1 && p.alpha) {
        alpha = *p.alpha;
        if (!(alpha > 0.0 && alpha < e.alpha_star)) {
          throw PreconditionError("alpha must lie in (0, alpha_star=" + fmt(e.alpha_star) + ")");
        }
      } else {
        if (p.l) tail_alpha(p, e, &l);
        const double l0 = std::min(l, l0_from_delta(p.D, delta, e));
        alpha = rate_of_l(l0, e);
        b.predicates.push_back({"l0_vs_delta", (l0 - mu - 2.0) / (n - l0), delta / (mu * (p.D - delta)), false});
        echo("l0", l0);
      }
      const double k = l_of_alpha(alpha, e) - mu - 2.0;
      const double quad = mu * (p.D - delta) * k * k / (2.0 * delta);
      double eta = 0.0;
      if (lemma == LemmaId::L3_3) {
        const double kappa = std::max(0.0, quad - alpha) + 0.1 * alpha;
        eta = -kappa;
        b.predicates.push_back({"kappa_bound", quad - alpha, kappa, false});
        echo("kappa", kappa);
      } else if (lemma == LemmaId::L3_2) {
        eta = 0.5 * alpha;
      } else {
        eta = p.eta.value_or(0.5 * alpha);
      }
      b.predicates.push_back({"eta_bound", eta, alpha - quad, false});

      SpectralSolution psi = shape_solution(alpha, delta, e, p.r_max, p.ode_tol);
      double B = p.B.value_or(1.0);
      if (lemma != LemmaId::L3_1 && !p.B) B = data_amplitude(psi, p.D, delta, p.c, l, e, p.r_min, p.r_max);
      b.spectral = std::move(psi);
      b.role = BarrierRole::supersolution;
      b.alpha = alpha;
      b.amplitude = B;
      b.sign = -1.0;
      b.eta = eta;
      b.clamp = Barrier::Clamp::min_with;
      b.clamp_D = delta;
      echo("delta", delta);
      if (lemma != LemmaId::L3_1 || !p.alpha) echo("l", l);
      echo("alpha", alpha);
      echo("eta", eta);
      echo("B", B);
      if (lemma != LemmaId::L3_1) echo("c", p.c);
      break;
    }
    case LemmaId::L3_4: {
      double l = 0.0;
      const double alpha = tail_alpha(p, e, &l);
      const double k = l - mu - 2.0;
      const double bound = (n + mu - l) * p.D / (n + mu - l + 0.5 * mu * k);
      const double delta = p.delta.value_or(0.9 * bound);
      if (!(delta > 0.0 && delta < p.D)) {
        throw PreconditionError("delta must lie in (0, D) (got delta=" + fmt(delta) + ")");
      }
      b.predicates.push_back({"delta_bound", delta, bound, true});
      const double c1 = p.c1.value_or(p.c);
      const double g1 = std::exp(alpha * p.t0) * (p.D + 1.0);
      const double g2 = 2.0 * c1 / mu * std::exp(alpha * p.t0) * std::pow(p.D + 1.0, 0.5 * (mu + 2.0));
      const double B = p.B.value_or(safety * std::max(g1, g2));
      b.predicates.push_back({"B_covers_core", g1, B, false});
      b.predicates.push_back({"B_covers_tail", g2, B, false});
      b.role = BarrierRole::supersolution;
      b.alpha = alpha;
      b.power_k = k;
      b.t_lo = p.t0;
      b.t_hi = p.t0 + p.t_span;
      b.amplitude = B * std::exp(-alpha * p.t0);
      b.sign = -1.0;
      b.eta = alpha;
      b.clamp = Barrier::Clamp::min_with;
      b.clamp_D = p.D - delta;
      echo("l", l);
      echo("alpha", alpha);
      echo("delta", delta);
      echo("delta_bound", bound);
      echo("t0", p.t0);
      echo("c1", c1);
      echo("B", B);
      break;
    }
    case LemmaId::L3_5: {
      double l = 0.0;
      const double alpha = tail_alpha(p, e, &l);
      const double k = l - mu - 2.0;
      SpectralSolution psi = shape_solution(alpha, p.D, e, p.r_max, p.ode_tol);
      // r0 >= 1 with c r^{-l} <= V_D/2 beyond it.
      auto excess = [&](double r) { return p.c * std::pow(r, -l) - 0.5 * std::pow(r * r + p.D, -0.5 * mu); };
      double r0 = 1.0;
      if (excess(1.0) > 0.0) {
        double hi = 2.0;
        while (excess(hi) > 0.0) hi *= 2.0;
        double lo = hi / 2.0;
        for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
          const double mid = 0.5 * (lo + hi);
          (excess(mid) > 0.0 ? lo : hi) = mid;
        }
        r0 = hi;
      }
      if (!(r0 < p.r_max)) throw PreconditionError("L3.5: r0 beyond the certificate range");
      double c1 = std::numeric_limits<double>::infinity();
      for (double r : log_space(r0, p.r_max, 2001)) c1 = std::min(c1, psi.at(r).phi * std::pow(r, k));
      const double c2 = p.c2.value_or(0.5 * std::pow(r0 * r0 + p.D, -0.5 * mu));
      const double c3 = 2.0 * (std::pow(2.0, 2.0 / mu) - 1.0);
      const double gamma = p.c * c3;
      const double g1 = 1.0 / (std::pow(c2, 2.0 / mu) * psi.at(r0).phi);
      const double g2 = gamma * std::pow(p.D + 1.0, 0.5 * (mu + 2.0)) / c1;
      const double B = p.B.value_or(safety * std::max(g1, g2));
      b.predicates.push_back({"B_covers_core", g1, B, false});
      b.predicates.push_back({"B_covers_tail", g2, B, false});
      b.spectral = std::move(psi);
      b.role = BarrierRole::subsolution;
      b.alpha = alpha;
      b.amplitude = B;
      b.sign = 1.0;
      b.eta = alpha;
      echo("l", l);
      echo("alpha", alpha);
      echo("c", p.c);
      echo("r0", r0);
      echo("c1", c1);
      echo("c2", c2);
      echo("c3", c3);
      echo("B", B);
      break;
    }
    case LemmaId::L4_1: {
      double l = 0.0;
      const double alpha = tail_alpha(p, e, &l);
      const double k = l - mu - 2.0;
      const double bound = 2.0 * alpha / (mu * k * k);
      const double E = p.E.value_or(p.D + 0.9 * bound);
      if (!(E > p.D)) throw PreconditionError("E must be > D (got E=" + fmt(E) + ")");
      b.predicates.push_back({"E_gap_bound", E - p.D, bound, false});
      SpectralSolution psi = shape_solution(alpha, E + 1.0, e, p.r_max, p.ode_tol);
      double c1 = 0.0;
      for (double r : log_space(1.0, p.r_max, 2001)) c1 = std::max(c1, psi.at(r).phi * std::pow(r, k));
      const double Bmax = 2.0 * p.c / (mu * c1 * std::pow(p.D + 1.0, 0.5 * (mu + 2.0)));
      const double B = p.B.value_or(Bmax / safety);
      b.predicates.push_back({"B_below_tail", B, Bmax, false});
      b.spectral = std::move(psi);
      b.role = BarrierRole::supersolution;
      b.alpha = alpha;
      b.amplitude = B;
      b.sign = 1.0;
      b.eta = alpha;
      b.clamp = Barrier::Clamp::max_with;
      b.clamp_D = E;
      echo("l", l);
      echo("alpha", alpha);
      echo("E", E);
      echo("c", p.c);
      echo("c1", c1);
      echo("B", B);
      break;
    }
    case LemmaId::L4_2: {
      double l = 0.0;
      const double alpha = tail_alpha(p, e, &l);
      const double B = p.B.value_or(0.5 * p.D);
      b.predicates.push_back({"B<D", B, p.D, true});
      b.spectral = shape_solution(alpha, p.D, e, p.r_max, p.ode_tol);
      b.role = BarrierRole::subsolution;
      b.alpha = alpha;
      b.amplitude = B;
      b.sign = -1.0;
      b.eta = alpha;
      echo("l", l);
      echo("alpha", alpha);
      echo("B", B);
      break;
    }
    case LemmaId::T12_upper:
    case LemmaId::T12_lower: {
      if (!(p.epsilon > 0.0)) throw PreconditionError("epsilon must be > 0");
      const double alpha = e.alpha_star + p.epsilon;
      const double d = p.D + 1.0;
      SpectralSolution phi = shape_solution(alpha, d, e, 1e15 * std::sqrt(d), p.ode_tol, true);
      if (!phi.first_zero) throw NumericalError("T1.2: no sign change of phi found", phi.r_end);
      const double r0 = *phi.first_zero;
      const double c1 = compute_c1(phi);
      const double c2 = compute_c2(phi, c1);
      const bool upper = lemma == LemmaId::T12_upper;
      const double cap = upper ? c2 : std::min(c2, p.D);
      const double y0 = p.B.value_or(cap / safety);
      b.predicates.push_back({upper ? "(s1)" : "(s1)-lower", y0, cap, !upper});
      b.spectral = std::move(phi);
      b.role = upper ? BarrierRole::supersolution : BarrierRole::subsolution;
      b.alpha = alpha;
      b.amplitude = y0;
      b.sign = upper ? 1.0 : -1.0;
      b.eta = alpha;
      b.r_lo = 1e-6 * r0;
      b.r_hi = r0 * (1.0 - 1e-9);
      echo("alpha", alpha);
      echo("d", d);
      echo("r0", r0);
      echo("c1", c1);
      echo("c2", c2);
      echo("y0", y0);
      break;
    }
  }
  echo("t_lo", b.t_lo);
  echo("t_hi", b.t_hi);
  return b;
}

bool CertificateReport::predicates_hold() const {
  return std::all_of(predicates.begin(), predicates.end(), [](const Predicate& p) { return p.holds(); });
}

CertificateReport certify(const Barrier& b) {
  const std::size_t nr = b.space_nodes;
  const std::size_t nt = b.time_samples;
  if (nr < 2 || nt < 2) throw PreconditionError("certificate grid needs at least two nodes per axis");
  CertificateReport rep;
  rep.lemma = b.lemma;
  rep.role = b.role;
  rep.space_nodes = nr;
  rep.time_samples = nt;
  rep.predicates = b.predicates;
  rep.echo = b.echo;
  {
    std::ostringstream g;
    g.precision(12);
    g << "log r in [" << b.r_lo << ", " << b.r_hi << "] x " << nr << ", t in [" << b.t_lo << ", " << b.t_hi
      << "] x " << nt;
    rep.grid = g.str();
  }

  const auto rs = log_space(b.r_lo, b.r_hi, nr);
  std::vector<ShapeSample> shapes(rs.size());
  for (std::size_t i = 0; i < rs.size(); ++i) shapes[i] = b.shape(rs[i]);
  const double req = b.required_sign();
  rep.margin = std::numeric_limits<double>::infinity();

  for (double t : lin_space(b.t_lo, b.t_hi, nt)) {
    const double y = b.y(t);
    const double yp = b.y_prime(t);
    bool prev_active = false;
    for (std::size_t i = 0; i < rs.size(); ++i) {
      const double r = rs[i];
      const double z = r * r + b.D + y * shapes[i].psi;
      bool active = false;
      switch (b.clamp) {
        case Barrier::Clamp::none: active = z > 0.0; break;
        case Barrier::Clamp::min_with: active = z > r * r + b.clamp_D; break;
        case Barrier::Clamp::max_with: active = z > 0.0 && z < r * r + b.clamp_D; break;
      }
      if (i > 0 && active != prev_active) ++rep.interface_nodes;
      prev_active = active;
      if (!active) continue;
      ++rep.nodes_checked;
      const ReducedResidual a = reduced_residual(r, y, yp, shapes[i], b.D, b.exps);
      const double signed_res = req * a.value;
      const double scaled = a.scale > 0.0 ? signed_res / a.scale : 0.0;
      if (scaled < rep.margin) {
        rep.margin = scaled;
        rep.worst = CertificateViolation{r, t, a.value, a.scale};
      }
      if (signed_res < -certificate_tolerance * a.scale) rep.violations.push_back({r, t, a.value, a.scale});
    }
  }
  if (rep.nodes_checked == 0) rep.margin = 0.0;
  return rep;
}

CertificateReport certify(LemmaId lemma, const BarrierParams& params, const ExponentSet& exps, bool strict) {
  Barrier b = build_barrier(lemma, params, exps);
  if (strict) {
    if (auto bad = b.first_failed_predicate()) {
      for (const auto& p : b.predicates) {
        if (p.name == *bad) {
          throw PreconditionError(to_string(lemma) + ": parameter inequality " + p.name + " fails (" + fmt(p.lhs) +
                                  (p.strict ? " >= " : " > ") + fmt(p.rhs) + ")");
        }
      }
    }
  }
  return certify(b);
}

double compute_c1(const SpectralSolution& sol) {
  if (!sol.first_zero) throw PreconditionError("compute_c1 requires a solution stopped at its first zero");
  const double r0 = *sol.first_zero;
  const SpectralProblem& p = sol.problem();
  auto neg_lap = [&](double r) {
    const PhiSample s = sol.at(r);
    return -p.laplacian(r, s.phi, s.dphi);
  };
  const auto rs = log_space(1e-6 * r0, r0 * (1.0 - 1e-12), 2001);
  std::size_t best = 0;
  std::vector<double> g(rs.size());
  for (std::size_t i = 0; i < rs.size(); ++i) {
    g[i] = neg_lap(rs[i]);
    if (g[i] < g[best]) best = i;
  }
  const double lo = rs[best == 0 ? 0 : best - 1];
  const double hi = rs[std::min(best + 1, rs.size() - 1)];
  const auto [r_min, v_min] = boost::math::tools::brent_find_minima(neg_lap, lo, hi, 40);
  (void)r_min;
  const double c1 = std::min(v_min, g[best]);
  if (!(c1 > 0.0)) throw NumericalError("compute_c1: phi_rr + (n-1)/r phi_r is not negative on (0, r0)", r0);
  return c1;
}

double compute_c2(const SpectralSolution& sol, double c1) {
  if (!(c1 > 0.0)) throw PreconditionError("compute_c2 requires c1 > 0 (got c1=" + fmt(c1) + ")");
  const SpectralProblem& p = sol.problem();
  const double mu = p.exps.mu;
  double sup = 0.0;
  if (sol.has_dense_output() && sol.first_zero) {
    const double r0 = *sol.first_zero;
    auto neg_f = [&](double r) {
      const PhiSample s = sol.at(r);
      return -(s.phi * std::abs(p.laplacian(r, s.phi, s.dphi)) + 0.5 * mu * s.dphi * s.dphi);
    };
    const auto rs = log_space(1e-6 * r0, r0 * (1.0 - 1e-12), 2001);
    std::size_t best = 0;
    std::vector<double> g(rs.size());
    for (std::size_t i = 0; i < rs.size(); ++i) {
      g[i] = neg_f(rs[i]);
      if (g[i] < g[best]) best = i;
    }
    const double lo = rs[best == 0 ? 0 : best - 1];
    const double hi = rs[std::min(best + 1, rs.size() - 1)];
    const auto res = boost::math::tools::brent_find_minima(neg_f, lo, hi, 40);
    sup = -std::min(res.second, g[best]);
  } else {
    for (std::size_t i = 0; i < sol.r_nodes.size(); ++i) {
      const double r = sol.r_nodes[i];
      if (!(r > 0.0)) continue;
      const double lap = p.laplacian(r, sol.phi[i], sol.dphi[i]);
      sup = std::max(sup, sol.phi[i] * std::abs(lap) + 0.5 * mu * sol.dphi[i] * sol.dphi[i]);
    }
  }
  if (!(sup > 0.0)) throw PreconditionError("compute_c2: supremum of phi|lap| + (mu/2) phi_r^2 vanishes");
  return c1 / sup;
}

}  // namespace fdlab
