#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fdlab/exponents.hpp"
#include "fdlab/spectral.hpp"

namespace fdlab {

/// Space-time field w(r, t) with its analytic time derivative.
struct SpaceTimeField {
  std::function<double(double r, double t)> value;
  std::function<double(double r, double t)> dt;
};

/// P w = w_t - ((w^{m-1} w_r)_r + (n-1)/r w^{m-1} w_r) - mu r w_r - mu n w at
/// each node, with w_r and w_rr from centered differences of spacing h.
/// Throws PreconditionError on r - h <= 0 or a nonpositive sample of w.
std::vector<double> apply_P(const SpaceTimeField& w, std::span<const double> r, double t, double h,
                            const ExponentSet& exps);

/// Shape samples psi, psi_r and psi_rr + (n-1)/r psi_r.
struct ShapeSample {
  double psi = 0.0;
  double psi_r = 0.0;
  double lap = 0.0;
};

/// The reduced operator
///   A_D[y] psi = (r^2+D) lap - mu r psi_r - (y'/y) psi - y (-psi lap + (mu/2) psi_r^2)
/// and the largest magnitude among its additive terms.
struct ReducedResidual {
  double value = 0.0;
  double scale = 0.0;
};

ReducedResidual reduced_residual(double r, double y, double y_prime, const ShapeSample& s, double D,
                                 const ExponentSet& exps);

/// Field version with psi_rr given directly. Rejects y = 0 and r <= 0.
std::vector<double> A_D_residual(double y, double y_prime, std::span<const double> r, std::span<const double> psi,
                                 std::span<const double> psi_r, std::span<const double> psi_rr, double D,
                                 const ExponentSet& exps);

/// (mu/2) y (r^2+D+y psi)^{-(mu+2)/2} A_D[y] psi, the closed form of P applied
/// to (r^2+D+y psi)^{-mu/2}.
double identity_rhs(double r, double y, double y_prime, const ShapeSample& s, double D, const ExponentSet& exps);

enum class LemmaId { L3_1, L3_2, L3_3, L3_4, L3_5, L4_1, L4_2, T12_upper, T12_lower };
enum class BarrierRole { supersolution, subsolution };

std::string to_string(LemmaId id);
std::optional<LemmaId> parse_lemma_id(std::string_view text);
std::string to_string(BarrierRole role);

/// Named inequality on the barrier parameters, lhs <= rhs (or lhs < rhs).
struct Predicate {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool strict = false;
  bool holds() const { return strict ? lhs < rhs : lhs <= rhs; }
};

/// Inputs common to all barrier families. Unset optionals are derived from
/// the stated inequalities with a 10% safety factor.
struct BarrierParams {
  double D = 1.0;
  std::optional<double> delta;  // inner profile V_delta (L3.x)
  std::optional<double> E;      // outer profile V_E (L4.1)
  std::optional<double> l;      // data tail exponent; alpha = (l-mu-2)(n-l)
  std::optional<double> alpha;  // overrides l where the family allows it
  std::optional<double> eta;    // L3.1 amplitude decay rate
  std::optional<double> B;      // amplitude
  double c = 0.5;               // data tail amplitude c r^{-l}
  double t0 = 0.0;              // L3.4 start time
  std::optional<double> c1;     // L3.4 tail constant at t0 (default c)
  std::optional<double> c2;     // L3.5 data floor on [0, r0]
  double epsilon = 0.1;         // T1.2: alpha = alpha_star + epsilon
  double r_min = 1e-3;
  double r_max = 1e4;
  double t_span = 20.0;
  std::size_t space_nodes = 2000;
  std::size_t time_samples = 41;
  double ode_tol = 1e-11;
};

/// One member of a barrier family:
///   w = (r^2 + D + y(t) psi(r))^{-mu/2},  y(t) = sign B exp(-eta (t - t_lo)),
/// optionally clamped by min/max against V_clamp.
class Barrier {
 public:
  enum class Clamp { none, min_with, max_with };

  LemmaId lemma = LemmaId::L3_1;
  BarrierRole role = BarrierRole::supersolution;
  ExponentSet exps;
  double D = 1.0;
  double alpha = 0.0;
  double amplitude = 0.0;  // B > 0
  double sign = -1.0;      // sign of y
  double eta = 0.0;
  Clamp clamp = Clamp::none;
  double clamp_D = 0.0;
  double r_lo = 0.0;
  double r_hi = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  std::size_t space_nodes = 2000;
  std::size_t time_samples = 41;
  std::vector<Predicate> predicates;
  std::vector<std::pair<std::string, double>> echo;

  /// Power-law shape r^{-power_k} when no spectral shape is attached.
  double power_k = 0.0;
  std::optional<SpectralSolution> spectral;

  double y(double t) const;
  double y_prime(double t) const { return -eta * y(t); }
  ShapeSample shape(double r) const;
  /// r^2 + D + y psi.
  double pressure(double r, double t) const;
  /// Unclamped smooth branch; +infinity where the pressure is nonpositive.
  double smooth_value(double r, double t) const;
  double value(double r, double t) const;
  /// The smooth branch as a space-time field with analytic w_t. The field
  /// refers to this barrier and must not outlive it.
  SpaceTimeField smooth_field() const;
  /// True where the smooth branch is the active one.
  bool in_active_set(double r, double t) const;
  /// Sign that A_D must carry on the active set (+1: A >= 0, -1: A <= 0).
  double required_sign() const;
  bool predicates_hold() const;
  std::optional<std::string> first_failed_predicate() const;
};

Barrier build_barrier(LemmaId lemma, const BarrierParams& params, const ExponentSet& exps);

struct CertificateViolation {
  double r = 0.0;
  double t = 0.0;
  double residual = 0.0;
  double scale = 0.0;
};

struct CertificateReport {
  LemmaId lemma = LemmaId::L3_1;
  BarrierRole role = BarrierRole::supersolution;
  std::string grid;
  std::size_t space_nodes = 0;
  std::size_t time_samples = 0;
  std::size_t nodes_checked = 0;      // (r, t) pairs in the active set
  std::size_t interface_nodes = 0;    // sign changes of the active set along r
  double margin = 0.0;                // min over checked nodes of sign * A / scale
  std::optional<CertificateViolation> worst;
  std::vector<CertificateViolation> violations;
  std::vector<Predicate> predicates;
  std::vector<std::pair<std::string, double>> echo;

  bool passed() const { return violations.empty(); }
  bool predicates_hold() const;
};

/// Sign tolerance: a node violates only when sign * A < -1e-10 * scale.
inline constexpr double certificate_tolerance = 1e-10;

CertificateReport certify(const Barrier& barrier);
/// Builds the barrier and certifies it. With strict = true a failed
/// predicate raises PreconditionError naming the inequality.
CertificateReport certify(LemmaId lemma, const BarrierParams& params, const ExponentSet& exps, bool strict = false);

/// min over (0, r0) of -(phi_rr + (n-1)/r phi_r) for a solution stopped at
/// its first zero r0. Grid search refined with Brent's method.
double compute_c1(const SpectralSolution& sol);
/// c1 / sup over (0, r0) of {phi |lap| + (mu/2) phi_r^2}. Rejects c1 <= 0 and
/// a vanishing supremum. Works on raw samples when no dense output exists.
double compute_c2(const SpectralSolution& sol, double c1);

}  // namespace fdlab
