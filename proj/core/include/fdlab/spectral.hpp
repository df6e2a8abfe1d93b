#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fdlab/exponents.hpp"

namespace fdlab {

/// Radial initial value problem
///   (r^2+d)(phi'' + (n-1)/r phi') - mu r phi' + alpha phi = 0,
///   phi(0) = 1, phi'(0) = 0,
/// whose solution phi^d supplies barrier shapes.
struct SpectralProblem {
  double alpha = 0.0;
  double d = 1.0;
  ExponentSet exps;

  /// Throws PreconditionError unless alpha > 0 and d > 0.
  void validate() const;

  /// phi'' + (n-1)/r phi', read off the ODE.
  double laplacian(double r, double phi, double dphi) const {
    return (exps.mu * r * dphi - alpha * phi) / (r * r + d);
  }
  double second_derivative(double r, double phi, double dphi) const {
    return laplacian(r, phi, dphi) - (exps.n - 1) / r * dphi;
  }
  /// phi''' obtained by differentiating the ODE once.
  double third_derivative(double r, double phi, double dphi) const;
};

/// phi and its derivatives at one radius. `laplacian` is phi'' + (n-1)/r phi'.
struct PhiSample {
  double r = 0.0;
  double phi = 0.0;
  double dphi = 0.0;
  double ddphi = 0.0;
  double laplacian = 0.0;
};

/// Power-law fit phi ~ r^{-exponent} on [r_lo, r_hi].
struct TailFit {
  double exponent = 0.0;
  double r_lo = 0.0;
  double r_hi = 0.0;
  double residual = 0.0;  // rms of the log-log fit
};

struct IntegrateOptions {
  /// Radii (ascending, >= 0) at which the integrator lands exactly and
  /// records phi, phi'. Empty: record every accepted step.
  std::vector<double> output_radii;
  /// Stop at the first sign change of phi.
  bool stop_at_zero = true;
  /// Tail fit window; defaults to the last two decades [r_end/100, r_end].
  std::optional<double> tail_lo;
  std::optional<double> tail_hi;
  /// Cap on the step relative to r; keeps the dense output defect
  /// at the level of the step tolerance.
  double max_relative_step = 0.25;
};

class SpectralSolution {
 public:
  std::vector<double> r_nodes;
  std::vector<double> phi;
  std::vector<double> dphi;
  std::optional<double> first_zero;
  std::optional<TailFit> tail;
  double r_end = 0.0;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;

  const SpectralProblem& problem() const { return problem_; }

  /// Dense output on [0, r_end]. Throws if the solution carries no
  /// interpolant (built from samples) or r is out of range.
  PhiSample at(double r) const;

  /// Residual of the ODE evaluated on the dense interpolant of phi, divided by
  /// the sum of magnitudes of its three terms.
  double scaled_defect(double r) const;

  /// Midpoints of accepted steps; natural check-nodes for scaled_defect().
  std::vector<double> step_midpoints() const;

  bool has_dense_output() const { return !knots_.empty(); }

  /// Wraps externally supplied samples (no dense output). Used to run the
  /// shape checks on arbitrary data.
  static SpectralSolution from_samples(const SpectralProblem& problem, std::vector<double> r,
                                       std::vector<double> phi, std::vector<double> dphi);

 private:
  friend SpectralSolution integrate_phi(const SpectralProblem&, double, double, const IntegrateOptions&);

  struct Knot {
    double r;
    double phi;
    double dphi;
  };

  SpectralProblem problem_;
  double r_start_ = 0.0;
  std::vector<Knot> knots_;
};

/// Adaptive Dormand-Prince 5(4) integration from a series start at
/// r0 = 1e-6 sqrt(d). Requires r_max >= 10 sqrt(d), tol in [1e-12, 1e-4].
/// Throws NumericalError (carrying the last reliable radius) on step-size
/// underflow.
SpectralSolution integrate_phi(const SpectralProblem& problem, double r_max, double tol,
                               const IntegrateOptions& options = {});

/// L psi = (r^2+d)(psi'' + (n-1)/r psi') - mu r psi' evaluated pointwise.
/// Rejects nodes with r <= 0.
std::vector<double> apply_L(std::span<const double> r, std::span<const double> psi,
                            std::span<const double> psi_r, std::span<const double> psi_rr,
                            const SpectralProblem& problem);

enum class ShapeCheck { positivity, monotonicity, laplacian_sign, log_derivative_upper, log_derivative_lower };

std::string to_string(ShapeCheck c);

struct ShapeViolation {
  double r = 0.0;
  ShapeCheck check = ShapeCheck::positivity;
  double value = 0.0;
};

struct ShapeReport {
  std::size_t nodes_checked = 0;
  std::vector<ShapeViolation> violations;
  bool ok() const { return violations.empty(); }
  std::size_t count(ShapeCheck c) const;
  std::size_t nodes_flagged() const;
};

/// Positivity, monotonicity, phi'' + (n-1)/r phi' < 0 and the two-sided bound
/// 0 >= phi'/phi >= -(l(alpha)-mu-2) r/(r^2+d) at every node, with a 1e-8
/// scaled tolerance. Requires alpha in (0, alpha_star).
ShapeReport check_shape_properties(const SpectralSolution& sol, const SpectralProblem& problem);

enum class ComparisonKind { w_minus, w_plus, w_star };

/// Closed-form comparison functions
///   W-(r) = (r^2+d)^{-k/2},  W+(r) = r^{-k} - r^{-j},  W*(r) = r^{-k}.
struct ComparisonFunction {
  ComparisonKind kind = ComparisonKind::w_minus;
  double k = 0.0;
  double j = 0.0;     // W+ only
  double d = 0.0;     // W- only
  double beta = 0.0;  // W+ only: j = l(beta) - mu - 2

  double value(double r) const;
  double deriv(double r) const;
  double second(double r) const;

  /// k = l(alpha) - mu - 2 with alpha in (0, alpha_star].
  static ComparisonFunction w_minus(const SpectralProblem& problem);
  /// Default beta = alpha + 0.05 (alpha_star - alpha). Rejects j >= k + 2.
  static ComparisonFunction w_plus(const SpectralProblem& problem, std::optional<double> beta = std::nullopt);
  /// k = (n - mu - 2)/2.
  static ComparisonFunction w_star(const ExponentSet& exps);
};

struct ComparisonResiduals {
  std::vector<double> r;
  std::vector<double> residual;  // L W + alpha W
  /// W+ only: largest node radius with a non-positive residual; the residual
  /// is positive at every node beyond it.
  std::optional<double> crossover;
};

ComparisonResiduals comparison_residuals(const ComparisonFunction& f, const SpectralProblem& problem,
                                         std::span<const double> radii);

}  // namespace fdlab
