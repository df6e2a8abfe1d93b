#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fdlab/exponents.hpp"
#include "fdlab/grid.hpp"

namespace fdlab {

/// Solution of the rescaled equation in the offset variable
///   zeta = v^{-2/mu} - r^2,  stored as theta = zeta - D
/// so that v = V_D is theta = 0 and small deviations keep full precision.
struct State {
  double t = 0.0;
  double D = 1.0;
  std::vector<double> theta;

  double zeta(std::size_t i) const { return D + theta[i]; }
  /// v_i = (r_i^2 + zeta_i)^{-mu/2}.
  std::vector<double> v(const RadialGrid& grid, const ExponentSet& exps) const;
  /// v_i - V_D(r_i) without cancellation.
  std::vector<double> deviation(const RadialGrid& grid, const ExponentSet& exps) const;
};

enum class InitialCase { case_i, case_ii, case_iii, gaussian };

std::string to_string(InitialCase c);

/// Initial data families. For r in [1/2, 1] the tail c r^{-l} is joined to
/// V_D through the C^2 cutoff chi(s) = 10 s^3 - 15 s^4 + 6 s^5, s = 2r - 1.
///   case_i   : v0 = min(V_delta, V_D + c r^{-l} chi)
///   case_ii  : v0 = max(V_D - c r^{-l} chi, V_{2D}/2)
///   case_iii : v0 = V_D + c r^{-l} chi
///   gaussian : v0 = V_D (1 + a exp(-r^2))
struct InitialDataSpec {
  InitialCase kind = InitialCase::case_i;
  double D = 1.0;
  double delta = 0.5;
  double c = 0.5;
  double l = 4.5;
  double amplitude = -0.5;
};

double cutoff_chi(double r);

enum class BoundaryMode { robin, dirichlet };

std::string to_string(BoundaryMode m);

struct SolverConfig {
  RadialGrid grid;
  double dt_initial = 1e-3;
  double dt_max = 1e-2;
  double dt_min = 1e-12;
  double growth_cap = 1.2;
  int newton_target_lo = 3;
  int newton_target_hi = 5;
  int newton_max = 12;
  double newton_tol = 1e-12;
  BoundaryMode boundary = BoundaryMode::robin;
  /// Tail exponent k in r zeta_r = -k (zeta - D) at R_max.
  double robin_k = 0.5;
  /// Spacing of recorded samples in t.
  double cadence = 0.05;
};

struct StepStats {
  double dt = 0.0;
  int newton_iterations = 0;
  /// Off-diagonal Jacobian entries of the wrong sign for an M-matrix.
  std::size_t mmatrix_violations = 0;
  /// Interior cells where the centered gradient was not monotone and the
  /// first-order upwind Hamiltonian was used instead.
  std::size_t upwind_cells = 0;
  std::size_t rejected = 0;
};

/// Builds theta(0) and re-verifies the case inequalities node-wise. Throws
/// PreconditionError naming the violated inequality.
State build_initial(const InitialDataSpec& spec, const RadialGrid& grid, const ExponentSet& exps);

class Solver {
 public:
  Solver(SolverConfig config, ExponentSet exps);

  const SolverConfig& config() const { return config_; }
  const ExponentSet& exps() const { return exps_; }
  double dt() const { return dt_; }

  /// One adaptive backward-Euler step. Newton failures halve dt; throws
  /// NumericalError when dt drops below dt_min.
  StepStats step(State& s);
  /// As step(), with the step length capped at max_dt.
  StepStats step_limited(State& s, double max_dt);
  /// One backward-Euler step of exactly dt. Throws NumericalError if Newton
  /// does not converge.
  StepStats step_fixed(State& s, double dt);

  /// Spatial operator F(theta) of theta_t = F(theta).
  void rhs(const State& s, std::vector<double>& out) const;

 private:
  struct CellTerms {
    double f = 0.0;
    double jm = 0.0;
    double jd = 0.0;
    double jp = 0.0;
    bool upwind = false;
  };
  CellTerms interior(std::size_t i, const std::vector<double>& th, double D) const;
  bool newton(const State& s, double dt, std::vector<double>& theta, StepStats& stats) const;
  void build_stencils();

  SolverConfig config_;
  ExponentSet exps_;
  double dt_;
  // Conservative Laplacian: Lap_i = a_i (th_{i+1} - th_i) - b_i (th_i - th_{i-1}),
  // gradient G_i = p_i th_{i+1} + q_i th_i + s_i th_{i-1}.
  std::vector<double> a_, b_, p_, q_, s_;
  double robin_flux_ = 0.0;
};

struct DistanceReport {
  double sup = 0.0;          // max over nodes of |v - V_D|
  double sup_above = 0.0;    // max over nodes of (v - V_D)_+
  double sup_below = 0.0;    // max over nodes of (V_D - v)_+
  double argmax_r = 0.0;
  double tail_bound = 0.0;   // analytic bound beyond R_max
};

/// Grid supremum of |v - V_D| and the separately reported tail estimate.
DistanceReport sup_distance(const State& s, const RadialGrid& grid, const ExponentSet& exps);

struct Sample {
  double t = 0.0;
  DistanceReport distance;
};

struct EvolveResult {
  State final_state;
  std::vector<Sample> samples;
  std::size_t steps = 0;
  std::size_t rejected = 0;
  std::size_t newton_iterations = 0;
  std::size_t mmatrix_violations = 0;
  std::size_t upwind_cells = 0;
};

/// Advances to t_end recording sup_distance at the configured cadence (the
/// step is shortened to land on every cadence point). The optional callback
/// sees the state at each recorded time.
EvolveResult evolve(State s, Solver& solver, double t_end,
                    const std::function<void(const State&)>& on_sample = {});

}  // namespace fdlab
