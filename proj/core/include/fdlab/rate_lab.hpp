#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fdlab/barrier.hpp"
#include "fdlab/exponents.hpp"
#include "fdlab/solver.hpp"

namespace fdlab {

/// Which supremum e(t) is fitted.
enum class DistanceKind { two_sided, above, below };

std::string to_string(DistanceKind k);
double distance_of(const Sample& s, DistanceKind k);

struct FitPolicy {
  /// Amplitude band [band_lo, band_hi] * e(0); disabled for ceiling runs.
  bool use_band = true;
  double band_lo = 1e-6;
  double band_hi = 1e-1;
  /// Window opens once the unit-interval running slope changes by less than
  /// this fraction over one unit of time.
  double stabilization = 0.05;
  double min_decades = 2.0;
  /// Values below this multiple of e(0) are ignored (round-off floor).
  double floor = 1e-24;
};

struct RateFit {
  bool ok = false;
  std::string reason;
  double rate = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
  double rms = 0.0;
  double decades = 0.0;
  std::size_t points = 0;
};

/// Least squares of log e(t) on the window selected by the policy.
RateFit fit_decay(std::span<const Sample> samples, DistanceKind kind, const FitPolicy& policy);
/// The same fit on an explicit window [t1, t2].
RateFit fit_window(std::span<const Sample> samples, DistanceKind kind, double t1, double t2);

struct ExperimentPlan {
  std::string id;
  ExponentSet exps;
  InitialDataSpec initial;
  SolverConfig solver;
  double t_end = 30.0;
  FitPolicy fit;
  DistanceKind measure = DistanceKind::two_sided;
  /// Rerun with R_max doubled and with N doubled (g -> sqrt g).
  bool sensitivities = true;
};

/// Solver defaults for a plan: desk grid, Robin exponent matched to the data
/// tail (or to the l_star tail for compactly perturbed data).
SolverConfig default_solver_config(const InitialDataSpec& spec, const ExponentSet& exps, std::size_t N = 2000,
                                   double g = 1.004, double r_max = 1e3);

/// Same stretch, N + round(ln 2 / ln g) nodes: the grid extended to 2 R_max.
RadialGrid doubled_rmax(const RadialGrid& grid);
/// 2N nodes with stretch sqrt(g) over the same R_max.
RadialGrid doubled_n(const RadialGrid& grid);

struct RateReport {
  std::string plan_id;
  std::string initial_case;
  std::string measure;
  double l = 0.0;
  double e0 = 0.0;
  double fitted_rate = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
  double residual = 0.0;
  double decades = 0.0;
  std::optional<double> target_rate;
  std::optional<double> rel_err;
  std::optional<double> rmax_sensitivity;
  std::optional<double> n_sensitivity;
  std::optional<double> shift_sensitivity;
  /// Largest ratio of the analytic tail estimate to the grid supremum inside
  /// the fit window.
  double tail_ratio = 0.0;
  /// Ceiling runs: fit over the amplitude band, reported for comparison.
  std::optional<double> band_rate;
  std::optional<double> ceiling;
  std::string certificate;
  bool certificate_passed = false;
  bool inconclusive = false;
  /// Window shifts of +-20% move the rate by less than 3%.
  bool robust = false;
  std::string note;
  std::size_t steps = 0;

  bool accepted() const { return !inconclusive && robust; }
};

/// Rate run on case i, ii or iii data; the target is (l-mu-2)(n-l).
RateReport run_rate_experiment(const ExperimentPlan& plan);
/// Throws PreconditionError unless theta has one strict sign at every node up
/// to the last node where it is nonzero (the perturbation may underflow
/// beyond that). Returns +1 for data below V_D, -1 for data above.
double require_one_sided(const State& s, const RadialGrid& grid);

/// Strictly one-sided data; asserts fitted <= 1.1 alpha_star via `ceiling`.
RateReport run_ceiling_experiment(const ExperimentPlan& plan);

/// Runs the plans on up to `threads` workers and returns the reports ordered
/// by plan id.
std::vector<RateReport> run_sweep(const std::vector<ExperimentPlan>& plans, unsigned threads = 0);

struct Figure2Row {
  double l = 0.0;
  double rate = 0.0;
  std::optional<double> fitted;
};

/// Exact (l, (l-mu-2)(n-l)) on the given grid, which must lie in (mu+2, l_star].
std::vector<Figure2Row> figure2_sweep(const ExponentSet& exps, std::span<const double> l_grid);

struct EntropySample {
  double t = 0.0;
  double value = 0.0;
  double tail = 0.0;
};

struct EntropyDiagnostic {
  std::vector<EntropySample> samples;
  std::optional<double> fitted_rate;
  bool sandwiched = false;
  bool outside_variational_basin = false;
  std::string note;
};

/// 1/(1-m) \int [w - 1 - (w^m - 1)/m] V_D^m dx with w = v/V_D over the grid
/// plus a power-law tail estimate beyond R_max. Rejects m = 0.
EntropySample entropy_value(const State& s, const RadialGrid& grid, const ExponentSet& exps);

/// Entropy along stored snapshots; `data_l` is the tail exponent of the
/// initial perturbation (flagged when l <= n).
EntropyDiagnostic entropy_diagnostic(std::span<const State> snapshots, const RadialGrid& grid,
                                     const ExponentSet& exps, double data_l);

}  // namespace fdlab
