#include "fdlab/commands.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "fdlab/errors.hpp"
#include "fdlab/fit.hpp"
#include "fdlab/report_io.hpp"
#include "fdlab/spectral.hpp"

namespace fdlab {
namespace {

InitialCase parse_case(const std::string& text) {
  if (text == "i") return InitialCase::case_i;
  if (text == "ii") return InitialCase::case_ii;
  if (text == "iii") return InitialCase::case_iii;
  if (text == "gaussian") return InitialCase::gaussian;
  throw PreconditionError("case must be one of i, ii, iii, gaussian (got '" + text + "')");
}

DistanceKind default_measure(InitialCase c, double amplitude) {
  switch (c) {
    case InitialCase::case_i: return DistanceKind::two_sided;
    case InitialCase::case_ii: return DistanceKind::below;
    case InitialCase::case_iii: return DistanceKind::above;
    case InitialCase::gaussian: return amplitude < 0.0 ? DistanceKind::below : DistanceKind::above;
  }
  return DistanceKind::two_sided;
}

DistanceKind parse_measure(const std::string& text) {
  if (text == "two_sided") return DistanceKind::two_sided;
  if (text == "above") return DistanceKind::above;
  if (text == "below") return DistanceKind::below;
  throw PreconditionError("measure must be two_sided, above or below (got '" + text + "')");
}

int cmd_exponents(const RunConfig& cfg, std::ostream& out) {
  out << exponents_record(exponents_from(cfg));
  return exit_pass;
}

int cmd_phi(const RunConfig& cfg, std::ostream& out) {
  const ExponentSet e = exponents_from(cfg);
  SpectralProblem p;
  p.alpha = cfg.number("alpha");
  p.d = cfg.number_or("d", 1.0);
  p.exps = e;
  p.validate();
  const double r_max = cfg.number_or("r_max", 1e6);
  const double tol = cfg.number_or("tol", 1e-10);
  const auto points = static_cast<std::size_t>(cfg.integer_or("points", 121));
  if (points < 2) throw PreconditionError("points must be >= 2");
  IntegrateOptions opt;
  opt.output_radii = log_space(1e-3 * std::sqrt(p.d), r_max, points);
  opt.stop_at_zero = true;
  const SpectralSolution sol = integrate_phi(p, r_max, tol, opt);
  write_phi_csv(out, make_manifest("phi", cfg), sol);
  return exit_pass;
}

int cmd_barrier_check(const RunConfig& cfg, std::ostream& out) {
  const ExponentSet e = exponents_from(cfg);
  const std::string& id = cfg.text("lemma");
  const auto lemma = parse_lemma_id(id);
  if (!lemma) throw PreconditionError("unknown lemma id '" + id + "'");
  const CertificateReport rep = certify(*lemma, barrier_params_from_config(cfg), e);
  out << make_manifest("barrier-check", cfg).header();
  out << certificate_record(rep);
  return rep.passed() && rep.predicates_hold() ? exit_pass : exit_check_failed;
}

int cmd_evolve(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  const ExponentSet e = exponents_from(cfg);
  const InitialDataSpec spec = initial_from_config(cfg);
  const SolverConfig sc = solver_from_config(cfg, spec, e);
  const double t_end = cfg.number_or("t_end", 10.0);
  const auto points = static_cast<std::size_t>(cfg.integer_or("points", 5));
  if (!(t_end > 0.0)) throw PreconditionError("t_end must be > 0");
  if (points < 1) throw PreconditionError("points must be >= 1");
  // Snapshots at t = 0 and `points` evenly spaced times up to t_end.
  std::vector<State> snaps;
  std::size_t next = 0;
  auto want = [&](double t) {
    const double target = t_end * static_cast<double>(next) / static_cast<double>(points);
    return std::abs(t - target) <= 0.5 * sc.cadence;
  };
  Solver solver(sc, e);
  State s0 = build_initial(spec, sc.grid, e);
  snaps.push_back(s0);
  ++next;
  const EvolveResult res = evolve(std::move(s0), solver, t_end, [&](const State& s) {
    if (next <= points && want(s.t)) {
      snaps.push_back(s);
      ++next;
    }
  });
  const RunManifest manifest = make_manifest("evolve", cfg);
  write_snapshots(out, manifest, sc.grid, e, snaps);
  const auto& last = res.samples.back().distance;
  Record r("evolve");
  r.add("run_id", manifest.run_id).add("t_end", res.final_state.t).add("steps", res.steps);
  r.add("rejected", res.rejected).add("newton_iterations", res.newton_iterations);
  r.add("mmatrix_violations", res.mmatrix_violations).add("upwind_cells", res.upwind_cells).add("sup", last.sup).add("tail_bound", last.tail_bound);
  log << r.str();
  return exit_pass;
}

bool within_target(const RateReport& r, const ExponentSet& e) {
  if (r.ceiling) return r.fitted_rate <= *r.ceiling;
  if (!r.rel_err) return false;
  // Near l_star the fitted rate may carry polynomial corrections.
  const double tol = std::abs(r.l - e.l_star) < 0.25 ? 0.15 : 0.10;
  return *r.rel_err < tol;
}

int cmd_rate_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& log, unsigned threads) {
  const ExponentSet e = exponents_from(cfg);
  const auto plans = plans_from_config(cfg);
  const auto reports = run_sweep(plans, threads);
  write_rate_table(out, make_manifest("rate-sweep", cfg), reports);
  bool ok = true;
  for (const auto& r : reports) {
    log << rate_record(r);
    ok = ok && !r.inconclusive && within_target(r, e) && r.certificate_passed;
  }
  return ok ? exit_pass : exit_check_failed;
}

int cmd_figure1(const RunConfig& cfg, std::ostream& out) {
  const std::int64_t n = cfg.integer("n");
  if (n < 3) throw PreconditionError("n must be > 2 (got n=" + std::to_string(n) + ")");
  const double m_low = cfg.number_or("m_low", -1.0);
  const auto points = static_cast<std::size_t>(cfg.integer_or("points", 60));
  write_figure1(out, make_manifest("figure1", cfg), static_cast<int>(n), m_low, points);
  return exit_pass;
}

int cmd_figure2(const RunConfig& cfg, std::ostream& out) {
  const ExponentSet e = exponents_from(cfg);
  const double lo = cfg.number_or("l_lo", e.l_min() + 0.1);
  const double hi = cfg.number_or("l_hi", e.l_star);
  const auto points = static_cast<std::size_t>(cfg.integer_or("points", 19));
  if (!(lo > e.l_min() && hi <= e.l_star && lo < hi)) {
    throw PreconditionError("figure2 needs mu+2 < l_lo < l_hi <= l_star");
  }
  if (points < 2) throw PreconditionError("points must be >= 2");
  const auto grid = lin_space(lo, hi, points);
  write_figure2(out, make_manifest("figure2", cfg), e, figure2_sweep(e, grid));
  return exit_pass;
}

}  // namespace

InitialDataSpec initial_from_config(const RunConfig& cfg) {
  InitialDataSpec s;
  s.kind = parse_case(cfg.text_or("case", "i"));
  s.D = cfg.number("D");
  s.delta = cfg.number_or("delta", 0.5 * s.D);
  // V_{2D}/2 caps case ii data, which rules out c = 0.5 near r = 1 when D = 1.
  s.c = cfg.number_or("c", s.kind == InitialCase::case_ii ? 0.25 : 0.5);
  s.l = cfg.number_or("l", 4.5);
  s.amplitude = cfg.number_or("amplitude", -0.5);
  return s;
}

SolverConfig solver_from_config(const RunConfig& cfg, const InitialDataSpec& spec, const ExponentSet& e) {
  const auto N = cfg.integer_or("grid_n", 2000);
  if (N < 2) throw PreconditionError("grid_n must be >= 2");
  SolverConfig sc = default_solver_config(spec, e, static_cast<std::size_t>(N), cfg.number_or("stretch", 1.004),
                                          cfg.number_or("r_max", 1e3));
  const std::string mode = cfg.text_or("boundary_mode", "robin");
  if (mode == "robin") {
    sc.boundary = BoundaryMode::robin;
  } else if (mode == "dirichlet") {
    sc.boundary = BoundaryMode::dirichlet;
  } else {
    throw PreconditionError("boundary_mode must be robin or dirichlet (got '" + mode + "')");
  }
  if (cfg.has("robin_k")) sc.robin_k = cfg.number("robin_k");
  if (cfg.has("cadence")) sc.cadence = cfg.number("cadence");
  return sc;
}

BarrierParams barrier_params_from_config(const RunConfig& cfg) {
  BarrierParams p;
  p.D = cfg.number_or("D", 1.0);
  p.delta = cfg.number_opt("delta");
  p.E = cfg.number_opt("E");
  p.l = cfg.number_opt("l");
  p.alpha = cfg.number_opt("alpha");
  p.eta = cfg.number_opt("eta");
  p.B = cfg.number_opt("B");
  p.c = cfg.number_or("c", p.c);
  p.t0 = cfg.number_or("t0", p.t0);
  p.c2 = cfg.number_opt("c2");
  p.epsilon = cfg.number_or("epsilon", p.epsilon);
  return p;
}

std::vector<ExperimentPlan> plans_from_config(const RunConfig& cfg) {
  const ExponentSet e = exponents_from(cfg);
  const InitialDataSpec base = initial_from_config(cfg);
  const bool sens = cfg.integer_or("sensitivities", 1) != 0;
  std::vector<ExperimentPlan> plans;
  auto make = [&](InitialDataSpec spec, std::string id, double t_end) {
    ExperimentPlan p;
    p.id = std::move(id);
    p.exps = e;
    p.initial = spec;
    p.solver = solver_from_config(cfg, spec, e);
    p.t_end = cfg.number_or("t_end", t_end);
    p.measure = cfg.has("measure") ? parse_measure(cfg.text("measure")) : default_measure(spec.kind, spec.amplitude);
    p.sensitivities = sens;
    return p;
  };
  if (base.kind == InitialCase::gaussian) {
    const std::vector<double> amps = cfg.has("amplitude") ? std::vector<double>{base.amplitude}
                                                          : std::vector<double>{-0.5, 0.5};
    for (std::size_t k = 0; k < amps.size(); ++k) {
      InitialDataSpec s = base;
      s.amplitude = amps[k];
      std::ostringstream id;
      id << "p" << k;
      plans.push_back(make(s, id.str(), 40.0));
    }
    return plans;
  }
  const std::vector<double> ls = cfg.has("l_values") ? cfg.numbers("l_values") : std::vector<double>{base.l};
  for (std::size_t k = 0; k < ls.size(); ++k) {
    InitialDataSpec s = base;
    s.l = ls[k];
    std::ostringstream id;
    id << "p" << (k < 10 ? "0" : "") << k;
    plans.push_back(make(s, id.str(), 30.0));
  }
  return plans;
}

int run_command(std::string_view name, const RunConfig& config, std::ostream& out, std::ostream& log,
                unsigned threads) {
  if (name == "exponents") return cmd_exponents(config, out);
  if (name == "phi") return cmd_phi(config, out);
  if (name == "barrier-check") return cmd_barrier_check(config, out);
  if (name == "evolve") return cmd_evolve(config, out, log);
  if (name == "rate-sweep") return cmd_rate_sweep(config, out, log, threads);
  if (name == "figure1") return cmd_figure1(config, out);
  if (name == "figure2") return cmd_figure2(config, out);
  throw PreconditionError("unknown subcommand '" + std::string(name) + "'");
}

int exit_code_for(std::exception_ptr error, std::ostream& log) {
  try {
    std::rethrow_exception(error);
  } catch (const PreconditionError& e) {
    log << "error: " << e.what() << '\n';
    return exit_precondition;
  } catch (const NumericalError& e) {
    log << "numerical failure: " << e.what() << " (reliable up to " << format_number(e.last_reliable()) << ")\n";
    return exit_numerical;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return exit_numerical;
  }
}

}  // namespace fdlab
