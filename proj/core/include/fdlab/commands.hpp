#pragma once

#include <ostream>
#include <string_view>
#include <vector>

#include "fdlab/barrier.hpp"
#include "fdlab/config.hpp"
#include "fdlab/rate_lab.hpp"
#include "fdlab/solver.hpp"

namespace fdlab {

/// Process exit codes shared by every subcommand.
enum ExitCode : int {
  exit_pass = 0,
  exit_precondition = 2,
  exit_check_failed = 3,
  exit_numerical = 4,
};

InitialDataSpec initial_from_config(const RunConfig& config);
SolverConfig solver_from_config(const RunConfig& config, const InitialDataSpec& spec, const ExponentSet& exps);
BarrierParams barrier_params_from_config(const RunConfig& config);
/// One plan per entry of l_values (cases i-iii) or per sign of the gaussian
/// amplitude (case=gaussian), ids in sweep order.
std::vector<ExperimentPlan> plans_from_config(const RunConfig& config);

/// Runs one subcommand ("exponents", "phi", "barrier-check", "evolve",
/// "rate-sweep", "figure1", "figure2"), writing its primary output to `out`
/// and progress or summary records to `log`. Exceptions propagate; see
/// exit_code_for().
int run_command(std::string_view name, const RunConfig& config, std::ostream& out, std::ostream& log,
                unsigned threads = 0);

/// Maps the current exception to an exit code and writes its message to `log`.
int exit_code_for(std::exception_ptr error, std::ostream& log);

}  // namespace fdlab
