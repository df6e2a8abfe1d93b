// Command line front end for the fast-diffusion rate lab.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fdlab/commands.hpp"
#include "fdlab/config.hpp"

namespace {

struct Invocation {
  std::string config_path;
  std::vector<std::string> assignments;
  unsigned threads = 0;
};

fdlab::RunConfig assemble(const Invocation& inv) {
  fdlab::RunConfig cfg = inv.config_path.empty() ? fdlab::RunConfig{} : fdlab::RunConfig::load(inv.config_path);
  for (const auto& a : inv.assignments) cfg.set(a);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fdlab: convergence rates to Barenblatt profiles for radial fast diffusion"};
  app.set_version_flag("--version", std::string(FDLAB_VERSION));
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"exponents", "print the exponent set for (n, m)"},
      {"phi", "integrate the radial spectral ODE; CSV r,phi,dphi"},
      {"barrier-check", "certify one barrier construction (lemma=L3.1 ... T1.2-lower)"},
      {"evolve", "run the rescaled PDE and emit snapshots"},
      {"rate-sweep", "fit decay rates over l_values (or the gaussian ceiling runs)"},
      {"figure1", "CSV m,l_star,mu_plus_2"},
      {"figure2", "CSV l,rate"},
  };

  Invocation inv;
  std::string output_flag;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config,-c", inv.config_path, "key=value config file")->check(CLI::ExistingFile);
    sub->add_option("--output,-o", output_flag, "write the primary output here instead of stdout");
    sub->add_option("--threads,-j", inv.threads, "worker threads for rate-sweep (0 = all cores)");
    sub->add_option("pairs", inv.assignments, "key=value overrides");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : fdlab::exit_precondition;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    const fdlab::RunConfig cfg = assemble(inv);
    std::string path = output_flag.empty() ? cfg.text_or("output_path", "") : output_flag;
    if (path.empty()) return fdlab::run_command(name, cfg, std::cout, std::cerr, inv.threads);
    std::ofstream file(path, std::ios::binary);
    if (!file) {
      std::cerr << "error: cannot open " << path << " for writing\n";
      return fdlab::exit_precondition;
    }
    const int code = fdlab::run_command(name, cfg, file, std::cout, inv.threads);
    return code;
  } catch (...) {
    return fdlab::exit_code_for(std::current_exception(), std::cerr);
  }
}
