#include <doctest.h>

#include <sstream>

#include "fdlab/commands.hpp"
#include "fdlab/config.hpp"
#include "fdlab/errors.hpp"
#include "fdlab/report_io.hpp"

using namespace fdlab;

TEST_CASE("config parsing") {
  const RunConfig c = RunConfig::parse("# sweep\nn = 6\nm=1/4   # exact\n\nD=1.0\nl_values=4.2, 4.5,4.8\n");
  CHECK(c.integer("n") == 6);
  CHECK(c.number("m") == 0.25);
  CHECK(c.number("D") == 1.0);
  CHECK(c.numbers("l_values") == std::vector<double>{4.2, 4.5, 4.8});
  CHECK_FALSE(c.has("delta"));
  CHECK(c.number_or("delta", 0.5) == 0.5);
  CHECK_THROWS_AS(c.number("delta"), PreconditionError);
}

TEST_CASE("config rejects what it does not understand") {
  CHECK_THROWS_AS(RunConfig::parse("n=6\ncolour=red\n"), PreconditionError);
  CHECK_THROWS_AS(RunConfig::parse("n=6\nn=7\n"), PreconditionError);
  CHECK_THROWS_AS(RunConfig::parse("n 6\n"), PreconditionError);
  CHECK_THROWS_AS(RunConfig::parse("D=\n"), PreconditionError);
  const RunConfig c = RunConfig::parse("D=1,5\nn=six\n");
  CHECK_THROWS_AS(c.number("D"), PreconditionError);
  CHECK_THROWS_AS(c.integer("n"), PreconditionError);
}

TEST_CASE("numbers parse independently of locale conventions") {
  CHECK(parse_number("0.25") == 0.25);
  CHECK(parse_number("+1e-3") == 1e-3);
  CHECK(parse_number(" 2 ") == 2.0);
  CHECK_FALSE(parse_number("0,25"));
  CHECK_FALSE(parse_number("1.5x"));
  CHECK_FALSE(parse_number(""));
}

TEST_CASE("run id depends only on the canonical content") {
  const RunConfig a = RunConfig::parse("n=6\nm=0.25\nD=1.0\n");
  const RunConfig b = RunConfig::parse("D=1\n# same run\nm=1/4\nn=6\noutput_path=/tmp/x.csv\n");
  CHECK(a.canonical() == b.canonical());
  CHECK(a.run_id() == b.run_id());
  CHECK(a.run_id().size() == 16);
  const RunConfig c = RunConfig::parse("n=6\nm=0.25\nD=2\n");
  CHECK(a.run_id() != c.run_id());
}

TEST_CASE("number formatting") {
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(5.0) == "5");
  CHECK(format_number(0.36) == "0.36");
  CHECK(format_number(-2.5e-20) == "-2.5e-20");
  CHECK(format_number(0.0) == "0");
  CHECK(shortest_number(0.1) == "0.1");
}

TEST_CASE("records are space-separated key=value pairs") {
  Record r("demo");
  r.add("x", 1.5).add("name", "two words").add("ok", true).add("count", std::size_t{3});
  CHECK(r.str() == "record=demo x=1.5 name=\"two words\" ok=true count=3\n");
}

TEST_CASE("figure emitters") {
  const RunConfig cfg = RunConfig::parse("n=6\nm=0\n");
  const RunManifest man = make_manifest("figure", cfg);
  std::ostringstream f1;
  write_figure1(f1, man, 6, -1.0, 60);
  CHECK(f1.str().find("# run_id=" + cfg.run_id() + "\n") != std::string::npos);
  CHECK(f1.str().find("\nm,l_star,mu_plus_2\n") != std::string::npos);
  CHECK(f1.str().find("\n0,5,4\n") != std::string::npos);
  std::ostringstream f2;
  const ExponentSet e = derive_exponents(6, 0.0);
  const std::vector<double> ls{4.5, 5.0};
  write_figure2(f2, man, e, figure2_sweep(e, ls));
  CHECK(f2.str().find("\nl,rate\n4.5,0.75\n5,1\n# alpha_star=1\n") != std::string::npos);
  CHECK(f2.str().rfind("# fdlab ", 0) == 0);
}

TEST_CASE("exponents command output") {
  std::ostringstream out, log;
  CHECK(run_command("exponents", RunConfig::parse("n=6\nm=0\n"), out, log) == exit_pass);
  CHECK(out.str().find("mu=2 beta=0.25") != std::string::npos);
  CHECK(out.str().find("l_star=5 alpha_star=1") != std::string::npos);
}

TEST_CASE("exit codes follow the error kind") {
  std::ostringstream log;
  CHECK(exit_code_for(std::make_exception_ptr(PreconditionError("bad")), log) == exit_precondition);
  CHECK(exit_code_for(std::make_exception_ptr(NumericalError("stall", 3.0)), log) == exit_numerical);
  std::ostringstream out;
  const RunConfig fail = RunConfig::parse("n=6\nm=0\nD=1\nl=4.5\ndelta=0.9625\nlemma=L3.4\n");
  CHECK(run_command("barrier-check", fail, out, log) == exit_check_failed);
}

TEST_CASE("identical rate sweeps are byte-identical") {
  const RunConfig cfg = RunConfig::parse(
      "n=6\nm=0\nD=1\ndelta=0.5\nc=0.5\nl_values=4.5,4.8\ngrid_n=400\nstretch=1.02\nr_max=100\nt_end=20\n"
      "sensitivities=0\n");
  std::ostringstream a, b, log;
  run_command("rate-sweep", cfg, a, log, 2);
  run_command("rate-sweep", cfg, b, log, 1);
  CHECK(a.str() == b.str());
  CHECK(a.str().find("\nl,target_rate,fitted_rate,rel_err,rmax_sensitivity") != std::string::npos);
}
