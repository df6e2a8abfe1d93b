#include <benchmark/benchmark.h>

#include "fdlab/barrier.hpp"
#include "fdlab/rate_lab.hpp"
#include "fdlab/spectral.hpp"

using namespace fdlab;

namespace {

const ExponentSet kExps = derive_exponents(6, 0.0);

void BM_IntegratePhi(benchmark::State& state) {
  SpectralProblem problem;
  problem.alpha = 0.75;
  problem.d = 1.0;
  problem.exps = kExps;
  const double r_max = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(integrate_phi(problem, r_max, 1e-10));
}
BENCHMARK(BM_IntegratePhi)->Arg(100)->Arg(10000)->Unit(benchmark::kMicrosecond);

void BM_SolverStep(benchmark::State& state) {
  InitialDataSpec spec;
  spec.kind = InitialCase::case_i;
  const SolverConfig cfg = default_solver_config(spec, kExps, static_cast<std::size_t>(state.range(0)));
  Solver solver(cfg, kExps);
  const State initial = build_initial(spec, cfg.grid, kExps);
  for (auto _ : state) {
    State s = initial;
    benchmark::DoNotOptimize(solver.step_fixed(s, 1e-2));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SolverStep)->Arg(2000)->Arg(4000)->Arg(8000)->Complexity()->Unit(benchmark::kMicrosecond);

void BM_Certify(benchmark::State& state) {
  BarrierParams params;
  params.D = 1.0;
  params.delta = 0.5;
  params.l = 4.5;
  const auto lemma = static_cast<LemmaId>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(certify(lemma, params, kExps));
  state.SetLabel(to_string(lemma));
}
BENCHMARK(BM_Certify)
    ->Arg(static_cast<int>(LemmaId::L3_1))
    ->Arg(static_cast<int>(LemmaId::L3_4))
    ->Arg(static_cast<int>(LemmaId::T12_upper))
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
