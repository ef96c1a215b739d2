#include <benchmark/benchmark.h>

#include "steinflow/diagnostics.hpp"
#include "steinflow/kernels.hpp"
#include "steinflow/linalg.hpp"
#include "steinflow/rng.hpp"
#include "steinflow/sampler.hpp"
#include "steinflow/targets.hpp"

namespace {

using namespace steinflow;

Matrix ensemble(Eigen::Index n, Eigen::Index d) {
  InitSpec spec;
  spec.mean = Vector::Constant(d, -1.0);
  spec.stddev = Vector::Constant(d, 1.5);
  spec.seed = 7;
  return sample_init(spec, n);
}

void BM_Gram(benchmark::State& state) {
  const Matrix x = ensemble(state.range(0), 2);
  const KernelSpec k = KernelSpec::gaussian(median_heuristic(x));
  for (auto _ : state) benchmark::DoNotOptimize(gram(k, x));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Gram)->RangeMultiplier(2)->Range(64, 1024)->Complexity(benchmark::oNSquared);

SymMatrix system_for(Eigen::Index n) {
  const Matrix x = ensemble(n, 1);
  SymMatrix a(gram(KernelSpec::gaussian(median_heuristic(x)), x));
  a.scale_and_shift(0.9 / static_cast<double>(n), 0.1);
  return a;
}

void BM_Cholesky(benchmark::State& state) {
  const SymMatrix a = system_for(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(cholesky(a));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Cholesky)->RangeMultiplier(2)->Range(64, 1024)->Complexity(benchmark::oNCubed);

void BM_SolveCg(benchmark::State& state) {
  const SymMatrix a = system_for(state.range(0));
  const Matrix b = Matrix::Ones(state.range(0), 1);
  const SolveConfig cfg = SolveConfig::cg(1e-10, 1000, true);
  for (auto _ : state) benchmark::DoNotOptimize(solve_spd(a, b, cfg));
}
BENCHMARK(BM_SolveCg)->RangeMultiplier(2)->Range(64, 1024);

void BM_Step(benchmark::State& state) {
  const Matrix x = ensemble(state.range(0), 1);
  const double nu = static_cast<double>(state.range(1)) / 10.0;
  const KernelSpec k = KernelSpec::gaussian(median_heuristic(x));
  const ScoreModel target = ScoreModel::bimodal_mixture();
  const EnsembleState s = EnsembleState::from_positions(x);
  const StepSchedule step = StepSchedule::adagrad(3.0);
  for (auto _ : state) benchmark::DoNotOptimize(rsvgd_step(s, k, target, nu, step, SolveConfig::cholesky()));
}
BENCHMARK(BM_Step)->ArgsProduct({{50, 100, 150, 200, 250}, {1, 10}})->ArgNames({"N", "nu_x10"});

void BM_KsdVstat(benchmark::State& state) {
  const Matrix x = ensemble(state.range(0), 2);
  const KernelSpec k = KernelSpec::gaussian(median_heuristic(x));
  const ScoreModel target = ScoreModel::standard_gaussian(2);
  for (auto _ : state) benchmark::DoNotOptimize(ksd_vstat(x, k, target));
}
BENCHMARK(BM_KsdVstat)->RangeMultiplier(2)->Range(64, 512);

void BM_SymEigen(benchmark::State& state) {
  const SymMatrix a = system_for(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sym_eigen(a));
}
BENCHMARK(BM_SymEigen)->Arg(32)->Arg(64)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
