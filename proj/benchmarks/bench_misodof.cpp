#include <benchmark/benchmark.h>

#include "misodof/dof_geometry.hpp"
#include "misodof/rate_evaluator.hpp"

using namespace misodof;

static void BM_DofRegion(benchmark::State& state) {
  const CsitQuality q(0.3, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(dof_region(q));
}
BENCHMARK(BM_DofRegion);

static void BM_SampleChannel(benchmark::State& state) {
  const auto snr = SnrPoint::from_db(100, CsitQuality(0.3, 0.5));
  Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(sample_channel(snr, rng));
}
BENCHMARK(BM_SampleChannel);

static void BM_LogDet(benchmark::State& state) {
  const std::vector<Complex> a{{0.3, -1.2}, {2.0, 0.5}, {-0.7, 0.1}, {0.4, 0.9}};
  for (auto _ : state) benchmark::DoNotOptimize(log2_det_identity_plus_gram(a, 2, 2));
}
BENCHMARK(BM_LogDet);

// Arg: trials. One case-ii evaluation at 100 dB with 50 cycles.
static void BM_EvaluateCaseII(benchmark::State& state) {
  const auto plan = build_case_ii(CsitQuality(0.3, 0.5), 50);
  const auto snr = SnrPoint::from_db(100, plan.quality);
  MonteCarloOptions o;
  o.n_trials = static_cast<std::size_t>(state.range(0));
  o.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_plan(plan, snr, o));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EvaluateCaseII)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);

static void BM_EstimateDof(benchmark::State& state) {
  const auto plan = build_case_i(CsitQuality(0.2, 0.8), 50);
  std::vector<SnrPoint> grid;
  for (double db : {60.0, 80.0, 100.0, 120.0}) grid.push_back(SnrPoint::from_db(db, plan.quality));
  MonteCarloOptions o;
  o.n_trials = 200;
  for (auto _ : state) benchmark::DoNotOptimize(estimate_dof(plan, grid, o));
}
BENCHMARK(BM_EstimateDof)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
