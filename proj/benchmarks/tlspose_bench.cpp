#include <benchmark/benchmark.h>

#include "tlspose/covariance.hpp"
#include "tlspose/simulate.hpp"
#include "tlspose/solver.hpp"

namespace {

using namespace tlspose;

std::vector<ObservationPair> noisy_draw(int n) {
  const Scenario s = n == 3 ? paper_scenario() : random_scenario(n, 1e-3, 11);
  Rng rng(substream_seed(5, 0));
  return draw_observations(s, rng);
}

void BM_SolvePose(benchmark::State& state) {
  const auto obs = noisy_draw(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_pose(obs));
}
BENCHMARK(BM_SolvePose)->Arg(3)->Arg(10)->Arg(100)->Arg(1000);

void BM_CovarianceReport(benchmark::State& state) {
  const auto obs = noisy_draw(static_cast<int>(state.range(0)));
  const Pose pose = solve_pose(obs).pose;
  for (auto _ : state) benchmark::DoNotOptimize(covariance_report(pose, obs));
}
BENCHMARK(BM_CovarianceReport)->Arg(3)->Arg(10)->Arg(100);

void BM_MonteCarloPaper(benchmark::State& state) {
  const Scenario s = paper_scenario();
  const auto trials = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_monte_carlo(s, trials, 42));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * trials));
}
BENCHMARK(BM_MonteCarloPaper)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
