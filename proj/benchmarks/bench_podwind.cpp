#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "podwind/pod.hpp"
#include "podwind/spectral.hpp"
#include "podwind/srm.hpp"
#include "podwind/synthetic.hpp"

namespace {

using namespace podwind;

SyntheticSpec floors(std::size_t n) {
  SyntheticSpec s;
  s.n_floors = n;
  return s;
}

// Arg: floors (N = 3 x floors), 201 lines on the 4-s grid.
void BM_Decompose(benchmark::State& state) {
  const CpsdMatrix s = analytic_cpsd(floors(static_cast<std::size_t>(state.range(0))), 4.0);
  for (auto _ : state) benchmark::DoNotOptimize(decompose(s));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.n_lines()));
}
BENCHMARK(BM_Decompose)->Arg(1)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

// Arg: components; one 32-s record at 625 Hz, 4-s Hann segments, 50% overlap.
void BM_Welch(benchmark::State& state) {
  const auto n = state.range(0);
  std::mt19937_64 g(1);
  std::normal_distribution<double> n01;
  RecordSet rs;
  rs.components.resize(20000, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < rs.components.rows(); ++i) rs.components(i, j) = n01(g);
  rs.labels = generic_labels(static_cast<std::size_t>(n));
  rs.sample_rate = 625.0;
  separate_mean(rs);
  const WelchConfig cfg = WelchConfig::from_seconds(625.0, 4.0, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(welch_cpsd(rs, cfg));
}
BENCHMARK(BM_Welch)->Arg(3)->Arg(12)->Arg(48)->Unit(benchmark::kMillisecond);

// Args: floors, modes (0: all). One 4-s realization with 2500 steps.
void BM_Realization(benchmark::State& state) {
  const CpsdMatrix s = analytic_cpsd(floors(static_cast<std::size_t>(state.range(0))), 4.0);
  SimulationPlan plan;
  plan.modes = std::make_shared<const SpectralModes>(decompose(s));
  plan.dt_s = 1.0 / 625.0;
  const Synthesizer synth(plan);
  const auto modes = static_cast<std::size_t>(state.range(1));
  std::uint64_t r = 0;
  for (auto _ : state) benchmark::DoNotOptimize(modes ? synth.fluctuation(r++, modes) : synth.fluctuation(r++));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Realization)->Args({4, 0})->Args({4, 3})->Args({16, 0})->Unit(benchmark::kMicrosecond);

// Same, forcing the direct cosine sum.
void BM_RealizationDirect(benchmark::State& state) {
  const CpsdMatrix s = analytic_cpsd(floors(1), 4.0);
  SimulationPlan plan;
  plan.modes = std::make_shared<const SpectralModes>(decompose(s));
  plan.dt_s = 1.0 / 625.0;
  const Synthesizer synth(plan);
  std::uint64_t r = 0;
  for (auto _ : state) benchmark::DoNotOptimize(synth.fluctuation_direct(r++, 3));
}
BENCHMARK(BM_RealizationDirect)->Unit(benchmark::kMillisecond);

// Args: realizations, threads. Full ensemble scoring against the target.
void BM_SimulateBatch(benchmark::State& state) {
  const CpsdMatrix s = analytic_cpsd(floors(4), 4.0);
  SimulationPlan plan;
  plan.modes = std::make_shared<const SpectralModes>(decompose(s));
  plan.dt_s = 1.0 / 625.0;
  plan.n_realizations = static_cast<std::size_t>(state.range(0));
  BatchOptions opt;
  opt.threads = static_cast<std::size_t>(state.range(1));
  opt.n_lines = s.n_lines();
  opt.target = EnsembleAccumulator::Target{moments(s, 50.0), 50.0};
  for (auto _ : state) benchmark::DoNotOptimize(simulate_batch(plan, opt));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateBatch)->Args({256, 1})->Args({256, 4})->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
