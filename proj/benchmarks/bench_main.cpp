#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "wortsense/frames.hpp"
#include "wortsense/lstmnet.hpp"
#include "wortsense/simkit.hpp"

namespace {

using namespace wortsense;

std::vector<DataFrameWindow> sample_windows(std::size_t count) {
  ProcessConfig config;
  config.duration_steps = 3000;
  config.probe_schedule = default_probe_schedule(config.duration_steps, 3);
  const auto run = simulate_process(config);
  auto windows = build_windows(run, FramesConfig{});
  windows.resize(std::min(count, windows.size()));
  const auto stats = fit_normalizer(windows);
  return apply_normalizer(std::move(windows), stats).windows;
}

void BM_Forward(benchmark::State& state) {
  const auto params = ModelParams::initialized(ModelConfig{}, 0);
  const auto windows = sample_windows(1);
  for (auto _ : state) benchmark::DoNotOptimize(forward(params, windows[0].features).prediction);
}
BENCHMARK(BM_Forward);

void BM_LossAndGradsBatch64(benchmark::State& state) {
  const auto params = ModelParams::initialized(ModelConfig{}, 0);
  const auto windows = sample_windows(64);
  std::vector<std::size_t> indices(windows.size());
  std::iota(indices.begin(), indices.end(), 0);
  const auto threads = static_cast<std::size_t>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(loss_and_grads(params, windows, indices, threads).mse);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(windows.size()));
}
BENCHMARK(BM_LossAndGradsBatch64)->Arg(1)->Arg(2)->Arg(4)->UseRealTime();

void BM_SimulateProcess(benchmark::State& state) {
  ProcessConfig config;
  config.duration_steps = state.range(0);
  config.probe_schedule = default_probe_schedule(config.duration_steps, 1);
  for (auto _ : state) benchmark::DoNotOptimize(simulate_process(config).true_plato.back());
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateProcess)->Arg(10000);

void BM_BuildWindows(benchmark::State& state) {
  ProcessConfig config;
  config.probe_schedule = default_probe_schedule(config.duration_steps, 1);
  const auto run = simulate_process(config);
  for (auto _ : state) benchmark::DoNotOptimize(build_windows(run, FramesConfig{}).size());
}
BENCHMARK(BM_BuildWindows);

}  // namespace
BENCHMARK_MAIN();
