// SPDX-License-Identifier: Apache-2.0
//
// Microbenchmarks for the hot paths: counter RNG draws, gradient
// evaluations, single transition-kernel steps, and whole simulated chains.

#include <benchmark/benchmark.h>

#include <memory>

#include <sgmcmc/async_sim.hpp>
#include <sgmcmc/data.hpp>
#include <sgmcmc/model.hpp>
#include <sgmcmc/rng.hpp>
#include <sgmcmc/sampler.hpp>

namespace {

using namespace sgmcmc;

void BM_RngNormal(benchmark::State& state) {
  RngStream rng(1, StreamPurpose::kChainNoise, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rng.normal());
  }
}
BENCHMARK(BM_RngNormal);

void BM_SampleMinibatch(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  RngStream rng(1, StreamPurpose::kMinibatch, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_minibatch(n, n / 2, rng));
  }
}
BENCHMARK(BM_SampleMinibatch)->Arg(10)->Arg(1000);

void BM_GaussianStochasticGradient(benchmark::State& state) {
  const GaussianModel model(
      generate_gaussian_data(0.0, static_cast<std::size_t>(state.range(0)), 42));
  Vector theta(1);
  theta[0] = 0.3;
  RngStream rng(1, StreamPurpose::kMinibatch, 0);
  const auto batch = sample_minibatch(model.data_size(), 10, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(stochastic_gradient(model, theta, batch));
  }
}
BENCHMARK(BM_GaussianStochasticGradient)->Arg(100)->Arg(10000);

void BM_BlrStochasticGradient(benchmark::State& state) {
  const auto data = generate_blr_data(2000, 1000, 123, 14, 0.5, 7);
  const LogisticRegressionModel model(
      std::make_shared<const SparseDataset>(data.train));
  const Vector theta = Vector::Zero(model.dim());
  RngStream rng(1, StreamPurpose::kMinibatch, 0);
  const auto batch = sample_minibatch(model.data_size(), 50, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(stochastic_gradient(model, theta, batch));
  }
}
BENCHMARK(BM_BlrStochasticGradient);

void BM_SgldStep(benchmark::State& state) {
  const GaussianModel model(generate_gaussian_data(0.0, 10, 42));
  SamplerState s = make_initial_state(model, KernelKind::kSgld);
  RngStream noise(1, StreamPurpose::kChainNoise, 0);
  const Vector ghat = full_gradient(model, s.theta);
  for (auto _ : state) {
    s = sgld_step(s, ghat, 0.05 / 11.0, noise);
    benchmark::DoNotOptimize(s.theta);
  }
}
BENCHMARK(BM_SgldStep);

void BM_RunChain(benchmark::State& state) {
  const GaussianModel model(generate_gaussian_data(0.0, 10, 42));
  const TestFunction phi = TestFunction::theta_squared();
  ChainConfig cfg;
  cfg.step_size = 0.05 / 11.0;
  cfg.minibatch = 5;
  cfg.iterations = static_cast<std::uint64_t>(state.range(0));
  cfg.staleness_bound = 8;
  cfg.seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_chain(model, phi, cfg, fixed_delay(8)));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          state.range(0));
}
BENCHMARK(BM_RunChain)->Arg(1000)->Arg(10000);

void BM_RunSingleServer(benchmark::State& state) {
  const GaussianModel model(generate_gaussian_data(0.0, 10, 42));
  const TestFunction phi = TestFunction::theta_squared();
  ChainConfig cfg;
  cfg.step_size = 0.05 / 11.0;
  cfg.minibatch = 5;
  cfg.iterations = 1000;
  const std::size_t w = static_cast<std::size_t>(state.range(0));
  cfg.staleness_bound = w - 1;
  cfg.seed = 1;
  SchedulePolicy policy;
  policy.kind = PolicyKind::kRoundRobin;
  policy.seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_single_server(model, phi, cfg, w, policy));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 1000);
}
BENCHMARK(BM_RunSingleServer)->Arg(1)->Arg(4)->Arg(16);

}  // namespace

BENCHMARK_MAIN();
