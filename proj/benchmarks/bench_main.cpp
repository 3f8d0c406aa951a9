#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "qquant/competitors.hpp"
#include "qquant/estimator.hpp"
#include "qquant/quantizer.hpp"
#include "qquant/simulation.hpp"

namespace {

std::shared_ptr<const qquant::Dataset> sample(std::size_t n) {
  return std::make_shared<const qquant::Dataset>(qquant::generate(qquant::cubic_beta_model(), n, 42));
}

void BM_ClvqTrain(benchmark::State& state) {
  const auto data = sample(static_cast<std::size_t>(state.range(0)));
  const auto cfg = qquant::ClvqConfig::with_defaults(static_cast<std::size_t>(state.range(1)), 7);
  for (auto _ : state) benchmark::DoNotOptimize(qquant::clvq_train(data->x(), cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ClvqTrain)->Args({1000, 10})->Args({10000, 25})->Args({100000, 50})->Unit(benchmark::kMillisecond);

void BM_Predict(benchmark::State& state) {
  const auto data = sample(10000);
  const auto est = qquant::fit(data, qquant::ClvqConfig::with_defaults(static_cast<std::size_t>(state.range(0)), 7));
  const qquant::QuantileLevel alpha(0.5);
  std::vector<double> x{0.0};
  for (auto _ : state) {
    x[0] = x[0] > 2.9 ? -2.9 : x[0] + 0.01;
    benchmark::DoNotOptimize(qquant::predict(est, x, alpha));
  }
}
BENCHMARK(BM_Predict)->Arg(10)->Arg(50)->Arg(200);

void BM_PredictBootstrap(benchmark::State& state) {
  const auto data = sample(2000);
  const auto est = qquant::fit_bootstrap(data, qquant::ClvqConfig::with_defaults(25, 7),
                                         static_cast<std::size_t>(state.range(0)));
  const qquant::QuantileLevel alpha(0.5);
  const std::vector<double> x{0.3};
  for (auto _ : state) benchmark::DoNotOptimize(qquant::predict_bootstrap(est, x, alpha));
}
BENCHMARK(BM_PredictBootstrap)->Arg(10)->Arg(50);

void BM_LocalLinearFit(benchmark::State& state) {
  const auto data = sample(static_cast<std::size_t>(state.range(0)));
  const qquant::QuantileLevel alpha(0.25);
  for (auto _ : state) benchmark::DoNotOptimize(qquant::local_linear_fit(*data, qquant::KernelConfig{0.3}, 0.5, alpha));
}
BENCHMARK(BM_LocalLinearFit)->Arg(300)->Arg(3000)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
