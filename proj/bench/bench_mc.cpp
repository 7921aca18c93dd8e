#include <benchmark/benchmark.h>

#include "shrinkreg/risk.hpp"

namespace {

shrinkreg::DgpConfig bench_config() {
  shrinkreg::DgpConfig config;
  config.n = 100;
  config.m = 1;
  config.k = 10;
  config.params.alpha = 0.3;
  config.params.beta = shrinkreg::Vector::Constant(1, 1.0);
  config.params.gamma = shrinkreg::Vector::Zero(10);
  config.params.sigma2 = 1.0;
  config.covariates.alpha_w = shrinkreg::RowVector::Zero(10);
  config.covariates.beta_w = shrinkreg::Matrix::Zero(1, 10);
  config.covariates.sigma_w = shrinkreg::Matrix::Identity(10, 10);
  config.seed = 7;
  return config;
}

std::vector<shrinkreg::NamedSpec> bench_specs() {
  using shrinkreg::EstimatorKind;
  return {
      {"ols-long", {EstimatorKind::kOlsLong, {}, 1.0, 1.0, {}}},
      {"shrink", {EstimatorKind::kShrink, {}, 1.0, 1.0, {}}},
      {"shrink-pp", {EstimatorKind::kShrinkPositivePart, {}, 1.0, 1.0, {}}},
  };
}

void bm_mc_risk_serial(benchmark::State& state) {
  const auto config = bench_config();
  const auto specs = bench_specs();
  const auto reps = state.range(0);
  for (auto _ : state) {
    auto report = shrinkreg::mc_risk_serial(config, specs, reps);
    benchmark::DoNotOptimize(report.estimators.front().mean_loss);
  }
  state.SetItemsProcessed(state.iterations() * reps);
}

void bm_mc_risk_parallel(benchmark::State& state) {
  const auto config = bench_config();
  const auto specs = bench_specs();
  const auto reps = state.range(0);
  for (auto _ : state) {
    auto report = shrinkreg::mc_risk(config, specs, reps);
    benchmark::DoNotOptimize(report.estimators.front().mean_loss);
  }
  state.SetItemsProcessed(state.iterations() * reps);
}

}  // namespace

BENCHMARK(bm_mc_risk_serial)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_mc_risk_parallel)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
