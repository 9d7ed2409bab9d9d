#include <benchmark/benchmark.h>

#include <Eigen/Core>

#include "aloft/engine.hpp"
#include "aloft/grid.hpp"
#include "aloft/model.hpp"
#include "aloft/rng.hpp"
#include "aloft/weights.hpp"

namespace {

Eigen::MatrixXd design(int n, std::uint64_t seed) {
  aloft::Rng rng(seed);
  Eigen::MatrixXd X(n, 1);
  for (int i = 0; i < n; ++i) X(i, 0) = rng.uniform();
  return X;
}

Eigen::VectorXd noise(int n, std::uint64_t seed) {
  aloft::Rng rng(seed);
  Eigen::VectorXd Y(n);
  for (int i = 0; i < n; ++i) Y(i) = rng.normal();
  return Y;
}

void BM_WeightSet(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Eigen::MatrixXd X = design(n, 1);
  const aloft::SmootherGrid grid = aloft::build_grid(0.25, 2.0, 3, true);
  aloft::FamilySpec family;
  family.family = aloft::SmootherFamily::piecewise;
  for (auto _ : state) {
    auto set = aloft::build_weight_set(X, grid, family);
    benchmark::DoNotOptimize(set);
  }
}
BENCHMARK(BM_WeightSet)->Arg(150)->Arg(500)->Arg(1000);

void BM_Statistic(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Eigen::MatrixXd X = design(n, 2);
  const aloft::WeightMatrix W = aloft::weights_piecewise(X, 0.0625, 0);
  const Eigen::VectorXd U = noise(n, 3);
  for (auto _ : state)
    benchmark::DoNotOptimize(aloft::statistic_Th(W, U));
}
BENCHMARK(BM_Statistic)->Arg(150)->Arg(500)->Arg(1000);

void BM_PenalizedTest(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Eigen::MatrixXd X = design(n, 4);
  const Eigen::VectorXd Y = noise(n, 5);
  const aloft::ParametricModel model = aloft::model_registry("zero", 1);
  aloft::TestConfig cfg;
  cfg.grid = aloft::build_grid(0.25, 2.0, 3, true);
  cfg.family.family = aloft::SmootherFamily::piecewise;
  cfg.boot.B = 49;
  for (auto _ : state) {
    auto outcome = aloft::run_test(X, Y, model, cfg);
    benchmark::DoNotOptimize(outcome);
  }
}
BENCHMARK(BM_PenalizedTest)->Arg(150)->Arg(400);

}  // namespace

BENCHMARK_MAIN();
