#include <random>

#include <benchmark/benchmark.h>

#include "nnreach/mlp.hpp"
#include "nnreach/training.hpp"

using namespace nnreach;

namespace {

void BM_MlpForwardBatch(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const MlpModel model = MlpModel::random({4, 32, 32, 2}, Activation::tanh, Activation::tanh,
                                          Eigen::Vector2d(0.15, 0.15), ModelMeta{2, 2, 0.1, "dynamics"}, rng);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(4, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(model.forward_batch(x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpForwardBatch)->RangeMultiplier(10)->Range(10, 100000);

void BM_LossGradient(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const MlpModel model = MlpModel::random({4, 32, 32, 2}, Activation::tanh, Activation::tanh,
                                          Eigen::Vector2d(0.15, 0.15), ModelMeta{2, 2, 0.1, "dynamics"}, rng);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(4, 64), y = 0.1 * Eigen::MatrixXd::Random(2, 64);
  for (auto _ : state) benchmark::DoNotOptimize(loss_and_gradient(model, x, y));
}
BENCHMARK(BM_LossGradient);

}  // namespace
