#include <random>

#include <benchmark/benchmark.h>

#include "nnreach/hj_solver.hpp"
#include "nnreach/scene.hpp"

using namespace nnreach;

namespace {

ClosedLoopSystem mlp_land_system() {
  std::mt19937_64 rng(3);
  MlpModel model = MlpModel::random({4, 32, 32, 2}, Activation::tanh, Activation::tanh, Eigen::Vector2d(0.15, 0.15),
                                    ModelMeta{2, 2, 0.1, "dynamics"}, rng);
  MlpModel pol = MlpModel::random({2, 32, 32, 2}, Activation::tanh, Activation::tanh, Eigen::Vector2d(1.0, 3.0),
                                  ModelMeta{2, 2, 0.0, "policy"}, rng);
  return ClosedLoopSystem::learned(std::move(model), Policy::mlp(std::move(pol), ActionBounds::land()),
                                   DisturbanceBounds::symmetric(Eigen::Vector2d(0.02, 0.02), 3.0, 0.1));
}

void BM_SolverStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Scene scene = land_scene(n);
  const auto sys = mlp_land_system();
  const ScalarField v = level_set_from_shapes(scene.grid, scene.obstacles);
  SolverConfig cfg;
  const double dt = cfl_dt(cfg, dissipation_coefficients(sys, *scene.grid), *scene.grid);
  for (auto _ : state) benchmark::DoNotOptimize(step(v, sys, cfg, dt));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(scene.grid->num_nodes()));
}
BENCHMARK(BM_SolverStep)->Arg(51)->Arg(101)->Arg(201)->Unit(benchmark::kMillisecond);

void BM_LandBrt(benchmark::State& state) {
  const Scene scene = land_scene(101);
  const auto sys = mlp_land_system();
  SolverConfig cfg;
  cfg.horizon = 2.0;
  for (auto _ : state) benchmark::DoNotOptimize(solve_brt(scene.obstacles.subset(1), sys, cfg, scene.grid));
}
BENCHMARK(BM_LandBrt)->Unit(benchmark::kMillisecond);

}  // namespace
