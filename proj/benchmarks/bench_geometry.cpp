#include <benchmark/benchmark.h>

#include "nnreach/scene.hpp"
#include "nnreach/shapes.hpp"

using namespace nnreach;

namespace {

void BM_LandLevelSet(benchmark::State& state) {
  const Scene scene = land_scene(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(level_set_from_shapes(scene.grid, scene.obstacles));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(scene.grid->num_nodes()));
}
BENCHMARK(BM_LandLevelSet)->Arg(101)->Arg(401);

void BM_AerialLevelSet(benchmark::State& state) {
  const Scene scene = aerial_scene(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(level_set_from_shapes(scene.grid, scene.obstacles));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(scene.grid->num_nodes()));
}
BENCHMARK(BM_AerialLevelSet)->Arg(51)->Unit(benchmark::kMillisecond);

void BM_SignedDistancePoint(benchmark::State& state) {
  const Scene scene = aerial_scene(11);
  const std::vector<double> p{2.3, 3.1, 4.0};
  for (auto _ : state) benchmark::DoNotOptimize(signed_distance(scene.obstacles, p));
}
BENCHMARK(BM_SignedDistancePoint);

}  // namespace
