#include <benchmark/benchmark.h>

#include <random>

#include "hacl/clustering.hpp"

namespace {

// base_scale 0: i.i.d. noise. Larger values add a shared direction, which
// makes one region absorb most of the grid.
hacl::FeatureMap noise_map(std::uint32_t side, std::uint32_t dim, double base_scale) {
  std::mt19937_64 rng(side * 131 + dim);
  std::normal_distribution<double> g;
  std::vector<double> base(dim);
  for (auto& b : base) b = base_scale * g(rng);
  std::vector<float> data(std::size_t{side} * side * dim);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<float>(base[i % dim] + g(rng));
  return hacl::FeatureMap("bench", side, side, dim, 8, std::move(data));
}

void BM_ClusterIidNoise(benchmark::State& state) {
  const auto fm = noise_map(static_cast<std::uint32_t>(state.range(0)), static_cast<std::uint32_t>(state.range(1)), 0.0);
  const hacl::ClusterConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(hacl::cluster(fm, cfg));
  state.SetComplexityN(state.range(0) * state.range(0));
}
BENCHMARK(BM_ClusterIidNoise)->Args({30, 32})->Args({60, 32})->Args({60, 768})->Unit(benchmark::kMillisecond);

void BM_ClusterSharedBase(benchmark::State& state) {
  const auto fm = noise_map(static_cast<std::uint32_t>(state.range(0)), 64, 3.0);
  const hacl::ClusterConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(hacl::cluster(fm, cfg));
}
BENCHMARK(BM_ClusterSharedBase)->Arg(30)->Arg(60)->Unit(benchmark::kMillisecond);

}  // namespace
