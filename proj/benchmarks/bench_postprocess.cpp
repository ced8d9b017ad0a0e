#include <benchmark/benchmark.h>

#include <random>

#include "hacl/postprocess.hpp"

namespace {

hacl::RgbImage two_tone(std::uint32_t w, std::uint32_t h) {
  hacl::RgbImage img("bench", w, h);
  for (std::uint32_t y = 0; y < h; ++y) {
    for (std::uint32_t x = 0; x < w; ++x) {
      const bool in = (x - w / 2) * (x - w / 2) + (y - h / 2) * (y - h / 2) < w * h / 10;
      img.at(x, y)[0] = in ? 200 : 40;
      img.at(x, y)[1] = in ? 60 : 150;
      img.at(x, y)[2] = 90;
    }
  }
  return img;
}

void BM_CrfRefine(benchmark::State& state) {
  const auto side = static_cast<std::uint32_t>(state.range(0));
  const auto img = two_tone(side, side);
  hacl::Bitmap mask(side, side);
  mask.fill_rect(side / 4, side / 4, side / 2, side / 2);
  const hacl::CrfModel model(img, hacl::CrfParams{});
  for (auto _ : state) benchmark::DoNotOptimize(model.refine(mask));
}
BENCHMARK(BM_CrfRefine)->Arg(120)->Arg(480)->Unit(benchmark::kMillisecond);

void BM_CrfModelBuild(benchmark::State& state) {
  const auto img = two_tone(480, 480);
  for (auto _ : state) benchmark::DoNotOptimize(hacl::CrfModel(img, hacl::CrfParams{}));
}
BENCHMARK(BM_CrfModelBuild)->Unit(benchmark::kMillisecond);

void BM_FillHoles(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::bernoulli_distribution on(0.6);
  hacl::Bitmap mask(480, 480);
  for (auto& b : mask.bits()) b = on(rng);
  for (auto _ : state) benchmark::DoNotOptimize(hacl::fill_holes(mask));
}
BENCHMARK(BM_FillHoles)->Unit(benchmark::kMicrosecond);

}  // namespace
