#include <benchmark/benchmark.h>

#include <random>

#include "hacl/eval.hpp"

namespace {

hacl::RleMask blob(std::mt19937_64& rng, std::uint32_t side) {
  std::uniform_int_distribution<std::uint32_t> pos(0, side / 2), len(8, side / 2);
  hacl::Bitmap bm(side, side);
  bm.fill_rect(pos(rng), pos(rng), len(rng), len(rng));
  return hacl::RleMask::encode(bm);
}

void BM_RleIou(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const auto a = blob(rng, 480), b = blob(rng, 480);
  for (auto _ : state) benchmark::DoNotOptimize(hacl::mask_iou(a, b));
}
BENCHMARK(BM_RleIou);

void BM_RleCompressRoundTrip(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const auto a = blob(rng, 480);
  for (auto _ : state) benchmark::DoNotOptimize(hacl::RleMask::from_compressed(480, 480, a.to_compressed()));
}
BENCHMARK(BM_RleCompressRoundTrip);

void BM_Evaluate(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> score(0, 1);
  std::vector<hacl::GroundTruth> gts;
  std::vector<hacl::Detection> dets;
  for (int im = 0; im < 20; ++im) {
    for (int k = 0; k < 10; ++k) {
      hacl::GroundTruth g;
      g.id = im * 10 + k + 1;
      g.image_id = im;
      g.mask = blob(rng, 240);
      g.box = g.mask->bbox();
      g.area = double(g.mask->area());
      gts.push_back(std::move(g));
    }
    for (int k = 0; k < state.range(0); ++k) {
      hacl::Detection d;
      d.image_id = im;
      d.mask = blob(rng, 240);
      d.box = d.mask->bbox();
      d.score = score(rng);
      dets.push_back(std::move(d));
    }
  }
  for (auto _ : state) benchmark::DoNotOptimize(hacl::evaluate(gts, dets));
}
BENCHMARK(BM_Evaluate)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace
