#include <benchmark/benchmark.h>

#include <random>

#include "sentinel/background_model.hpp"

namespace {

using namespace sentinel;

std::vector<GrayFrame> noisy_frames(int w, int h, int count) {
  std::mt19937 rng(1);
  std::uniform_int_distribution<int> noise(-3, 3);
  std::vector<GrayFrame> frames;
  for (int f = 0; f < count; ++f) {
    GrayFrame g(w, h, 96, f * 100);
    for (auto& v : g.pixels) v = static_cast<std::uint8_t>(96 + noise(rng));
    frames.push_back(std::move(g));
  }
  return frames;
}

void BM_BackgroundApply(benchmark::State& state) {
  const int w = static_cast<int>(state.range(0));
  const int h = w * 3 / 4;
  const auto frames = noisy_frames(w, h, 16);
  BackgroundModel model(w, h, BackgroundParams{});
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.apply(frames[i++ % frames.size()]));
  }
  state.SetItemsProcessed(state.iterations() * w * h);
}
BENCHMARK(BM_BackgroundApply)->Arg(160)->Arg(320)->Arg(640);

void BM_UpdatePixel(benchmark::State& state) {
  BackgroundParams p;
  p.components = static_cast<int>(state.range(0));
  PixelMixture m{{GaussianComponent{1.0, 128.0, p.initial_variance}}};
  std::mt19937 rng(2);
  std::uniform_int_distribution<int> px(0, 255);
  for (auto _ : state) {
    benchmark::DoNotOptimize(update_pixel(m, px(rng), p));
  }
}
BENCHMARK(BM_UpdatePixel)->Arg(3)->Arg(5);

}  // namespace
