#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "sentinel/shape_detector.hpp"

namespace {

using namespace sentinel;

GrayFrame wall_with_photo(double angle_deg) {
  GrayFrame g(320, 240, 200);
  const double t = angle_deg * std::numbers::pi / 180.0;
  const double c = std::cos(t), s = std::sin(t);
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      const double dx = x + 0.5 - 160, dy = y + 0.5 - 120;
      const double u = dx * c + dy * s, v = -dx * s + dy * c;
      if (std::abs(u) <= 40 && std::abs(v) <= 28) g.at(x, y) = 40;
    }
  }
  return g;
}

void BM_DetectRectangles(benchmark::State& state) {
  const GrayFrame g = wall_with_photo(static_cast<double>(state.range(0)));
  const Rect roi{20, 20, 280, 200};
  const ShapeParams params;
  for (auto _ : state) {
    benchmark::DoNotOptimize(detect_rectangles(g, roi, params));
  }
}
BENCHMARK(BM_DetectRectangles)->Arg(0)->Arg(30);

void BM_Binarize(benchmark::State& state) {
  const GrayFrame g = wall_with_photo(15.0);
  const Rect roi{20, 20, 280, 200};
  for (auto _ : state) {
    benchmark::DoNotOptimize(binarize(g, roi, 16));
  }
}
BENCHMARK(BM_Binarize);

}  // namespace
