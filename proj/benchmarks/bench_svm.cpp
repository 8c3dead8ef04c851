#include <benchmark/benchmark.h>

#include <random>

#include "sentinel/svm.hpp"

namespace {

using namespace sentinel;

std::vector<Sample> overlapping_classes(int n, int dim) {
  std::mt19937 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Sample> s;
  for (int i = 0; i < n; ++i) {
    const bool fall = i % 2 == 0;
    Sample x{{}, fall ? PatternLabel::Fall : PatternLabel::Stand};
    for (int k = 0; k < dim; ++k) x.features.push_back(g(rng) + (fall ? 0.8 : -0.8));
    s.push_back(std::move(x));
  }
  return s;
}

void BM_SvmTrain(benchmark::State& state) {
  const auto samples = overlapping_classes(static_cast<int>(state.range(0)), 35);
  for (auto _ : state) {
    benchmark::DoNotOptimize(train(samples, TrainOptions{.c = 1.0}));
  }
}
BENCHMARK(BM_SvmTrain)->Arg(40)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
