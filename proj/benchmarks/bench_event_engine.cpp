#include <benchmark/benchmark.h>

#include "sentinel/event_engine.hpp"
#include "sentinel/simulator.hpp"

namespace {

using namespace sentinel;

void BM_EngineStep(benchmark::State& state) {
  ScenarioScript script;
  script.frames = 200;
  script.jitter = 2;
  script.actors.push_back(MovingBlob{"walker", 20, 20, 220, {{0, 0, 25}, {100, 130, 25}, {199, 0, 25}}});
  script.actors.push_back(PastedRect{"photo", {40, 80, 30, 24}, 0.0, 230, 20, std::nullopt});
  std::vector<std::pair<GrayFrame, ColorFrame>> frames;
  for (int f = 0; f < script.frames; ++f) {
    ColorFrame c = render_frame(script, f);
    frames.emplace_back(to_gray(c), std::move(c));
  }
  const std::vector<RoiRegion> rois{{1, EventKind::WatchDog, {10, 10, 50, 50}},
                                    {2, EventKind::DangerNotice, {100, 10, 50, 50}},
                                    {3, EventKind::PhotoLink, {20, 70, 120, 45}}};
  EventEngine engine(rois, script.width, script.height, EngineConfig{});
  for (int f = 0; f < kTenFrameWindow; ++f) (void)engine.process(frames[f].first, frames[f].second);
  std::size_t i = kTenFrameWindow;
  TimestampMs ts = frames.back().first.timestamp;
  for (auto _ : state) {
    auto& [g, c] = frames[i++ % frames.size()];
    ts += 100;
    g.timestamp = ts;
    c.timestamp = ts;
    benchmark::DoNotOptimize(engine.step(g, c));
  }
}
BENCHMARK(BM_EngineStep);

}  // namespace
