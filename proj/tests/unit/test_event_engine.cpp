#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "sentinel/error.hpp"
#include "sentinel/event_engine.hpp"
#include "sentinel/simulator.hpp"
#include "test_support.hpp"

namespace sentinel {
namespace {

std::vector<RoiRegion> three_rois() {
  return {{1, EventKind::WatchDog, {10, 10, 50, 50}},
          {2, EventKind::DangerNotice, {100, 10, 50, 50}},
          {3, EventKind::PhotoLink, {20, 70, 120, 45}}};
}

std::vector<TriggeredEvent> run_script(EventEngine& engine, const ScenarioScript& script) {
  std::vector<TriggeredEvent> all;
  for (int f = 0; f < script.frames; ++f) {
    const ColorFrame c = render_frame(script, f);
    for (auto& e : engine.process(to_gray(c), c)) all.push_back(std::move(e));
  }
  return all;
}

Quadrilateral quad_of(const Rect& r) {
  return Quadrilateral{{Point{r.x, r.y}, Point{r.x, r.bottom() - 1}, Point{r.right() - 1, r.bottom() - 1},
                        Point{r.right() - 1, r.y}}};
}

TEST(Rois, ThreeValidRoisStartCalibrating) {
  EventEngine engine(three_rois(), 160, 120, EngineConfig{});
  EXPECT_TRUE(engine.calibrating());
  EXPECT_EQ(engine.rois().size(), 3u);
  EXPECT_FALSE(engine.threshold(1).has_value());
}

TEST(Rois, RejectsRepeatedKind) {
  std::vector<RoiRegion> rois{{1, EventKind::WatchDog, {0, 0, 20, 20}}, {2, EventKind::WatchDog, {30, 0, 20, 20}}};
  EXPECT_THROW(EventEngine(rois, 160, 120, EngineConfig{}), ConfigError);
}

TEST(Rois, RejectsOutOfFrame) {
  std::vector<RoiRegion> rois{{1, EventKind::WatchDog, {150, 0, 20, 20}}};
  EXPECT_THROW(EventEngine(rois, 160, 120, EngineConfig{}), ConfigError);
}

TEST(Rois, RejectsCountSizeAndIds) {
  EXPECT_THROW(validate_rois({}), ConfigError);
  std::vector<RoiRegion> small{{1, EventKind::WatchDog, {0, 0, 7, 20}}};
  EXPECT_THROW(validate_rois(small), ConfigError);
  std::vector<RoiRegion> dup{{1, EventKind::WatchDog, {0, 0, 20, 20}}, {1, EventKind::PhotoLink, {0, 0, 20, 20}}};
  EXPECT_THROW(validate_rois(dup), ConfigError);
  std::vector<RoiRegion> ok{{1, EventKind::WatchDog, {150, 0, 20, 20}}};
  EXPECT_NO_THROW(validate_rois(ok));
  EXPECT_THROW(validate_rois(ok, std::pair{160, 120}), ConfigError);
}

TEST(Kinds, NamesRoundTrip) {
  for (auto k : kAllEventKinds) EXPECT_EQ(parse_event_kind(to_string(k)), k);
  EXPECT_FALSE(parse_event_kind("watchdog").has_value());
}

TEST(Calibration, ConstantSamplesHitTheFloor) {
  const std::vector<double> s(10, 10.0);
  EXPECT_DOUBLE_EQ(calibrated_threshold(s, 100.0 * 100.0), 50.0);
}

TEST(Calibration, MeanPlusThreeSigma) {
  // Alternating 80/120: mean 100, population stddev 20.
  std::vector<double> s;
  for (int i = 0; i < 10; ++i) s.push_back(i % 2 ? 120.0 : 80.0);
  EXPECT_DOUBLE_EQ(calibrated_threshold(s, 100.0 * 100.0), 160.0);
}

TEST(Calibration, UsesPopulationNotSampleStddev) {
  const std::vector<double> s{0, 0, 0, 400};
  const double mean = 100.0;
  const double pop = std::sqrt((3 * 100.0 * 100.0 + 300.0 * 300.0) / 4.0);
  EXPECT_NEAR(calibrated_threshold(s, 400.0), mean + 3 * pop, 1e-9);
}

TEST(Calibration, EmptySamplesGiveFloor) {
  EXPECT_DOUBLE_EQ(calibrated_threshold({}, 2500.0), 12.5);
}

TEST(Calibration, StaticTenFramesLeavesFloor) {
  EventEngine engine(three_rois(), 160, 120, EngineConfig{});
  for (int f = 0; f < 10; ++f) {
    const auto p = engine.calibrate_step(GrayFrame(160, 120, 96, f * 100));
    EXPECT_EQ(p.frames, f + 1);
    EXPECT_EQ(p.complete, f == 9);
  }
  EXPECT_DOUBLE_EQ(*engine.threshold(1), 12.5);
  EXPECT_DOUBLE_EQ(*engine.threshold(2), 12.5);
  EXPECT_FALSE(engine.threshold(3).has_value());
}

TEST(Calibration, OneMinuteUsesFramesBeforeSixtySeconds) {
  EngineConfig cfg;
  cfg.calibration = CalibrationMode::OneMinute;
  EventEngine engine(three_rois(), 160, 120, cfg);
  int sampled = 0;
  for (TimestampMs ts = 0; ts < 60'000; ts += 1'000) {
    const auto p = engine.calibrate_step(GrayFrame(160, 120, 96, ts));
    ASSERT_TRUE(p.consumed);
    ASSERT_FALSE(p.complete);
    sampled = p.frames;
  }
  EXPECT_EQ(sampled, 60);
  const auto closing = engine.calibrate_step(GrayFrame(160, 120, 96, 60'000));
  EXPECT_TRUE(closing.complete);
  EXPECT_FALSE(closing.consumed);
  EXPECT_EQ(closing.frames, 60);
  EXPECT_FALSE(engine.calibrating());
}

TEST(Calibration, ProcessEmitsNothingWhileCalibrating) {
  EventEngine engine(three_rois(), 160, 120, EngineConfig{});
  for (int f = 0; f < 10; ++f) {
    GrayFrame g(160, 120, 96, f * 100);
    for (int y = 20; y < 40; ++y)
      for (int x = 20; x < 40; ++x) g.at(x, y) = 250;
    EXPECT_TRUE(engine.process(g, to_color(g)).empty());
  }
}

TEST(Step, RejectsBeforeCalibrationAndWrongSize) {
  EventEngine engine(three_rois(), 160, 120, EngineConfig{});
  const GrayFrame g(160, 120, 96);
  EXPECT_THROW(engine.step(g, to_color(g)), ConfigError);
  engine.set_threshold(1, 50.0);
  const GrayFrame small(80, 60, 96);
  EXPECT_THROW(engine.step(small, to_color(small)), ConfigError);
  EXPECT_THROW(engine.step(g, to_color(small)), ConfigError);
}

TEST(Step, StaticSceneIsQuiet) {
  ScenarioScript s;
  s.frames = 60;
  s.jitter = 3;
  s.seed = 7;
  EventEngine engine(three_rois(), s.width, s.height, EngineConfig{});
  EXPECT_TRUE(run_script(engine, s).empty());
}

// Blob crosses the WatchDog ROI, leaves, and returns after the refractory period.
ScenarioScript return_trip() {
  ScenarioScript s;
  s.frames = 90;
  s.actors.push_back(MovingBlob{"visitor", 20, 20, 250,
                                {{12, 70, 25}, {20, 30, 25}, {28, 70, 25}, {29, 130, 90}, {60, 130, 90},
                                 {61, 70, 25}, {69, 30, 25}}});
  return s;
}

TEST(Step, BlobEventsFollowTheRefractoryRule) {
  const ScenarioScript s = return_trip();
  const std::vector<RoiRegion> rois{{1, EventKind::WatchDog, {10, 10, 50, 50}}};
  EventEngine engine(rois, s.width, s.height, EngineConfig{});
  const auto events = run_script(engine, s);

  // Scalar oracle: the blob's overlap with the ROI against the 12.5 px floor,
  // emitting when no WatchDog event fired in the previous 2 s.
  std::vector<int> oracle;
  std::optional<TimestampMs> last;
  for (int f = 10; f < s.frames; ++f) {
    const auto& blob = std::get<MovingBlob>(s.actors[0]);
    if (!actor_visible(blob, f)) continue;
    const Point p = blob_position(blob, f);
    const int ox = std::max(0, std::min(p.x + 20, 60) - std::max(p.x, 10));
    const int oy = std::max(0, std::min(p.y + 20, 60) - std::max(p.y, 10));
    const TimestampMs ts = f * 100;
    if (ox * oy > 12.5 && !(last && ts - *last < 2000)) {
      oracle.push_back(f);
      last = ts;
    }
  }
  ASSERT_EQ(oracle.size(), 2u);
  ASSERT_EQ(events.size(), oracle.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    EXPECT_EQ(events[i].kind, EventKind::WatchDog);
    EXPECT_EQ(events[i].timestamp, oracle[i] * 100);
    EXPECT_GT(static_cast<double>(events[i].metric), events[i].threshold);
  }
}

TEST(Step, ZeroRefractoryEmitsEveryFrame) {
  const ScenarioScript s = return_trip();
  const std::vector<RoiRegion> rois{{1, EventKind::WatchDog, {10, 10, 50, 50}}};
  EngineConfig cfg;
  cfg.refractory_ms = 0;
  EventEngine engine(rois, s.width, s.height, cfg);
  const auto events = run_script(engine, s);
  EXPECT_GT(events.size(), 10u);
  for (std::size_t i = 1; i < events.size(); ++i) EXPECT_GT(events[i].timestamp, events[i - 1].timestamp);
}

TEST(Step, StaticPhotoYieldsOneEvent) {
  ScenarioScript s;
  s.frames = 120;
  s.actors.push_back(PastedRect{"photo", {60, 80, 30, 24}, 0.0, 230, 15, std::nullopt});
  EventEngine engine(three_rois(), s.width, s.height, EngineConfig{});
  const auto events = run_script(engine, s);
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0].kind, EventKind::PhotoLink);
  EXPECT_EQ(events[0].timestamp, 1500);
  EXPECT_EQ(events[0].metric, 1);
  ASSERT_EQ(events[0].rectangles.size(), 1u);
}

TEST(Step, PhotoPresentDuringCalibrationIsNotNew) {
  ScenarioScript s;
  s.frames = 40;
  s.actors.push_back(PastedRect{"photo", {60, 80, 30, 24}, 0.0, 230, 0, std::nullopt});
  EventEngine engine(three_rois(), s.width, s.height, EngineConfig{});
  EXPECT_TRUE(run_script(engine, s).empty());
  EXPECT_EQ(engine.known_rects().entries.size(), 1u);
}

TEST(Step, VisiblePhotoNeverExpires) {
  ScenarioScript s;
  s.frames = 80;
  s.period_ms = 1000;
  s.actors.push_back(PastedRect{"photo", {60, 80, 30, 24}, 0.0, 230, 12, std::nullopt});
  EngineConfig cfg;
  cfg.rect_expiry_ms = 30'000;
  EventEngine engine(three_rois(), s.width, s.height, cfg);
  // Detections refresh the entry every frame, so it never expires while visible.
  EXPECT_EQ(run_script(engine, s).size(), 1u);
}

TEST(Step, TraceWritesCsvRows) {
  std::ostringstream trace;
  EventEngine engine({{1, EventKind::WatchDog, {0, 0, 16, 16}}}, 32, 32, EngineConfig{});
  engine.set_metric_trace(&trace);
  engine.set_threshold(1, 5.0);
  engine.step(GrayFrame(32, 32, 9, 0), ColorFrame(32, 32, 9, 0));
  engine.step(GrayFrame(32, 32, 9, 100), ColorFrame(32, 32, 9, 100));
  EXPECT_EQ(trace.str(), "frame_ts,roi_id,metric,threshold\n0,1,0,5\n100,1,0,5\n");
}

TEST(Step, Deterministic) {
  ScenarioScript s = return_trip();
  s.jitter = 4;
  s.actors.push_back(PastedRect{"photo", {60, 80, 30, 24}, 10.0, 230, 30, std::nullopt});
  EventEngine a(three_rois(), s.width, s.height, EngineConfig{});
  EventEngine b(three_rois(), s.width, s.height, EngineConfig{});
  const auto ea = run_script(a, s);
  EXPECT_FALSE(ea.empty());
  EXPECT_EQ(ea, run_script(b, s));
}

TEST(Step, LowerThresholdNeverLosesEvents) {
  ScenarioScript s = return_trip();
  s.jitter = 6;
  const std::vector<RoiRegion> rois{{1, EventKind::WatchDog, {10, 10, 50, 50}}};
  std::size_t previous = 0;
  for (double t : {400.0, 300.0, 200.0, 100.0, 50.0, 10.0}) {
    EventEngine engine(rois, s.width, s.height, EngineConfig{});
    engine.set_threshold(1, t);
    std::size_t n = 0;
    for (int f = 0; f < s.frames; ++f) {
      const ColorFrame c = render_frame(s, f);
      n += engine.step(to_gray(c), c).size();
    }
    EXPECT_GE(n, previous) << "threshold " << t;
    previous = n;
  }
}

TEST(Novelty, EmptyKnownAcceptsDetection) {
  KnownRectSet known;
  const std::vector<Quadrilateral> d{quad_of({0, 0, 10, 10})};
  EXPECT_EQ(novelty_filter(d, known, 0).size(), 1u);
  EXPECT_EQ(known.entries.size(), 1u);
}

TEST(Novelty, RedetectionIsNotNew) {
  KnownRectSet known;
  const std::vector<Quadrilateral> d{quad_of({5, 5, 10, 10})};
  novelty_filter(d, known, 0);
  EXPECT_TRUE(novelty_filter(d, known, 1000).empty());
  EXPECT_EQ(known.entries[0].last_seen, 1000);
}

TEST(Novelty, OverlapAtSixTenthsIsKnown) {
  // 10x12 inside 10x20: IoU 120 / 200.
  KnownRectSet known;
  known.entries.push_back({Rect{0, 0, 10, 20}, 0});
  EXPECT_DOUBLE_EQ(iou(Rect{0, 0, 10, 12}, Rect{0, 0, 10, 20}), 0.6);
  const std::vector<Quadrilateral> d{quad_of({0, 0, 10, 12}), quad_of({50, 50, 10, 10})};
  const auto fresh = novelty_filter(d, known, 10);
  ASSERT_EQ(fresh.size(), 1u);
  EXPECT_EQ(fresh[0].bounding_box(), (Rect{50, 50, 10, 10}));
}

TEST(Novelty, IouArithmetic) {
  EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {0, 0, 10, 10}), 1.0);
  EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {10, 0, 10, 10}), 0.0);
  EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {5, 0, 10, 10}), 50.0 / 150.0);
}

TEST(Novelty, ExpiredEntriesArePruned) {
  KnownRectSet known;
  known.expiry_ms = 600'000;
  const std::vector<Quadrilateral> d{quad_of({5, 5, 10, 10})};
  novelty_filter(d, known, 0);
  EXPECT_TRUE(novelty_filter({}, known, 600'000).empty());
  EXPECT_EQ(known.entries.size(), 1u);
  novelty_filter({}, known, 600'001);
  EXPECT_TRUE(known.entries.empty());
  EXPECT_EQ(novelty_filter(d, known, 600'002).size(), 1u);
}

TEST(Novelty, RandomBoxesProperty) {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> pos(0, 80), size(5, 30);
  for (int trial = 0; trial < 200; ++trial) {
    KnownRectSet known;
    std::vector<Quadrilateral> d;
    for (int i = 0; i < 4; ++i) d.push_back(quad_of({pos(rng), pos(rng), size(rng), size(rng)}));
    // Detections in one batch are only compared with earlier frames.
    EXPECT_EQ(novelty_filter(d, known, 0).size(), d.size());
    // A second pass with the same boxes is always fully known.
    EXPECT_TRUE(novelty_filter(d, known, 1).empty());
  }
}

}  // namespace
}  // namespace sentinel
