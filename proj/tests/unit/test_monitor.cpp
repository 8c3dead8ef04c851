#include <gtest/gtest.h>

#include <sstream>

#include "sentinel/config.hpp"
#include "sentinel/error.hpp"
#include "sentinel/monitor.hpp"
#include "sentinel/recorder.hpp"
#include "sentinel/simulator.hpp"
#include "test_support.hpp"

namespace sentinel {
namespace {

using testing::read_file;
using testing::TempDir;
using testing::write_file;

class CountingTransport final : public Transport {
 public:
  TransportResult send(const WebhookRequest& request) override {
    std::lock_guard lock(mu_);
    bodies.push_back(request.body);
    return {true, 200, ""};
  }
  std::vector<std::string> snapshot() {
    std::lock_guard lock(mu_);
    return bodies;
  }

 private:
  std::mutex mu_;
  std::vector<std::string> bodies;
};

AppConfig scenario_config(const std::string& name, const std::filesystem::path& out) {
  auto cfg = load_config(std::filesystem::path(SENTINEL_SCENARIO_DIR) / (name + ".ini"));
  cfg.output_dir = out;
  return cfg;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

TEST(Monitor, CombinedScenarioEndToEnd) {
  TempDir dir;
  const auto cfg = scenario_config("combined", dir / "out");
  auto transport = std::make_shared<CountingTransport>();
  auto voice = std::make_shared<RecordingVoiceSink>();
  ScenarioSource source(*cfg.scenario);
  const auto summary = run_monitor(source, cfg, {transport, voice, std::make_shared<ManualClock>()});

  const auto oracle = expected(*cfg.scenario, cfg.rois, cfg.engine);
  const auto match = match_events(oracle.events, summary.triggered, cfg.scenario->period_ms);
  EXPECT_TRUE(match.ok) << match.detail;
  EXPECT_EQ(summary.frames, cfg.scenario->frames);
  EXPECT_EQ(summary.count(EventKind::WatchDog), 1);
  EXPECT_EQ(summary.count(EventKind::DangerNotice), 1);
  EXPECT_EQ(summary.count(EventKind::PhotoLink), 2);

  // Second photo falls inside the social window.
  EXPECT_EQ(summary.alerts_suppressed, 1);
  EXPECT_EQ(transport->snapshot().size(), 1u);
  EXPECT_EQ(voice->invocations().size(), 1u);

  const auto log = lines(read_file(dir / "out" / "events.log"));
  ASSERT_EQ(log.size(), 4u);
  for (const auto& l : log) {
    const auto snap = l.substr(l.rfind('\t') + 1);
    EXPECT_TRUE(std::filesystem::exists(dir / "out" / snap)) << snap;
  }
  const auto stats = summarize(dir / "out" / "events.log", 1);
  EXPECT_EQ(stats.of(EventKind::PhotoLink).events, 2);

  const auto notify = lines(read_file(dir / "out" / "notify.log"));
  ASSERT_EQ(notify.size(), 2u);
  EXPECT_NE(notify[0].find("\tVoiceAlert\tplayed\t1"), std::string::npos);
  EXPECT_NE(notify[1].find("\tSocialMessage\tdelivered\t1"), std::string::npos);
}

TEST(Monitor, SocialMessageCarriesRecordedSnapshot) {
  TempDir dir;
  const auto cfg = scenario_config("photo_left", dir / "out");
  auto transport = std::make_shared<CountingTransport>();
  ScenarioSource source(*cfg.scenario);
  const auto summary = run_monitor(source, cfg, {transport, nullptr, std::make_shared<ManualClock>()});
  ASSERT_EQ(summary.count(EventKind::PhotoLink), 1);
  const auto bodies = transport->snapshot();
  ASSERT_EQ(bodies.size(), 1u);
  const auto ts = summary.triggered[0].timestamp;
  EXPECT_NE(bodies[0].find("\"event_ts\":" + std::to_string(ts)), std::string::npos);
  EXPECT_NE(bodies[0].find("\"image\":\"UDYK"), std::string::npos);  // base64 of "P6\n"
}

TEST(Monitor, WithoutWebhookSocialIsDisabled) {
  TempDir dir;
  const auto cfg = scenario_config("photo_left", dir / "out");
  ScenarioSource source(*cfg.scenario);
  run_monitor(source, cfg, {nullptr, nullptr, std::make_shared<ManualClock>()});
  EXPECT_NE(read_file(dir / "out" / "notify.log").find("\tSocialMessage\tdisabled\t0"), std::string::npos);
}

TEST(Monitor, WallClockTimestamps) {
  TempDir dir;
  const auto cfg = scenario_config("visitor_crossing", dir / "out");
  ScenarioSource source(*cfg.scenario);
  run_monitor(source, cfg, {}, RunOptions{true, 1'700'000'000'000});
  const auto log = read_file(dir / "out" / "events.log");
  EXPECT_EQ(log.substr(0, 24), "2023-11-14T22:13:21.500Z");
  EXPECT_NE(log.find("WatchDog_1700000001500.ppm"), std::string::npos);
}

TEST(Monitor, EmptySourceHasNoEvents) {
  TempDir dir;
  auto cfg = scenario_config("visitor_crossing", dir / "out");
  std::istringstream empty;
  StreamSource source(empty, 100);
  const auto summary = run_monitor(source, cfg);
  EXPECT_EQ(summary.frames, 0);
  EXPECT_EQ(render_summary(summary), "WatchDog: 0\nDangerNotice: 0\nPhotoLink: 0\n");
}

TEST(Monitor, RecordFailureStillAlertsVoiceButNotSocial) {
  TempDir dir;
  ScenarioScript s;
  s.frames = 40;
  s.actors.push_back(MovingBlob{"cook", 18, 22, 30, {{15, 140, 28}, {25, 100, 28}}});
  s.actors.push_back(PastedRect{"photo", {60, 80, 30, 24}, 0.0, 230, 20, std::nullopt});
  auto cfg = scenario_config("combined", dir / "out");
  cfg.scenario.reset();
  auto transport = std::make_shared<CountingTransport>();
  auto voice = std::make_shared<RecordingVoiceSink>();
  Monitor monitor(cfg, {transport, voice, std::make_shared<ManualClock>()});
  // Replace the output directory with a file once the monitor is set up.
  std::filesystem::remove_all(dir / "out");
  write_file(dir / "out", "blocked");
  ScenarioSource source(s);
  while (auto f = source.next_frame()) monitor.process(*f);
  const auto summary = monitor.finish();
  EXPECT_EQ(summary.record_failures, 2);
  EXPECT_EQ(voice->invocations().size(), 1u);
  EXPECT_TRUE(transport->snapshot().empty());
}

TEST(Monitor, ClassifierRoutesFrames) {
  TempDir dir;
  const SvmModel model{std::vector<double>(kFeatureDim, 0.0), -1.0, 1.0, 1, 1};
  save_model(dir / "m.svm", model);
  auto cfg = scenario_config("visitor_crossing", dir / "out");
  cfg.classifier = ClassifierConfig{dir / "m.svm", 1};
  ScenarioSource source(*cfg.scenario);
  run_monitor(source, cfg);
  const auto stand = lines(read_file(dir / "out" / "stand.list"));
  const auto skip = lines(read_file(dir / "out" / "skip.list"));
  EXPECT_TRUE(read_file(dir / "out" / "fall.list").empty());
  EXPECT_FALSE(stand.empty());
  EXPECT_EQ(stand.size() + skip.size(), static_cast<std::size_t>(cfg.scenario->frames));
  EXPECT_EQ(skip.front(), "frame_0");
}

TEST(Monitor, ClassifierDimensionChecked) {
  TempDir dir;
  save_model(dir / "m.svm", SvmModel{{1.0, 2.0}, 0.0, 1.0, 1, 1});
  auto cfg = scenario_config("visitor_crossing", dir / "out");
  cfg.classifier = ClassifierConfig{dir / "m.svm", 1};
  EXPECT_THROW(Monitor{cfg}, ConfigError);
}

}  // namespace
}  // namespace sentinel
