#include <gtest/gtest.h>

#include "sentinel/config.hpp"
#include "sentinel/error.hpp"
#include "sentinel/ini.hpp"
#include "test_support.hpp"

namespace sentinel {
namespace {

using testing::TempDir;
using testing::write_file;

constexpr std::string_view kMinimal = R"(
[source]
dir = frames

[roi.1]
kind = WatchDog
rect = 10,10,50,50
)";

TEST(Ini, ParsesSectionsAndComments) {
  const auto doc = IniDocument::parse("# top\n; also a comment\n[a]\nx = 1\ny=two words # kept\n\n[b]\n");
  ASSERT_EQ(doc.sections().size(), 2u);
  const auto* a = doc.find("a");
  ASSERT_NE(a, nullptr);
  SectionReader r(*a);
  EXPECT_EQ(r.integer("x"), 1);
  EXPECT_EQ(r.text("y"), "two words # kept");
  EXPECT_NO_THROW(r.finish());
}

TEST(Ini, StrictSyntax) {
  EXPECT_THROW((void)IniDocument::parse("x = 1\n"), ConfigError);
  EXPECT_THROW((void)IniDocument::parse("[a]\nx = 1\nx = 2\n"), ConfigError);
  EXPECT_THROW((void)IniDocument::parse("[a]\n[a]\n"), ConfigError);
  EXPECT_THROW((void)IniDocument::parse("[a]\njunk\n"), ConfigError);
}

TEST(Ini, ReaderRejectsUnknownAndMalformed) {
  const auto doc = IniDocument::parse("[a]\nn = 1.5\nk = 3\nextra = 1\nflag = maybe\n");
  SectionReader r(*doc.find("a"));
  EXPECT_EQ(r.number("n"), 1.5);
  EXPECT_THROW((void)r.integer("n"), ConfigError);
  EXPECT_THROW((void)r.boolean("flag"), ConfigError);
  EXPECT_EQ(r.integer("k"), 3);
  EXPECT_THROW(r.finish(), ConfigError);
}

TEST(Ini, NumberFormatting) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(parse_double(format_double(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_FALSE(parse_integer("12x").has_value());
  EXPECT_EQ(parse_integer("-7"), -7);
}

TEST(Config, MinimalDefaults) {
  const auto cfg = parse_config(kMinimal, "/base");
  EXPECT_EQ(cfg.source.dir, "/base/frames");
  EXPECT_EQ(cfg.source.period_ms, 100);
  ASSERT_EQ(cfg.rois.size(), 1u);
  EXPECT_EQ(cfg.rois[0], (RoiRegion{1, EventKind::WatchDog, {10, 10, 50, 50}}));
  EXPECT_EQ(cfg.engine, EngineConfig{});
  EXPECT_EQ(cfg.notify.policy, NotificationPolicy{});
  EXPECT_EQ(cfg.output_dir, "/base/out");
}

TEST(Config, AllSections) {
  const auto cfg = parse_config(R"(
[source]
dir = /data/frames
period_ms = 200
[roi.1]
kind = DangerNotice
rect = 0,0,40,40
[roi.7]
kind = PhotoLink
rect = 50,50,60,40
[background]
components = 5
learning_rate = 0.01
rho_mode = simple
[shape]
angle_tolerance_deg = 10
[engine]
calibration = one_minute
refractory_ms = 0
iou_threshold = 0.6
[notify]
webhook_url = https://example.invalid/hook
message = Hi
voice_message = Careful
social_window_ms = 1000
backoff_ms = 10, 20
max_retries = 2
[output]
dir = /tmp/o
[classifier]
model = m.svm
roi = 1
)",
                                "/cfg");
  EXPECT_EQ(cfg.source.period_ms, 200);
  EXPECT_EQ(cfg.rois[1].id, 7);
  EXPECT_EQ(cfg.engine.background.components, 5);
  EXPECT_EQ(cfg.engine.background.learning_rate, 0.01);
  EXPECT_EQ(cfg.engine.background.rho_mode, RhoMode::Simple);
  EXPECT_EQ(cfg.engine.shape.angle_tolerance_deg, 10.0);
  EXPECT_EQ(cfg.engine.calibration, CalibrationMode::OneMinute);
  EXPECT_EQ(cfg.engine.refractory_ms, 0);
  EXPECT_EQ(cfg.notify.message, "Hi");
  EXPECT_EQ(cfg.notify.voice_message, "Careful");
  EXPECT_EQ(cfg.notify.policy.backoff_ms, (std::vector<TimestampMs>{10, 20}));
  EXPECT_EQ(cfg.notify.policy.max_retries, 2);
  EXPECT_EQ(cfg.output_dir, "/tmp/o");
  ASSERT_TRUE(cfg.classifier);
  EXPECT_EQ(cfg.classifier->model, "/cfg/m.svm");
}

TEST(Config, RoundTripIsIdentity) {
  for (const char* name : {"combined", "fall", "photo_twice"}) {
    const auto path = std::filesystem::path(SENTINEL_SCENARIO_DIR) / (std::string(name) + ".ini");
    const auto a = load_config(path);
    TempDir dir;
    save_config(dir / "c.ini", a);
    const auto b = load_config(dir / "c.ini");
    EXPECT_EQ(a, b) << name;
    EXPECT_EQ(serialize_config(a), serialize_config(b));
  }
}

TEST(Config, RoundTripFullConfig) {
  AppConfig a = parse_config(kMinimal, "/abs");
  a.engine.background.initial_variance = 100.5;
  a.engine.calibration = CalibrationMode::OneMinute;
  a.notify.webhook_url = "http://h/p";
  a.notify.voice_command = "aplay alarm.wav";
  a.rois.push_back({2, EventKind::PhotoLink, {20, 20, 30, 30}});
  a.classifier = ClassifierConfig{"/abs/model.svm", 1};
  const auto b = parse_config(serialize_config(a));
  EXPECT_EQ(a, b);
}

TEST(Config, RejectsUnknownKeysAndSections) {
  EXPECT_THROW((void)parse_config(std::string(kMinimal) + "[roi.2]\nkind = PhotoLink\nrect = 0,0,9,9\ncolour = red\n"),
               ConfigError);
  EXPECT_THROW((void)parse_config(std::string(kMinimal) + "[camera]\nfps = 10\n"), ConfigError);
}

TEST(Config, RejectsInvalidValues) {
  EXPECT_THROW((void)parse_config("[source]\ndir = x\n"), ConfigError);  // no ROI
  EXPECT_THROW((void)parse_config("[roi.1]\nkind = Cat\nrect = 0,0,10,10\n"), ConfigError);
  EXPECT_THROW((void)parse_config("[roi.1]\nkind = WatchDog\nrect = 0,0,10\n"), ConfigError);
  EXPECT_THROW((void)parse_config(std::string(kMinimal) + "[background]\nlearning_rate = 2\n"), ConfigError);
  EXPECT_THROW((void)parse_config(std::string(kMinimal) + "[engine]\ncalibration = hourly\n"), ConfigError);
  EXPECT_THROW((void)parse_config(std::string(kMinimal) + "[classifier]\nmodel = m\nroi = 9\n"), ConfigError);
  EXPECT_THROW((void)parse_config(std::string(kMinimal) + "[notify]\ndeadline_ms = -1\n"), ConfigError);
}

TEST(Config, ScenarioActors) {
  const auto cfg = parse_config(R"(
[scenario]
frames = 30
jitter = 2
seed = 5
[actor.v]
type = blob
size = 20,20
intensity = 220
path = 5:0,25 15:80,25
[actor.p]
type = rect
rect = 40,80,30,24
angle = 15
appear = 10
remove = 20
[actor.f]
type = fall
bar = 10,50
pivot = 60,110
fall_start = 10
fall_end = 20
)");
  ASSERT_TRUE(cfg.scenario);
  const auto& s = *cfg.scenario;
  EXPECT_EQ(s.frames, 30);
  EXPECT_EQ(s.seed, 5u);
  ASSERT_EQ(s.actors.size(), 3u);
  const auto names = std::vector<std::string>{actor_name(s.actors[0]), actor_name(s.actors[1]), actor_name(s.actors[2])};
  EXPECT_NE(std::find(names.begin(), names.end(), "v"), names.end());
  for (const auto& a : s.actors) {
    if (const auto* b = std::get_if<MovingBlob>(&a)) {
      EXPECT_EQ(b->path, (std::vector<Waypoint>{{5, 0, 25}, {15, 80, 25}}));
    } else if (const auto* p = std::get_if<PastedRect>(&a)) {
      EXPECT_EQ(p->angle_deg, 15.0);
      EXPECT_EQ(p->remove, 20);
    } else {
      EXPECT_EQ(std::get<FallActor>(a).bar_height, 50);
    }
  }
}

TEST(Config, FileErrors) {
  TempDir dir;
  EXPECT_THROW((void)load_config(dir / "missing.ini"), IoError);
  write_file(dir / "bad.ini", "[roi.1\n");
  EXPECT_THROW((void)load_config(dir / "bad.ini"), ConfigError);
}

}  // namespace
}  // namespace sentinel
