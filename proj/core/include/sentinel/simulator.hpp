#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sentinel/event_engine.hpp"
#include "sentinel/frame.hpp"
#include "sentinel/frame_source.hpp"
#include "sentinel/svm.hpp"

namespace sentinel {

struct Waypoint {
  int frame = 0;
  int x = 0;  ///< top-left corner
  int y = 0;
  friend bool operator==(const Waypoint&, const Waypoint&) = default;
};

/// Axis-aligned block visible from its first to its last waypoint frame (inclusive),
/// moving linearly between waypoints with positions rounded half away from zero.
struct MovingBlob {
  std::string name;
  int width = 20;
  int height = 20;
  std::uint8_t intensity = 255;
  std::vector<Waypoint> path;
  friend bool operator==(const MovingBlob&, const MovingBlob&) = default;
};

/// Filled rectangle rotated by `angle_deg` about its centre; visible on [appear, remove).
struct PastedRect {
  std::string name;
  Rect rect;
  double angle_deg = 0.0;
  std::uint8_t intensity = 255;
  int appear = 0;
  std::optional<int> remove;
  friend bool operator==(const PastedRect&, const PastedRect&) = default;
};

/// Upright bar pivoting about its bottom-centre point (pivot_x, pivot_y), tipping towards +x.
/// Rotation from vertical is 0 up to `fall_start`, 90 degrees from `fall_end`, linear between.
struct FallActor {
  std::string name;
  int bar_width = 12;
  int bar_height = 60;
  int pivot_x = 0;
  int pivot_y = 0;
  int fall_start = 0;
  int fall_end = 10;
  std::uint8_t intensity = 255;
  int appear = 0;
  std::optional<int> remove;
  friend bool operator==(const FallActor&, const FallActor&) = default;
};

using Actor = std::variant<MovingBlob, PastedRect, FallActor>;

[[nodiscard]] const std::string& actor_name(const Actor& actor);

struct ScenarioScript {
  int width = 160;
  int height = 120;
  int frames = 0;
  TimestampMs period_ms = 100;
  std::uint8_t background = 96;
  int jitter = 0;  ///< uniform per-pixel noise amplitude
  std::uint64_t seed = 1;
  std::vector<Actor> actors;

  /// Throws ConfigError naming the offending actor: out-of-bounds geometry at any visible
  /// frame, spans outside [0, frames), unordered waypoints, or a degenerate script.
  void validate() const;
  friend bool operator==(const ScenarioScript&, const ScenarioScript&) = default;
};

/// Whether the actor is drawn in frame `f`.
[[nodiscard]] bool actor_visible(const Actor& actor, int f);
/// Top-left position of a blob at frame `f` (requires visibility).
[[nodiscard]] Point blob_position(const MovingBlob& blob, int f);
/// Rotation from vertical in degrees.
[[nodiscard]] double fall_angle(const FallActor& actor, int f);
/// Pixels covered by the actor at frame `f` (pixel centres inside the shape).
[[nodiscard]] Rect actor_bounds(const Actor& actor, int f);

/// Frame `f` (0-based) stamped f * period_ms. Deterministic; jitter is seeded per frame.
[[nodiscard]] ColorFrame render_frame(const ScenarioScript& script, int f);
[[nodiscard]] std::vector<ColorFrame> render(const ScenarioScript& script);

struct ExpectedEvent {
  EventKind kind = EventKind::WatchDog;
  int roi_id = 0;
  int frame = 0;  ///< predicted emission frame
  friend bool operator==(const ExpectedEvent&, const ExpectedEvent&) = default;
};

struct ExpectedLabel {
  int frame = 0;
  PatternLabel label = PatternLabel::Stand;
  friend bool operator==(const ExpectedLabel&, const ExpectedLabel&) = default;
};

struct ExpectedOutcome {
  std::vector<ExpectedEvent> events;
  std::vector<ExpectedLabel> labels;
};

/// Event frames predicted from actor geometry under the engine's rules: calibration
/// threshold, per-kind refractory and the rectangle novelty filter.
///
/// Motion metrics count jitter-free pixels differing from the background inside each
/// motion ROI. The prediction assumes moving blobs never rest on a pixel long enough
/// to be absorbed. Scripts the rules cannot cover analytically throw std::invalid_argument:
/// pasted rectangles or fall actors inside motion ROIs, blobs or fall actors inside the
/// PhotoLink ROI, and actor contrast below 40 grey levels.
[[nodiscard]] ExpectedOutcome expected(const ScenarioScript& script, const std::vector<RoiRegion>& rois,
                                       const EngineConfig& config);

/// Labels for every frame showing a fall actor: Fall once rotation exceeds 45 degrees.
[[nodiscard]] std::vector<ExpectedLabel> expected_labels(const ScenarioScript& script);

/// `event<TAB>kind<TAB>roi_id<TAB>frame` and `label<TAB>frame<TAB>Fall|Stand` lines.
[[nodiscard]] std::string format_expected(const ExpectedOutcome& outcome);

/// Writes `frame_NNNNN.ppm` files; returns the paths in order. Throws IoError.
std::vector<std::filesystem::path> write_frames(const ScenarioScript& script, const std::filesystem::path& dir);

/// Renders frames on demand, in order.
class ScenarioSource final : public FrameSource {
 public:
  /// Throws ConfigError when the script is invalid.
  explicit ScenarioSource(ScenarioScript script);
  std::optional<FramePair> next_frame() override;

 private:
  ScenarioScript script_;
  int next_ = 0;
};

struct EventMatch {
  bool ok = false;
  std::string detail;  ///< first mismatch, for diagnostics
};

/// Pairs actual and expected events in order; each pair must agree in kind and ROI and lie
/// within `slack` frames. Actual events are located by timestamp / period.
[[nodiscard]] EventMatch match_events(const std::vector<ExpectedEvent>& expected,
                                      const std::vector<TriggeredEvent>& actual, TimestampMs period_ms,
                                      int slack = 2);

}  // namespace sentinel
