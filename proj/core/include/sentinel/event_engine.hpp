#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sentinel/background_model.hpp"
#include "sentinel/frame.hpp"
#include "sentinel/shape_detector.hpp"

namespace sentinel {

enum class EventKind { WatchDog, DangerNotice, PhotoLink };

inline constexpr std::array<EventKind, 3> kAllEventKinds{EventKind::WatchDog, EventKind::DangerNotice,
                                                         EventKind::PhotoLink};

[[nodiscard]] std::string_view to_string(EventKind kind);
[[nodiscard]] std::optional<EventKind> parse_event_kind(std::string_view text);
[[nodiscard]] constexpr bool is_motion_kind(EventKind kind) { return kind != EventKind::PhotoLink; }

struct RoiRegion {
  int id = 0;
  EventKind kind = EventKind::WatchDog;
  Rect rect;
  friend bool operator==(const RoiRegion&, const RoiRegion&) = default;
};

inline constexpr int kMinRoiSide = 8;

/// Throws ConfigError for 0 or more than 3 ROIs, repeated kinds or ids, or sides below 8 px.
/// With a frame size, also for ROIs leaving the frame.
void validate_rois(std::span<const RoiRegion> rois, std::optional<std::pair<int, int>> frame_size = {});

enum class CalibrationMode {
  TenFrames,  ///< the first 10 frames
  OneMinute,  ///< every frame stamped before 60 000 ms
};

struct EngineConfig {
  BackgroundParams background;
  ShapeParams shape;
  CalibrationMode calibration = CalibrationMode::TenFrames;
  TimestampMs refractory_ms = 2000;
  TimestampMs rect_expiry_ms = 10 * 60 * 1000;
  double iou_threshold = 0.5;
  /// Foreground masks are dumped here as P5 when non-empty.
  std::filesystem::path debug_dir;

  void validate() const;
  friend bool operator==(const EngineConfig&, const EngineConfig&) = default;
};

inline constexpr int kTenFrameWindow = 10;
inline constexpr TimestampMs kOneMinuteWindowMs = 60'000;
inline constexpr double kThresholdFloorFraction = 0.005;
inline constexpr double kThresholdSigmas = 3.0;

/// max(0.005 * roi_area, mean + 3 * population stddev); the floor alone for no samples.
[[nodiscard]] double calibrated_threshold(std::span<const double> samples, double roi_area);

struct CalibrationProgress {
  int frames = 0;         ///< frames sampled so far
  bool complete = false;  ///< thresholds are final
  bool consumed = true;   ///< false when the frame closed the window without being sampled
};

struct TriggeredEvent {
  EventKind kind = EventKind::WatchDog;
  int roi_id = 0;
  TimestampMs timestamp = 0;
  /// Foreground pixels for motion kinds; new rectangle count for PhotoLink.
  long metric = 0;
  double threshold = 0.0;
  std::vector<Quadrilateral> rectangles;
  friend bool operator==(const TriggeredEvent&, const TriggeredEvent&) = default;
};

struct KnownRect {
  Rect box;
  TimestampMs last_seen = 0;
};

struct KnownRectSet {
  std::vector<KnownRect> entries;
  TimestampMs expiry_ms = 10 * 60 * 1000;
};

/// Intersection over union of two pixel rectangles.
[[nodiscard]] double iou(const Rect& a, const Rect& b);

/// Returns the detections whose bounding box overlaps every known rectangle with
/// IoU below `iou_threshold`. Entries unseen for longer than the expiry are pruned
/// first; matched entries are refreshed and new ones added.
std::vector<Quadrilateral> novelty_filter(std::span<const Quadrilateral> detected, KnownRectSet& known,
                                          TimestampMs now, double iou_threshold = 0.5);

/// Per-frame ROI event detection: calibration, motion thresholds, rectangle novelty
/// and per-kind refractory suppression.
class EventEngine {
 public:
  /// Throws ConfigError when validate_rois() rejects the ROIs for this frame size.
  EventEngine(std::vector<RoiRegion> rois, int width, int height, EngineConfig config);

  /// Samples one calibration frame. Once the window closes, thresholds are fixed.
  CalibrationProgress calibrate_step(const GrayFrame& frame);

  /// Requires completed calibration. Advances the background model exactly once.
  std::vector<TriggeredEvent> step(const GrayFrame& gray, const ColorFrame& color);

  /// Routes the frame to calibrate_step or step as appropriate.
  std::vector<TriggeredEvent> process(const GrayFrame& gray, const ColorFrame& color);

  [[nodiscard]] bool calibrating() const { return calibrating_; }
  [[nodiscard]] std::optional<double> threshold(int roi_id) const;
  /// Overrides a motion ROI's threshold (finishes calibration if still running).
  void set_threshold(int roi_id, double value);
  [[nodiscard]] const std::vector<RoiRegion>& rois() const { return rois_; }
  [[nodiscard]] const EngineConfig& config() const { return config_; }
  [[nodiscard]] const ForegroundMask& last_mask() const { return last_mask_; }
  [[nodiscard]] const BackgroundModel& background() const { return model_; }
  [[nodiscard]] const KnownRectSet& known_rects() const { return known_; }
  [[nodiscard]] int width() const { return width_; }
  [[nodiscard]] int height() const { return height_; }

  /// CSV rows `frame_ts,roi_id,metric,threshold` for every motion ROI on every step.
  void set_metric_trace(std::ostream* out);

 private:
  struct RoiState {
    RoiRegion roi;
    std::vector<double> samples;
    double threshold = 0.0;
  };

  ForegroundMask advance_model(const GrayFrame& gray);
  void finish_calibration();
  [[nodiscard]] bool refractory(EventKind kind, TimestampMs now) const;

  int width_;
  int height_;
  EngineConfig config_;
  std::vector<RoiRegion> rois_;
  std::vector<RoiState> states_;
  BackgroundModel model_;
  ForegroundMask last_mask_;
  KnownRectSet known_;
  bool calibrating_ = true;
  int calibration_frames_ = 0;
  std::array<std::optional<TimestampMs>, 3> last_emitted_{};
  std::ostream* trace_ = nullptr;
};

}  // namespace sentinel
