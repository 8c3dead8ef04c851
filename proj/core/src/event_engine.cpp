#include "sentinel/event_engine.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "sentinel/error.hpp"
#include "sentinel/pnm.hpp"

namespace sentinel {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::WatchDog:
      return "WatchDog";
    case EventKind::DangerNotice:
      return "DangerNotice";
    case EventKind::PhotoLink:
      return "PhotoLink";
  }
  return "Unknown";
}

std::optional<EventKind> parse_event_kind(std::string_view text) {
  for (auto kind : kAllEventKinds) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

void EngineConfig::validate() const {
  background.validate();
  shape.validate();
  if (refractory_ms < 0) throw ConfigError("refractory_ms must be non-negative");
  if (rect_expiry_ms < 0) throw ConfigError("rect_expiry_ms must be non-negative");
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) throw ConfigError("iou_threshold must be in (0, 1]");
}

void validate_rois(std::span<const RoiRegion> rois, std::optional<std::pair<int, int>> frame_size) {
  if (rois.empty() || rois.size() > 3) throw ConfigError("between 1 and 3 ROIs are required");
  std::set<EventKind> kinds;
  std::set<int> ids;
  for (const auto& r : rois) {
    if (!kinds.insert(r.kind).second) {
      throw ConfigError("more than one ROI of kind " + std::string(to_string(r.kind)));
    }
    if (!ids.insert(r.id).second) throw ConfigError("duplicate ROI id " + std::to_string(r.id));
    if (r.rect.w < kMinRoiSide || r.rect.h < kMinRoiSide) {
      throw ConfigError("ROI " + std::to_string(r.id) + " is smaller than 8x8");
    }
    if (frame_size && !r.rect.fits_within(frame_size->first, frame_size->second)) {
      throw ConfigError("ROI " + std::to_string(r.id) + " lies outside the " + std::to_string(frame_size->first) +
                        "x" + std::to_string(frame_size->second) + " frame");
    }
  }
}

double calibrated_threshold(std::span<const double> samples, double roi_area) {
  const double floor = kThresholdFloorFraction * roi_area;
  if (samples.empty()) return floor;
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= static_cast<double>(samples.size());
  double var = 0.0;
  for (double s : samples) var += (s - mean) * (s - mean);
  var /= static_cast<double>(samples.size());
  return std::max(floor, mean + kThresholdSigmas * std::sqrt(var));
}

double iou(const Rect& a, const Rect& b) {
  const int x0 = std::max(a.x, b.x);
  const int y0 = std::max(a.y, b.y);
  const int x1 = std::min(a.right(), b.right());
  const int y1 = std::min(a.bottom(), b.bottom());
  const double inter = (x1 > x0 && y1 > y0) ? static_cast<double>(x1 - x0) * (y1 - y0) : 0.0;
  const double uni = static_cast<double>(a.area()) + static_cast<double>(b.area()) - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

std::vector<Quadrilateral> novelty_filter(std::span<const Quadrilateral> detected, KnownRectSet& known,
                                          TimestampMs now, double iou_threshold) {
  std::erase_if(known.entries,
                [&](const KnownRect& k) { return now - k.last_seen > known.expiry_ms; });
  const std::size_t prior = known.entries.size();
  std::vector<Quadrilateral> fresh;
  for (const auto& q : detected) {
    const Rect box = q.bounding_box();
    bool seen = false;
    for (std::size_t i = 0; i < prior; ++i) {
      if (iou(box, known.entries[i].box) >= iou_threshold) {
        known.entries[i].last_seen = now;
        seen = true;
      }
    }
    if (!seen) {
      fresh.push_back(q);
      known.entries.push_back(KnownRect{box, now});
    }
  }
  return fresh;
}

namespace {

EngineConfig validated(EngineConfig config) {
  config.validate();
  return config;
}

}  // namespace

EventEngine::EventEngine(std::vector<RoiRegion> rois, int width, int height, EngineConfig config)
    : width_(width),
      height_(height),
      config_(validated(std::move(config))),
      rois_(std::move(rois)),
      model_(width, height, config_.background) {
  validate_rois(rois_, std::pair{width, height});
  for (const auto& r : rois_) states_.push_back(RoiState{r, {}, 0.0});
  known_.expiry_ms = config_.rect_expiry_ms;
  if (!config_.debug_dir.empty()) std::filesystem::create_directories(config_.debug_dir);
}

void EventEngine::set_metric_trace(std::ostream* out) {
  trace_ = out;
  if (trace_) *trace_ << "frame_ts,roi_id,metric,threshold\n";
}

ForegroundMask EventEngine::advance_model(const GrayFrame& gray) {
  ForegroundMask mask = model_.apply(gray);
  if (!config_.debug_dir.empty()) {
    write_pnm_file(config_.debug_dir / ("mask_" + std::to_string(gray.timestamp) + ".pgm"),
                   mask_to_image(mask));
  }
  return mask;
}

CalibrationProgress EventEngine::calibrate_step(const GrayFrame& frame) {
  if (!calibrating_) return CalibrationProgress{calibration_frames_, true, false};
  if (config_.calibration == CalibrationMode::OneMinute && frame.timestamp >= kOneMinuteWindowMs) {
    finish_calibration();
    return CalibrationProgress{calibration_frames_, true, false};
  }
  last_mask_ = advance_model(frame);
  for (auto& s : states_) {
    if (is_motion_kind(s.roi.kind)) {
      s.samples.push_back(static_cast<double>(foreground_area(last_mask_, s.roi.rect)));
    } else {
      // Rectangles visible while calibrating are treated as pre-existing.
      const auto rects = detect_rectangles(frame, s.roi.rect, config_.shape);
      novelty_filter(rects, known_, frame.timestamp, config_.iou_threshold);
    }
  }
  ++calibration_frames_;
  if (config_.calibration == CalibrationMode::TenFrames && calibration_frames_ >= kTenFrameWindow) {
    finish_calibration();
  }
  return CalibrationProgress{calibration_frames_, !calibrating_, true};
}

void EventEngine::finish_calibration() {
  for (auto& s : states_) {
    if (is_motion_kind(s.roi.kind)) {
      s.threshold = calibrated_threshold(s.samples, static_cast<double>(s.roi.rect.area()));
    }
  }
  calibrating_ = false;
}

std::optional<double> EventEngine::threshold(int roi_id) const {
  if (calibrating_) return std::nullopt;
  for (const auto& s : states_) {
    if (s.roi.id == roi_id && is_motion_kind(s.roi.kind)) return s.threshold;
  }
  return std::nullopt;
}

void EventEngine::set_threshold(int roi_id, double value) {
  if (calibrating_) finish_calibration();
  for (auto& s : states_) {
    if (s.roi.id == roi_id && is_motion_kind(s.roi.kind)) {
      s.threshold = value;
      return;
    }
  }
  throw ConfigError("no motion ROI with id " + std::to_string(roi_id));
}

bool EventEngine::refractory(EventKind kind, TimestampMs now) const {
  const auto& last = last_emitted_[static_cast<std::size_t>(kind)];
  return last && now - *last < config_.refractory_ms;
}

std::vector<TriggeredEvent> EventEngine::step(const GrayFrame& gray, const ColorFrame& color) {
  if (calibrating_) throw ConfigError("step() called before calibration completed");
  if (color.width != width_ || color.height != height_) {
    throw ConfigError("color frame does not match the configured dimensions");
  }
  last_mask_ = advance_model(gray);
  const TimestampMs now = gray.timestamp;
  std::vector<TriggeredEvent> events;
  for (const auto& s : states_) {
    const EventKind kind = s.roi.kind;
    if (is_motion_kind(kind)) {
      const long area = foreground_area(last_mask_, s.roi.rect);
      if (trace_) *trace_ << now << ',' << s.roi.id << ',' << area << ',' << s.threshold << '\n';
      if (static_cast<double>(area) > s.threshold && !refractory(kind, now)) {
        events.push_back(TriggeredEvent{kind, s.roi.id, now, area, s.threshold, {}});
        last_emitted_[static_cast<std::size_t>(kind)] = now;
      }
    } else if (!refractory(kind, now)) {
      const auto rects = detect_rectangles(gray, s.roi.rect, config_.shape);
      auto fresh = novelty_filter(rects, known_, now, config_.iou_threshold);
      if (!fresh.empty()) {
        const long count = static_cast<long>(fresh.size());
        events.push_back(TriggeredEvent{kind, s.roi.id, now, count, 0.0, std::move(fresh)});
        last_emitted_[static_cast<std::size_t>(kind)] = now;
      }
    }
  }
  return events;
}

std::vector<TriggeredEvent> EventEngine::process(const GrayFrame& gray, const ColorFrame& color) {
  if (calibrating_) {
    const auto progress = calibrate_step(gray);
    if (progress.consumed) return {};
  }
  return step(gray, color);
}

}  // namespace sentinel
