#include "sentinel/simulator.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>

#include "sentinel/error.hpp"
#include "sentinel/pnm.hpp"

namespace sentinel {

namespace {

struct Vec2 {
  double x;
  double y;
};
using Polygon = std::array<Vec2, 4>;

// Calls fn(x, y) for every pixel whose centre lies inside the convex polygon.
template <typename Fn>
void for_each_covered(const Polygon& poly, Fn&& fn) {
  double min_y = poly[0].y, max_y = poly[0].y;
  for (const auto& p : poly) {
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  for (int y = static_cast<int>(std::floor(min_y)) - 1; y <= static_cast<int>(std::ceil(max_y)); ++y) {
    const double yc = y + 0.5;
    std::array<double, 4> xs{};
    int n = 0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Vec2& a = poly[i];
      const Vec2& b = poly[(i + 1) % poly.size()];
      if ((a.y <= yc && yc < b.y) || (b.y <= yc && yc < a.y)) {
        xs[n++] = a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y);
      }
    }
    if (n < 2) continue;
    std::sort(xs.begin(), xs.begin() + n);
    const int x0 = static_cast<int>(std::ceil(xs[0] - 0.5));
    const int x1 = static_cast<int>(std::ceil(xs[n - 1] - 0.5));
    for (int x = x0; x < x1; ++x) fn(x, y);
  }
}

Polygon rotated_rect(const Rect& r, double angle_deg) {
  const double cx = r.x + r.w / 2.0;
  const double cy = r.y + r.h / 2.0;
  const double t = angle_deg * std::numbers::pi / 180.0;
  const double c = std::cos(t), s = std::sin(t);
  const double hw = r.w / 2.0, hh = r.h / 2.0;
  const std::array<Vec2, 4> local{{{-hw, -hh}, {hw, -hh}, {hw, hh}, {-hw, hh}}};
  Polygon out{};
  for (std::size_t i = 0; i < 4; ++i) {
    out[i] = {cx + local[i].x * c - local[i].y * s, cy + local[i].x * s + local[i].y * c};
  }
  return out;
}

Polygon fall_polygon(const FallActor& a, int f) {
  const double t = fall_angle(a, f) * std::numbers::pi / 180.0;
  const double c = std::cos(t), s = std::sin(t);
  const double hw = a.bar_width / 2.0;
  const std::array<Vec2, 4> local{{{-hw, 0.0}, {hw, 0.0}, {hw, -static_cast<double>(a.bar_height)},
                                   {-hw, -static_cast<double>(a.bar_height)}}};
  Polygon out{};
  for (std::size_t i = 0; i < 4; ++i) {
    out[i] = {a.pivot_x + local[i].x * c - local[i].y * s, a.pivot_y + local[i].x * s + local[i].y * c};
  }
  return out;
}

Polygon actor_polygon(const Actor& actor, int f) {
  return std::visit(
      [f](const auto& a) -> Polygon {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, MovingBlob>) {
          const Point p = blob_position(a, f);
          return rotated_rect(Rect{p.x, p.y, a.width, a.height}, 0.0);
        } else if constexpr (std::is_same_v<T, PastedRect>) {
          return rotated_rect(a.rect, a.angle_deg);
        } else {
          return fall_polygon(a, f);
        }
      },
      actor);
}

std::uint8_t actor_intensity(const Actor& actor) {
  return std::visit([](const auto& a) { return a.intensity; }, actor);
}

bool overlaps(const Rect& a, const Rect& b) {
  return a.x < b.right() && b.x < a.right() && a.y < b.bottom() && b.y < a.bottom();
}

bool inside(const Rect& inner, const Rect& outer) {
  return inner.x >= outer.x && inner.y >= outer.y && inner.right() <= outer.right() &&
         inner.bottom() <= outer.bottom();
}

bool in_calibration(const EngineConfig& config, int f, TimestampMs period) {
  if (config.calibration == CalibrationMode::TenFrames) return f < kTenFrameWindow;
  return static_cast<TimestampMs>(f) * period < kOneMinuteWindowMs;
}

}  // namespace

const std::string& actor_name(const Actor& actor) {
  return std::visit([](const auto& a) -> const std::string& { return a.name; }, actor);
}

bool actor_visible(const Actor& actor, int f) {
  return std::visit(
      [f](const auto& a) {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, MovingBlob>) {
          return !a.path.empty() && f >= a.path.front().frame && f <= a.path.back().frame;
        } else {
          return f >= a.appear && (!a.remove || f < *a.remove);
        }
      },
      actor);
}

Point blob_position(const MovingBlob& blob, int f) {
  if (blob.path.empty()) throw std::invalid_argument("blob '" + blob.name + "' has no waypoints");
  if (f <= blob.path.front().frame) return {blob.path.front().x, blob.path.front().y};
  for (std::size_t i = 0; i + 1 < blob.path.size(); ++i) {
    const Waypoint& a = blob.path[i];
    const Waypoint& b = blob.path[i + 1];
    if (f > b.frame) continue;
    const double t = static_cast<double>(f - a.frame) / (b.frame - a.frame);
    return {a.x + static_cast<int>(std::lround((b.x - a.x) * t)), a.y + static_cast<int>(std::lround((b.y - a.y) * t))};
  }
  return {blob.path.back().x, blob.path.back().y};
}

double fall_angle(const FallActor& actor, int f) {
  if (f <= actor.fall_start) return 0.0;
  if (f >= actor.fall_end) return 90.0;
  return 90.0 * static_cast<double>(f - actor.fall_start) / (actor.fall_end - actor.fall_start);
}

Rect actor_bounds(const Actor& actor, int f) {
  int x0 = INT32_MAX, y0 = INT32_MAX, x1 = INT32_MIN, y1 = INT32_MIN;
  for_each_covered(actor_polygon(actor, f), [&](int x, int y) {
    x0 = std::min(x0, x);
    y0 = std::min(y0, y);
    x1 = std::max(x1, x);
    y1 = std::max(y1, y);
  });
  if (x1 < x0) return Rect{};
  return Rect{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

void ScenarioScript::validate() const {
  if (width < 1 || height < 1) throw ConfigError("scenario frame size must be positive");
  if (frames < 1) throw ConfigError("scenario must have at least one frame");
  if (period_ms < 1) throw ConfigError("scenario period_ms must be positive");
  if (jitter < 0 || jitter > 127) throw ConfigError("scenario jitter must be in [0, 127]");
  std::map<std::string, int> names;
  for (const auto& actor : actors) {
    const std::string& name = actor_name(actor);
    auto fail = [&](const std::string& why) { throw ConfigError("actor '" + name + "': " + why); };
    if (name.empty()) throw ConfigError("actor without a name");
    if (names[name]++ > 0) fail("duplicate name");
    std::visit(
        [&](const auto& a) {
          using T = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<T, MovingBlob>) {
            if (a.width < 1 || a.height < 1) fail("size must be positive");
            if (a.path.empty()) fail("needs at least one waypoint");
            for (std::size_t i = 1; i < a.path.size(); ++i) {
              if (a.path[i].frame <= a.path[i - 1].frame) fail("waypoint frames must increase");
            }
            if (a.path.front().frame < 0 || a.path.back().frame >= frames) fail("waypoints outside the frame span");
          } else {
            if (a.appear < 0 || a.appear >= frames) fail("appear frame outside the frame span");
            if (a.remove && (*a.remove <= a.appear || *a.remove > frames)) fail("remove frame out of range");
            if constexpr (std::is_same_v<T, PastedRect>) {
              if (a.rect.w < 1 || a.rect.h < 1) fail("rectangle size must be positive");
            } else {
              if (a.bar_width < 1 || a.bar_height < 1) fail("bar size must be positive");
              if (a.fall_end <= a.fall_start) fail("fall_end must follow fall_start");
            }
          }
        },
        actor);
    for (int f = 0; f < frames; ++f) {
      if (!actor_visible(actor, f)) continue;
      const Rect b = actor_bounds(actor, f);
      if (b.area() == 0 || !b.fits_within(width, height)) {
        fail(fmt::format("leaves the {}x{} frame at frame {}", width, height, f));
      }
    }
  }
}

ColorFrame render_frame(const ScenarioScript& script, int f) {
  GrayFrame g(script.width, script.height, script.background, static_cast<TimestampMs>(f) * script.period_ms);
  for (const auto& actor : script.actors) {
    if (!actor_visible(actor, f)) continue;
    const std::uint8_t v = actor_intensity(actor);
    for_each_covered(actor_polygon(actor, f), [&](int x, int y) {
      if (x >= 0 && y >= 0 && x < g.width && y < g.height) g.at(x, y) = v;
    });
  }
  if (script.jitter > 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(script.seed), static_cast<std::uint32_t>(script.seed >> 32),
                      static_cast<std::uint32_t>(f)};
    std::mt19937 rng(seq);
    std::uniform_int_distribution<int> noise(-script.jitter, script.jitter);
    for (auto& p : g.pixels) p = static_cast<std::uint8_t>(std::clamp(p + noise(rng), 0, 255));
  }
  return to_color(g);
}

std::vector<ColorFrame> render(const ScenarioScript& script) {
  script.validate();
  std::vector<ColorFrame> out;
  out.reserve(static_cast<std::size_t>(script.frames));
  for (int f = 0; f < script.frames; ++f) out.push_back(render_frame(script, f));
  return out;
}

std::vector<ExpectedLabel> expected_labels(const ScenarioScript& script) {
  std::vector<ExpectedLabel> labels;
  for (const auto& actor : script.actors) {
    const auto* fa = std::get_if<FallActor>(&actor);
    if (!fa) continue;
    for (int f = 0; f < script.frames; ++f) {
      if (!actor_visible(actor, f)) continue;
      labels.push_back({f, fall_angle(*fa, f) > 45.0 ? PatternLabel::Fall : PatternLabel::Stand});
    }
  }
  std::stable_sort(labels.begin(), labels.end(), [](const auto& a, const auto& b) { return a.frame < b.frame; });
  return labels;
}

ExpectedOutcome expected(const ScenarioScript& script, const std::vector<RoiRegion>& rois,
                         const EngineConfig& config) {
  script.validate();
  for (const auto& actor : script.actors) {
    const std::string& name = actor_name(actor);
    const int contrast = std::abs(static_cast<int>(actor_intensity(actor)) - script.background);
    if (contrast < 40) throw std::invalid_argument("oracle: actor '" + name + "' has contrast below 40");
    for (int f = 0; f < script.frames; ++f) {
      if (!actor_visible(actor, f)) continue;
      const Rect b = actor_bounds(actor, f);
      for (const auto& roi : rois) {
        if (!overlaps(b, roi.rect)) continue;
        const bool blob = std::holds_alternative<MovingBlob>(actor);
        const bool rect = std::holds_alternative<PastedRect>(actor);
        if (is_motion_kind(roi.kind) && !blob) {
          throw std::invalid_argument("oracle: static actor '" + name + "' overlaps a motion ROI");
        }
        if (!is_motion_kind(roi.kind) && (!rect || !inside(b, roi.rect))) {
          throw std::invalid_argument("oracle: actor '" + name + "' is not a rectangle fully inside the PhotoLink ROI");
        }
      }
    }
  }

  ExpectedOutcome out;
  out.labels = expected_labels(script);

  auto motion_metric = [&](const Rect& roi, int f) {
    long count = 0;
    GrayFrame g(script.width, script.height, script.background);
    for (const auto& actor : script.actors) {
      if (!actor_visible(actor, f)) continue;
      const std::uint8_t v = actor_intensity(actor);
      for_each_covered(actor_polygon(actor, f), [&](int x, int y) { g.at(x, y) = v; });
    }
    for (int y = roi.y; y < roi.bottom(); ++y) {
      for (int x = roi.x; x < roi.right(); ++x) count += g.at(x, y) != script.background;
    }
    return count;
  };
  auto photo_boxes = [&](const Rect& roi, int f) {
    std::vector<Quadrilateral> quads;
    for (const auto& actor : script.actors) {
      if (!std::holds_alternative<PastedRect>(actor) || !actor_visible(actor, f)) continue;
      const Rect b = actor_bounds(actor, f);
      if (!overlaps(b, roi)) continue;
      quads.push_back(Quadrilateral{{Point{b.x, b.y}, Point{b.right() - 1, b.y}, Point{b.right() - 1, b.bottom() - 1},
                                     Point{b.x, b.bottom() - 1}}});
    }
    return quads;
  };

  std::vector<std::vector<double>> samples(rois.size());
  std::vector<double> thresholds(rois.size(), 0.0);
  KnownRectSet known;
  known.expiry_ms = config.rect_expiry_ms;
  std::array<std::optional<TimestampMs>, 3> last{};
  bool calibrating = true;
  for (int f = 0; f < script.frames; ++f) {
    const TimestampMs ts = static_cast<TimestampMs>(f) * script.period_ms;
    if (calibrating && in_calibration(config, f, script.period_ms)) {
      for (std::size_t i = 0; i < rois.size(); ++i) {
        if (is_motion_kind(rois[i].kind)) {
          // The first frame only seeds the background model.
          samples[i].push_back(f == 0 ? 0.0 : static_cast<double>(motion_metric(rois[i].rect, f)));
        } else {
          (void)novelty_filter(photo_boxes(rois[i].rect, f), known, ts, config.iou_threshold);
        }
      }
      if (config.calibration == CalibrationMode::TenFrames && f + 1 < kTenFrameWindow) continue;
      if (config.calibration == CalibrationMode::OneMinute && in_calibration(config, f + 1, script.period_ms)) {
        continue;
      }
      for (std::size_t i = 0; i < rois.size(); ++i) {
        thresholds[i] = calibrated_threshold(samples[i], static_cast<double>(rois[i].rect.area()));
      }
      calibrating = false;
      continue;
    }
    for (std::size_t i = 0; i < rois.size(); ++i) {
      const auto kind = rois[i].kind;
      auto& last_ts = last[static_cast<std::size_t>(kind)];
      const bool quiet = last_ts && ts - *last_ts < config.refractory_ms;
      if (quiet) continue;
      bool fire = false;
      if (is_motion_kind(kind)) {
        fire = static_cast<double>(motion_metric(rois[i].rect, f)) > thresholds[i];
      } else {
        fire = !novelty_filter(photo_boxes(rois[i].rect, f), known, ts, config.iou_threshold).empty();
      }
      if (fire) {
        out.events.push_back({kind, rois[i].id, f});
        last_ts = ts;
      }
    }
  }
  return out;
}

std::string format_expected(const ExpectedOutcome& outcome) {
  std::string s;
  for (const auto& e : outcome.events) s += fmt::format("event\t{}\t{}\t{}\n", to_string(e.kind), e.roi_id, e.frame);
  for (const auto& l : outcome.labels) s += fmt::format("label\t{}\t{}\n", l.frame, to_string(l.label));
  return s;
}

std::vector<std::filesystem::path> write_frames(const ScenarioScript& script, const std::filesystem::path& dir) {
  script.validate();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> paths;
  for (int f = 0; f < script.frames; ++f) {
    auto path = dir / fmt::format("frame_{:05d}.ppm", f);
    write_pnm_file(path, render_frame(script, f));
    paths.push_back(std::move(path));
  }
  return paths;
}

EventMatch match_events(const std::vector<ExpectedEvent>& expected_events, const std::vector<TriggeredEvent>& actual,
                        TimestampMs period_ms, int slack) {
  using Key = std::pair<int, int>;
  std::map<Key, std::vector<int>> want, got;
  for (const auto& e : expected_events) want[{static_cast<int>(e.kind), e.roi_id}].push_back(e.frame);
  for (const auto& e : actual) {
    got[{static_cast<int>(e.kind), e.roi_id}].push_back(static_cast<int>(e.timestamp / period_ms));
  }
  auto describe = [](const Key& k) {
    return fmt::format("{} ROI {}", to_string(static_cast<EventKind>(k.first)), k.second);
  };
  for (const auto& [key, frames] : got) {
    if (!want.count(key)) return {false, fmt::format("unexpected {} events for {}", frames.size(), describe(key))};
  }
  for (const auto& [key, frames] : want) {
    const auto& actual_frames = got[key];
    if (actual_frames.size() != frames.size()) {
      return {false, fmt::format("{}: expected {} events, got {}", describe(key), frames.size(), actual_frames.size())};
    }
    for (std::size_t i = 0; i < frames.size(); ++i) {
      if (std::abs(actual_frames[i] - frames[i]) > slack) {
        return {false, fmt::format("{}: event {} at frame {}, expected {}", describe(key), i, actual_frames[i], frames[i])};
      }
    }
  }
  return {true, {}};
}

ScenarioSource::ScenarioSource(ScenarioScript script) : script_(std::move(script)) { script_.validate(); }

std::optional<FramePair> ScenarioSource::next_frame() {
  if (next_ >= script_.frames) return std::nullopt;
  return make_frame_pair(render_frame(script_, next_++));
}

}  // namespace sentinel
