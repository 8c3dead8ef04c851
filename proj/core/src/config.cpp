#include "sentinel/config.hpp"

#include <fmt/format.h>

#include <fstream>
#include <limits>
#include <sstream>

#include "sentinel/error.hpp"
#include "sentinel/ini.hpp"

namespace sentinel {

namespace {

constexpr std::string_view kRoiPrefix = "roi.";
constexpr std::string_view kActorPrefix = "actor.";

std::filesystem::path resolve(const std::string& value, const std::filesystem::path& base) {
  std::filesystem::path p = value;
  if (!base.empty() && !p.empty() && p.is_relative()) p = base / p;
  return p;
}

template <typename T>
void read_into(SectionReader& r, std::string_view key, T& out, long long lo, long long hi) {
  if (const auto v = r.integer(key)) {
    if (*v < lo || *v > hi) {
      throw ConfigError(fmt::format("[{}] {}: {} outside [{}, {}]", r.name(), key, *v, lo, hi));
    }
    out = static_cast<T>(*v);
  }
}

void read_into(SectionReader& r, std::string_view key, double& out) {
  if (const auto v = r.number(key)) out = *v;
}

Rect read_rect(SectionReader& r, std::string_view key) {
  const auto v = r.integers(key);
  if (!v) throw ConfigError(fmt::format("[{}] missing required key '{}'", r.name(), key));
  if (v->size() != 4) throw ConfigError(fmt::format("[{}] {}: expected x,y,w,h", r.name(), key));
  return Rect{static_cast<int>((*v)[0]), static_cast<int>((*v)[1]), static_cast<int>((*v)[2]),
              static_cast<int>((*v)[3])};
}

std::pair<int, int> read_pair(SectionReader& r, std::string_view key) {
  const auto v = r.integers(key);
  if (!v) throw ConfigError(fmt::format("[{}] missing required key '{}'", r.name(), key));
  if (v->size() != 2) throw ConfigError(fmt::format("[{}] {}: expected two integers", r.name(), key));
  return {static_cast<int>((*v)[0]), static_cast<int>((*v)[1])};
}

std::string rect_text(const Rect& r) { return fmt::format("{},{},{},{}", r.x, r.y, r.w, r.h); }

std::vector<Waypoint> parse_path(const SectionReader& r, const std::string& text) {
  std::vector<Waypoint> out;
  std::istringstream in(text);
  std::string token;
  while (in >> token) {
    const auto colon = token.find(':');
    const auto comma = token.find(',');
    if (colon == std::string::npos || comma == std::string::npos || comma < colon) {
      throw ConfigError(fmt::format("[{}] path: expected 'frame:x,y' tokens, got '{}'", r.name(), token));
    }
    const auto f = parse_integer(token.substr(0, colon));
    const auto x = parse_integer(token.substr(colon + 1, comma - colon - 1));
    const auto y = parse_integer(token.substr(comma + 1));
    if (!f || !x || !y) throw ConfigError(fmt::format("[{}] path: bad waypoint '{}'", r.name(), token));
    out.push_back(Waypoint{static_cast<int>(*f), static_cast<int>(*x), static_cast<int>(*y)});
  }
  return out;
}

Actor read_actor(SectionReader& r, std::string name) {
  const auto type = r.text("type");
  if (!type) throw ConfigError(fmt::format("[{}] missing required key 'type'", r.name()));
  constexpr long long kMaxInt = std::numeric_limits<int>::max();
  if (*type == "blob") {
    MovingBlob b;
    b.name = std::move(name);
    std::tie(b.width, b.height) = read_pair(r, "size");
    read_into(r, "intensity", b.intensity, 0, 255);
    const auto path = r.text("path");
    if (!path) throw ConfigError(fmt::format("[{}] missing required key 'path'", r.name()));
    b.path = parse_path(r, *path);
    return b;
  }
  if (*type == "rect") {
    PastedRect p;
    p.name = std::move(name);
    p.rect = read_rect(r, "rect");
    read_into(r, "angle", p.angle_deg);
    read_into(r, "intensity", p.intensity, 0, 255);
    read_into(r, "appear", p.appear, 0, kMaxInt);
    if (const auto v = r.integer("remove")) p.remove = static_cast<int>(*v);
    return p;
  }
  if (*type == "fall") {
    FallActor a;
    a.name = std::move(name);
    std::tie(a.bar_width, a.bar_height) = read_pair(r, "bar");
    std::tie(a.pivot_x, a.pivot_y) = read_pair(r, "pivot");
    read_into(r, "fall_start", a.fall_start, 0, kMaxInt);
    read_into(r, "fall_end", a.fall_end, 0, kMaxInt);
    read_into(r, "intensity", a.intensity, 0, 255);
    read_into(r, "appear", a.appear, 0, kMaxInt);
    if (const auto v = r.integer("remove")) a.remove = static_cast<int>(*v);
    return a;
  }
  throw ConfigError(fmt::format("[{}] type: expected blob, rect or fall, got '{}'", r.name(), *type));
}

void write_actor(IniDocument& doc, const Actor& actor) {
  auto& s = doc.add_section(std::string(kActorPrefix) + actor_name(actor));
  auto put = [&s](std::string key, std::string value) { s.entries.push_back({std::move(key), std::move(value), 0}); };
  std::visit(
      [&](const auto& a) {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, MovingBlob>) {
          put("type", "blob");
          put("size", fmt::format("{},{}", a.width, a.height));
          put("intensity", std::to_string(a.intensity));
          std::string path;
          for (const auto& w : a.path) path += fmt::format("{}{}:{},{}", path.empty() ? "" : " ", w.frame, w.x, w.y);
          put("path", path);
        } else if constexpr (std::is_same_v<T, PastedRect>) {
          put("type", "rect");
          put("rect", rect_text(a.rect));
          put("angle", format_double(a.angle_deg));
          put("intensity", std::to_string(a.intensity));
          put("appear", std::to_string(a.appear));
          if (a.remove) put("remove", std::to_string(*a.remove));
        } else {
          put("type", "fall");
          put("bar", fmt::format("{},{}", a.bar_width, a.bar_height));
          put("pivot", fmt::format("{},{}", a.pivot_x, a.pivot_y));
          put("fall_start", std::to_string(a.fall_start));
          put("fall_end", std::to_string(a.fall_end));
          put("intensity", std::to_string(a.intensity));
          put("appear", std::to_string(a.appear));
          if (a.remove) put("remove", std::to_string(*a.remove));
        }
      },
      actor);
}

std::string_view calibration_name(CalibrationMode m) {
  return m == CalibrationMode::TenFrames ? "ten_frames" : "one_minute";
}

}  // namespace

void AppConfig::validate() const {
  validate_rois(rois);
  engine.validate();
  notify.policy.validate();
  if (source.period_ms < 1) throw ConfigError("[source] period_ms must be positive");
  if (classifier) {
    bool found = false;
    for (const auto& r : rois) found = found || r.id == classifier->roi_id;
    if (!found) throw ConfigError(fmt::format("[classifier] roi {} is not configured", classifier->roi_id));
    if (classifier->model.empty()) throw ConfigError("[classifier] model is required");
  }
  if (scenario) scenario->validate();
}

AppConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  const auto doc = IniDocument::parse(text);
  AppConfig cfg;
  cfg.output_dir = resolve(cfg.output_dir.string(), base_dir);
  constexpr long long kMaxInt = std::numeric_limits<int>::max();
  constexpr long long kMaxLong = std::numeric_limits<long long>::max();

  for (const auto& section : doc.sections()) {
    SectionReader r(section);
    const std::string& name = section.name;
    if (name == "source") {
      if (const auto v = r.text("dir")) cfg.source.dir = resolve(*v, base_dir);
      read_into(r, "period_ms", cfg.source.period_ms, 1, kMaxLong);
    } else if (name.starts_with(kRoiPrefix)) {
      const auto id = parse_integer(name.substr(kRoiPrefix.size()));
      if (!id || *id < 0 || *id > kMaxInt) throw ConfigError(fmt::format("[{}]: ROI id must be a non-negative integer", name));
      RoiRegion roi;
      roi.id = static_cast<int>(*id);
      const auto kind = r.text("kind");
      if (!kind) throw ConfigError(fmt::format("[{}] missing required key 'kind'", name));
      const auto parsed = parse_event_kind(*kind);
      if (!parsed) throw ConfigError(fmt::format("[{}] kind: unknown event kind '{}'", name, *kind));
      roi.kind = *parsed;
      roi.rect = read_rect(r, "rect");
      cfg.rois.push_back(roi);
    } else if (name == "background") {
      auto& b = cfg.engine.background;
      read_into(r, "components", b.components, 1, kMaxComponents);
      read_into(r, "learning_rate", b.learning_rate);
      read_into(r, "background_ratio", b.background_ratio);
      read_into(r, "match_sigmas", b.match_sigmas);
      read_into(r, "initial_variance", b.initial_variance);
      read_into(r, "initial_weight", b.initial_weight);
      read_into(r, "variance_floor", b.variance_floor);
      if (const auto v = r.text("rho_mode")) {
        if (*v == "density") {
          b.rho_mode = RhoMode::Density;
        } else if (*v == "simple") {
          b.rho_mode = RhoMode::Simple;
        } else {
          throw ConfigError(fmt::format("[background] rho_mode: expected density or simple, got '{}'", *v));
        }
      }
    } else if (name == "shape") {
      auto& s = cfg.engine.shape;
      read_into(r, "min_area_fraction", s.min_area_fraction);
      read_into(r, "dp_epsilon_fraction", s.dp_epsilon_fraction);
      read_into(r, "angle_tolerance_deg", s.angle_tolerance_deg);
      read_into(r, "fill_ratio_min", s.fill_ratio_min);
      read_into(r, "min_contrast", s.min_contrast, 0, 255);
    } else if (name == "engine") {
      auto& e = cfg.engine;
      if (const auto v = r.text("calibration")) {
        if (*v == "ten_frames") {
          e.calibration = CalibrationMode::TenFrames;
        } else if (*v == "one_minute") {
          e.calibration = CalibrationMode::OneMinute;
        } else {
          throw ConfigError(fmt::format("[engine] calibration: expected ten_frames or one_minute, got '{}'", *v));
        }
      }
      read_into(r, "refractory_ms", e.refractory_ms, 0, kMaxLong);
      read_into(r, "rect_expiry_ms", e.rect_expiry_ms, 0, kMaxLong);
      read_into(r, "iou_threshold", e.iou_threshold);
      if (const auto v = r.text("debug_dir")) e.debug_dir = resolve(*v, base_dir);
    } else if (name == "notify") {
      auto& n = cfg.notify;
      if (const auto v = r.text("webhook_url")) n.webhook_url = *v;
      if (const auto v = r.text("message")) n.message = *v;
      if (const auto v = r.text("voice_message")) n.voice_message = *v;
      if (const auto v = r.text("voice_command")) n.voice_command = *v;
      read_into(r, "deadline_ms", n.policy.deadline_ms, 0, kMaxLong);
      read_into(r, "social_window_ms", n.policy.social_window_ms, 0, kMaxLong);
      read_into(r, "voice_window_ms", n.policy.voice_window_ms, 0, kMaxLong);
      read_into(r, "max_retries", n.policy.max_retries, 0, 100);
      if (const auto v = r.integers("backoff_ms")) n.policy.backoff_ms.assign(v->begin(), v->end());
    } else if (name == "output") {
      if (const auto v = r.text("dir")) cfg.output_dir = resolve(*v, base_dir);
    } else if (name == "classifier") {
      ClassifierConfig c;
      if (const auto v = r.text("model")) c.model = resolve(*v, base_dir);
      read_into(r, "roi", c.roi_id, 0, kMaxInt);
      cfg.classifier = c;
    } else if (name == "scenario") {
      ScenarioScript s;
      if (cfg.scenario) s.actors = std::move(cfg.scenario->actors);
      read_into(r, "width", s.width, 1, 1 << 16);
      read_into(r, "height", s.height, 1, 1 << 16);
      read_into(r, "frames", s.frames, 0, kMaxInt);
      read_into(r, "period_ms", s.period_ms, 1, kMaxLong);
      read_into(r, "background", s.background, 0, 255);
      read_into(r, "jitter", s.jitter, 0, 127);
      read_into(r, "seed", s.seed, 0, kMaxLong);
      cfg.scenario = std::move(s);
    } else if (name.starts_with(kActorPrefix)) {
      if (!cfg.scenario) cfg.scenario = ScenarioScript{};
      cfg.scenario->actors.push_back(read_actor(r, name.substr(kActorPrefix.size())));
    } else {
      throw ConfigError(fmt::format("line {}: unknown section [{}]", section.line, name));
    }
    r.finish();
  }
  if (cfg.scenario && !doc.find("scenario")) throw ConfigError("actor sections need a [scenario] section");
  if (cfg.scenario && cfg.rois.empty()) {
    // A bare scenario script needs no ROIs.
    cfg.engine.validate();
    cfg.notify.policy.validate();
    cfg.scenario->validate();
  } else {
    cfg.validate();
  }
  return cfg;
}

AppConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str(), path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string serialize_config(const AppConfig& cfg) {
  IniDocument doc;
  auto section = [&doc](std::string name) {
    auto& s = doc.add_section(std::move(name));
    return [&s](std::string key, std::string value) { s.entries.push_back({std::move(key), std::move(value), 0}); };
  };
  {
    auto put = section("source");
    put("dir", cfg.source.dir.string());
    put("period_ms", std::to_string(cfg.source.period_ms));
  }
  for (const auto& roi : cfg.rois) {
    auto put = section(fmt::format("roi.{}", roi.id));
    put("kind", std::string(to_string(roi.kind)));
    put("rect", rect_text(roi.rect));
  }
  {
    const auto& b = cfg.engine.background;
    auto put = section("background");
    put("components", std::to_string(b.components));
    put("learning_rate", format_double(b.learning_rate));
    put("background_ratio", format_double(b.background_ratio));
    put("match_sigmas", format_double(b.match_sigmas));
    put("initial_variance", format_double(b.initial_variance));
    put("initial_weight", format_double(b.initial_weight));
    put("variance_floor", format_double(b.variance_floor));
    put("rho_mode", b.rho_mode == RhoMode::Density ? "density" : "simple");
  }
  {
    const auto& s = cfg.engine.shape;
    auto put = section("shape");
    put("min_area_fraction", format_double(s.min_area_fraction));
    put("dp_epsilon_fraction", format_double(s.dp_epsilon_fraction));
    put("angle_tolerance_deg", format_double(s.angle_tolerance_deg));
    put("fill_ratio_min", format_double(s.fill_ratio_min));
    put("min_contrast", std::to_string(s.min_contrast));
  }
  {
    const auto& e = cfg.engine;
    auto put = section("engine");
    put("calibration", std::string(calibration_name(e.calibration)));
    put("refractory_ms", std::to_string(e.refractory_ms));
    put("rect_expiry_ms", std::to_string(e.rect_expiry_ms));
    put("iou_threshold", format_double(e.iou_threshold));
    if (!e.debug_dir.empty()) put("debug_dir", e.debug_dir.string());
  }
  {
    const auto& n = cfg.notify;
    auto put = section("notify");
    if (!n.webhook_url.empty()) put("webhook_url", n.webhook_url);
    put("message", n.message);
    put("voice_message", n.voice_message);
    if (!n.voice_command.empty()) put("voice_command", n.voice_command);
    put("deadline_ms", std::to_string(n.policy.deadline_ms));
    put("social_window_ms", std::to_string(n.policy.social_window_ms));
    put("voice_window_ms", std::to_string(n.policy.voice_window_ms));
    put("max_retries", std::to_string(n.policy.max_retries));
    std::string backoff;
    for (auto v : n.policy.backoff_ms) backoff += (backoff.empty() ? "" : ",") + std::to_string(v);
    put("backoff_ms", backoff);
  }
  {
    auto put = section("output");
    put("dir", cfg.output_dir.string());
  }
  if (cfg.classifier) {
    auto put = section("classifier");
    put("model", cfg.classifier->model.string());
    put("roi", std::to_string(cfg.classifier->roi_id));
  }
  if (cfg.scenario) {
    const auto& s = *cfg.scenario;
    auto put = section("scenario");
    put("width", std::to_string(s.width));
    put("height", std::to_string(s.height));
    put("frames", std::to_string(s.frames));
    put("period_ms", std::to_string(s.period_ms));
    put("background", std::to_string(s.background));
    put("jitter", std::to_string(s.jitter));
    put("seed", std::to_string(s.seed));
    for (const auto& actor : s.actors) write_actor(doc, actor);
  }
  return doc.serialize();
}

void save_config(const std::filesystem::path& path, const AppConfig& config) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw IoError("cannot create " + path.string());
  out << serialize_config(config);
  if (!out) throw IoError("write failure on " + path.string());
}

}  // namespace sentinel
