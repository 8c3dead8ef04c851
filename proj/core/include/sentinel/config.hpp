#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sentinel/event_engine.hpp"
#include "sentinel/notifier.hpp"
#include "sentinel/simulator.hpp"

namespace sentinel {

struct SourceConfig {
  std::filesystem::path dir;
  TimestampMs period_ms = 100;
  friend bool operator==(const SourceConfig&, const SourceConfig&) = default;
};

struct NotifyConfig {
  NotificationPolicy policy;
  std::string webhook_url;  ///< empty: social messages are not sent
  std::string message = "New photo on the wall";
  std::string voice_message = "Please watch your step";
  std::string voice_command;  ///< empty: voice alerts are only logged
  friend bool operator==(const NotifyConfig&, const NotifyConfig&) = default;
};

/// Optional posture classification of one ROI during `run`.
struct ClassifierConfig {
  std::filesystem::path model;
  int roi_id = 0;
  friend bool operator==(const ClassifierConfig&, const ClassifierConfig&) = default;
};

struct AppConfig {
  SourceConfig source;
  std::vector<RoiRegion> rois;
  EngineConfig engine;
  NotifyConfig notify;
  std::filesystem::path output_dir = "out";
  std::optional<ClassifierConfig> classifier;
  std::optional<ScenarioScript> scenario;

  /// Frame-size independent checks; ROI bounds are checked once the frame size is known.
  void validate() const;
  friend bool operator==(const AppConfig&, const AppConfig&) = default;
};

/// Relative paths resolve against `base_dir` when it is non-empty.
/// Throws ConfigError on syntax errors, unknown sections or keys, and invalid values.
[[nodiscard]] AppConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
/// Throws IoError when unreadable, ConfigError when invalid.
[[nodiscard]] AppConfig load_config(const std::filesystem::path& path);
[[nodiscard]] std::string serialize_config(const AppConfig& config);
void save_config(const std::filesystem::path& path, const AppConfig& config);

}  // namespace sentinel
