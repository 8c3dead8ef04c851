#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sentinel/config.hpp"
#include "sentinel/event_engine.hpp"
#include "sentinel/fall_classifier.hpp"
#include "sentinel/frame_source.hpp"
#include "sentinel/notifier.hpp"
#include "sentinel/recorder.hpp"

namespace sentinel {

/// Collaborators the pipeline talks to; null members select the defaults
/// (HTTP transport when a webhook URL is set, shell or log-only voice sink, steady clock).
struct MonitorDeps {
  std::shared_ptr<Transport> transport;
  std::shared_ptr<VoiceSink> voice;
  std::shared_ptr<Clock> clock;
};

struct RunOptions {
  /// Log wall-clock ISO timestamps: event time = start_epoch_ms + stream time.
  bool wall_clock = false;
  TimestampMs start_epoch_ms = 0;
};

struct RunSummary {
  long frames = 0;
  std::array<long, 3> events{};
  long record_failures = 0;
  long alerts_submitted = 0;
  long alerts_suppressed = 0;
  std::vector<TriggeredEvent> triggered;

  [[nodiscard]] long count(EventKind kind) const { return events[static_cast<std::size_t>(kind)]; }
};

/// One line per kind, e.g. "WatchDog: 1".
[[nodiscard]] std::string render_summary(const RunSummary& summary);

/// Engine -> recorder -> alert scheduler -> asynchronous dispatcher, plus optional
/// posture classification. The engine is built on the first frame, once its size is known.
class Monitor {
 public:
  /// Validates the config and loads the classifier model. Throws ConfigError or IoError.
  Monitor(AppConfig config, MonitorDeps deps = {}, RunOptions options = {});
  ~Monitor();
  Monitor(const Monitor&) = delete;
  Monitor& operator=(const Monitor&) = delete;

  std::vector<TriggeredEvent> process(const FramePair& frame);
  /// Waits for pending notifications and flushes routing lists.
  RunSummary finish();

  [[nodiscard]] const RunSummary& summary() const { return summary_; }
  [[nodiscard]] const EventEngine* engine() const { return engine_.get(); }

 private:
  void handle(const TriggeredEvent& event, const ColorFrame& color);

  AppConfig config_;
  RunOptions options_;
  std::unique_ptr<EventEngine> engine_;
  Recorder recorder_;
  AlertScheduler scheduler_;
  std::unique_ptr<NotificationDispatcher> dispatcher_;
  std::optional<DayClassifier> classifier_;
  Rect classifier_roi_;
  RunSummary summary_;
};

/// Drives `source` to exhaustion through a Monitor.
RunSummary run_monitor(FrameSource& source, const AppConfig& config, MonitorDeps deps = {}, RunOptions options = {});

}  // namespace sentinel
