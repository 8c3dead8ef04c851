#include "sentinel/monitor.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "sentinel/error.hpp"

namespace sentinel {

namespace {

class LogVoiceSink final : public VoiceSink {
 public:
  bool play(const AlertCommand& command) override {
    spdlog::info("voice alert: {} (ROI {}, t={})", command.message, command.event.roi_id, command.event.timestamp);
    return true;
  }
};

AppConfig checked(AppConfig config) {
  config.validate();
  return config;
}

}  // namespace

std::string render_summary(const RunSummary& summary) {
  std::string out;
  for (auto kind : kAllEventKinds) out += fmt::format("{}: {}\n", to_string(kind), summary.count(kind));
  return out;
}

Monitor::Monitor(AppConfig config, MonitorDeps deps, RunOptions options)
    : config_(checked(std::move(config))),
      options_(options),
      recorder_(config_.output_dir, options.wall_clock ? TimestampStyle::WallClockIso : TimestampStyle::StreamMs),
      scheduler_(config_.notify.policy, config_.notify.message, config_.notify.voice_message) {
  std::error_code ec;
  std::filesystem::create_directories(config_.output_dir, ec);
  if (ec) throw IoError("cannot create output directory " + config_.output_dir.string() + ": " + ec.message());

  if (!deps.transport && !config_.notify.webhook_url.empty()) deps.transport = std::make_shared<HttpWebhookTransport>();
  if (!deps.voice) {
    if (config_.notify.voice_command.empty()) {
      deps.voice = std::make_shared<LogVoiceSink>();
    } else {
      deps.voice = std::make_shared<CommandVoiceSink>(config_.notify.voice_command);
    }
  }
  if (!deps.clock) deps.clock = std::make_shared<SteadyClock>();
  dispatcher_ = std::make_unique<NotificationDispatcher>(
      deps.transport, deps.voice, deps.clock, config_.notify.policy, webhook_target_from_env(config_.notify.webhook_url),
      config_.output_dir / "notify.log");

  if (config_.classifier) {
    auto model = load_model(config_.classifier->model);
    if (model.dimension() != static_cast<std::size_t>(kFeatureDim)) {
      throw ConfigError(fmt::format("classifier model has dimension {}, expected {}", model.dimension(), kFeatureDim));
    }
    for (const auto& r : config_.rois) {
      if (r.id == config_.classifier->roi_id) classifier_roi_ = r.rect;
    }
    classifier_.emplace(std::move(model), classifier_roi_, config_.output_dir);
  }
}

Monitor::~Monitor() = default;

std::vector<TriggeredEvent> Monitor::process(const FramePair& frame) {
  if (!engine_) {
    engine_ = std::make_unique<EventEngine>(config_.rois, frame.gray.width, frame.gray.height, config_.engine);
  }
  auto events = engine_->process(frame.gray, frame.color);
  ++summary_.frames;
  for (const auto& e : events) handle(e, frame.color);
  if (classifier_) classifier_->classify(engine_->last_mask(), fmt::format("frame_{}", frame.gray.timestamp));
  return events;
}

void Monitor::handle(const TriggeredEvent& event, const ColorFrame& color) {
  ++summary_.events[static_cast<std::size_t>(event.kind)];
  summary_.triggered.push_back(event);

  TriggeredEvent logged = event;
  if (options_.wall_clock) logged.timestamp += options_.start_epoch_ms;
  std::filesystem::path snapshot;
  bool recorded = false;
  if (recorder_.retry_queue_size() > 0) recorder_.retry_pending();
  try {
    snapshot = config_.output_dir / recorder_.record(logged, color).snapshot;
    recorded = true;
  } catch (const IoError& e) {
    ++summary_.record_failures;
    spdlog::error("recording failed: {}", e.what());
  }

  auto result = scheduler_.enqueue(event, snapshot);
  if (result.status == EnqueueStatus::Suppressed) ++summary_.alerts_suppressed;
  if (!result.command) return;
  // A social message needs the recorded snapshot; a voice alert never waits on disk.
  if (result.command->kind == AlertKind::SocialMessage && !recorded) return;
  dispatcher_->submit(std::move(*result.command));
  ++summary_.alerts_submitted;
}

RunSummary Monitor::finish() {
  dispatcher_->drain();
  if (recorder_.retry_queue_size() > 0) recorder_.retry_pending();
  if (classifier_) classifier_->flush();
  return summary_;
}

RunSummary run_monitor(FrameSource& source, const AppConfig& config, MonitorDeps deps, RunOptions options) {
  Monitor monitor(config, std::move(deps), options);
  while (auto frame = source.next_frame()) monitor.process(*frame);
  return monitor.finish();
}

}  // namespace sentinel
