#pragma once

#include <array>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "sentinel/event_engine.hpp"

namespace sentinel {

enum class AlertKind { VoiceAlert, SocialMessage };

[[nodiscard]] std::string_view to_string(AlertKind kind);

struct AlertCommand {
  AlertKind kind = AlertKind::SocialMessage;
  TriggeredEvent event;
  std::string message;
  std::filesystem::path snapshot;  ///< image attached to SocialMessage
};

struct NotificationPolicy {
  TimestampMs deadline_ms = 300'000;
  TimestampMs social_window_ms = 300'000;
  TimestampMs voice_window_ms = 30'000;
  int max_retries = 3;
  std::vector<TimestampMs> backoff_ms{1'000, 4'000, 16'000};

  void validate() const;
  /// Wait before retry number `retry` (1-based); the last entry repeats.
  [[nodiscard]] TimestampMs backoff(int retry) const;
  friend bool operator==(const NotificationPolicy&, const NotificationPolicy&) = default;
};

enum class EnqueueStatus {
  Created,
  Suppressed,     ///< same kind already alerted within its window
  NotApplicable,  ///< WatchDog events are record-only
};

struct EnqueueResult {
  EnqueueStatus status = EnqueueStatus::NotApplicable;
  std::optional<AlertCommand> command;
};

/// Maps events to alert commands with per-kind suppression windows keyed on event time.
class AlertScheduler {
 public:
  AlertScheduler(NotificationPolicy policy, std::string social_message,
                 std::string voice_message = "Please watch your step");

  EnqueueResult enqueue(const TriggeredEvent& event, const std::filesystem::path& snapshot);

  [[nodiscard]] const NotificationPolicy& policy() const { return policy_; }

 private:
  NotificationPolicy policy_;
  std::string social_message_;
  std::string voice_message_;
  std::array<std::optional<TimestampMs>, 2> last_created_{};
};

/// Time source for retries; injectable so tests run without sleeping.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual TimestampMs now_ms() = 0;
  virtual void sleep_ms(TimestampMs ms) = 0;
};

class SteadyClock final : public Clock {
 public:
  TimestampMs now_ms() override;
  void sleep_ms(TimestampMs ms) override;
};

/// Sleeping advances virtual time instantly; every sleep is recorded.
class ManualClock final : public Clock {
 public:
  TimestampMs now_ms() override;
  void sleep_ms(TimestampMs ms) override;
  void advance(TimestampMs ms);
  [[nodiscard]] std::vector<TimestampMs> sleeps() const;

 private:
  mutable std::mutex mu_;
  TimestampMs now_ = 0;
  std::vector<TimestampMs> sleeps_;
};

struct WebhookRequest {
  std::string url;
  std::string token;
  std::string content_type = "application/json";
  std::string body;
};

struct TransportResult {
  bool ok = false;
  int status = 0;
  std::string error;
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual TransportResult send(const WebhookRequest& request) = 0;
};

/// HTTP(S) POST with `Authorization: Bearer <token>`; any 2xx counts as delivered.
class HttpWebhookTransport final : public Transport {
 public:
  explicit HttpWebhookTransport(int timeout_seconds = 10);
  TransportResult send(const WebhookRequest& request) override;

 private:
  int timeout_seconds_;
};

[[nodiscard]] std::string base64_encode(std::span<const std::uint8_t> bytes);

/// `{"event_ts": <ms>, "image": "<base64>", "message": "<text>"}` (keys sorted, compact).
[[nodiscard]] std::string webhook_body(const AlertCommand& command, std::span<const std::uint8_t> image);

struct WebhookTarget {
  std::string url;
  std::string token;
};

/// Reads the token from SENTINEL_WEBHOOK_TOKEN.
[[nodiscard]] WebhookTarget webhook_target_from_env(std::string url);

enum class DeliveryStatus { Delivered, Failed, DeadlineMissed };
[[nodiscard]] std::string_view to_string(DeliveryStatus status);

struct DeliveryResult {
  DeliveryStatus status = DeliveryStatus::Failed;
  int attempts = 0;
  TimestampMs elapsed_ms = 0;
  std::vector<TimestampMs> waits;
  std::string last_error;
};

/// One request per attempt, up to 1 + max_retries attempts with the policy's backoff.
/// Stops with DeadlineMissed when the next wait would pass the delivery deadline.
DeliveryResult deliver_social(const AlertCommand& command, Transport& transport, const WebhookTarget& target,
                              const NotificationPolicy& policy, Clock& clock);

class VoiceSink {
 public:
  virtual ~VoiceSink() = default;
  /// Returns false on failure.
  virtual bool play(const AlertCommand& command) = 0;
};

/// Runs `/bin/sh -c <command> sentinel-voice <event_ts> <roi_id>`; success is exit status 0.
class CommandVoiceSink final : public VoiceSink {
 public:
  explicit CommandVoiceSink(std::string command);
  bool play(const AlertCommand& command) override;

 private:
  std::string command_;
};

/// Records invocations; optionally fails them.
class RecordingVoiceSink final : public VoiceSink {
 public:
  explicit RecordingVoiceSink(bool fail = false) : fail_(fail) {}
  bool play(const AlertCommand& command) override;
  [[nodiscard]] std::vector<TimestampMs> invocations() const;

 private:
  mutable std::mutex mu_;
  bool fail_;
  std::vector<TimestampMs> invocations_;
};

struct EmissionResult {
  bool ok = false;
  std::string error;
};

/// Invokes the sink exactly once; failures are logged and reported, never thrown.
EmissionResult emit_voice(const AlertCommand& command, VoiceSink& sink);

struct DeliveryRecord {
  TimestampMs event_ts = 0;
  AlertKind kind = AlertKind::SocialMessage;
  std::string status;
  int attempts = 0;
};

/// Delivers alert commands on a worker thread so the frame pipeline never waits on the network.
///
/// The pending queue holds at most `capacity` commands; submitting to a full queue drops the
/// oldest one. A null transport disables social delivery. Outcomes are appended to `notify.log` as `event_ts\tkind\tstatus\tattempts`.
class NotificationDispatcher {
 public:
  static constexpr std::size_t kDefaultCapacity = 64;

  NotificationDispatcher(std::shared_ptr<Transport> transport, std::shared_ptr<VoiceSink> voice,
                         std::shared_ptr<Clock> clock, NotificationPolicy policy, WebhookTarget target,
                         std::filesystem::path delivery_log, std::size_t capacity = kDefaultCapacity);
  ~NotificationDispatcher();

  NotificationDispatcher(const NotificationDispatcher&) = delete;
  NotificationDispatcher& operator=(const NotificationDispatcher&) = delete;

  void submit(AlertCommand command);
  /// Blocks until every submitted command has been handled.
  void drain();

  [[nodiscard]] std::size_t pending() const;
  [[nodiscard]] std::size_t dropped() const;
  [[nodiscard]] std::vector<DeliveryRecord> records() const;

 private:
  void run();
  void log(const DeliveryRecord& record);

  std::shared_ptr<Transport> transport_;
  std::shared_ptr<VoiceSink> voice_;
  std::shared_ptr<Clock> clock_;
  NotificationPolicy policy_;
  WebhookTarget target_;
  std::filesystem::path log_path_;
  std::size_t capacity_;

  mutable std::mutex mu_;
  std::condition_variable wake_;
  std::condition_variable idle_;
  std::deque<AlertCommand> queue_;
  bool busy_ = false;
  bool stopping_ = false;
  std::size_t dropped_ = 0;
  std::vector<DeliveryRecord> records_;
  std::thread worker_;
};

}  // namespace sentinel
