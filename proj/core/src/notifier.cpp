#include "sentinel/notifier.hpp"

#include <spawn.h>
#include <sys/wait.h>

#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdlib>
#include <fcntl.h>
#include <fstream>
#include <iterator>
#include <unistd.h>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"
#include <nlohmann/json.hpp>
#include "sentinel/error.hpp"

extern char** environ;

namespace sentinel {

std::string_view to_string(AlertKind kind) {
  return kind == AlertKind::VoiceAlert ? "VoiceAlert" : "SocialMessage";
}

std::string_view to_string(DeliveryStatus status) {
  switch (status) {
    case DeliveryStatus::Delivered:
      return "delivered";
    case DeliveryStatus::Failed:
      return "failed";
    case DeliveryStatus::DeadlineMissed:
      return "deadline_missed";
  }
  return "unknown";
}

void NotificationPolicy::validate() const {
  if (deadline_ms < 0) throw ConfigError("notification deadline must be non-negative");
  if (social_window_ms < 0 || voice_window_ms < 0) throw ConfigError("suppression windows must be non-negative");
  if (max_retries < 0) throw ConfigError("max_retries must be non-negative");
  if (max_retries > 0 && backoff_ms.empty()) throw ConfigError("retries need at least one backoff value");
  for (auto b : backoff_ms) {
    if (b < 0) throw ConfigError("backoff values must be non-negative");
  }
}

TimestampMs NotificationPolicy::backoff(int retry) const {
  if (backoff_ms.empty()) return 0;
  const auto i = static_cast<std::size_t>(std::max(retry, 1) - 1);
  return backoff_ms[std::min(i, backoff_ms.size() - 1)];
}

AlertScheduler::AlertScheduler(NotificationPolicy policy, std::string social_message, std::string voice_message)
    : policy_(std::move(policy)), social_message_(std::move(social_message)), voice_message_(std::move(voice_message)) {
  policy_.validate();
}

EnqueueResult AlertScheduler::enqueue(const TriggeredEvent& event, const std::filesystem::path& snapshot) {
  AlertKind kind;
  TimestampMs window;
  switch (event.kind) {
    case EventKind::DangerNotice:
      kind = AlertKind::VoiceAlert;
      window = policy_.voice_window_ms;
      break;
    case EventKind::PhotoLink:
      kind = AlertKind::SocialMessage;
      window = policy_.social_window_ms;
      break;
    default:
      return EnqueueResult{EnqueueStatus::NotApplicable, std::nullopt};
  }
  auto& last = last_created_[static_cast<std::size_t>(kind)];
  if (last && event.timestamp - *last < window) {
    return EnqueueResult{EnqueueStatus::Suppressed, std::nullopt};
  }
  last = event.timestamp;
  return EnqueueResult{EnqueueStatus::Created, AlertCommand{kind, event, kind == AlertKind::VoiceAlert ? voice_message_ : social_message_, snapshot}};
}

TimestampMs SteadyClock::now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

void SteadyClock::sleep_ms(TimestampMs ms) { std::this_thread::sleep_for(std::chrono::milliseconds(ms)); }

TimestampMs ManualClock::now_ms() {
  std::lock_guard lock(mu_);
  return now_;
}

void ManualClock::sleep_ms(TimestampMs ms) {
  std::lock_guard lock(mu_);
  sleeps_.push_back(ms);
  now_ += ms;
}

void ManualClock::advance(TimestampMs ms) {
  std::lock_guard lock(mu_);
  now_ += ms;
}

std::vector<TimestampMs> ManualClock::sleeps() const {
  std::lock_guard lock(mu_);
  return sleeps_;
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) return {};
  std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string webhook_body(const AlertCommand& command, std::span<const std::uint8_t> image) {
  nlohmann::json body;
  body["message"] = command.message;
  body["image"] = base64_encode(image);
  body["event_ts"] = command.event.timestamp;
  return body.dump();
}

WebhookTarget webhook_target_from_env(std::string url) {
  const char* token = std::getenv("SENTINEL_WEBHOOK_TOKEN");
  return WebhookTarget{std::move(url), token ? token : ""};
}

HttpWebhookTransport::HttpWebhookTransport(int timeout_seconds) : timeout_seconds_(timeout_seconds) {}

TransportResult HttpWebhookTransport::send(const WebhookRequest& request) {
  // Split "scheme://host[:port]/path" for httplib.
  const auto scheme_end = request.url.find("://");
  if (scheme_end == std::string::npos) return TransportResult{false, 0, "webhook URL lacks a scheme"};
  const auto path_start = request.url.find('/', scheme_end + 3);
  const std::string origin = request.url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : request.url.substr(path_start);

  try {
    httplib::Client client(origin);
    client.set_connection_timeout(timeout_seconds_, 0);
    client.set_read_timeout(timeout_seconds_, 0);
    client.set_write_timeout(timeout_seconds_, 0);
    httplib::Headers headers;
    if (!request.token.empty()) headers.emplace("Authorization", "Bearer " + request.token);
    auto res = client.Post(path, headers, request.body, request.content_type);
    if (!res) return TransportResult{false, 0, httplib::to_string(res.error())};
    const bool ok = res->status >= 200 && res->status < 300;
    return TransportResult{ok, res->status, ok ? "" : "HTTP " + std::to_string(res->status)};
  } catch (const std::exception& e) {
    return TransportResult{false, 0, e.what()};
  }
}

namespace {

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

DeliveryResult deliver_social(const AlertCommand& command, Transport& transport, const WebhookTarget& target,
                              const NotificationPolicy& policy, Clock& clock) {
  DeliveryResult result;
  const auto image = read_file_bytes(command.snapshot);
  if (image.empty() && !command.snapshot.empty()) {
    spdlog::warn("snapshot {} unreadable; sending message without image", command.snapshot.string());
  }
  const WebhookRequest request{target.url, target.token, "application/json", webhook_body(command, image)};
  const TimestampMs start = clock.now_ms();
  for (int attempt = 1;; ++attempt) {
    ++result.attempts;
    const auto sent = transport.send(request);
    result.elapsed_ms = clock.now_ms() - start;
    if (sent.ok) {
      result.status = result.elapsed_ms <= policy.deadline_ms ? DeliveryStatus::Delivered
                                                              : DeliveryStatus::DeadlineMissed;
      return result;
    }
    result.last_error = sent.error;
    if (attempt > policy.max_retries) {
      result.status = DeliveryStatus::Failed;
      spdlog::warn("social message for event {} failed after {} attempts: {}", command.event.timestamp,
                   result.attempts, sent.error);
      return result;
    }
    const TimestampMs wait = policy.backoff(attempt);
    if (result.elapsed_ms + wait > policy.deadline_ms) {
      result.status = DeliveryStatus::DeadlineMissed;
      return result;
    }
    result.waits.push_back(wait);
    clock.sleep_ms(wait);
  }
}

CommandVoiceSink::CommandVoiceSink(std::string command) : command_(std::move(command)) {}

bool CommandVoiceSink::play(const AlertCommand& command) {
  if (command_.empty()) return true;
  const std::string ts = std::to_string(command.event.timestamp);
  const std::string roi = std::to_string(command.event.roi_id);
  std::string sh = "/bin/sh", flag = "-c", name = "sentinel-voice";
  std::vector<char*> argv{sh.data(), flag.data(), command_.data(), name.data(),
                          const_cast<char*>(ts.c_str()), const_cast<char*>(roi.c_str()), nullptr};
  pid_t pid = 0;
  if (posix_spawn(&pid, "/bin/sh", nullptr, nullptr, argv.data(), environ) != 0) return false;
  int status = 0;
  if (waitpid(pid, &status, 0) < 0) return false;
  return WIFEXITED(status) && WEXITSTATUS(status) == 0;
}

bool RecordingVoiceSink::play(const AlertCommand& command) {
  std::lock_guard lock(mu_);
  invocations_.push_back(command.event.timestamp);
  return !fail_;
}

std::vector<TimestampMs> RecordingVoiceSink::invocations() const {
  std::lock_guard lock(mu_);
  return invocations_;
}

EmissionResult emit_voice(const AlertCommand& command, VoiceSink& sink) {
  try {
    if (sink.play(command)) return EmissionResult{true, {}};
    spdlog::warn("voice alert sink failed for event {}", command.event.timestamp);
    return EmissionResult{false, "voice sink reported failure"};
  } catch (const std::exception& e) {
    spdlog::warn("voice alert sink threw for event {}: {}", command.event.timestamp, e.what());
    return EmissionResult{false, e.what()};
  }
}

NotificationDispatcher::NotificationDispatcher(std::shared_ptr<Transport> transport,
                                               std::shared_ptr<VoiceSink> voice, std::shared_ptr<Clock> clock,
                                               NotificationPolicy policy, WebhookTarget target,
                                               std::filesystem::path delivery_log, std::size_t capacity)
    : transport_(std::move(transport)),
      voice_(std::move(voice)),
      clock_(std::move(clock)),
      policy_(std::move(policy)),
      target_(std::move(target)),
      log_path_(std::move(delivery_log)),
      capacity_(std::max<std::size_t>(capacity, 1)) {
  worker_ = std::thread([this] { run(); });
}

NotificationDispatcher::~NotificationDispatcher() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
    if (!queue_.empty()) {
      spdlog::warn("discarding {} undelivered notifications at shutdown", queue_.size());
      queue_.clear();
    }
  }
  wake_.notify_all();
  if (worker_.joinable()) worker_.join();
}

void NotificationDispatcher::submit(AlertCommand command) {
  {
    std::lock_guard lock(mu_);
    if (queue_.size() >= capacity_) {
      queue_.pop_front();
      ++dropped_;
      spdlog::warn("notification queue full; dropped oldest ({} dropped so far)", dropped_);
    }
    queue_.push_back(std::move(command));
  }
  wake_.notify_one();
}

void NotificationDispatcher::drain() {
  std::unique_lock lock(mu_);
  idle_.wait(lock, [this] { return queue_.empty() && !busy_; });
}

std::size_t NotificationDispatcher::pending() const {
  std::lock_guard lock(mu_);
  return queue_.size();
}

std::size_t NotificationDispatcher::dropped() const {
  std::lock_guard lock(mu_);
  return dropped_;
}

std::vector<DeliveryRecord> NotificationDispatcher::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

void NotificationDispatcher::log(const DeliveryRecord& r) {
  if (log_path_.empty()) return;
  const std::string line = std::to_string(r.event_ts) + '\t' + std::string(to_string(r.kind)) + '\t' + r.status +
                           '\t' + std::to_string(r.attempts) + '\n';
  const int fd = ::open(log_path_.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) {
    spdlog::warn("cannot open delivery log {}", log_path_.string());
    return;
  }
  if (::write(fd, line.data(), line.size()) != static_cast<ssize_t>(line.size())) {
    spdlog::warn("short write to delivery log {}", log_path_.string());
  }
  ::close(fd);
}

void NotificationDispatcher::run() {
  while (true) {
    AlertCommand command;
    {
      std::unique_lock lock(mu_);
      wake_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
      if (queue_.empty()) return;  // stopping
      command = std::move(queue_.front());
      queue_.pop_front();
      busy_ = true;
    }

    DeliveryRecord record{command.event.timestamp, command.kind, {}, 1};
    if (command.kind == AlertKind::SocialMessage && !transport_) {
      record.status = "disabled";
      record.attempts = 0;
    } else if (command.kind == AlertKind::SocialMessage) {
      const auto result = deliver_social(command, *transport_, target_, policy_, *clock_);
      record.status = std::string(to_string(result.status));
      record.attempts = result.attempts;
    } else {
      const auto result = emit_voice(command, *voice_);
      record.status = result.ok ? "played" : "failed";
    }
    log(record);

    {
      std::lock_guard lock(mu_);
      records_.push_back(std::move(record));
      busy_ = false;
    }
    idle_.notify_all();
  }
}

}  // namespace sentinel
