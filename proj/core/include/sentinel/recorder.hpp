#pragma once

#include <array>
#include <deque>
#include <filesystem>
#include <string>

#include "sentinel/event_engine.hpp"
#include "sentinel/frame.hpp"

namespace sentinel {

enum class TimestampStyle {
  StreamMs,      ///< decimal milliseconds since stream start
  WallClockIso,  ///< ISO-8601 UTC, timestamps are milliseconds since the Unix epoch
};

struct EventRecord {
  EventKind kind = EventKind::WatchDog;
  int roi_id = 0;
  TimestampMs timestamp_ms = 0;
  std::string timestamp;  ///< as written to the log
  long metric = 0;
  std::string snapshot;   ///< file name relative to the output directory

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

/// `<timestamp>\t<kind>\t<roi_id>\t<metric>\t<snapshot>` without the trailing newline.
[[nodiscard]] std::string format_log_line(const EventRecord& record);
[[nodiscard]] std::string format_timestamp(TimestampMs ts, TimestampStyle style);
[[nodiscard]] std::string snapshot_name(EventKind kind, TimestampMs ts);

/// Writes one P6 snapshot and one `events.log` line per event.
///
/// The snapshot is renamed into place before its log line is appended, and each line is
/// a single O_APPEND write, so readers only ever see complete lines whose snapshot exists.
/// Failed writes keep the event in a bounded retry queue (oldest dropped beyond 1024).
class Recorder {
 public:
  static constexpr std::size_t kRetryCapacity = 1024;

  explicit Recorder(std::filesystem::path output_dir, TimestampStyle style = TimestampStyle::StreamMs);

  /// Throws IoError after queueing the event when the write fails.
  EventRecord record(const TriggeredEvent& event, const ColorFrame& frame);

  /// Retries queued events in order; stops at the first failure. Returns the number written.
  std::size_t retry_pending();

  [[nodiscard]] std::size_t retry_queue_size() const { return pending_.size(); }
  [[nodiscard]] std::size_t dropped() const { return dropped_; }
  [[nodiscard]] const std::filesystem::path& output_dir() const { return dir_; }
  [[nodiscard]] std::filesystem::path log_path() const { return dir_ / "events.log"; }

 private:
  struct Pending {
    TriggeredEvent event;
    ColorFrame frame;
  };

  EventRecord write(const TriggeredEvent& event, const ColorFrame& frame);

  std::filesystem::path dir_;
  TimestampStyle style_;
  std::deque<Pending> pending_;
  std::size_t dropped_ = 0;
};

struct KindStats {
  long events = 0;
  long images = 0;
};

struct EventStats {
  int days = 1;
  std::array<KindStats, 3> per_kind{};
  long malformed_lines = 0;

  [[nodiscard]] const KindStats& of(EventKind kind) const { return per_kind[static_cast<std::size_t>(kind)]; }
  /// count / days rendered with two decimals, half rounding up.
  [[nodiscard]] std::string average(EventKind kind) const;
};

/// count / days as an exact rational rounded half-up to two decimals, e.g. "70.75".
[[nodiscard]] std::string format_average(long count, int days);

/// Counts log lines per kind. Malformed lines and an unterminated final line are skipped;
/// the former are counted. Throws IoError when the log cannot be opened, ConfigError for days < 1.
[[nodiscard]] EventStats summarize(const std::filesystem::path& log_path, int days);

/// Per-kind table: experiment days, event count, image count, average per day.
[[nodiscard]] std::string render_stats_table(const EventStats& stats);

}  // namespace sentinel
