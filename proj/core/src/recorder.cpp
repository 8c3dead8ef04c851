#include "sentinel/recorder.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <spdlog/spdlog.h>

#include <cerrno>
#include <charconv>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>
#include <vector>

#include "sentinel/error.hpp"
#include "sentinel/pnm.hpp"

namespace sentinel {

namespace fs = std::filesystem;

std::string format_timestamp(TimestampMs ts, TimestampStyle style) {
  if (style == TimestampStyle::StreamMs) return std::to_string(ts);
  const std::time_t secs = static_cast<std::time_t>(ts / 1000);
  const int millis = static_cast<int>(ts % 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, millis);
  return out;
}

std::string snapshot_name(EventKind kind, TimestampMs ts) {
  return std::string(to_string(kind)) + "_" + std::to_string(ts) + ".ppm";
}

std::string format_log_line(const EventRecord& r) {
  std::string line = r.timestamp;
  line += '\t';
  line += to_string(r.kind);
  line += '\t';
  line += std::to_string(r.roi_id);
  line += '\t';
  line += std::to_string(r.metric);
  line += '\t';
  line += r.snapshot;
  return line;
}

Recorder::Recorder(fs::path output_dir, TimestampStyle style) : dir_(std::move(output_dir)), style_(style) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) spdlog::warn("cannot create output directory {}: {}", dir_.string(), ec.message());
}

namespace {

void append_line(const fs::path& path, const std::string& line) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) throw IoError("cannot open " + path.string() + ": " + std::strerror(errno));
  const std::string data = line + '\n';
  const ssize_t n = ::write(fd, data.data(), data.size());
  const int write_errno = errno;
  ::close(fd);
  if (n != static_cast<ssize_t>(data.size())) {
    throw IoError("short write to " + path.string() + ": " + std::strerror(write_errno));
  }
}

}  // namespace

EventRecord Recorder::write(const TriggeredEvent& event, const ColorFrame& frame) {
  EventRecord rec;
  rec.kind = event.kind;
  rec.roi_id = event.roi_id;
  rec.timestamp_ms = event.timestamp;
  rec.timestamp = format_timestamp(event.timestamp, style_);
  rec.metric = event.metric;
  rec.snapshot = snapshot_name(event.kind, event.timestamp);

  const fs::path final_path = dir_ / rec.snapshot;
  const fs::path tmp_path = dir_ / (rec.snapshot + ".tmp");
  write_pnm_file(tmp_path, frame);
  std::error_code ec;
  fs::rename(tmp_path, final_path, ec);
  if (ec) throw IoError("cannot move snapshot into place: " + ec.message());
  append_line(log_path(), format_log_line(rec));
  return rec;
}

EventRecord Recorder::record(const TriggeredEvent& event, const ColorFrame& frame) {
  try {
    return write(event, frame);
  } catch (const IoError&) {
    if (pending_.size() >= kRetryCapacity) {
      pending_.pop_front();
      ++dropped_;
    }
    pending_.push_back(Pending{event, frame});
    throw;
  }
}

std::size_t Recorder::retry_pending() {
  std::size_t written = 0;
  while (!pending_.empty()) {
    try {
      write(pending_.front().event, pending_.front().frame);
    } catch (const IoError& e) {
      spdlog::warn("event retry failed: {}", e.what());
      break;
    }
    pending_.pop_front();
    ++written;
  }
  return written;
}

std::string format_average(long count, int days) {
  // round(count * 100 / days) with halves rounding up, in integers.
  const long long cents = (200LL * count + days) / (2LL * days);
  std::string whole = std::to_string(cents / 100);
  const long long frac = cents % 100;
  return whole + (frac < 10 ? ".0" : ".") + std::to_string(frac);
}

std::string EventStats::average(EventKind kind) const { return format_average(of(kind).events, days); }

namespace {

bool parse_long(std::string_view text, long& out) {
  if (text.empty()) return false;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

}  // namespace

EventStats summarize(const fs::path& log_path, int days) {
  if (days < 1) throw ConfigError("experiment days must be at least 1");
  std::ifstream in(log_path, std::ios::binary);
  if (!in) throw IoError("cannot open event log " + log_path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string content = buffer.str();

  EventStats stats;
  stats.days = days;
  std::size_t start = 0;
  long line_no = 0;
  while (true) {
    const std::size_t nl = content.find('\n', start);
    if (nl == std::string::npos) break;  // unterminated tail is still being written
    const std::string_view line(content.data() + start, nl - start);
    start = nl + 1;
    ++line_no;
    if (line.empty()) continue;

    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
      const std::size_t tab = line.find('\t', pos);
      fields.push_back(line.substr(pos, tab == std::string_view::npos ? std::string_view::npos : tab - pos));
      if (tab == std::string_view::npos) break;
      pos = tab + 1;
    }
    long roi = 0, metric = 0;
    const auto kind = fields.size() == 5 ? parse_event_kind(fields[1]) : std::nullopt;
    if (!kind || fields[0].empty() || !parse_long(fields[2], roi) || !parse_long(fields[3], metric)) {
      ++stats.malformed_lines;
      spdlog::warn("{}:{}: malformed event line skipped", log_path.string(), line_no);
      continue;
    }
    auto& k = stats.per_kind[static_cast<std::size_t>(*kind)];
    ++k.events;
    if (!fields[4].empty()) ++k.images;
  }
  return stats;
}

std::string render_stats_table(const EventStats& stats) {
  std::ostringstream out;
  out << "Experiment days\t" << stats.days << '\n';
  for (auto kind : kAllEventKinds) {
    const auto name = to_string(kind);
    const auto& k = stats.of(kind);
    out << "Number of " << name << " events\t" << k.events << '\n';
    out << "Number of images in " << name << " events\t" << k.images << '\n';
    out << "Average " << name << " events per day\t" << stats.average(kind) << '\n';
  }
  return out.str();
}

}  // namespace sentinel
