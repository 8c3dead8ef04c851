#include "sentinel/frame_source.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>

#include "sentinel/error.hpp"
#include "sentinel/pnm.hpp"

namespace sentinel {

namespace fs = std::filesystem;

FramePair make_frame_pair(ColorFrame color) {
  GrayFrame gray = to_gray(color);
  return FramePair{std::move(color), std::move(gray)};
}

FramePair make_frame_pair(GrayFrame gray) {
  ColorFrame color = to_color(gray);
  return FramePair{std::move(color), std::move(gray)};
}

namespace {

std::optional<long> leading_number(const fs::path& file) {
  const std::string stem = file.stem().string();
  std::size_t i = 0;
  while (i < stem.size() && !std::isdigit(static_cast<unsigned char>(stem[i]))) ++i;
  if (i == stem.size()) return std::nullopt;
  long value = 0;
  for (; i < stem.size() && std::isdigit(static_cast<unsigned char>(stem[i])); ++i) {
    value = value * 10 + (stem[i] - '0');
  }
  return value;
}

FramePair to_pair(PnmFrame frame, TimestampMs ts) {
  return std::visit(
      [ts](auto&& f) {
        f.timestamp = ts;
        return make_frame_pair(std::move(f));
      },
      std::move(frame));
}

}  // namespace

DirectorySource::DirectorySource(const fs::path& directory, std::int64_t period_ms)
    : period_ms_(period_ms) {
  if (period_ms <= 0) throw ConfigError("frame period must be positive");
  std::error_code ec;
  if (!fs::is_directory(directory, ec)) {
    throw IoError("frame directory not found: " + directory.string());
  }
  for (const auto& entry : fs::directory_iterator(directory, ec)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") files_.push_back(entry.path());
  }
  if (ec) throw IoError("cannot list " + directory.string() + ": " + ec.message());
  std::sort(files_.begin(), files_.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });

  std::optional<long> previous;
  for (const auto& f : files_) {
    const auto n = leading_number(f);
    if (n && previous && *n > *previous + 1) {
      ++gaps_;
      spdlog::warn("frame sequence gap between {} and {} at {}", *previous, *n, f.filename().string());
    }
    if (n) previous = n;
  }
}

std::optional<FramePair> DirectorySource::next_frame() {
  if (cursor_ >= files_.size()) return std::nullopt;
  const auto& file = files_[cursor_];
  const TimestampMs ts = static_cast<TimestampMs>(cursor_) * period_ms_;
  ++cursor_;
  return to_pair(read_pnm_file(file), ts);
}

StreamSource::StreamSource(std::istream& in, std::int64_t period_ms)
    : in_(in), period_ms_(period_ms) {
  if (period_ms <= 0) throw ConfigError("frame period must be positive");
}

std::optional<FramePair> StreamSource::next_frame() {
  std::vector<std::uint8_t> bytes;
  int c = in_.get();
  while (c != EOF && std::isspace(c)) c = in_.get();
  if (c == EOF) return std::nullopt;
  bytes.push_back(static_cast<std::uint8_t>(c));
  c = in_.get();
  if (c == EOF) throw IoError("frame stream ended inside a header");
  bytes.push_back(static_cast<std::uint8_t>(c));
  const std::size_t channels = c == '6' ? 3 : 1;

  // Width, height, maxval; the byte terminating maxval ends the header.
  long values[3] = {0, 0, 0};
  int field = 0;
  bool in_number = false;
  bool in_comment = false;
  while (field < 3) {
    c = in_.get();
    if (c == EOF) throw IoError("frame stream ended inside a header");
    bytes.push_back(static_cast<std::uint8_t>(c));
    if (in_comment) {
      in_comment = c != '\n';
    } else if (c == '#' && !in_number) {
      in_comment = true;
    } else if (std::isdigit(c)) {
      in_number = true;
      values[field] = std::min(values[field] * 10 + (c - '0'), 1L << 30);
    } else if (in_number) {
      in_number = false;
      ++field;
    }
  }

  const std::size_t raster = static_cast<std::size_t>(values[0]) * values[1] * channels;
  const std::size_t header = bytes.size();
  bytes.resize(header + raster);
  in_.read(reinterpret_cast<char*>(bytes.data() + header), static_cast<std::streamsize>(raster));
  bytes.resize(header + static_cast<std::size_t>(in_.gcount()));

  PnmFrame frame;
  try {
    frame = decode_pnm(bytes);
  } catch (const PnmError& e) {
    throw IoError("frame stream image " + std::to_string(index_) + ": " + e.what());
  }
  const TimestampMs ts = index_ * period_ms_;
  ++index_;
  return to_pair(std::move(frame), ts);
}

}  // namespace sentinel
