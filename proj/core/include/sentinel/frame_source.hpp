#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "sentinel/frame.hpp"

namespace sentinel {

/// A color frame with its luma companion; both carry the same timestamp.
struct FramePair {
  ColorFrame color;
  GrayFrame gray;
};

[[nodiscard]] FramePair make_frame_pair(ColorFrame color);
[[nodiscard]] FramePair make_frame_pair(GrayFrame gray);

/// Single-consumer sequential frame iterator. Timestamps strictly increase.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  /// Next frame pair, or std::nullopt at end of stream. Throws IoError on read failure.
  virtual std::optional<FramePair> next_frame() = 0;
};

/// Numbered .pgm/.ppm files in one directory, read in lexicographic order.
/// Frame i is stamped i * period_ms.
class DirectorySource final : public FrameSource {
 public:
  DirectorySource(const std::filesystem::path& directory, std::int64_t period_ms);

  std::optional<FramePair> next_frame() override;

  [[nodiscard]] const std::vector<std::filesystem::path>& files() const { return files_; }
  /// Number of numbering gaps detected while scanning the directory.
  [[nodiscard]] int gap_count() const { return gaps_; }

 private:
  std::vector<std::filesystem::path> files_;
  std::size_t cursor_ = 0;
  std::int64_t period_ms_;
  int gaps_ = 0;
};

/// Concatenated binary netpbm images on a stream (e.g. a pipe).
class StreamSource final : public FrameSource {
 public:
  StreamSource(std::istream& in, std::int64_t period_ms);

  std::optional<FramePair> next_frame() override;

 private:
  std::istream& in_;
  std::int64_t period_ms_;
  std::int64_t index_ = 0;
};

}  // namespace sentinel
