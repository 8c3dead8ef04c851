#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "sentinel/frame.hpp"

namespace sentinel {

/// Binary netpbm (P5 graymap / P6 pixmap, maxval 255).
using PnmFrame = std::variant<GrayFrame, ColorFrame>;

class PnmError : public std::runtime_error {
 public:
  enum class Kind { MalformedHeader, Truncated, UnsupportedMaxval };

  PnmError(Kind kind, std::size_t offset, const std::string& what);

  [[nodiscard]] Kind kind() const { return kind_; }
  /// Byte offset at which parsing failed.
  [[nodiscard]] std::size_t offset() const { return offset_; }

 private:
  Kind kind_;
  std::size_t offset_;
};

/// Decodes one complete image. Trailing bytes after the raster are ignored.
[[nodiscard]] PnmFrame decode_pnm(std::span<const std::uint8_t> bytes);

/// Decodes one image from the front of `bytes` and reports how many bytes it used.
[[nodiscard]] PnmFrame decode_pnm_prefix(std::span<const std::uint8_t> bytes, std::size_t& consumed);

[[nodiscard]] std::vector<std::uint8_t> encode_pnm(const GrayFrame& frame);
[[nodiscard]] std::vector<std::uint8_t> encode_pnm(const ColorFrame& frame);
[[nodiscard]] std::vector<std::uint8_t> encode_pnm(const PnmFrame& frame);

[[nodiscard]] PnmFrame read_pnm_file(const std::filesystem::path& path);
void write_pnm_file(const std::filesystem::path& path, const PnmFrame& frame);

}  // namespace sentinel
