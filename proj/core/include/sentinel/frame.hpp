#pragma once

#include <cstdint>
#include <vector>

namespace sentinel {

/// Milliseconds since the start of a stream (or since the epoch in wall-clock mode).
using TimestampMs = std::int64_t;

struct Point {
  int x = 0;
  int y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

/// Axis-aligned rectangle in pixel coordinates; covers [x, x+w) x [y, y+h).
struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  [[nodiscard]] long area() const { return static_cast<long>(w) * h; }
  [[nodiscard]] int right() const { return x + w; }
  [[nodiscard]] int bottom() const { return y + h; }
  [[nodiscard]] bool contains(int px, int py) const {
    return px >= x && px < x + w && py >= y && py < y + h;
  }
  [[nodiscard]] bool fits_within(int width, int height) const {
    return x >= 0 && y >= 0 && w > 0 && h > 0 && x + w <= width && y + h <= height;
  }
  friend bool operator==(const Rect&, const Rect&) = default;
};

/// 8-bit single channel raster, row-major.
struct GrayFrame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
  TimestampMs timestamp = 0;

  GrayFrame() = default;
  GrayFrame(int w, int h, std::uint8_t fill = 0, TimestampMs ts = 0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill), timestamp(ts) {}

  [[nodiscard]] std::uint8_t at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  [[nodiscard]] bool valid() const {
    return width >= 1 && height >= 1 &&
           pixels.size() == static_cast<std::size_t>(width) * height;
  }
  friend bool operator==(const GrayFrame&, const GrayFrame&) = default;
};

/// 8-bit RGB raster, row-major interleaved triplets.
struct ColorFrame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
  TimestampMs timestamp = 0;

  ColorFrame() = default;
  ColorFrame(int w, int h, std::uint8_t fill = 0, TimestampMs ts = 0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, fill), timestamp(ts) {}

  [[nodiscard]] const std::uint8_t* at(int x, int y) const {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
  std::uint8_t* at(int x, int y) {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    auto* p = at(x, y);
    p[0] = r;
    p[1] = g;
    p[2] = b;
  }
  [[nodiscard]] bool valid() const {
    return width >= 1 && height >= 1 &&
           pixels.size() == static_cast<std::size_t>(width) * height * 3;
  }
  friend bool operator==(const ColorFrame&, const ColorFrame&) = default;
};

/// Luma conversion: round(0.299 R + 0.587 G + 0.114 B), half rounds up.
/// Evaluated in integer thousandths so ties are exact.
[[nodiscard]] constexpr std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const unsigned v = 299u * r + 587u * g + 114u * b;
  return static_cast<std::uint8_t>((v + 500u) / 1000u);
}

[[nodiscard]] GrayFrame to_gray(const ColorFrame& frame);

/// Replicates the gray channel into RGB.
[[nodiscard]] ColorFrame to_color(const GrayFrame& frame);

}  // namespace sentinel
