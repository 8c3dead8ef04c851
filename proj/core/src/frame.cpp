#include "sentinel/frame.hpp"

namespace sentinel {

GrayFrame to_gray(const ColorFrame& frame) {
  GrayFrame out(frame.width, frame.height, 0, frame.timestamp);
  const std::size_t n = out.pixels.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto* p = frame.pixels.data() + i * 3;
    out.pixels[i] = luma(p[0], p[1], p[2]);
  }
  return out;
}

ColorFrame to_color(const GrayFrame& frame) {
  ColorFrame out(frame.width, frame.height, 0, frame.timestamp);
  for (std::size_t i = 0; i < frame.pixels.size(); ++i) {
    const auto v = frame.pixels[i];
    out.pixels[i * 3] = v;
    out.pixels[i * 3 + 1] = v;
    out.pixels[i * 3 + 2] = v;
  }
  return out;
}

}  // namespace sentinel
