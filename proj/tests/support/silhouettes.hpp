#pragma once

#include <random>

#include "sentinel/background_model.hpp"
#include "test_support.hpp"

namespace sentinel::testing {

/// Body bar plus head disk inside a `w` x `h` mask. Standing figures are upright
/// (tilt within 12 degrees); lying ones are within 12 degrees of horizontal and rest low.
inline ForegroundMask silhouette(std::mt19937& rng, bool lying, int w = 100, int h = 90) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double length = 36.0 + 22.0 * u(rng);
  const double thick = 8.0 + 6.0 * u(rng);
  const double tilt = (u(rng) - 0.5) * 24.0;
  const double head = thick * (0.55 + 0.2 * u(rng));
  double cx, cy, deg;
  if (lying) {
    deg = 90.0 + tilt;
    cx = 15.0 + length / 2 + (w - 30.0 - length) * u(rng);
    cy = h - 10.0 - thick / 2 - 8.0 * u(rng);
  } else {
    deg = tilt;
    cx = 20.0 + (w - 40.0) * u(rng);
    cy = h - 6.0 - length / 2 - 6.0 * u(rng);
  }
  ForegroundMask m = mask_of(w, h, rect_corners(cx, cy, thick, length, deg));
  const double t = deg * std::numbers::pi / 180.0;
  // Head sits past the top end of the bar (local -y axis).
  const double hx = cx + std::sin(t) * (length / 2 + head * 0.8);
  const double hy = cy - std::cos(t) * (length / 2 + head * 0.8);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double dx = x + 0.5 - hx, dy = y + 0.5 - hy;
      if (dx * dx + dy * dy <= head * head) m.set(x, y);
    }
  }
  return m;
}

}  // namespace sentinel::testing
