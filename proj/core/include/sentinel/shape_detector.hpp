#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "sentinel/frame.hpp"

namespace sentinel {

struct ShapeParams {
  double min_area_fraction = 0.01;    ///< of the ROI area
  double dp_epsilon_fraction = 0.02;  ///< of the contour length
  double angle_tolerance_deg = 15.0;
  double fill_ratio_min = 0.8;
  /// Otsu classes whose means differ by less than this are treated as one uniform surface.
  int min_contrast = 16;

  void validate() const;
  friend bool operator==(const ShapeParams&, const ShapeParams&) = default;
};

struct BinaryImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  BinaryImage() = default;
  BinaryImage(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}

  [[nodiscard]] bool at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool v = true) { bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
  [[nodiscard]] long count() const;
};

/// An 8-connected region. The contour is the Moore boundary starting at the
/// region's top-left-most pixel, without repeating the start point.
struct Blob {
  int label = 0;
  long area = 0;
  Rect bbox;
  std::vector<Point> contour;
};

/// Corners in frame coordinates, counter-clockwise as displayed (y axis down),
/// starting at the corner with the smallest x + y (ties: smaller y).
struct Quadrilateral {
  std::array<Point, 4> corners;

  /// Inclusive pixel bounding box of the corners.
  [[nodiscard]] Rect bounding_box() const;
  friend bool operator==(const Quadrilateral&, const Quadrilateral&) = default;
};

/// Otsu's threshold over a 256-bin histogram: the class split is {<= t} vs {> t}.
/// Returns -1 when fewer than two distinct intensities are present. Ties keep the lowest t.
[[nodiscard]] int otsu_threshold(std::span<const long, 256> histogram);

/// Otsu binarization of the ROI; the minority class is foreground (ties: the dark class).
/// A uniform ROI, or one whose class means differ by less than `min_contrast`, is all clear.
[[nodiscard]] BinaryImage binarize(const GrayFrame& frame, const Rect& roi, int min_contrast = 0);

/// 8-connected labeling; blobs ordered by their first pixel in raster order.
[[nodiscard]] std::vector<Blob> connected_components(const BinaryImage& image);

/// Euclidean length of the closed contour.
[[nodiscard]] double contour_length(std::span<const Point> contour);

/// Douglas-Peucker on a closed contour, split at its two most distant points.
/// Returns a subset of the input in contour order; collinear input yields two points.
[[nodiscard]] std::vector<Point> simplify_polygon(std::span<const Point> contour, double epsilon);

/// Minimal-area enclosing rectangle of a point set (rotating calipers on the hull).
struct OrientedBox {
  double width = 0.0;
  double height = 0.0;
  double angle_rad = 0.0;
};
[[nodiscard]] OrientedBox min_area_rect(std::span<const Point> points);

/// Four vertices, convex, right angles within tolerance, and the blob fills at least
/// fill_ratio_min of its minimal enclosing rectangle (measured in whole pixels).
[[nodiscard]] bool is_rectangle(std::span<const Point> polygon, const ShapeParams& params,
                                const Blob& blob);

[[nodiscard]] std::vector<Quadrilateral> detect_rectangles(const GrayFrame& frame, const Rect& roi,
                                                           const ShapeParams& params);

}  // namespace sentinel
