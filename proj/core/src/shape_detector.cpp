#include "sentinel/shape_detector.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>

#include "sentinel/error.hpp"

namespace sentinel {

void ShapeParams::validate() const {
  if (!(min_area_fraction > 0.0)) throw ConfigError("min_area_fraction must be positive");
  if (!(dp_epsilon_fraction > 0.0)) throw ConfigError("dp_epsilon_fraction must be positive");
  if (!(angle_tolerance_deg > 0.0 && angle_tolerance_deg < 45.0)) {
    throw ConfigError("angle_tolerance_deg must be in (0, 45)");
  }
  if (!(fill_ratio_min > 0.0)) throw ConfigError("fill_ratio_min must be positive");
  if (min_contrast < 0) throw ConfigError("min_contrast must be non-negative");
}

long BinaryImage::count() const {
  long n = 0;
  for (auto b : bits) n += b != 0;
  return n;
}

Rect Quadrilateral::bounding_box() const {
  int x0 = corners[0].x, x1 = corners[0].x, y0 = corners[0].y, y1 = corners[0].y;
  for (const auto& p : corners) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  return Rect{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

int otsu_threshold(std::span<const long, 256> histogram) {
  double total = 0.0;
  double weighted = 0.0;
  int distinct = 0;
  for (int i = 0; i < 256; ++i) {
    total += static_cast<double>(histogram[i]);
    weighted += static_cast<double>(i) * static_cast<double>(histogram[i]);
    distinct += histogram[i] > 0;
  }
  if (distinct < 2) return -1;

  int best = -1;
  double best_between = -1.0;
  double w0 = 0.0;
  double sum0 = 0.0;
  for (int t = 0; t < 255; ++t) {
    w0 += static_cast<double>(histogram[t]);
    sum0 += static_cast<double>(t) * static_cast<double>(histogram[t]);
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double mean0 = sum0 / w0;
    const double mean1 = (weighted - sum0) / w1;
    const double between = w0 * w1 * (mean0 - mean1) * (mean0 - mean1);
    if (between > best_between) {
      best_between = between;
      best = t;
    }
  }
  return best;
}

BinaryImage binarize(const GrayFrame& frame, const Rect& roi, int min_contrast) {
  if (!roi.fits_within(frame.width, frame.height)) throw ConfigError("ROI lies outside the frame");
  std::array<long, 256> hist{};
  for (int y = roi.y; y < roi.bottom(); ++y) {
    for (int x = roi.x; x < roi.right(); ++x) ++hist[frame.at(x, y)];
  }
  BinaryImage out(roi.w, roi.h);
  const int t = otsu_threshold(hist);
  if (t < 0) return out;

  long dark = 0;
  double dark_sum = 0.0;
  double bright_sum = 0.0;
  for (int i = 0; i < 256; ++i) {
    if (i <= t) {
      dark += hist[i];
      dark_sum += static_cast<double>(i) * static_cast<double>(hist[i]);
    } else {
      bright_sum += static_cast<double>(i) * static_cast<double>(hist[i]);
    }
  }
  const long bright = roi.area() - dark;
  const double contrast = bright_sum / static_cast<double>(bright) - dark_sum / static_cast<double>(dark);
  if (contrast < min_contrast) return out;

  const bool dark_is_foreground = dark <= bright;
  for (int y = 0; y < roi.h; ++y) {
    for (int x = 0; x < roi.w; ++x) {
      const bool is_dark = frame.at(roi.x + x, roi.y + y) <= t;
      out.set(x, y, is_dark == dark_is_foreground);
    }
  }
  return out;
}

namespace {

// Clockwise as displayed with y down, starting west.
constexpr std::array<Point, 8> kDirs{{{-1, 0}, {-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}}};

int dir_index(int dx, int dy) {
  for (int i = 0; i < 8; ++i) {
    if (kDirs[i].x == dx && kDirs[i].y == dy) return i;
  }
  return 0;
}

std::vector<Point> trace_boundary(const std::vector<int>& labels, int width, int height, int label,
                                  Point start, long area) {
  auto inside = [&](int x, int y) {
    return x >= 0 && y >= 0 && x < width && y < height &&
           labels[static_cast<std::size_t>(y) * width + x] == label;
  };
  std::vector<Point> contour{start};
  Point c = start;
  int back = 0;  // west of the top-left-most pixel is never in the blob
  const long max_steps = 8 * area + 16;
  for (long step = 0; step < max_steps; ++step) {
    int found = -1;
    for (int k = 1; k <= 8; ++k) {
      const int d = (back + k) % 8;
      if (inside(c.x + kDirs[d].x, c.y + kDirs[d].y)) {
        found = d;
        break;
      }
    }
    if (found < 0) break;  // isolated pixel
    const Point p{c.x + kDirs[found].x, c.y + kDirs[found].y};
    if (c == start && contour.size() > 1 && p == contour[1]) {
      contour.pop_back();
      break;
    }
    const int prev = (found + 7) % 8;
    const Point q{c.x + kDirs[prev].x, c.y + kDirs[prev].y};
    back = dir_index(q.x - p.x, q.y - p.y);
    contour.push_back(p);
    c = p;
  }
  return contour;
}

double cross(Point o, Point a, Point b) {
  return static_cast<double>(a.x - o.x) * (b.y - o.y) - static_cast<double>(a.y - o.y) * (b.x - o.x);
}

std::vector<Point> convex_hull(std::span<const Point> points) {
  std::vector<Point> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](Point a, Point b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

double dist2(Point a, Point b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

double segment_distance(Point p, Point a, Point b) {
  const double vx = b.x - a.x;
  const double vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  if (len2 == 0.0) return std::sqrt(dist2(p, a));
  double t = ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = p.x - (a.x + t * vx);
  const double dy = p.y - (a.y + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

// Marks kept indices of the open chain contour[first..last] (cyclic indices).
void douglas_peucker(std::span<const Point> contour, std::size_t first, std::size_t span_len,
                     double epsilon, std::vector<bool>& keep) {
  const std::size_t n = contour.size();
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, span_len}};
  while (!stack.empty()) {
    const auto [lo, hi] = stack.back();
    stack.pop_back();
    if (hi <= lo + 1) continue;
    const Point a = contour[(first + lo) % n];
    const Point b = contour[(first + hi) % n];
    double worst = -1.0;
    std::size_t worst_at = lo;
    for (std::size_t i = lo + 1; i < hi; ++i) {
      const double d = segment_distance(contour[(first + i) % n], a, b);
      if (d > worst) {
        worst = d;
        worst_at = i;
      }
    }
    if (worst > epsilon) {
      keep[(first + worst_at) % n] = true;
      stack.emplace_back(lo, worst_at);
      stack.emplace_back(worst_at, hi);
    }
  }
}

}  // namespace

std::vector<Blob> connected_components(const BinaryImage& image) {
  const int w = image.width;
  const int h = image.height;
  std::vector<int> labels(static_cast<std::size_t>(w) * h, 0);
  std::vector<Blob> blobs;
  std::deque<Point> queue;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      if (!image.bits[idx] || labels[idx] != 0) continue;
      Blob blob;
      blob.label = static_cast<int>(blobs.size()) + 1;
      int x0 = x, x1 = x, y0 = y, y1 = y;
      labels[idx] = blob.label;
      queue.push_back({x, y});
      while (!queue.empty()) {
        const Point p = queue.front();
        queue.pop_front();
        ++blob.area;
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
        for (const auto& d : kDirs) {
          const int nx = p.x + d.x;
          const int ny = p.y + d.y;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const std::size_t n = static_cast<std::size_t>(ny) * w + nx;
          if (image.bits[n] && labels[n] == 0) {
            labels[n] = blob.label;
            queue.push_back({nx, ny});
          }
        }
      }
      blob.bbox = Rect{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
      blob.contour = trace_boundary(labels, w, h, blob.label, Point{x, y}, blob.area);
      blobs.push_back(std::move(blob));
    }
  }
  return blobs;
}

double contour_length(std::span<const Point> contour) {
  if (contour.size() < 2) return 0.0;
  double len = 0.0;
  for (std::size_t i = 0; i < contour.size(); ++i) {
    len += std::sqrt(dist2(contour[i], contour[(i + 1) % contour.size()]));
  }
  return len;
}

std::vector<Point> simplify_polygon(std::span<const Point> contour, double epsilon) {
  const std::size_t n = contour.size();
  if (n < 3) return {contour.begin(), contour.end()};

  // Diameter endpoints: farthest pair among hull vertices, mapped to first contour occurrence.
  const auto hull = convex_hull(contour);
  Point pa = contour[0], pb = contour[0];
  double best = -1.0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    for (std::size_t j = i + 1; j < hull.size(); ++j) {
      const double d = dist2(hull[i], hull[j]);
      if (d > best) {
        best = d;
        pa = hull[i];
        pb = hull[j];
      }
    }
  }
  std::size_t ia = n, ib = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (ia == n && contour[i] == pa) ia = i;
    if (ib == n && contour[i] == pb) ib = i;
  }
  if (ia == ib) return {contour[ia]};
  if (ia > ib) std::swap(ia, ib);

  std::vector<bool> keep(n, false);
  keep[ia] = true;
  keep[ib] = true;
  douglas_peucker(contour, ia, ib - ia, epsilon, keep);
  douglas_peucker(contour, ib, n - (ib - ia), epsilon, keep);

  std::vector<Point> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i]) out.push_back(contour[i]);
  }
  return out;
}

OrientedBox min_area_rect(std::span<const Point> points) {
  const auto hull = convex_hull(points);
  OrientedBox best{};
  if (hull.empty()) return best;
  if (hull.size() == 1) return best;
  double best_area = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Point a = hull[i];
    const Point b = hull[(i + 1) % hull.size()];
    const double ex = b.x - a.x;
    const double ey = b.y - a.y;
    const double len = std::hypot(ex, ey);
    if (len == 0.0) continue;
    const double ux = ex / len, uy = ey / len;
    double min_u = std::numeric_limits<double>::infinity(), max_u = -min_u;
    double min_v = min_u, max_v = -min_u;
    for (const auto& p : hull) {
      const double u = (p.x - a.x) * ux + (p.y - a.y) * uy;
      const double v = -(p.x - a.x) * uy + (p.y - a.y) * ux;
      min_u = std::min(min_u, u);
      max_u = std::max(max_u, u);
      min_v = std::min(min_v, v);
      max_v = std::max(max_v, v);
    }
    const double area = (max_u - min_u) * (max_v - min_v);
    if (area < best_area) {
      best_area = area;
      best = OrientedBox{max_u - min_u, max_v - min_v, std::atan2(uy, ux)};
    }
  }
  return best;
}

bool is_rectangle(std::span<const Point> polygon, const ShapeParams& params, const Blob& blob) {
  if (polygon.size() != 4) return false;
  double sign = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const Point prev = polygon[(i + 3) % 4];
    const Point cur = polygon[i];
    const Point next = polygon[(i + 1) % 4];
    const double turn = cross(prev, cur, next);
    if (turn == 0.0) return false;
    if (sign == 0.0) sign = turn;
    if ((turn > 0.0) != (sign > 0.0)) return false;

    const double ax = prev.x - cur.x, ay = prev.y - cur.y;
    const double bx = next.x - cur.x, by = next.y - cur.y;
    const double cosine = (ax * bx + ay * by) / (std::hypot(ax, ay) * std::hypot(bx, by));
    const double angle = std::acos(std::clamp(cosine, -1.0, 1.0)) * 180.0 / std::numbers::pi;
    if (std::abs(angle - 90.0) > params.angle_tolerance_deg) return false;
  }
  // Pixel centers span (extent - 1); each side covers one more pixel.
  const auto box = min_area_rect(blob.contour);
  const double enclosing = (box.width + 1.0) * (box.height + 1.0);
  return static_cast<double>(blob.area) / enclosing >= params.fill_ratio_min;
}

namespace {

struct Line {
  double cx, cy, dx, dy;
};

// Total least squares fit through the points.
Line fit_line(std::span<const Point> pts) {
  double cx = 0, cy = 0;
  for (const auto& p : pts) {
    cx += p.x;
    cy += p.y;
  }
  cx /= static_cast<double>(pts.size());
  cy /= static_cast<double>(pts.size());
  double sxx = 0, syy = 0, sxy = 0;
  for (const auto& p : pts) {
    const double x = p.x - cx, y = p.y - cy;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
  }
  const double theta = 0.5 * std::atan2(2 * sxy, sxx - syy);
  return {cx, cy, std::cos(theta), std::sin(theta)};
}

// Corners moved to the intersections of lines fitted to each side's contour run.
std::vector<Point> refine_corners(std::span<const Point> contour, std::span<const Point> polygon) {
  const std::size_t n = contour.size();
  std::vector<std::size_t> idx;
  std::size_t from = 0;
  for (const auto& v : polygon) {
    std::size_t i = from;
    while (i < n && !(contour[i] == v)) ++i;
    if (i == n) return {polygon.begin(), polygon.end()};
    idx.push_back(i);
    from = i + 1;
  }
  const std::size_t k = polygon.size();
  std::vector<Line> sides;
  for (std::size_t s = 0; s < k; ++s) {
    const std::size_t a = idx[s], b = idx[(s + 1) % k];
    const std::size_t len = (b + n - a) % n;
    const Point pa = contour[a], pb = contour[b];
    std::vector<Point> run, trimmed;
    for (std::size_t j = 0; j <= len; ++j) run.push_back(contour[(a + j) % n]);
    for (const auto& p : run) {
      if (std::hypot(p.x - pa.x, p.y - pa.y) > 2.0 && std::hypot(p.x - pb.x, p.y - pb.y) > 2.0) trimmed.push_back(p);
    }
    sides.push_back(fit_line(trimmed.size() >= 3 ? trimmed : run));
  }
  std::vector<Point> out;
  for (std::size_t s = 0; s < k; ++s) {
    const Line& l1 = sides[(s + k - 1) % k];
    const Line& l2 = sides[s];
    const double det = l1.dx * (-l2.dy) - l1.dy * (-l2.dx);
    const Point v = polygon[s];
    if (std::abs(det) < 1e-6) {
      out.push_back(v);
      continue;
    }
    const double rx = l2.cx - l1.cx, ry = l2.cy - l1.cy;
    const double t = (rx * (-l2.dy) - ry * (-l2.dx)) / det;
    const double x = l1.cx + t * l1.dx, y = l1.cy + t * l1.dy;
    if (std::hypot(x - v.x, y - v.y) > 3.0) {
      out.push_back(v);
    } else {
      out.push_back(Point{static_cast<int>(std::lround(x)), static_cast<int>(std::lround(y))});
    }
  }
  return out;
}

Quadrilateral canonical_quad(std::span<const Point> polygon, Point offset) {
  std::array<Point, 4> c{};
  for (std::size_t i = 0; i < 4; ++i) c[i] = Point{polygon[i].x + offset.x, polygon[i].y + offset.y};
  long twice_area = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& a = c[i];
    const auto& b = c[(i + 1) % 4];
    twice_area += static_cast<long>(a.x) * b.y - static_cast<long>(b.x) * a.y;
  }
  // Positive shoelace sum is clockwise on screen; flip to counter-clockwise.
  if (twice_area > 0) std::reverse(c.begin(), c.end());
  std::size_t first = 0;
  for (std::size_t i = 1; i < 4; ++i) {
    const int s = c[i].x + c[i].y;
    const int fs = c[first].x + c[first].y;
    if (s < fs || (s == fs && c[i].y < c[first].y)) first = i;
  }
  std::rotate(c.begin(), c.begin() + static_cast<long>(first), c.end());
  return Quadrilateral{c};
}

}  // namespace

std::vector<Quadrilateral> detect_rectangles(const GrayFrame& frame, const Rect& roi,
                                             const ShapeParams& params) {
  const BinaryImage bin = binarize(frame, roi, params.min_contrast);
  const double min_area = params.min_area_fraction * static_cast<double>(roi.area());
  std::vector<Quadrilateral> found;
  for (const auto& blob : connected_components(bin)) {
    if (static_cast<double>(blob.area) < min_area || blob.contour.size() < 3) continue;
    const double eps = params.dp_epsilon_fraction * contour_length(blob.contour);
    const auto poly = simplify_polygon(blob.contour, eps);
    if (!is_rectangle(poly, params, blob)) continue;
    found.push_back(canonical_quad(refine_corners(blob.contour, poly), Point{roi.x, roi.y}));
  }
  return found;
}

}  // namespace sentinel
