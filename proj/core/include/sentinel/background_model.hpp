#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sentinel/frame.hpp"

namespace sentinel {

/// Learning-rate scaling of the matched component's mean/variance update.
enum class RhoMode {
  Density,  ///< rho = alpha * N(x | mu, sigma^2), clamped to [alpha * 1e-4, 1]
  Simple,   ///< rho = alpha
};

struct BackgroundParams {
  int components = 3;
  double learning_rate = 0.02;
  double background_ratio = 0.7;
  double match_sigmas = 2.5;
  double initial_variance = 225.0;
  double initial_weight = 0.05;
  double variance_floor = 4.0;
  RhoMode rho_mode = RhoMode::Density;

  /// Throws ConfigError on out-of-range values.
  void validate() const;

  friend bool operator==(const BackgroundParams&, const BackgroundParams&) = default;
};

/// Upper bound on BackgroundParams::components.
inline constexpr int kMaxComponents = 8;

struct GaussianComponent {
  double weight = 0.0;
  double mean = 0.0;
  double variance = 0.0;

  [[nodiscard]] double rank_key() const;
  friend bool operator==(const GaussianComponent&, const GaussianComponent&) = default;
};

/// One pixel's mixture, ordered by descending weight / sigma.
struct PixelMixture {
  std::vector<GaussianComponent> components;
};

/// True iff |x - mean| <= lambda * sigma.
[[nodiscard]] bool matches(double x, const GaussianComponent& c, double lambda);

/// Advances one pixel's mixture by one observation. Returns true when x is foreground,
/// i.e. no component in the background set matched it.
bool update_pixel(PixelMixture& mixture, double x, const BackgroundParams& params);

namespace detail {
/// In-place update over `count` live components stored contiguously (capacity >= params.components).
bool update_components(std::span<GaussianComponent> storage, int& count, double x,
                       const BackgroundParams& params);
}  // namespace detail

struct ForegroundMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;  ///< 1 = foreground

  ForegroundMask() = default;
  ForegroundMask(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}

  [[nodiscard]] bool at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool v = true) { bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
  [[nodiscard]] long count() const;
  friend bool operator==(const ForegroundMask&, const ForegroundMask&) = default;
};

/// Set pixels inside `roi`. Throws ConfigError when the ROI leaves the mask.
[[nodiscard]] long foreground_area(const ForegroundMask& mask, const Rect& roi);

/// P5 rendering: 0 background, 255 foreground.
[[nodiscard]] GrayFrame mask_to_image(const ForegroundMask& mask);
/// Any non-zero pixel is foreground.
[[nodiscard]] ForegroundMask image_to_mask(const GrayFrame& image);

/// Per-pixel adaptive mixture-of-Gaussians background subtraction.
///
/// Every pixel starts with a single unseeded component (weight 1, initial variance).
/// The first frame passed to apply() only seeds the means and yields an all-clear mask;
/// each later frame advances every pixel by exactly one update_pixel step.
class BackgroundModel {
 public:
  BackgroundModel(int width, int height, BackgroundParams params);

  /// Throws ConfigError when the frame size differs from the model.
  ForegroundMask apply(const GrayFrame& frame);

  [[nodiscard]] int width() const { return width_; }
  [[nodiscard]] int height() const { return height_; }
  [[nodiscard]] bool seeded() const { return seeded_; }
  [[nodiscard]] const BackgroundParams& params() const { return params_; }
  [[nodiscard]] PixelMixture mixture(int x, int y) const;
  [[nodiscard]] std::uint64_t frames_seen() const { return frames_; }

 private:
  int width_;
  int height_;
  BackgroundParams params_;
  std::vector<GaussianComponent> components_;  // width*height*K
  std::vector<std::uint8_t> counts_;
  bool seeded_ = false;
  std::uint64_t frames_ = 0;
};

}  // namespace sentinel
