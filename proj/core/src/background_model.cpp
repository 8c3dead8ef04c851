#include "sentinel/background_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "sentinel/error.hpp"

namespace sentinel {

void BackgroundParams::validate() const {
  if (components < 1 || components > kMaxComponents) {
    throw ConfigError("background components must be in [1, " + std::to_string(kMaxComponents) + "]");
  }
  if (!(learning_rate > 0.0 && learning_rate < 1.0)) throw ConfigError("learning_rate must be in (0, 1)");
  if (!(background_ratio > 0.0 && background_ratio < 1.0)) {
    throw ConfigError("background_ratio must be in (0, 1)");
  }
  if (!(match_sigmas > 0.0)) throw ConfigError("match_sigmas must be positive");
  if (!(variance_floor > 0.0)) throw ConfigError("variance_floor must be positive");
  if (!(initial_variance >= variance_floor)) {
    throw ConfigError("initial_variance must be at least variance_floor");
  }
  if (!(initial_weight > 0.0 && initial_weight <= 1.0)) {
    throw ConfigError("initial_weight must be in (0, 1]");
  }
}

double GaussianComponent::rank_key() const { return weight / std::sqrt(variance); }

bool matches(double x, const GaussianComponent& c, double lambda) {
  return std::abs(x - c.mean) <= lambda * std::sqrt(c.variance);
}

namespace detail {

namespace {

double density(double x, double mean, double variance) {
  const double d = x - mean;
  return std::exp(-(d * d) / (2.0 * variance)) / std::sqrt(2.0 * std::numbers::pi * variance);
}

}  // namespace

bool update_components(std::span<GaussianComponent> storage, int& count, double x,
                       const BackgroundParams& p) {
  const double alpha = p.learning_rate;

  int matched = -1;
  for (int i = 0; i < count; ++i) {
    if (matches(x, storage[i], p.match_sigmas)) {
      matched = i;
      break;
    }
  }

  for (int i = 0; i < count; ++i) {
    storage[i].weight = (1.0 - alpha) * storage[i].weight + (i == matched ? alpha : 0.0);
  }

  if (matched >= 0) {
    auto& c = storage[matched];
    double rho = alpha;
    if (p.rho_mode == RhoMode::Density) {
      rho = std::clamp(alpha * density(x, c.mean, c.variance), alpha * 1e-4, 1.0);
    }
    c.mean = (1.0 - rho) * c.mean + rho * x;
    const double d = x - c.mean;
    c.variance = std::max((1.0 - rho) * c.variance + rho * d * d, p.variance_floor);
  }
  const bool had_match = matched >= 0;
  if (!had_match) {
    const GaussianComponent fresh{p.initial_weight, x, p.initial_variance};
    if (count < p.components) {
      matched = count++;
    } else {
      matched = count - 1;
    }
    storage[matched] = fresh;
  }

  double total = 0.0;
  for (int i = 0; i < count; ++i) total += storage[i].weight;
  for (int i = 0; i < count; ++i) storage[i].weight /= total;

  // Stable insertion sort by descending weight/sigma, tracking the matched slot.
  for (int i = 1; i < count; ++i) {
    const GaussianComponent moving = storage[i];
    const double key = moving.rank_key();
    int j = i - 1;
    while (j >= 0 && storage[j].rank_key() < key) {
      storage[j + 1] = storage[j];
      if (matched == j) matched = j + 1;
      --j;
    }
    if (matched == i) matched = j + 1;
    storage[j + 1] = moving;
  }

  if (!had_match) return true;

  int background = count;
  double cumulative = 0.0;
  for (int i = 0; i < count; ++i) {
    cumulative += storage[i].weight;
    if (cumulative > p.background_ratio) {
      background = i + 1;
      break;
    }
  }
  return matched >= background;
}

}  // namespace detail

bool update_pixel(PixelMixture& mixture, double x, const BackgroundParams& params) {
  std::array<GaussianComponent, kMaxComponents> storage{};
  int count = static_cast<int>(mixture.components.size());
  std::copy(mixture.components.begin(), mixture.components.end(), storage.begin());
  const bool fg = detail::update_components(std::span(storage).first(params.components), count, x, params);
  mixture.components.assign(storage.begin(), storage.begin() + count);
  return fg;
}

long ForegroundMask::count() const {
  long n = 0;
  for (auto b : bits) n += b != 0;
  return n;
}

long foreground_area(const ForegroundMask& mask, const Rect& roi) {
  if (!roi.fits_within(mask.width, mask.height)) {
    throw ConfigError("ROI lies outside the foreground mask");
  }
  long n = 0;
  for (int y = roi.y; y < roi.bottom(); ++y) {
    const auto* row = mask.bits.data() + static_cast<std::size_t>(y) * mask.width;
    for (int x = roi.x; x < roi.right(); ++x) n += row[x] != 0;
  }
  return n;
}

GrayFrame mask_to_image(const ForegroundMask& mask) {
  GrayFrame img(mask.width, mask.height);
  for (std::size_t i = 0; i < mask.bits.size(); ++i) img.pixels[i] = mask.bits[i] ? 255 : 0;
  return img;
}

ForegroundMask image_to_mask(const GrayFrame& image) {
  ForegroundMask mask(image.width, image.height);
  for (std::size_t i = 0; i < image.pixels.size(); ++i) mask.bits[i] = image.pixels[i] != 0;
  return mask;
}

BackgroundModel::BackgroundModel(int width, int height, BackgroundParams params)
    : width_(width), height_(height), params_(params) {
  if (width < 1 || height < 1) throw ConfigError("background model needs positive dimensions");
  params_.validate();
  const std::size_t pixels = static_cast<std::size_t>(width) * height;
  components_.assign(pixels * params_.components, GaussianComponent{});
  counts_.assign(pixels, 1);
  for (std::size_t i = 0; i < pixels; ++i) {
    components_[i * params_.components] =
        GaussianComponent{1.0, std::numeric_limits<double>::quiet_NaN(), params_.initial_variance};
  }
}

ForegroundMask BackgroundModel::apply(const GrayFrame& frame) {
  if (frame.width != width_ || frame.height != height_) {
    throw ConfigError("frame " + std::to_string(frame.width) + "x" + std::to_string(frame.height) +
                      " does not match background model " + std::to_string(width_) + "x" +
                      std::to_string(height_));
  }
  ForegroundMask mask(width_, height_);
  const std::size_t pixels = frame.pixels.size();
  const auto k = static_cast<std::size_t>(params_.components);
  ++frames_;
  if (!seeded_) {
    for (std::size_t i = 0; i < pixels; ++i) components_[i * k].mean = frame.pixels[i];
    seeded_ = true;
    return mask;
  }
  for (std::size_t i = 0; i < pixels; ++i) {
    int count = counts_[i];
    const bool fg = detail::update_components(std::span(components_).subspan(i * k, k), count,
                                              frame.pixels[i], params_);
    counts_[i] = static_cast<std::uint8_t>(count);
    mask.bits[i] = fg ? 1 : 0;
  }
  return mask;
}

PixelMixture BackgroundModel::mixture(int x, int y) const {
  const std::size_t i = static_cast<std::size_t>(y) * width_ + x;
  const auto k = static_cast<std::size_t>(params_.components);
  PixelMixture m;
  m.components.assign(components_.begin() + static_cast<long>(i * k),
                      components_.begin() + static_cast<long>(i * k + counts_[i]));
  return m;
}

}  // namespace sentinel
