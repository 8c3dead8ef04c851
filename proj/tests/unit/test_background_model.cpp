#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "reference_gmm.hpp"
#include "sentinel/background_model.hpp"
#include "sentinel/error.hpp"
#include "test_support.hpp"

namespace sentinel {
namespace {

using testing::RefParams;
using testing::RefPixel;

PixelMixture single(double w, double mu, double var) { return PixelMixture{{GaussianComponent{w, mu, var}}}; }

TEST(Matches, WithinLambdaSigmas) {
  EXPECT_TRUE(matches(100, {1.0, 100, 25}, 2.5));
  EXPECT_FALSE(matches(120, {1.0, 100, 25}, 2.5));
  EXPECT_TRUE(matches(112, {1.0, 100, 25}, 2.5));
  EXPECT_TRUE(matches(112.5, {1.0, 100, 25}, 2.5));
}

TEST(UpdatePixel, FixedPoint) {
  auto m = single(1.0, 100, 225);
  const bool fg = update_pixel(m, 100, BackgroundParams{});
  EXPECT_FALSE(fg);
  ASSERT_EQ(m.components.size(), 1u);
  EXPECT_DOUBLE_EQ(m.components[0].weight, 1.0);
  EXPECT_DOUBLE_EQ(m.components[0].mean, 100.0);
}

TEST(UpdatePixel, MatchedWeightBeforeNormalization) {
  // Two components so renormalization does not hide the raw update.
  BackgroundParams p;
  p.learning_rate = 0.05;
  PixelMixture m{{GaussianComponent{0.5, 100, 25}, GaussianComponent{0.5, 200, 25}}};
  (void)update_pixel(m, 100, p);
  // Raw weights 0.525 and 0.475 already sum to one.
  EXPECT_NEAR(m.components[0].weight, 0.5 * 0.95 + 0.05, 1e-15);
  EXPECT_NEAR(m.components[1].weight, 0.5 * 0.95, 1e-15);
}

TEST(UpdatePixel, NoMatchReplacesWhenFull) {
  BackgroundParams p;
  p.components = 1;
  auto m = single(1.0, 100, 25);
  EXPECT_TRUE(update_pixel(m, 200, p));
  ASSERT_EQ(m.components.size(), 1u);
  EXPECT_DOUBLE_EQ(m.components[0].mean, 200.0);
  EXPECT_DOUBLE_EQ(m.components[0].variance, 225.0);
  EXPECT_DOUBLE_EQ(m.components[0].weight, 1.0);
}

TEST(UpdatePixel, NoMatchAddsComponentWhenRoomLeft) {
  auto m = single(1.0, 100, 25);
  EXPECT_TRUE(update_pixel(m, 200, BackgroundParams{}));
  ASSERT_EQ(m.components.size(), 2u);
  const auto fresh = std::find_if(m.components.begin(), m.components.end(),
                                  [](const GaussianComponent& c) { return c.mean == 200.0; });
  ASSERT_NE(fresh, m.components.end());
  EXPECT_DOUBLE_EQ(fresh->variance, 225.0);
  EXPECT_NEAR(fresh->weight, 0.05 / (0.98 + 0.05), 1e-15);
}

TEST(UpdatePixel, SimpleRhoUsesAlpha) {
  BackgroundParams p;
  p.rho_mode = RhoMode::Simple;
  auto m = single(1.0, 100, 225);
  (void)update_pixel(m, 110, p);
  EXPECT_NEAR(m.components[0].mean, 0.98 * 100 + 0.02 * 110, 1e-12);
  const double d = 110 - m.components[0].mean;
  EXPECT_NEAR(m.components[0].variance, 0.98 * 225 + 0.02 * d * d, 1e-12);
}

TEST(BackgroundModel, SeedsOnFirstFrame) {
  BackgroundModel model(2, 2, BackgroundParams{});
  const auto mask = model.apply(GrayFrame(2, 2, 100));
  EXPECT_EQ(mask.count(), 0);
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < 2; ++x) {
      const auto m = model.mixture(x, y);
      ASSERT_EQ(m.components.size(), 1u);
      EXPECT_EQ(m.components[0], (GaussianComponent{1.0, 100.0, 225.0}));
    }
  }
}

TEST(BackgroundModel, SingleComponentCapacityHolds) {
  BackgroundParams p;
  p.components = 1;
  BackgroundModel model(3, 3, p);
  std::mt19937 rng(1);
  std::uniform_int_distribution<int> px(0, 255);
  for (int f = 0; f < 50; ++f) {
    GrayFrame g(3, 3);
    for (auto& v : g.pixels) v = static_cast<std::uint8_t>(px(rng));
    (void)model.apply(g);
    for (int i = 0; i < 9; ++i) ASSERT_EQ(model.mixture(i % 3, i / 3).components.size(), 1u);
  }
}

TEST(BackgroundModel, RejectsBadDimensions) {
  EXPECT_THROW(BackgroundModel(0, 5, BackgroundParams{}), ConfigError);
  BackgroundModel model(8, 8, BackgroundParams{});
  EXPECT_THROW((void)model.apply(GrayFrame(4, 4)), ConfigError);
}

TEST(BackgroundModel, ConstantSceneIsBackground) {
  BackgroundModel model(6, 6, BackgroundParams{});
  ForegroundMask mask;
  for (int i = 0; i < 100; ++i) mask = model.apply(GrayFrame(6, 6, 90));
  EXPECT_EQ(mask.count(), 0);
}

TEST(BackgroundModel, ShiftedPatchIsExactlyForeground) {
  BackgroundModel model(30, 30, BackgroundParams{});
  for (int i = 0; i < 50; ++i) (void)model.apply(GrayFrame(30, 30, 90));
  GrayFrame g(30, 30, 90);
  for (int y = 5; y < 15; ++y) {
    for (int x = 12; x < 22; ++x) g.at(x, y) = 170;
  }
  const auto mask = model.apply(g);
  EXPECT_EQ(mask, testing::box_mask(30, 30, Rect{12, 5, 10, 10}));
}

TEST(BackgroundModel, MatchesScalarReferenceBitForBit) {
  const BackgroundParams p;
  RefParams rp;
  BackgroundModel model(4, 4, p);
  std::vector<RefPixel> ref(16, RefPixel(rp));
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> px(0, 255), choice(0, 3);
  std::array<int, 16> base{};
  for (auto& b : base) b = px(rng);
  for (int f = 0; f < 50; ++f) {
    GrayFrame g(4, 4);
    for (int i = 0; i < 16; ++i) {
      // Mostly stable values with occasional jumps, so all branches are taken.
      const int c = choice(rng);
      g.pixels[i] = static_cast<std::uint8_t>(c == 0 ? px(rng) : std::clamp(base[i] + c - 2, 0, 255));
    }
    const auto mask = model.apply(g);
    for (int i = 0; i < 16; ++i) {
      const bool fg = ref[i].update(g.pixels[i], rp);
      ASSERT_EQ(mask.bits[i] != 0, fg) << "frame " << f << " pixel " << i;
    }
  }
  for (int i = 0; i < 16; ++i) {
    const auto m = model.mixture(i % 4, i / 4);
    ASSERT_EQ(static_cast<int>(m.components.size()), ref[i].n);
    for (int k = 0; k < ref[i].n; ++k) {
      EXPECT_EQ(m.components[k].weight, ref[i].c[k].w);
      EXPECT_EQ(m.components[k].mean, ref[i].c[k].mu);
      EXPECT_EQ(m.components[k].variance, ref[i].c[k].var);
    }
  }
}

TEST(BackgroundModel, InvariantsUnderRandomUpdates) {
  BackgroundParams p;
  std::mt19937 rng(9);
  std::uniform_int_distribution<int> px(0, 255);
  std::uniform_int_distribution<int> mode(0, 9);
  PixelMixture m = single(1.0, 128, p.initial_variance);
  int level = 128;
  for (int step = 0; step < 10000; ++step) {
    if (mode(rng) == 0) level = px(rng);
    const double x = std::clamp(level + px(rng) % 7 - 3, 0, 255);
    (void)update_pixel(m, x, p);
    double sum = 0.0;
    for (std::size_t i = 0; i < m.components.size(); ++i) {
      sum += m.components[i].weight;
      ASSERT_GE(m.components[i].variance, p.variance_floor);
      if (i > 0) ASSERT_GE(m.components[i - 1].rank_key(), m.components[i].rank_key());
    }
    ASSERT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(BackgroundModel, Deterministic) {
  auto run = [] {
    BackgroundModel model(5, 5, BackgroundParams{});
    std::mt19937 rng(77);
    std::uniform_int_distribution<int> px(0, 255);
    std::vector<ForegroundMask> masks;
    for (int f = 0; f < 30; ++f) {
      GrayFrame g(5, 5);
      for (auto& v : g.pixels) v = static_cast<std::uint8_t>(px(rng));
      masks.push_back(model.apply(g));
    }
    return masks;
  };
  EXPECT_EQ(run(), run());
}

TEST(ForegroundArea, Counts) {
  ForegroundMask clear(20, 20);
  EXPECT_EQ(foreground_area(clear, Rect{0, 0, 10, 10}), 0);
  ForegroundMask full(20, 20);
  std::fill(full.bits.begin(), full.bits.end(), 1);
  EXPECT_EQ(foreground_area(full, Rect{3, 4, 10, 10}), 100);
  ForegroundMask checker(8, 8);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) checker.set(x, y, (x + y) % 2 == 0);
  }
  EXPECT_EQ(foreground_area(checker, Rect{1, 2, 4, 4}), 8);
  EXPECT_THROW((void)foreground_area(checker, Rect{6, 6, 4, 4}), ConfigError);
}

TEST(ForegroundMask, ImageRoundTrip) {
  ForegroundMask m(4, 3);
  m.set(1, 2);
  m.set(3, 0);
  const auto img = mask_to_image(m);
  EXPECT_EQ(img.at(1, 2), 255);
  EXPECT_EQ(img.at(0, 0), 0);
  EXPECT_EQ(image_to_mask(img), m);
}

}  // namespace
}  // namespace sentinel
