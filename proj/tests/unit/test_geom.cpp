// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "movesort/geom.hpp"

using movesort::Box;

namespace {

// Fraction of uniform samples in a bounding square that fall in both boxes,
// divided by the fraction in either.
double monte_carlo_iou(const Box& a, const Box& b, int samples, std::uint64_t seed) {
  const double x0 = std::min(a.left, b.left), x1 = std::max(a.right(), b.right());
  const double y0 = std::min(a.top, b.top), y1 = std::max(a.bottom(), b.bottom());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(x0, x1), uy(y0, y1);
  auto inside = [](const Box& r, double x, double y) {
    return x >= r.left && x < r.right() && y >= r.top && y < r.bottom();
  };
  long both = 0, either = 0;
  for (int i = 0; i < samples; ++i) {
    const double x = ux(rng), y = uy(rng);
    const bool ia = inside(a, x, y), ib = inside(b, x, y);
    both += ia && ib;
    either += ia || ib;
  }
  return static_cast<double>(both) / static_cast<double>(either);
}

Box random_box(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(-0.2, 1.0), size(0.0, 0.5);
  return {pos(rng), pos(rng), size(rng), size(rng)};
}

}  // namespace

TEST(Iou, IdenticalBoxes) { EXPECT_DOUBLE_EQ(movesort::iou({0, 0, 1, 1}, {0, 0, 1, 1}), 1.0); }

TEST(Iou, DisjointBoxes) { EXPECT_DOUBLE_EQ(movesort::iou({0, 0, 1, 1}, {2, 2, 1, 1}), 0.0); }

TEST(Iou, QuarterOverlapIsOneSeventh) {
  const Box a{0, 0, 0.2, 0.2}, b{0.1, 0.1, 0.2, 0.2};
  EXPECT_NEAR(movesort::iou(a, b), 1.0 / 7.0, 1e-12);
  EXPECT_NEAR(monte_carlo_iou(a, b, 1'000'000, 11), 1.0 / 7.0, 2e-3);
}

TEST(Iou, DegenerateBoxesGiveZero) {
  EXPECT_EQ(movesort::iou({0.3, 0.3, 0, 0}, {0.3, 0.3, 0, 0}), 0.0);
}

TEST(Iou, SymmetricBoundedAndTranslationInvariant) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> shift(-0.5, 0.5);
  for (int i = 0; i < 2000; ++i) {
    const Box a = random_box(rng), b = random_box(rng);
    const double v = movesort::iou(a, b);
    EXPECT_EQ(v, movesort::iou(b, a));
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    const double dx = shift(rng), dy = shift(rng);
    EXPECT_NEAR(movesort::iou(a.translated(dx, dy), b.translated(dx, dy)), v, 1e-12);
    if (a.area() > 0.0) {
      EXPECT_NEAR(movesort::iou(a, a), 1.0, 1e-12);
    }
  }
}

TEST(L1Distance, Examples) {
  EXPECT_EQ(movesort::l1_distance({0.1, 0.2, 0.3, 0.4}, {0.1, 0.2, 0.3, 0.4}), 0.0);
  EXPECT_NEAR(movesort::l1_distance({0, 0, 0.2, 0.2}, {0.1, 0.1, 0.2, 0.2}), 0.2, 1e-15);
  EXPECT_DOUBLE_EQ(movesort::l1_distance({0, 0, 1, 1}, {0.5, 0, 1, 2}), 1.5);
}

TEST(L1Distance, IsAMetric) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 2000; ++i) {
    const Box a = random_box(rng), b = random_box(rng), c = random_box(rng);
    EXPECT_GE(movesort::l1_distance(a, b), 0.0);
    EXPECT_EQ(movesort::l1_distance(a, b), movesort::l1_distance(b, a));
    EXPECT_LE(movesort::l1_distance(a, c),
              movesort::l1_distance(a, b) + movesort::l1_distance(b, c) + 1e-12);
  }
}

TEST(ClipToFrame, Examples) {
  EXPECT_EQ(movesort::clip_to_frame({0.5, 0.5, 0.2, 0.2}), Box(0.5, 0.5, 0.2, 0.2));
  const Box c = movesort::clip_to_frame({-0.1, 0, 0.3, 0.5});
  EXPECT_DOUBLE_EQ(c.left, 0.0);
  EXPECT_DOUBLE_EQ(c.top, 0.0);
  EXPECT_NEAR(c.width, 0.2, 1e-15);
  EXPECT_DOUBLE_EQ(c.height, 0.5);
  EXPECT_EQ(movesort::clip_to_frame({1.2, 1.2, 0.5, 0.5}), Box(1.0, 1.0, 0.0, 0.0));
}

TEST(Box, ConstructionClampsNegativeSizes) {
  const Box b(0.1, 0.1, -0.3, -1.0);
  EXPECT_EQ(b.width, 0.0);
  EXPECT_EQ(b.height, 0.0);
}

TEST(Box, FromPixelsNormalizes) {
  const Box b = Box::from_pixels(10, 20, 30, 40, 100, 200);
  EXPECT_DOUBLE_EQ(b.left, 0.1);
  EXPECT_DOUBLE_EQ(b.top, 0.1);
  EXPECT_DOUBLE_EQ(b.width, 0.3);
  EXPECT_DOUBLE_EQ(b.height, 0.2);
}
