#include <gtest/gtest.h>

#include "support.hpp"
#include "tubelink/geometry.hpp"

namespace tubelink {
namespace {

TEST(Geometry, Area) {
  EXPECT_DOUBLE_EQ(area({0, 0, 10, 10}), 100.0);
  EXPECT_DOUBLE_EQ(area({0, 0, 1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(area({2.5, 1.0, 7.5, 3.0}), 10.0);
}

TEST(Geometry, IouExamples) {
  EXPECT_EQ(iou({0, 0, 10, 10}, {0, 0, 10, 10}), 1.0);
  EXPECT_EQ(iou({0, 0, 10, 10}, {20, 20, 30, 30}), 0.0);
  // intersection 50, union 150
  EXPECT_NEAR(iou({0, 0, 10, 10}, {5, 0, 15, 10}), 1.0 / 3.0, 1e-15);
}

TEST(Geometry, TouchingEdgesDoNotOverlap) {
  EXPECT_EQ(iou({0, 0, 10, 10}, {10, 0, 20, 10}), 0.0);
  EXPECT_EQ(iou({0, 0, 10, 10}, {0, 10, 10, 20}), 0.0);
}

TEST(Geometry, Validity) {
  EXPECT_TRUE(is_valid({0, 0, 1, 1}));
  EXPECT_FALSE(is_valid({0, 0, 0, 1}));
  EXPECT_FALSE(is_valid({1, 0, 0, 1}));
  EXPECT_FALSE(is_valid({0, 0, 1, std::nan("")}));
  EXPECT_FALSE(is_valid({0, 0, 1, INFINITY}));
}

TEST(Geometry, IouProperties) {
  Rng rng(7);
  for (int i = 0; i < 2000; ++i) {
    const Box a = testing::random_box(rng, 50.0);
    const Box b = testing::random_box(rng, 50.0);
    const double o = iou(a, b);
    ASSERT_GE(o, 0.0);
    ASSERT_LE(o, 1.0);
    ASSERT_EQ(o, iou(b, a));
    ASSERT_EQ(iou(a, a), 1.0);

    const double dx = rng.uniform(-100, 100);
    const double dy = rng.uniform(-100, 100);
    ASSERT_NEAR(iou(translated(a, dx, dy), translated(b, dx, dy)), o, 1e-12);
    const double s = rng.uniform(0.1, 10.0);
    ASSERT_NEAR(iou(scaled(a, s), scaled(b, s)), o, 1e-12);
  }
}

}  // namespace
}  // namespace tubelink
