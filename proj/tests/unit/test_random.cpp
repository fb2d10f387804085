#include <gtest/gtest.h>

#include <cstdint>

#include "dendrite/random.hpp"

using namespace dendrite;

TEST(Random, FixedSeedReproducesStream) {
  for (std::uint64_t i = 0; i < 1000; ++i) {
    EXPECT_EQ(random_field(42, i), random_field(42, i));
  }
  int differ = 0;
  for (std::uint64_t i = 0; i < 100; ++i) differ += random_field(42, i) != random_field(43, i);
  EXPECT_GT(differ, 95);
}

TEST(Random, UniformMeanAndRange) {
  double sum = 0.0;
  double lo = 1.0;
  double hi = 0.0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    const double v = random_field(20240601, static_cast<std::uint64_t>(i));
    sum += v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  EXPECT_GE(sum / n, 0.49);
  EXPECT_LE(sum / n, 0.51);
  EXPECT_GE(lo, 0.0);
  EXPECT_LE(hi, 1.0);
}

TEST(Random, BetaVariantMeanAndRange) {
  // Beta(5/2, 10/2) has mean 1/3
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double v = random_field(7, static_cast<std::uint64_t>(i), RandomDistribution::beta_f);
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
    sum += v;
  }
  EXPECT_NEAR(sum / n, 1.0 / 3.0, 0.01);
}

TEST(Random, DrawIndexSeparatesCoordinates) {
  EXPECT_NE(draw_index(1, 2, 3, 0), draw_index(1, 2, 3, 1));
  EXPECT_NE(draw_index(1, 2, 3, 0), draw_index(2, 2, 3, 0));
  EXPECT_NE(draw_index(1, 2, 3, 0), draw_index(1, 3, 3, 0));
  EXPECT_NE(draw_index(1, 2, 3, 0), draw_index(1, 2, 4, 0));
}

TEST(Random, PerturbationFactor) {
  Perturbation off;
  EXPECT_FALSE(off.active());
  EXPECT_EQ(off.factor(17), 1.0);
  Perturbation on{0.2, 99, RandomDistribution::uniform};
  for (std::uint64_t i = 0; i < 100; ++i) {
    const double f = on.factor(i);
    EXPECT_GE(f, 0.8);
    EXPECT_LE(f, 1.0);
    EXPECT_EQ(f, 1.0 - 0.2 * random_field(99, i));
  }
}
