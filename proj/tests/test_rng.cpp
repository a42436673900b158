#include <gtest/gtest.h>

#include <set>

#include "strichartz/philox.hpp"

using namespace strichartz;
using rng::Counter;

// Known-answer vectors published with the Random123 reference implementation.
TEST(Philox, KnownAnswers) {
  EXPECT_EQ(rng::philox4x32_10({0, 0, 0, 0}, {0, 0}), (Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(rng::philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(rng::philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(CounterRng, StreamsAndBlocksAreDistinct) {
  const rng::CounterRng a(7, rng::Stream::walk), b(7, rng::Stream::signs), c(8, rng::Stream::walk);
  EXPECT_NE(a.raw(0), b.raw(0));
  EXPECT_NE(a.raw(0), c.raw(0));
  EXPECT_NE(a.raw(0, 0), a.raw(0, 1));
  EXPECT_NE(a.raw(0), a.raw(-1));
  EXPECT_EQ(a.raw(12345, 3), rng::CounterRng(7, rng::Stream::walk).raw(12345, 3));
  // The high seed word reaches the key.
  EXPECT_NE(rng::CounterRng(1, rng::Stream::walk).raw(0), rng::CounterRng(1 + (1ull << 32), rng::Stream::walk).raw(0));
}

TEST(CounterRng, UniformsInOpenUnitInterval) {
  const rng::CounterRng g(1, rng::Stream::weights);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const auto [u, w] = g.uniform2(i);
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_GT(w, 0.0);
    ASSERT_LT(w, 1.0);
    sum += u + w;
  }
  EXPECT_NEAR(sum / (2.0 * n), 0.5, 5.0 * std::sqrt(1.0 / 12.0 / (2.0 * n)));
}

TEST(CounterRng, NormalMoments) {
  const rng::CounterRng g(3, rng::Stream::walk);
  const int n = 200000;
  double m1 = 0, m2 = 0, m4 = 0, cross = 0;
  for (int i = 0; i < n; ++i) {
    const Vec2 z = g.normal2(i);
    for (double x : {z.x, z.y}) {
      m1 += x;
      m2 += x * x;
      m4 += x * x * x * x;
    }
    cross += z.x * z.y;
  }
  const double N = 2.0 * n;
  EXPECT_NEAR(m1 / N, 0.0, 5.0 / std::sqrt(N));
  EXPECT_NEAR(m2 / N, 1.0, 5.0 * std::sqrt(2.0 / N));
  EXPECT_NEAR(m4 / N, 3.0, 5.0 * std::sqrt(96.0 / N));
  EXPECT_NEAR(cross / n, 0.0, 5.0 / std::sqrt(n));
}

TEST(CounterRng, SignsAreBalanced) {
  const rng::CounterRng g(9, rng::Stream::signs);
  std::set<double> seen;
  double s = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double x = g.sign(i);
    seen.insert(x);
    s += x;
  }
  EXPECT_EQ(seen, (std::set<double>{-1.0, 1.0}));
  EXPECT_LT(std::abs(s) / n, 5.0 / std::sqrt(n));
}
