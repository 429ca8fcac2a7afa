#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "meanrev/philox.hpp"

using meanrev::Philox4x32;

// Published known-answer vectors for Philox4x32-10.
TEST(Philox, KnownAnswerZero) {
  const auto out = Philox4x32::encrypt({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out, (Philox4x32::Block{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(Philox, KnownAnswerAllOnes) {
  const auto out = Philox4x32::encrypt({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out, (Philox4x32::Block{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, KnownAnswerPiDigits) {
  const auto out = Philox4x32::encrypt({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(out, (Philox4x32::Block{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Philox, StreamLayout) {
  const std::uint64_t seed = 0x0123456789abcdefULL;
  Philox4x32 rng(seed);
  const Philox4x32::Key key{0x89abcdefu, 0x01234567u};
  for (std::uint32_t block = 0; block < 3; ++block) {
    const auto expect = Philox4x32::encrypt({block, 0, 0, 0}, key);
    for (int w = 0; w < 4; ++w) EXPECT_EQ(rng.next_u32(), expect[static_cast<std::size_t>(w)]);
  }
}

TEST(Philox, UniformFromWordPairs) {
  Philox4x32 words(42);
  Philox4x32 rng(42);
  for (int i = 0; i < 10; ++i) {
    const std::uint64_t a = words.next_u32();
    const std::uint64_t b = words.next_u32();
    const double expect = std::ldexp(static_cast<double>(((a << 32) | b) >> 11), -53) + std::ldexp(1.0, -54);
    const double got = rng.uniform();
    EXPECT_EQ(got, expect);
    EXPECT_GT(got, 0.0);
    EXPECT_LT(got, 1.0);
  }
}

TEST(Philox, GaussianIsBoxMullerPair) {
  Philox4x32 u(7);
  Philox4x32 g(7);
  for (int i = 0; i < 5; ++i) {
    const double u1 = u.uniform();
    const double u2 = u.uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double two_pi = 2.0 * std::acos(-1.0);
    EXPECT_NEAR(g.gaussian(), r * std::cos(two_pi * u2), 1e-15 * (1 + r));
    EXPECT_NEAR(g.gaussian(), r * std::sin(two_pi * u2), 1e-15 * (1 + r));
  }
}

TEST(Philox, GaussianMoments) {
  Philox4x32 rng(3);
  const int n = 200000;
  double s = 0, ss = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.gaussian();
    s += z;
    ss += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(ss / n, 1.0, 5.0 * std::sqrt(2.0 / n));
}

TEST(Philox, BelowStaysInRangeAndCoversIt) {
  Philox4x32 rng(11);
  int counts[7] = {};
  for (int i = 0; i < 7000; ++i) {
    const auto v = rng.below(7);
    ASSERT_LT(v, 7u);
    ++counts[v];
  }
  for (int c : counts) EXPECT_NEAR(c, 1000, 150);
}

TEST(Philox, SameSeedSameStream) {
  Philox4x32 a(99), b(99), c(100);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u32();
    EXPECT_EQ(x, b.next_u32());
    differs |= x != c.next_u32();
  }
  EXPECT_TRUE(differs);
}
