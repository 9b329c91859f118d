// Copyright 2026 The dipesim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "dipesim/rng.hpp"

namespace dipesim {
namespace {

using Block = std::array<std::uint32_t, 4>;

TEST(PhiloxTest, KnownAnswerZero) {
  const Block out = Rng::philox_block({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out, (Block{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
}

TEST(PhiloxTest, KnownAnswerOnes) {
  const Block out = Rng::philox_block({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                                      {0xffffffff, 0xffffffff});
  EXPECT_EQ(out, (Block{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
}

TEST(PhiloxTest, KnownAnswerPi) {
  const Block out = Rng::philox_block({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                                      {0xa4093822, 0x299f31d0});
  EXPECT_EQ(out, (Block{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(RngTest, CounterLayout) {
  // Block b of stream s is philox((b_lo, b_hi, s_lo, s_hi), seed).
  const std::uint64_t seed = 0x0123456789abcdefull, stream = 0xfedcba9876543210ull;
  Rng r(seed, stream);
  for (std::uint32_t b = 0; b < 3; ++b) {
    const Block want = Rng::philox_block(
        {b, 0, static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)},
        {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
    for (auto w : want) EXPECT_EQ(r.next_u32(), w);
  }
}

TEST(RngTest, U64IsLowWordFirst) {
  Rng a(5, 9), b(5, 9);
  const std::uint64_t lo = a.next_u32(), hi = a.next_u32();
  EXPECT_EQ(b.next_u64(), (hi << 32) | lo);
}

TEST(RngTest, UniformUsesTop53Bits) {
  Rng a(11, 2), b(11, 2);
  for (int i = 0; i < 100; ++i) {
    const double u = a.uniform();
    EXPECT_EQ(u, std::ldexp(static_cast<double>(b.next_u64() >> 11), -53));
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(RngTest, NormalIsBoxMullerCosineFirst) {
  Rng a(3, 4), b(3, 4);
  const double z0 = a.normal(), z1 = a.normal();
  const double u1 = 1.0 - b.uniform(), u2 = b.uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  EXPECT_DOUBLE_EQ(z0, r * std::cos(2 * M_PI * u2));
  EXPECT_DOUBLE_EQ(z1, r * std::sin(2 * M_PI * u2));
}

TEST(RngTest, Deterministic) {
  Rng a(42, stream_id(StreamTag::kAlice, 7)), b(42, stream_id(StreamTag::kAlice, 7));
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(RngTest, StreamsAndSeedsDiffer) {
  std::set<std::uint64_t> firsts;
  for (std::uint64_t s = 0; s < 8; ++s) {
    for (std::uint64_t st = 0; st < 8; ++st) firsts.insert(Rng(s, st).next_u64());
  }
  EXPECT_EQ(firsts.size(), 64u);
}

TEST(RngTest, StreamIdLayout) {
  EXPECT_EQ(stream_id(StreamTag::kSharedUnitary, 5), (std::uint64_t{1} << 56) | 5);
  EXPECT_EQ(stream_id(StreamTag::kTrial, 0), std::uint64_t{6} << 56);
  EXPECT_NE(stream_id(StreamTag::kAlice, 3), stream_id(StreamTag::kBob, 3));
}

TEST(RngTest, NormalMoments) {
  Rng r(7, 0);
  const int n = 200000;
  double s1 = 0, s2 = 0, s4 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s1 += z;
    s2 += z * z;
    s4 += z * z * z * z;
  }
  EXPECT_NEAR(s1 / n, 0.0, 5 * std::sqrt(1.0 / n));
  EXPECT_NEAR(s2 / n, 1.0, 5 * std::sqrt(2.0 / n));
  EXPECT_NEAR(s4 / n, 3.0, 5 * std::sqrt(96.0 / n));
}

TEST(RngTest, UniformBinsChiSquare) {
  Rng r(99, 1);
  const int bins = 16, n = 160000;
  std::vector<int> count(bins, 0);
  for (int i = 0; i < n; ++i) ++count[static_cast<int>(r.uniform() * bins)];
  double chi2 = 0;
  const double e = static_cast<double>(n) / bins;
  for (int c : count) chi2 += (c - e) * (c - e) / e;
  // 15 dof; P(chi2 > 37.7) ~ 1e-3.
  EXPECT_LT(chi2, 37.7);
}

}  // namespace
}  // namespace dipesim
