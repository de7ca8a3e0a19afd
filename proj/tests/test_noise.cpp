#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "erpmotion/error.hpp"
#include "erpmotion/geometry.hpp"
#include "erpmotion/noise.hpp"
#include "erpmotion/parallel.hpp"
#include "erpmotion/rng.hpp"
#include "support.hpp"

using namespace erpm;

namespace {

double correlation(std::span<const float> a, std::span<const float> b) {
  double ma = 0, mb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ma += a[k];
    mb += b[k];
  }
  ma /= a.size();
  mb /= b.size();
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    sab += (a[k] - ma) * (b[k] - mb);
    saa += (a[k] - ma) * (a[k] - ma);
    sbb += (b[k] - mb) * (b[k] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

FloatRaster roll(const FloatRaster& r, int s) { return roll_columns(r, s); }

}  // namespace

TEST(CounterRng, PureFunctionOfKeyAndCounter) {
  const CounterRng a(5), b(5), c(6);
  EXPECT_EQ(a.bits(17), b.bits(17));
  EXPECT_NE(a.bits(17), c.bits(17));
  for (std::uint64_t k = 0; k < 1000; ++k) {
    const double u = a.uniform(k);
    ASSERT_TRUE(u > 0.0 && u <= 1.0);
  }
  EXPECT_NE(derive_seed(1, "warp-fill"), derive_seed(1, "degrade"));
  EXPECT_NE(derive_seed(1, std::uint64_t{0}), derive_seed(1, std::uint64_t{1}));
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
}

TEST(SampleNoise, DeterministicPerSeed) {
  EXPECT_EQ(sample_noise(16, 32, 4, 9), sample_noise(16, 32, 4, 9));
  const NoiseGrid q = sample_noise(16, 32, 4, 9);
  for (auto c : q.counts) EXPECT_EQ(c, 1u);
}

TEST(SampleNoise, DifferentSeedsAreUncorrelated) {
  const NoiseGrid a = sample_noise(100, 1000, 1, 1);
  const NoiseGrid b = sample_noise(100, 1000, 1, 2);
  EXPECT_LT(std::abs(correlation(a.values.values(), b.values.values())), 0.02);
}

TEST(SampleNoise, StandardNormalMoments) {
  const NoiseGrid q = sample_noise(1000, 1000, 1, 3);
  double m = 0, v = 0;
  for (float x : q.values.values()) m += x;
  m /= q.values.size();
  for (float x : q.values.values()) v += (x - m) * (x - m);
  v /= q.values.size() - 1;
  EXPECT_NEAR(m, 0.0, 0.01);
  EXPECT_GE(v, 0.99);
  EXPECT_LE(v, 1.01);
}

TEST(SampleNoise, IndependentOfParallelism) {
  set_parallelism(1);
  const NoiseGrid a = sample_noise(64, 128, 4, 11);
  set_parallelism(4);
  const NoiseGrid b = sample_noise(64, 128, 4, 11);
  set_parallelism(1);
  EXPECT_EQ(a, b);
}

TEST(WarpNoise, ZeroFlowIsIdentity) {
  const NoiseGrid q = sample_noise(16, 32, 4, 1);
  const NoiseGrid out = warp_noise(q, FlowField(16, 32), 2);
  EXPECT_EQ(out.values, q.values);
  for (auto c : out.counts) EXPECT_EQ(c, 1u);
}

TEST(WarpNoise, IntegerFlowIsRoll) {
  const NoiseGrid q = sample_noise(16, 32, 4, 1);
  const NoiseGrid out = warp_noise(q, FlowField::uniform(16, 32, 10, 0), 2);
  EXPECT_EQ(out.values, roll(q.values, 10));
  const NoiseGrid back = warp_noise(out, FlowField::uniform(16, 32, -10, 0), 3);
  EXPECT_EQ(back.values, q.values);
}

TEST(WarpNoise, TwoSourceContraction) {
  NoiseGrid q{FloatRaster(2, 4, 1), std::vector<std::uint32_t>(8, 1)};
  q.values.at(0, 1) = 0.7f;
  q.values.at(0, 2) = -1.9f;
  FlowField f(2, 4);
  f.du(0, 2) = -1.0f;
  const NoiseGrid out = warp_noise(q, f, 0);
  EXPECT_EQ(out.count(0, 1), 2u);
  EXPECT_EQ(out.count(0, 2), 0u);
  EXPECT_FLOAT_EQ(out.values.at(0, 1), static_cast<float>((0.7f + -1.9f) / std::sqrt(2.0)));
}

TEST(WarpNoise, HolesGetFreshNoise) {
  const NoiseGrid q = sample_noise(8, 16, 2, 1);
  FlowField f(8, 16);
  for (int i = 0; i < 8; ++i) f.du(i, 3) = 1.0f;  // column 3 leaves, column 4 receives two
  const NoiseGrid a = warp_noise(q, f, 100);
  const NoiseGrid b = warp_noise(q, f, 101);
  for (int i = 0; i < 8; ++i) {
    EXPECT_EQ(a.count(i, 3), 0u);
    EXPECT_EQ(a.count(i, 4), 2u);
    EXPECT_NE(a.values.at(i, 3, 0), b.values.at(i, 3, 0));
    for (int j = 0; j < 16; ++j) {
      if (j != 3 && j != 4) {
        for (int c = 0; c < 2; ++c) EXPECT_EQ(a.values.at(i, j, c), q.values.at(i, j, c));
      }
    }
  }
}

TEST(WarpNoise, RoundsTiesToEven) {
  NoiseGrid q{FloatRaster(2, 8, 1), std::vector<std::uint32_t>(16, 1)};
  q.values.at(0, 0) = 1.0f;
  q.values.at(0, 4) = 2.0f;
  FlowField f(2, 8);
  f.du(0, 0) = 0.5f;  // 0.5 -> 0
  f.du(0, 4) = 1.5f;  // 5.5 -> 6
  const NoiseGrid out = warp_noise(q, f, 0);
  EXPECT_EQ(out.count(0, 0), 1u);
  EXPECT_EQ(out.values.at(0, 0), 1.0f);
  EXPECT_EQ(out.count(0, 4), 0u);
  EXPECT_EQ(out.count(0, 5), 1u);
  EXPECT_EQ(out.count(0, 6), 2u);
  EXPECT_FLOAT_EQ(out.values.at(0, 6), static_cast<float>(2.0 / std::sqrt(2.0)));
}

TEST(WarpNoise, SeamAndPoleTransport) {
  const int h = 16, w = 32;
  const NoiseGrid q = sample_noise(h, w, 1, 4);
  const NoiseGrid right = warp_noise(q, FlowField::uniform(h, w, 3, 0), 0);
  for (int i = 0; i < h; ++i) {
    for (int j = w - 3; j < w; ++j) EXPECT_EQ(right.values.at(i, j + 3 - w), q.values.at(i, j));
  }
  const NoiseGrid up = warp_noise(q, FlowField::uniform(h, w, 0, -2), 0);
  // Rows 0 and 1 move to rows -2, -1, which reflect to 2, 1 with a half turn.
  for (int j = 0; j < w; ++j) {
    const int jj = (j + w / 2) % w;
    // Row 1 receives source row 3 (3 - 2) plus source row 1 (-1 -> 1).
    EXPECT_EQ(up.count(1, jj), 2u);
    EXPECT_EQ(up.count(0, jj), 1u);  // source row 2 only
    EXPECT_EQ(up.values.at(0, jj), q.values.at(2, jj));
  }
  // A lone tagged pixel crossing the pole lands half a turn away.
  NoiseGrid tag{FloatRaster(h, w, 1), std::vector<std::uint32_t>(h * w, 1)};
  tag.values.at(0, 5) = 42.0f;
  const NoiseGrid moved = warp_noise(tag, FlowField::uniform(h, w, 0, -1), 0);
  EXPECT_FLOAT_EQ(moved.values.at(1, 5 + w / 2), 42.0f / std::sqrt(2.0f));
}

TEST(WarpNoise, ValidatesInputs) {
  const NoiseGrid q = sample_noise(8, 16, 1, 0);
  EXPECT_THROW(warp_noise(q, FlowField(8, 15), 0), ShapeError);
  FlowField bad(8, 16);
  bad.du(0, 0) = std::nanf("");
  EXPECT_THROW(warp_noise(q, bad, 0), DomainError);
}

TEST(WarpNoise, IndependentOfParallelism) {
  const NoiseGrid q = sample_noise(64, 128, 4, 5);
  const FlowField f = test::random_flow(64, 128, 3, 6.0f);
  set_parallelism(1);
  const NoiseGrid a = warp_noise(q, f, 9);
  set_parallelism(3);
  const NoiseGrid b = warp_noise(q, f, 9);
  set_parallelism(1);
  EXPECT_EQ(a, b);
}

TEST(WarpChain, EmptyAndShiftComposition) {
  const NoiseGrid q = sample_noise(8, 24, 2, 1);
  const auto empty = warp_chain(q, {}, 0);
  ASSERT_EQ(empty.size(), 1u);
  EXPECT_EQ(empty[0], q);
  const auto chain = warp_chain(q, {FlowField::uniform(8, 24, 2, 0), FlowField::uniform(8, 24, 5, 0),
                                    FlowField::uniform(8, 24, -1, 0)}, 4);
  ASSERT_EQ(chain.size(), 4u);
  EXPECT_EQ(chain.back().values, roll(q.values, 6));
  EXPECT_EQ(chain.back().values, warp_noise(q, FlowField::uniform(8, 24, 6, 0), 0).values);
}

TEST(WarpChain, ErrorNamesFrame) {
  const NoiseGrid q = sample_noise(8, 16, 1, 1);
  try {
    warp_chain(q, {FlowField(8, 16), FlowField(8, 15)}, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("frame 1"), std::string::npos);
  }
}

TEST(Degrade, Endpoints) {
  const NoiseGrid q = sample_noise(100, 1000, 1, 1);
  EXPECT_EQ(degrade(q, 0.0, 3), q);
  const NoiseGrid fresh = degrade(q, 1.0, 3);
  EXPECT_LT(std::abs(correlation(q.values.values(), fresh.values.values())), 0.02);
  const NoiseGrid half = degrade(q, 0.5, 3);
  EXPECT_NEAR(correlation(q.values.values(), half.values.values()), std::sqrt(0.5), 0.02);
  double v = 0;
  for (float x : half.values.values()) v += double(x) * x;
  EXPECT_NEAR(v / half.values.size(), 1.0, 0.02);
  EXPECT_THROW(degrade(q, 1.5, 0), DomainError);
  EXPECT_THROW(degrade(q, -0.1, 0), DomainError);
}

TEST(Roll, LatentExample) {
  EXPECT_EQ(longitude_shift(40.0, 90), 10);
  EXPECT_EQ(longitude_shift(-40.0, 90), -10);
  EXPECT_THROW(longitude_shift(41.0, 90), ConfigError);
  EXPECT_THROW(longitude_shift(40.0, 100), ConfigError);
}

TEST(Roll, NineRollsAreIdentityAndUnrollRestores) {
  FloatRaster g = sample_noise(12, 90, 16, 2).values;
  FloatRaster cur = g;
  long long acc = 0;
  for (int k = 0; k < 9; ++k) {
    RolledGrid r = roll_longitude(cur, 40.0);
    acc += r.shift;
    cur = std::move(r.grid);
    if (k == 3) {
      EXPECT_EQ(unroll(cur, acc), g);
    }
  }
  EXPECT_EQ(cur, g);
  EXPECT_EQ(unroll(cur, acc), g);
  EXPECT_EQ(roll_longitude(g, 40.0).grid, roll(g, 10));
}

TEST(NoiseIo, RoundTrip) {
  test::TempDir dir("noise");
  NoiseGrid q = sample_noise(8, 16, 4, 3);
  q.counts[5] = 0;
  q.counts[6] = 70000;
  write_noise(q, dir / "q.erpf");
  const NoiseGrid back = read_noise(dir / "q.erpf");
  EXPECT_EQ(back.values, q.values);
  EXPECT_EQ(back.counts[5], 0u);
  EXPECT_EQ(back.counts[6], 65535u);
  EXPECT_EQ(back.counts[0], 1u);
}
