#include <gtest/gtest.h>

#include <cmath>

#include "crispedge/elastic.hpp"
#include "crispedge/synthetic.hpp"

using namespace crispedge;

namespace {

DisplacementField translation(int w, int h, double dx, double dy) {
  DisplacementField f{Field(w, h, dx), Field(w, h, dy), std::hypot(dx, dy), 0.0, 0};
  return f;
}

BinaryEdgeMap vertical_line(int w, int h, int x) {
  BinaryEdgeMap m(w, h);
  for (int y = 0; y < h; ++y) m(x, y) = 1;
  return m;
}

}  // namespace

TEST(Field, ZeroAlphaIsZero) {
  const auto f = make_field(20, 10, 0.0, 4.0, 1);
  for (double v : f.dx.values()) EXPECT_EQ(v, 0.0);
  for (double v : f.dy.values()) EXPECT_EQ(v, 0.0);
}

TEST(Field, DeterministicInSeed) {
  const auto a = make_field(24, 24, 5.0, 4.0, 42);
  const auto b = make_field(24, 24, 5.0, 4.0, 42);
  const auto c = make_field(24, 24, 5.0, 4.0, 43);
  EXPECT_EQ(a.dx, b.dx);
  EXPECT_EQ(a.dy, b.dy);
  EXPECT_NE(a.dx, c.dx);
}

TEST(Field, PeakScalingHitsAlpha) {
  for (double alpha : {1.0, 4.0, 10.0, 40.0}) {
    const auto f = make_field(32, 24, alpha, 4.0, 7);
    double peak = 0.0;
    for (std::size_t i = 0; i < f.dx.size(); ++i) {
      ASSERT_TRUE(std::isfinite(f.dx[i]) && std::isfinite(f.dy[i]));
      peak = std::max(peak, std::hypot(f.dx[i], f.dy[i]));
    }
    EXPECT_NEAR(peak, alpha, 1e-6);
  }
}

TEST(Field, SimardScalingIsLinearInAlpha) {
  const auto a = make_field(32, 32, 10.0, 8.0, 3, FieldScaling::kSimard);
  const auto b = make_field(32, 32, 20.0, 8.0, 3, FieldScaling::kSimard);
  for (std::size_t i = 0; i < a.dx.size(); ++i) {
    EXPECT_DOUBLE_EQ(b.dx[i], 2.0 * a.dx[i]);
    EXPECT_DOUBLE_EQ(b.dy[i], 2.0 * a.dy[i]);
  }
}

TEST(Field, RejectsNegativeAlpha) { EXPECT_THROW((void)make_field(4, 4, -1.0, 4.0, 0), InvalidArgument); }

TEST(Warp, ZeroFieldIsIdentity) {
  const auto m = synthetic::clean_outline(synthetic::square_scene());
  EXPECT_EQ(apply_field(m, translation(64, 64, 0.0, 0.0)), m);
}

TEST(Warp, IntegerTranslationMovesContent) {
  BinaryEdgeMap m(10, 10);
  m(4, 5) = 1;
  const auto out = apply_field(m, translation(10, 10, 2.0, 0.0));
  EXPECT_EQ(count_nonzero(out), 1u);
  EXPECT_EQ(out(6, 5), 1);
}

TEST(Warp, EmptyStaysEmptyAndOutOfRangeIsFalse) {
  EXPECT_EQ(count_nonzero(apply_field(BinaryEdgeMap(8, 8), translation(8, 8, 1.5, -2.0))), 0u);
  BinaryEdgeMap full(6, 6);
  for (auto& v : full.values()) v = 1;
  const auto out = apply_field(full, translation(6, 6, 2.0, 0.0));
  for (int y = 0; y < 6; ++y) {
    EXPECT_EQ(out(0, y), 0);
    EXPECT_EQ(out(1, y), 0);
    EXPECT_EQ(out(2, y), 1);
  }
  EXPECT_THROW((void)apply_field(BinaryEdgeMap(5, 5), translation(6, 6, 0, 0)), ShapeMismatch);
}

TEST(Annotators, SingleAnnotatorIsOneWarp) {
  const auto m = synthetic::clean_outline(synthetic::square_scene());
  const EdgeMap y = simulate_annotators(m, 4.0, 1, 11);
  EXPECT_EQ(y, to_edge_map(apply_field(m, make_field(64, 64, 4.0, 4.0, 11))));
}

TEST(Annotators, MeanOfIndependentWarps) {
  const auto m = synthetic::clean_outline(synthetic::square_scene());
  const EdgeMap y = simulate_annotators(m, 6.0, 3, 100, 8.0, FieldScaling::kSimard);
  EdgeMap ref(64, 64);
  for (int k = 0; k < 3; ++k) {
    const auto w = apply_field(m, make_field(64, 64, 6.0, 8.0, 100 + static_cast<std::uint64_t>(k), FieldScaling::kSimard));
    for (std::size_t i = 0; i < ref.size(); ++i) ref[i] += w[i] / 3.0;
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    EXPECT_NEAR(y[i], ref[i], 1e-15);
    const double k = y[i] * 3.0;
    EXPECT_NEAR(k, std::round(k), 1e-12);
  }
}

TEST(Annotators, OppositeTranslationsAverageToHalf) {
  const auto m = vertical_line(12, 6, 5);
  const auto a = apply_field(m, translation(12, 6, 1.0, 0.0));
  const auto b = apply_field(m, translation(12, 6, -1.0, 0.0));
  EdgeMap avg(12, 6);
  for (std::size_t i = 0; i < avg.size(); ++i) avg[i] = (a[i] + b[i]) / 2.0;
  for (int y = 0; y < 6; ++y) {
    for (int x = 0; x < 12; ++x) EXPECT_EQ(avg(x, y), (x == 4 || x == 6) ? 0.5 : 0.0);
  }
}

TEST(Annotators, ZeroAlphaReturnsOriginal) {
  const auto m = synthetic::clean_outline(synthetic::square_scene());
  EXPECT_EQ(simulate_annotators(m, 0.0, 5, 1), to_edge_map(m));
  EXPECT_THROW((void)simulate_annotators(m, 1.0, 0, 1), InvalidArgument);
}

TEST(Annotators, MassRoughlyConservedForModerateAlpha) {
  const auto m = synthetic::clean_outline(synthetic::square_scene(96, 48));
  for (double alpha : {2.0, 5.0, 10.0}) {
    double mean = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
      const auto w = apply_field(m, make_field(96, 96, alpha, 4.0, s));
      mean += static_cast<double>(count_nonzero(w)) / static_cast<double>(count_nonzero(m)) / 20.0;
    }
    EXPECT_NEAR(mean, 1.0, 0.10) << "alpha " << alpha;
  }
}
